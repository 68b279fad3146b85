// Binary feature-matrix container and its streaming row reader, shared by the
// feature extractors (writers) and the SVM trainer (out-of-core epochs).
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpix/svm.hpp"

namespace quadpix {

// Container layout: 8-byte magic, u32 version, u32 layout tag, u64 rows,
// u64 cols, then rows·cols little-endian float64 values, row-major.
namespace feature_store {

inline constexpr char kMagic[8] = {'Q', 'P', 'X', 'F', 'E', 'A', 'T', 0};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kLayoutRowMajor = 0;
inline constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 8;

}  // namespace feature_store

class FeatureFileWriter {
 public:
  FeatureFileWriter(const std::string& path, std::uint64_t cols,
                    std::uint32_t layout_tag = feature_store::kLayoutRowMajor)
      : path_(path), out_(path, std::ios::binary), cols_(cols), layout_(layout_tag) {
    if (!out_) throw std::runtime_error("FeatureFileWriter: cannot open " + path);
    write_header(0);
  }

  void append_row(const double* row) {
    out_.write(reinterpret_cast<const char*>(row),
               static_cast<std::streamsize>(cols_ * sizeof(double)));
    if (!out_) throw std::runtime_error("FeatureFileWriter: write failed for " + path_);
    ++rows_;
  }

  void append_row(const Eigen::VectorXd& row) {
    if (static_cast<std::uint64_t>(row.size()) != cols_)
      throw std::invalid_argument("FeatureFileWriter: row length mismatch");
    append_row(row.data());
  }

  /// Rewrites the header with the final row count and closes the file.
  void finish() {
    out_.seekp(0);
    write_header(rows_);
    out_.close();
    if (!out_) throw std::runtime_error("FeatureFileWriter: finalize failed for " + path_);
  }

  std::uint64_t rows() const { return rows_; }

 private:
  void write_header(std::uint64_t rows) {
    out_.write(feature_store::kMagic, 8);
    out_.write(reinterpret_cast<const char*>(&feature_store::kVersion), 4);
    out_.write(reinterpret_cast<const char*>(&layout_), 4);
    out_.write(reinterpret_cast<const char*>(&rows), 8);
    out_.write(reinterpret_cast<const char*>(&cols_), 8);
  }

  std::string path_;
  std::ofstream out_;
  std::uint64_t cols_ = 0;
  std::uint32_t layout_ = 0;
  std::uint64_t rows_ = 0;
};

inline void write_feature_file(const RowMatrixXd& features, const std::string& path) {
  FeatureFileWriter w(path, static_cast<std::uint64_t>(features.cols()));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    w.append_row(features.data() + i * features.cols());
  w.finish();
}

/// Streaming random-access reader over the container; one row buffered at a
/// time, so epoch streaming never holds the matrix in memory.
class FeatureFileSource final : public RowSource {
 public:
  explicit FeatureFileSource(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("FeatureFileSource: cannot open " + path);
    char magic[8];
    in_.read(magic, 8);
    if (!in_ || std::memcmp(magic, feature_store::kMagic, 8) != 0)
      throw std::runtime_error("FeatureFileSource: bad magic in " + path);
    std::uint32_t version = 0, layout = 0;
    in_.read(reinterpret_cast<char*>(&version), 4);
    in_.read(reinterpret_cast<char*>(&layout), 4);
    if (version != feature_store::kVersion)
      throw std::runtime_error("FeatureFileSource: unsupported version in " + path);
    if (layout != feature_store::kLayoutRowMajor)
      throw std::runtime_error("FeatureFileSource: unsupported layout tag in " + path);
    std::uint64_t rows = 0, cols = 0;
    in_.read(reinterpret_cast<char*>(&rows), 8);
    in_.read(reinterpret_cast<char*>(&cols), 8);
    if (!in_) throw std::runtime_error("FeatureFileSource: truncated header in " + path);
    rows_ = static_cast<Eigen::Index>(rows);
    cols_ = static_cast<Eigen::Index>(cols);
    buffer_.resize(static_cast<std::size_t>(cols_));
  }

  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }

  const double* row(Eigen::Index i) override {
    if (i < 0 || i >= rows_) throw std::out_of_range("FeatureFileSource: row out of range");
    const std::uint64_t offset =
        feature_store::kHeaderBytes +
        static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cols_) * sizeof(double);
    in_.seekg(static_cast<std::streamoff>(offset));
    in_.read(reinterpret_cast<char*>(buffer_.data()),
             static_cast<std::streamsize>(buffer_.size() * sizeof(double)));
    if (!in_) throw std::runtime_error("FeatureFileSource: truncated row read");
    return buffer_.data();
  }

  /// Load the whole container (for callers whose memory budget allows it).
  RowMatrixXd load_all() {
    RowMatrixXd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      std::memcpy(m.data() + i * cols_, row(i), static_cast<std::size_t>(cols_) * sizeof(double));
    return m;
  }

 private:
  mutable std::ifstream in_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<double> buffer_;
};

}  // namespace quadpix

// Experiment runners: natural-vs-noise discrimination, the alignment /
// training-size sweep, and the desk-scale detection-style run, plus the
// feature-extraction dispatch and the assertion sets each run must satisfy.
#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "quadpix/experiment_config.hpp"
#include "quadpix/filter_bank.hpp"
#include "quadpix/hog.hpp"
#include "quadpix/image.hpp"
#include "quadpix/procedural.hpp"
#include "quadpix/projection.hpp"
#include "quadpix/quad.hpp"
#include "quadpix/svm.hpp"
#include "quadpix/synth.hpp"

namespace quadpix {

// Assertion thresholds, pinned once for the acceptance suite and the CLI.
inline constexpr double kNoiseQuadMinAccuracy = 0.90;
inline constexpr double kNoisePixelMaxAccuracy = 0.60;
inline constexpr double kShuffledControlLow = 0.45;
inline constexpr double kShuffledControlHigh = 0.55;
inline constexpr double kSweepQuadStepSlack = 0.02;
inline constexpr double kSweepHogSaturationBand = 0.05;
inline constexpr double kSweepRmsZeroSlack = 0.01;

// internal training budgets (tol still applies)
inline constexpr int kNoiseMaxEpochs = 200;
inline constexpr int kSweepMaxEpochs = 40;
inline constexpr int kDetectMaxEpochs = 80;

// sweep layout
inline constexpr int kSweepTrainIdentitiesPerClass = 5;
inline constexpr int kSweepTestIdentitiesPerClass = 3;
inline constexpr int kSweepTestWarpsPerIdentity = 25;

// ---------------------------------------------------------------------------
// feature extraction dispatch

struct FeatureSpec {
  std::string kind = "quad";
  int window_radius = 1;
  int hog_orientations = 18;
  int hog_cell = 4;
  int bank_orientations = 18;
  int bank_scales = 4;
  int bank_base_support = 7;
  int pool_side = 4;
};

/// Window radius policy for quad features: spatial support equal to the RMS
/// point error, rounded up to the next odd side, minimum radius 1.
inline int radius_for_rms(double rms) {
  int side = static_cast<int>(std::ceil(rms));
  if (side < 1) side = 1;
  if (side % 2 == 0) side += 1;
  return std::max(1, (side - 1) / 2);
}

class Extractor {
 public:
  Extractor(const FeatureSpec& spec, int width, int height)
      : spec_(spec), width_(width), height_(height) {
    const int d = width * height;
    if (spec.kind == "pixels") {
      dim_ = d;
    } else if (spec.kind == "quad") {
      window_ = LocalWindow::square(spec.window_radius);
      dim_ = quad_dimension(width, height, window_);
    } else if (spec.kind == "hog_baseline") {
      if (width % spec.hog_cell != 0 || height % spec.hog_cell != 0)
        throw std::invalid_argument("Extractor: image not divisible by hog cell");
      dim_ = static_cast<long long>(width / spec.hog_cell) * (height / spec.hog_cell) * 4 *
             spec.hog_orientations;
    } else if (spec.kind == "hog_conv" || spec.kind == "hog_reform") {
      // drop scales whose support exceeds the image
      int scales = 0;
      for (int s = 0; s < spec.bank_scales; ++s) {
        const int support = ((spec.bank_base_support - 1) << s) + 1;
        if (support <= std::min(width, height)) scales = s + 1;
      }
      if (scales == 0) throw std::invalid_argument("Extractor: image too small for filter bank");
      bank_ = make_gabor_bank(spec.bank_orientations, scales, spec.bank_base_support);
      pooling_ = PoolingSpec{make_box_blur(spec.pool_side), spec.pool_side};
      const long long cells = static_cast<long long>(pooled_extent(height, spec.pool_side)) *
                              pooled_extent(width, spec.pool_side);
      dim_ = bank_.size() * cells;
      if (spec.kind == "hog_reform")
        projection_ = std::make_shared<ProjectionMatrix>(
            build_projection(bank_, pooling_, width, height));
    } else {
      throw std::invalid_argument("Extractor: unknown feature kind '" + spec.kind + "'");
    }
  }

  long long dim() const { return dim_; }
  int width() const { return width_; }
  int height() const { return height_; }

  void extract(const Image& img, double* out) const {
    if (img.width != width_ || img.height != height_)
      throw std::invalid_argument("Extractor: image dimension mismatch");
    if (spec_.kind == "pixels") {
      std::copy(img.data.begin(), img.data.end(), out);
    } else if (spec_.kind == "quad") {
      local_quadratic_compact_into(img, window_, out);
    } else if (spec_.kind == "hog_baseline") {
      const FeatureVector v = hog_baseline(img, spec_.hog_orientations, spec_.hog_cell);
      std::copy(v.data(), v.data() + v.size(), out);
    } else if (spec_.kind == "hog_conv") {
      const HogDescriptor d = hog_conv(img, bank_, pooling_);
      std::copy(d.values.data(), d.values.data() + d.values.size(), out);
    } else {  // hog_reform
      const HogDescriptor d = apply_projection(*projection_, img);
      std::copy(d.values.data(), d.values.data() + d.values.size(), out);
    }
  }

  Eigen::VectorXd extract(const Image& img) const {
    Eigen::VectorXd v(dim_);
    extract(img, v.data());
    return v;
  }

 private:
  FeatureSpec spec_;
  int width_, height_;
  long long dim_ = 0;
  LocalWindow window_;
  FilterBank bank_;
  PoolingSpec pooling_;
  std::shared_ptr<ProjectionMatrix> projection_;
};

/// RowSource that materializes feature rows on demand from stored images;
/// used when the dense feature matrix would blow the memory budget.
class ImageFeatureSource final : public RowSource {
 public:
  ImageFeatureSource(const std::vector<Image>& images, const Extractor& ex)
      : images_(&images), ex_(&ex), buffer_(static_cast<std::size_t>(ex.dim())) {}
  Eigen::Index rows() const override { return static_cast<Eigen::Index>(images_->size()); }
  Eigen::Index cols() const override { return static_cast<Eigen::Index>(ex_->dim()); }
  const double* row(Eigen::Index i) override {
    ex_->extract((*images_)[static_cast<std::size_t>(i)], buffer_.data());
    return buffer_.data();
  }

 private:
  const std::vector<Image>* images_;
  const Extractor* ex_;
  std::vector<double> buffer_;
};

// ---------------------------------------------------------------------------
// one-vs-rest wrapper (plumbing for the multiclass sweep)

struct OvrModel {
  std::vector<Eigen::VectorXd> w;  // per class, bias-augmented
  double objective_sum = 0.0;
  int epochs_max = 0;
};

inline OvrModel train_one_vs_rest(RowSource& rows, const std::vector<int>& labels,
                                  int classes, const DcdOptions& base_opt) {
  if (static_cast<Eigen::Index>(labels.size()) != rows.rows())
    throw std::invalid_argument("train_one_vs_rest: label count mismatch");
  OvrModel model;
  model.w.reserve(static_cast<std::size_t>(classes));
  Eigen::VectorXi binary(rows.rows());
  for (int c = 0; c < classes; ++c) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
      binary[i] = labels[static_cast<std::size_t>(i)] == c ? 1 : -1;
    DcdOptions opt = base_opt;
    opt.seed = mix_seed(base_opt.seed, 0x0FA, static_cast<std::uint64_t>(c));
    const DcdResult res = dcd_solve(rows, binary, opt);
    model.objective_sum += res.model.objective;
    model.epochs_max = std::max(model.epochs_max, res.model.iterations_run);
    model.w.push_back(res.model.w);
  }
  return model;
}

inline int ovr_argmax(const OvrModel& model, const double* row, Eigen::Index d) {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.w.size(); ++c) {
    const Eigen::VectorXd& w = model.w[c];
    double v = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) v += w[j] * row[j];
    if (w.size() == d + 1) v += w[d];
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(c);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// PR curves and equal error rate

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // ordered by decreasing threshold
  double eer = 0.0;
};

inline PrCurve pr_curve(const Eigen::VectorXd& decisions, const Eigen::VectorXi& labels) {
  if (decisions.size() != labels.size()) throw std::invalid_argument("pr_curve: size mismatch");
  const Eigen::Index n = decisions.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return decisions[a] > decisions[b]; });
  double n_pos = 0, n_neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) (labels[i] > 0 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("pr_curve: need both classes");

  PrCurve curve;
  double tp = 0, fp = 0;
  // threshold above the top score: nothing predicted positive
  curve.points.push_back({decisions[order[0]] + 1.0, 1.0, 0.0, 0.0, 1.0});
  for (Eigen::Index k = 0; k < n; ++k) {
    if (labels[order[static_cast<std::size_t>(k)]] > 0)
      tp += 1.0;
    else
      fp += 1.0;
    // emit a point only between distinct scores
    if (k + 1 < n && decisions[order[static_cast<std::size_t>(k)]] ==
                         decisions[order[static_cast<std::size_t>(k + 1)]])
      continue;
    PrPoint p;
    p.threshold = decisions[order[static_cast<std::size_t>(k)]];
    p.precision = tp / (tp + fp);
    p.recall = tp / n_pos;
    p.fpr = fp / n_neg;
    p.fnr = 1.0 - p.recall;
    curve.points.push_back(p);
  }

  // equal error rate by linear interpolation between adjacent sweep points
  curve.eer = 1.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const PrPoint& a = curve.points[k - 1];
    const PrPoint& b = curve.points[k];
    const double da = a.fnr - a.fpr;
    const double db = b.fnr - b.fpr;
    if (da >= 0.0 && db <= 0.0) {
      const double t = (da - db) > 0.0 ? da / (da - db) : 0.0;
      const double fpr_x = a.fpr + t * (b.fpr - a.fpr);
      const double fnr_x = a.fnr + t * (b.fnr - a.fnr);
      curve.eer = 0.5 * (fpr_x + fnr_x);
      break;
    }
  }
  return curve;
}

inline void write_pr_file(const std::vector<std::pair<std::string, PrCurve>>& curves,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_pr_file: cannot open " + path);
  out << "feature,threshold,precision,recall,fpr,fnr\n";
  for (const auto& [feature, curve] : curves) {
    for (const PrPoint& p : curve.points)
      out << detail::csv_escape(feature) << "," << detail::format_double(p.threshold) << ","
          << detail::format_double(p.precision) << "," << detail::format_double(p.recall)
          << "," << detail::format_double(p.fpr) << "," << detail::format_double(p.fnr)
          << "\n";
    out << detail::csv_escape(feature) << ",eer," << detail::format_double(curve.eer)
        << ",,,\n";
  }
}

// ---------------------------------------------------------------------------
// shared runner plumbing

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;
};

inline bool all_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace detail {

// seed tags so no two generation roles can collide
enum SeedTag : std::uint64_t {
  kTagNoiseTrain = 0x101,
  kTagNoiseTest = 0x102,
  kTagNoiseShuffle = 0x103,
  kTagSweepTrainIdentity = 0x201,
  kTagSweepTestIdentity = 0x202,
  kTagSweepTrainWarp = 0x203,
  kTagSweepTestWarp = 0x204,
  kTagDetectTrainPos = 0x301,
  kTagDetectTestPos = 0x302,
  kTagDetectTrainNeg = 0x303,
  kTagDetectTestNeg = 0x304,
  kTagDetectTrainWarp = 0x305,
  kTagDetectTestWarp = 0x306,
};

inline std::uint64_t rms_key(double rms) { return std::bit_cast<std::uint64_t>(rms); }

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void ensure_output_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

// Extract every image into a dense matrix when the budget allows; the caller
// falls back to an on-demand source otherwise.
inline bool fits_in_memory(std::size_t rows, long long dim, std::uint64_t budget) {
  return static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(dim) * sizeof(double) <=
         budget;
}

inline RowMatrixXd extract_matrix(const std::vector<Image>& images, const Extractor& ex) {
  RowMatrixXd m(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(ex.dim()));
  for (std::size_t i = 0; i < images.size(); ++i)
    ex.extract(images[i], m.data() + static_cast<Eigen::Index>(i) * m.cols());
  return m;
}

template <typename Fn>
inline void run_cells(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, count);
  pool.reserve(static_cast<std::size_t>(n_threads));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// natural-vs-noise experiment

struct NoiseOutcome {
  double quad_accuracy = 0.0;
  double pixel_accuracy = 0.0;
  double shuffled_accuracy = 0.0;
  std::vector<ResultRow> rows;
};

/// Balanced structured-vs-pink-noise discrimination. The structured class
/// comes from corpus_dir patches when configured, procedural renders
/// otherwise; both classes share the 1/f amplitude profile, so only phase
/// structure separates them. Trains a pixel machine, a quad machine, and a
/// label-shuffled quad control on identical splits.
inline NoiseOutcome run_noise_vs_structured(const ExperimentConfig& cfg) {
  if (cfg.experiment != "noise_vs_structured")
    throw std::invalid_argument("run_noise_vs_structured: wrong experiment in config");
  cfg.validate();
  detail::ensure_output_dir(cfg.output_dir);
  const int patch = cfg.patch_size > 0 ? cfg.patch_size : 16;
  const int n_train = cfg.train_sizes.back();
  const int n_test = n_train;
  if (n_train % 2 != 0) throw std::invalid_argument("noise: train size must be even");

  auto structured_at = [&](std::uint64_t tag, int index) {
    return sample_structured(patch, mix_seed(cfg.seed, tag, 0, static_cast<std::uint64_t>(index)));
  };
  std::vector<Image> corpus_train, corpus_test;
  if (!cfg.corpus_dir.empty()) {
    corpus_train = ingest_patches(cfg.corpus_dir, patch, n_train / 2,
                                  mix_seed(cfg.seed, detail::kTagNoiseTrain, 9));
    corpus_test = ingest_patches(cfg.corpus_dir, patch, n_test / 2,
                                 mix_seed(cfg.seed, detail::kTagNoiseTest, 9));
  }

  auto build_split = [&](std::uint64_t tag, int count, const std::vector<Image>& corpus,
                         std::vector<Image>& images, Eigen::VectorXi& labels,
                         std::set<std::uint64_t>& seeds) {
    images.clear();
    labels.resize(count);
    for (int i = 0; i < count / 2; ++i) {
      if (!corpus.empty())
        images.push_back(corpus[static_cast<std::size_t>(i)]);
      else
        images.push_back(structured_at(tag, i));
      seeds.insert(mix_seed(cfg.seed, tag, 0, static_cast<std::uint64_t>(i)));
      labels[static_cast<int>(images.size()) - 1] = 1;
    }
    for (int i = 0; i < count / 2; ++i) {
      const std::uint64_t s = mix_seed(cfg.seed, tag, 1, static_cast<std::uint64_t>(i));
      images.push_back(sample_pink_noise(patch, s));
      seeds.insert(s);
      labels[static_cast<int>(images.size()) - 1] = -1;
    }
  };

  std::vector<Image> train_images, test_images;
  Eigen::VectorXi train_labels, test_labels;
  std::set<std::uint64_t> train_seeds, test_seeds;
  build_split(detail::kTagNoiseTrain, n_train, corpus_train, train_images, train_labels,
              train_seeds);
  build_split(detail::kTagNoiseTest, n_test, corpus_test, test_images, test_labels, test_seeds);
  for (std::uint64_t s : test_seeds)
    if (train_seeds.count(s))
      throw std::logic_error("noise: split hygiene violated (shared generator seed)");

  NoiseOutcome outcome;
  const DcdOptions opt{cfg.C, cfg.tol, kNoiseMaxEpochs, mix_seed(cfg.seed, 0xDC), true};

  auto train_eval = [&](const std::string& feature_kind, const Eigen::VectorXi& labels_in,
                        const std::string& row_tag) {
    FeatureSpec fs;
    fs.kind = feature_kind;
    fs.window_radius = cfg.window_radius;
    const Extractor ex(fs, patch, patch);
    const auto t0 = std::chrono::steady_clock::now();
    const RowMatrixXd train_feats = detail::extract_matrix(train_images, ex);
    Dataset ds{train_feats, labels_in, {}};
    DenseRowSource src(ds.features);
    ds.validate();
    const DcdResult res = dcd_solve(src, ds.labels, opt);
    const RowMatrixXd test_feats = detail::extract_matrix(test_images, ex);
    const double acc = accuracy(predict(res.model, test_feats), test_labels);
    ResultRow row;
    row.experiment = cfg.experiment;
    row.feature = row_tag;
    row.train_size = n_train;
    row.rms_level = 0.0;
    row.test_accuracy = acc;
    row.train_seconds = detail::seconds_since(t0);
    row.feature_dim = ex.dim();
    row.objective = res.model.objective;
    outcome.rows.push_back(row);
    return acc;
  };

  outcome.pixel_accuracy = train_eval("pixels", train_labels, "pixels");
  outcome.quad_accuracy = train_eval("quad", train_labels, "quad");

  // label-shuffled control
  Eigen::VectorXi shuffled = train_labels;
  RandomStream rng(mix_seed(cfg.seed, detail::kTagNoiseShuffle));
  for (int i = n_train - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(shuffled[i], shuffled[j]);
  }
  outcome.shuffled_accuracy = train_eval("quad", shuffled, "quad_label_shuffled");

  if (!cfg.output_dir.empty())
    emit_csv(outcome.rows, cfg.output_dir + "/noise_results.csv");
  return outcome;
}

inline std::vector<CheckResult> evaluate_noise(const NoiseOutcome& o) {
  std::vector<CheckResult> checks;
  checks.push_back({"quad accuracy >= 0.90", o.quad_accuracy >= kNoiseQuadMinAccuracy,
                    "quad accuracy = " + detail::format_double(o.quad_accuracy)});
  checks.push_back({"pixel accuracy <= 0.60", o.pixel_accuracy <= kNoisePixelMaxAccuracy,
                    "pixel accuracy = " + detail::format_double(o.pixel_accuracy)});
  checks.push_back({"shuffled-label control in [0.45, 0.55]",
                    o.shuffled_accuracy >= kShuffledControlLow &&
                        o.shuffled_accuracy <= kShuffledControlHigh,
                    "control accuracy = " + detail::format_double(o.shuffled_accuracy)});
  return checks;
}

// ---------------------------------------------------------------------------
// alignment sweep

struct SweepOutcome {
  std::vector<ResultRow> rows;
};

/// Grid over (rms level, training size) for one feature kind. Training sets
/// are similarity-warped copies of per-class identity renders; test examples
/// always come from held-out identities warped at the same rms level.
inline SweepOutcome run_alignment_sweep(const ExperimentConfig& cfg) {
  if (cfg.experiment != "alignment_sweep")
    throw std::invalid_argument("run_alignment_sweep: wrong experiment in config");
  cfg.validate();
  detail::ensure_output_dir(cfg.output_dir);
  const int patch = cfg.patch_size > 0 ? cfg.patch_size : 32;
  const int classes = kSweepClassCount;
  const int train_ids = kSweepTrainIdentitiesPerClass;
  const int test_ids = kSweepTestIdentitiesPerClass;
  const int base_count = classes * train_ids;

  for (int size : cfg.train_sizes)
    if (size % base_count != 0)
      throw std::invalid_argument(
          "sweep: train size " + std::to_string(size) + " is not a multiple of the base set (" +
          std::to_string(base_count) + " identities)");

  // base identities
  std::vector<Image> train_base(static_cast<std::size_t>(base_count));
  std::vector<int> train_base_label(static_cast<std::size_t>(base_count));
  for (int c = 0; c < classes; ++c)
    for (int id = 0; id < train_ids; ++id) {
      const int k = c * train_ids + id;
      train_base[static_cast<std::size_t>(k)] = render_sweep_identity(
          c, patch, mix_seed(cfg.seed, detail::kTagSweepTrainIdentity,
                             static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(id)));
      train_base_label[static_cast<std::size_t>(k)] = c;
    }
  std::vector<Image> test_base(static_cast<std::size_t>(classes * test_ids));
  std::vector<int> test_base_label(static_cast<std::size_t>(classes * test_ids));
  for (int c = 0; c < classes; ++c)
    for (int id = 0; id < test_ids; ++id) {
      const int k = c * test_ids + id;
      test_base[static_cast<std::size_t>(k)] = render_sweep_identity(
          c, patch, mix_seed(cfg.seed, detail::kTagSweepTestIdentity,
                             static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(id)));
      test_base_label[static_cast<std::size_t>(k)] = c;
    }

  struct Cell {
    double rms;
    int size;
  };
  std::vector<Cell> cells;
  for (double rms : cfg.rms_levels)
    for (int size : cfg.train_sizes) cells.push_back({rms, size});
  std::vector<ResultRow> rows(cells.size());

  auto run_cell = [&](int cell_idx) {
    const Cell cell = cells[static_cast<std::size_t>(cell_idx)];
    const auto t0 = std::chrono::steady_clock::now();
    const int per_identity = cell.size / base_count;

    WarpSpec train_spec;
    train_spec.target_rms = cell.rms;
    train_spec.reference_points = corner_reference_points(patch, patch);
    train_spec.seed = mix_seed(cfg.seed, detail::kTagSweepTrainWarp, detail::rms_key(cell.rms));
    const std::vector<SynthesizedExample> train_set =
        synthesize_set(train_base, per_identity, train_spec);

    std::vector<Image> train_images;
    std::vector<int> train_labels;
    train_images.reserve(train_set.size());
    for (const auto& ex : train_set) {
      train_images.push_back(ex.image);
      train_labels.push_back(train_base_label[static_cast<std::size_t>(ex.base_index)]);
    }

    WarpSpec test_spec = train_spec;
    test_spec.seed = mix_seed(cfg.seed, detail::kTagSweepTestWarp, detail::rms_key(cell.rms));
    const std::vector<SynthesizedExample> test_set =
        synthesize_set(test_base, kSweepTestWarpsPerIdentity, test_spec);

    FeatureSpec fs;
    fs.kind = cfg.feature;
    fs.window_radius = cfg.feature == "quad" ? radius_for_rms(cell.rms) : cfg.window_radius;
    const Extractor ex(fs, patch, patch);

    DcdOptions opt;
    opt.C = cfg.C;
    opt.tol = cfg.tol;
    opt.max_epochs = kSweepMaxEpochs;
    opt.seed = mix_seed(cfg.seed, 0x5EED, detail::rms_key(cell.rms),
                        static_cast<std::uint64_t>(cell.size));

    OvrModel model;
    if (detail::fits_in_memory(train_images.size(), ex.dim(), cfg.memory_budget)) {
      const RowMatrixXd feats = detail::extract_matrix(train_images, ex);
      DenseRowSource src(feats);
      model = train_one_vs_rest(src, train_labels, classes, opt);
    } else {
      ImageFeatureSource src(train_images, ex);
      model = train_one_vs_rest(src, train_labels, classes, opt);
    }

    std::vector<double> row_buf(static_cast<std::size_t>(ex.dim()));
    int hits = 0;
    for (const auto& t : test_set) {
      ex.extract(t.image, row_buf.data());
      const int pred = ovr_argmax(model, row_buf.data(), static_cast<Eigen::Index>(ex.dim()));
      if (pred == test_base_label[static_cast<std::size_t>(t.base_index)]) ++hits;
    }

    ResultRow row;
    row.experiment = cfg.experiment;
    row.feature = cfg.feature;
    row.train_size = cell.size;
    row.rms_level = cell.rms;
    row.test_accuracy = static_cast<double>(hits) / static_cast<double>(test_set.size());
    row.train_seconds = detail::seconds_since(t0);
    row.feature_dim = ex.dim();
    row.objective = model.objective_sum;
    rows[static_cast<std::size_t>(cell_idx)] = row;
  };

  detail::run_cells(static_cast<int>(cells.size()), resolve_workers(cfg), run_cell);

  SweepOutcome outcome;
  outcome.rows = std::move(rows);
  if (!cfg.output_dir.empty())
    emit_csv(outcome.rows, cfg.output_dir + "/sweep_" + cfg.feature + ".csv");
  return outcome;
}

/// Trend assertions over sweep rows (any mix of features):
///  - quad: accuracy non-decreasing (within slack) across ascending train
///    sizes at every rms level, and rms=0 is the per-size maximum.
///  - hog features: accuracy change between the top two sizes stays inside
///    the saturation band.
inline std::vector<CheckResult> evaluate_sweep(const std::vector<ResultRow>& rows) {
  std::vector<CheckResult> checks;
  std::map<std::string, std::map<double, std::map<int, double>>> grid;  // feature→rms→size→acc
  for (const ResultRow& r : rows) grid[r.feature][r.rms_level][r.train_size] = r.test_accuracy;

  for (const auto& [feature, by_rms] : grid) {
    if (feature == "quad") {
      for (const auto& [rms, by_size] : by_rms) {
        double prev = -1.0;
        int prev_size = 0;
        for (const auto& [size, acc] : by_size) {
          if (prev >= 0.0) {
            const bool ok = acc >= prev - kSweepQuadStepSlack;
            checks.push_back({"quad monotone (rms " + detail::format_double(rms) + ", " +
                                  std::to_string(prev_size) + "->" + std::to_string(size) + ")",
                              ok,
                              "acc " + detail::format_double(prev) + " -> " +
                                  detail::format_double(acc)});
          }
          prev = acc;
          prev_size = size;
        }
      }
      // alignment only hurts: rms 0 is the maximum per size
      if (by_rms.count(0.0)) {
        const auto& at_zero = by_rms.at(0.0);
        for (const auto& [size, acc0] : at_zero) {
          double worst_gap = 0.0;
          for (const auto& [rms, by_size] : by_rms) {
            auto it = by_size.find(size);
            if (it != by_size.end()) worst_gap = std::max(worst_gap, it->second - acc0);
          }
          checks.push_back({"quad rms-0 max (size " + std::to_string(size) + ")",
                            worst_gap <= kSweepRmsZeroSlack,
                            "max over grid exceeds rms-0 accuracy by " +
                                detail::format_double(worst_gap)});
        }
      }
    } else if (feature.rfind("hog", 0) == 0) {
      for (const auto& [rms, by_size] : by_rms) {
        if (by_size.size() < 2) continue;
        auto it = by_size.rbegin();
        const double top = it->second;
        const int top_size = it->first;
        ++it;
        const double second = it->second;
        checks.push_back({feature + " saturation (rms " + detail::format_double(rms) + ")",
                          std::abs(top - second) <= kSweepHogSaturationBand,
                          "top sizes " + std::to_string(it->first) + "/" +
                              std::to_string(top_size) + " accuracies " +
                              detail::format_double(second) + "/" +
                              detail::format_double(top)});
      }
    }
  }
  return checks;
}

// ---------------------------------------------------------------------------
// detection-style run

struct DetectOutcome {
  std::vector<ResultRow> rows;
  std::map<std::string, double> eer;  // feature → EER
  std::vector<std::pair<std::string, PrCurve>> curves;
};

/// Desk-scale detection analog: textured-silhouette positives (20 warps per
/// base example) against background patches at a 1:2 ratio, trained on
/// pixels, hog_baseline and quad; emits PR sweeps and per-feature EER.
inline DetectOutcome run_detect_desk(const ExperimentConfig& cfg) {
  if (cfg.experiment != "detect_desk")
    throw std::invalid_argument("run_detect_desk: wrong experiment in config");
  cfg.validate();
  detail::ensure_output_dir(cfg.output_dir);
  const int patch = cfg.patch_size > 0 ? cfg.patch_size : 32;
  const double rms = cfg.rms_levels.front();
  const int warps_per_positive = 20;
  const int pos_base = std::max(1, cfg.train_sizes.front() / warps_per_positive);
  const int n_train_pos = pos_base * warps_per_positive;
  const int n_train_neg = 2 * n_train_pos;
  const int n_test_pos = 400;
  const int n_test_neg = 800;
  if (n_train_pos < 100 || n_train_neg < 100)
    throw std::invalid_argument("detect: class counts below minimum (100 per class)");

  std::vector<Image> pos_base_imgs(static_cast<std::size_t>(pos_base));
  for (int i = 0; i < pos_base; ++i)
    pos_base_imgs[static_cast<std::size_t>(i)] = render_detect_positive(
        patch, mix_seed(cfg.seed, detail::kTagDetectTrainPos, static_cast<std::uint64_t>(i)));

  WarpSpec warp;
  warp.target_rms = rms;
  warp.reference_points = corner_reference_points(patch, patch);
  warp.seed = mix_seed(cfg.seed, detail::kTagDetectTrainWarp);
  const std::vector<SynthesizedExample> pos_set =
      synthesize_set(pos_base_imgs, warps_per_positive, warp);

  std::vector<Image> train_images;
  train_images.reserve(static_cast<std::size_t>(n_train_pos + n_train_neg));
  Eigen::VectorXi train_labels(n_train_pos + n_train_neg);
  for (const auto& ex : pos_set) train_images.push_back(ex.image);
  for (int i = 0; i < n_train_pos; ++i) train_labels[i] = 1;
  for (int i = 0; i < n_train_neg; ++i) {
    train_images.push_back(render_detect_negative(
        patch, mix_seed(cfg.seed, detail::kTagDetectTrainNeg, static_cast<std::uint64_t>(i))));
    train_labels[n_train_pos + i] = -1;
  }

  std::vector<Image> test_images;
  test_images.reserve(static_cast<std::size_t>(n_test_pos + n_test_neg));
  Eigen::VectorXi test_labels(n_test_pos + n_test_neg);
  for (int i = 0; i < n_test_pos; ++i) {
    Image base = render_detect_positive(
        patch, mix_seed(cfg.seed, detail::kTagDetectTestPos, static_cast<std::uint64_t>(i)));
    WarpSpec tw = warp;
    tw.target_rms = rms;
    tw.seed = mix_seed(cfg.seed, detail::kTagDetectTestWarp, static_cast<std::uint64_t>(i));
    test_images.push_back(warp_image(base, sample_similarity_warp(tw)));
    test_labels[i] = 1;
  }
  for (int i = 0; i < n_test_neg; ++i) {
    test_images.push_back(render_detect_negative(
        patch, mix_seed(cfg.seed, detail::kTagDetectTestNeg, static_cast<std::uint64_t>(i))));
    test_labels[n_test_pos + i] = -1;
  }

  DetectOutcome outcome;
  const std::vector<std::string> features = {"pixels", "hog_baseline", "quad"};
  for (const std::string& kind : features) {
    FeatureSpec fs;
    fs.kind = kind;
    fs.window_radius = radius_for_rms(rms);
    const Extractor ex(fs, patch, patch);
    const auto t0 = std::chrono::steady_clock::now();
    DcdOptions opt;
    opt.C = cfg.C;
    opt.tol = cfg.tol;
    opt.max_epochs = kDetectMaxEpochs;
    opt.seed = mix_seed(cfg.seed, 0xDE7EC7);

    SvmModel model;
    double objective = 0.0;
    {
      const RowMatrixXd train_feats = detail::extract_matrix(train_images, ex);
      Dataset ds{train_feats, train_labels, {}};
      ds.validate();
      DenseRowSource src(ds.features);
      const DcdResult res = dcd_solve(src, ds.labels, opt);
      model = res.model;
      objective = res.model.objective;
    }
    const RowMatrixXd test_feats = detail::extract_matrix(test_images, ex);
    const Eigen::VectorXd decisions = predict(model, test_feats);
    PrCurve curve = pr_curve(decisions, test_labels);
    outcome.eer[kind] = curve.eer;

    ResultRow row;
    row.experiment = cfg.experiment;
    row.feature = kind;
    row.train_size = n_train_pos + n_train_neg;
    row.rms_level = rms;
    row.test_accuracy = accuracy(decisions, test_labels);
    row.train_seconds = detail::seconds_since(t0);
    row.feature_dim = ex.dim();
    row.objective = objective;
    outcome.rows.push_back(row);
    outcome.curves.emplace_back(kind, std::move(curve));
  }

  if (!cfg.output_dir.empty()) {
    emit_csv(outcome.rows, cfg.output_dir + "/detect_results.csv");
    write_pr_file(outcome.curves, cfg.output_dir + "/detect_pr.csv");
  }
  return outcome;
}

inline std::vector<CheckResult> evaluate_detect(const DetectOutcome& o) {
  std::vector<CheckResult> checks;
  const double hog = o.eer.at("hog_baseline");
  const double quad = o.eer.at("quad");
  const double pixels = o.eer.at("pixels");
  checks.push_back({"EER ordering hog <= quad", hog <= quad,
                    "hog EER " + detail::format_double(hog) + ", quad EER " +
                        detail::format_double(quad)});
  checks.push_back({"EER ordering quad <= pixels", quad <= pixels,
                    "quad EER " + detail::format_double(quad) + ", pixel EER " +
                        detail::format_double(pixels)});
  return checks;
}

}  // namespace quadpix

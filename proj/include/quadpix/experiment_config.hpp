// Experiment configuration, result rows and their CSV carrier.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace quadpix {

struct ExperimentConfig {
  std::string experiment;        // noise_vs_structured | alignment_sweep | detect_desk
  std::string feature = "quad";  // pixels | hog_baseline | hog_conv | hog_reform | quad
  int window_radius = 1;         // quad only; the sweep overrides per rms level
  std::vector<int> train_sizes;
  std::vector<double> rms_levels;
  double C = 1.0;
  double tol = 1e-3;
  std::uint64_t seed = 1;
  std::string output_dir;
  std::string corpus_dir;  // optional: natural patches instead of procedural structure
  std::uint64_t memory_budget = 2ull << 30;
  int patch_size = 0;  // 0 = per-experiment default
  int workers = 0;     // 0 = env QUADPIX_WORKERS, then hardware concurrency

  void validate() const {
    if (experiment != "noise_vs_structured" && experiment != "alignment_sweep" &&
        experiment != "detect_desk")
      throw std::invalid_argument("config: unknown experiment '" + experiment + "'");
    if (feature != "pixels" && feature != "hog_baseline" && feature != "hog_conv" &&
        feature != "hog_reform" && feature != "quad")
      throw std::invalid_argument("config: unknown feature '" + feature + "'");
    if (train_sizes.empty()) throw std::invalid_argument("config: train_sizes must be nonempty");
    if (!std::is_sorted(train_sizes.begin(), train_sizes.end()))
      throw std::invalid_argument("config: train_sizes must be ascending");
    for (int s : train_sizes)
      if (s < 1) throw std::invalid_argument("config: train_sizes must be positive");
    if (rms_levels.empty()) throw std::invalid_argument("config: rms_levels must be nonempty");
    for (double r : rms_levels)
      if (r < 0.0) throw std::invalid_argument("config: rms_levels must be non-negative");
    if (C <= 0.0) throw std::invalid_argument("config: C must be positive");
    if (tol <= 0.0) throw std::invalid_argument("config: tol must be positive");
    if (window_radius < 0) throw std::invalid_argument("config: window_radius must be >= 0");
  }
};

struct ResultRow {
  std::string experiment;
  std::string feature;
  int train_size = 0;
  double rms_level = 0.0;
  double test_accuracy = 0.0;
  double train_seconds = 0.0;
  long long feature_dim = 0;
  double objective = 0.0;
};

// --- CSV (RFC-4180-style quoting) ---------------------------------------

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline constexpr const char* kResultCsvHeader =
    "experiment,feature,train_size,rms_level,test_accuracy,train_seconds,feature_dim,objective";

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << kResultCsvHeader << "\n";
  for (const ResultRow& r : rows) {
    out << detail::csv_escape(r.experiment) << "," << detail::csv_escape(r.feature) << ","
        << r.train_size << "," << detail::format_double(r.rms_level) << ","
        << detail::format_double(r.test_accuracy) << ","
        << detail::format_double(r.train_seconds) << "," << r.feature_dim << ","
        << detail::format_double(r.objective) << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline std::vector<ResultRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::csv_split(line);
    if (f.size() != 8) throw std::runtime_error("parse_csv: malformed row in " + path);
    ResultRow r;
    r.experiment = f[0];
    r.feature = f[1];
    r.train_size = std::stoi(f[2]);
    r.rms_level = std::stod(f[3]);
    r.test_accuracy = std::stod(f[4]);
    r.train_seconds = std::stod(f[5]);
    r.feature_dim = std::stoll(f[6]);
    r.objective = std::stod(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- key = value config files --------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

template <typename T, typename Parse>
inline std::vector<T> parse_list(const std::string& value, Parse parse) {
  std::vector<T> out;
  std::string body = value;
  if (!body.empty() && body.front() == '[' && body.back() == ']')
    body = body.substr(1, body.size() - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

}  // namespace detail

/// TOML-style `key = value` loader; lists are comma separated, `#` comments.
/// Unknown keys are rejected so typos fail loudly.
inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' at " + path + ":" + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
    if (key == "experiment") cfg.experiment = value;
    else if (key == "feature") cfg.feature = value;
    else if (key == "window_radius") cfg.window_radius = std::stoi(value);
    else if (key == "train_sizes")
      cfg.train_sizes = detail::parse_list<int>(value, [](const std::string& s) { return std::stoi(s); });
    else if (key == "rms_levels")
      cfg.rms_levels = detail::parse_list<double>(value, [](const std::string& s) { return std::stod(s); });
    else if (key == "C") cfg.C = std::stod(value);
    else if (key == "tol") cfg.tol = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "corpus_dir") cfg.corpus_dir = value;
    else if (key == "memory_budget") cfg.memory_budget = std::stoull(value);
    else if (key == "patch_size") cfg.patch_size = std::stoi(value);
    else if (key == "workers") cfg.workers = std::stoi(value);
    else
      throw std::runtime_error("config: unknown key '" + key + "' at " + path + ":" +
                               std::to_string(lineno));
  }
}

inline int resolve_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv("QUADPIX_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace quadpix

// Data synthesis: 1/f noise ensembles, procedural structured images with a
// matched spectrum, natural-patch ingestion, and similarity-warp augmentation
// with a controlled RMS point error.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpix/common.hpp"
#include "quadpix/fourier.hpp"
#include "quadpix/image.hpp"
#include "quadpix/image_io.hpp"

namespace quadpix {

// ---------------------------------------------------------------------------
// spectra

namespace detail {

inline double pink_amplitude(int kx, int ky, int width, int height) {
  if (kx == 0 && ky == 0) return 0.0;
  const double fx = signed_frequency(kx, width);
  const double fy = signed_frequency(ky, height);
  return 1.0 / std::hypot(fx, fy);
}

// Replace the amplitude of every coefficient with the 1/f profile, keeping
// phases. Zero-amplitude coefficients get phase 0.
inline Image reshape_to_pink_spectrum(const Image& img) {
  ComplexGrid grid = fft2(img);
  for (int ky = 0; ky < img.height; ++ky) {
    for (int kx = 0; kx < img.width; ++kx) {
      const std::size_t idx = static_cast<std::size_t>(ky) * img.width + kx;
      const double target = pink_amplitude(kx, ky, img.width, img.height);
      const double mag = std::abs(grid[idx]);
      grid[idx] = (mag > 0.0) ? grid[idx] * (target / mag)
                              : std::complex<double>(target, 0.0);
    }
  }
  return ifft2_real(grid, img.width, img.height);
}

}  // namespace detail

/// Frequency-domain 1/f noise: deterministic radial amplitude, independent
/// uniform phases under Hermitian symmetry, power-normalized output.
inline Image sample_pink_noise(int patch_size, std::uint64_t seed) {
  if (patch_size < 4) throw std::invalid_argument("sample_pink_noise: patch_size >= 4");
  const int n = patch_size;
  RandomStream rng(seed);
  ComplexGrid grid(static_cast<std::size_t>(n) * n, 0.0);
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) {
      const int cy = (n - ky) % n;  // conjugate partner
      const int cx = (n - kx) % n;
      if (std::make_pair(ky, kx) > std::make_pair(cy, cx)) continue;  // partner writes it
      const double amp = detail::pink_amplitude(kx, ky, n, n);
      const std::size_t idx = static_cast<std::size_t>(ky) * n + kx;
      if (cy == ky && cx == kx) {
        // self-conjugate bin must be real: phase restricted to {0, π}
        grid[idx] = amp * (rng.bernoulli() ? 1.0 : -1.0);
      } else {
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const std::complex<double> v = amp * std::complex<double>(std::cos(phase), std::sin(phase));
        grid[idx] = v;
        grid[static_cast<std::size_t>(cy) * n + cx] = std::conj(v);
      }
    }
  }
  return power_normalize(ifft2_real(grid, n, n));
}

// ---------------------------------------------------------------------------
// procedural structured images

namespace detail {

struct PointD {
  double x, y;
};

// coverage of one subsample point under each primitive kind
struct Segment {
  PointD a, b;
  double half_thickness;
  double contrast;
  bool covers(double x, double y) const {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len_sq = vx * vx + vy * vy;
    double t = len_sq > 0.0 ? ((x - a.x) * vx + (y - a.y) * vy) / len_sq : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = x - (a.x + t * vx), dy = y - (a.y + t * vy);
    return dx * dx + dy * dy <= half_thickness * half_thickness;
  }
};

struct HalfPlane {
  double nx, ny, offset;  // covers nx·x + ny·y ≥ offset
  double contrast;
  bool covers(double x, double y) const { return nx * x + ny * y >= offset; }
};

struct ConvexPolygon {
  std::vector<PointD> verts;  // counter-clockwise
  double contrast;
  bool covers(double x, double y) const {
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const PointD& p = verts[i];
      const PointD& q = verts[(i + 1) % verts.size()];
      if ((q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x) < 0.0) return false;
    }
    return true;
  }
};

// Renders 2..6 random anti-aliased primitives (4×4 subsample coverage).
inline Image render_structured(int n, RandomStream& rng) {
  std::vector<Segment> segments;
  std::vector<HalfPlane> planes;
  std::vector<ConvexPolygon> polys;
  const int count = 2 + rng.uniform_int(5);
  for (int i = 0; i < count; ++i) {
    const double contrast = (rng.bernoulli() ? 1.0 : -1.0) * rng.uniform(0.25, 1.0);
    const int kind = rng.uniform_int(3);
    if (kind == 0) {
      Segment s;
      s.a = {rng.uniform(0.0, n - 1.0), rng.uniform(0.0, n - 1.0)};
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const double len = rng.uniform(0.4 * n, 1.2 * n);
      s.b = {s.a.x + len * std::cos(angle), s.a.y + len * std::sin(angle)};
      s.half_thickness = rng.uniform(0.4, 1.4);
      s.contrast = contrast;
      segments.push_back(s);
    } else if (kind == 1) {
      HalfPlane h;
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      h.nx = std::cos(angle);
      h.ny = std::sin(angle);
      const double px = rng.uniform(0.2 * n, 0.8 * n);
      const double py = rng.uniform(0.2 * n, 0.8 * n);
      h.offset = h.nx * px + h.ny * py;
      h.contrast = contrast;
      planes.push_back(h);
    } else {
      ConvexPolygon poly;
      const int sides = 3 + rng.uniform_int(3);
      const double cx = rng.uniform(0.15 * n, 0.85 * n);
      const double cy = rng.uniform(0.15 * n, 0.85 * n);
      const double radius = rng.uniform(0.12 * n, 0.4 * n);
      std::vector<double> angles(static_cast<std::size_t>(sides));
      for (double& a : angles) a = rng.uniform(0.0, 2.0 * M_PI);
      std::sort(angles.begin(), angles.end());
      for (double a : angles)
        poly.verts.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a)});
      poly.contrast = contrast;
      polys.push_back(poly);
    }
  }

  Image img(n, n);
  constexpr int kSub = 4;
  constexpr double kSubWeight = 1.0 / (kSub * kSub);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double v = 0.0;
      for (int sr = 0; sr < kSub; ++sr) {
        for (int sc = 0; sc < kSub; ++sc) {
          const double y = r + (sr + 0.5) / kSub - 0.5;
          const double x = c + (sc + 0.5) / kSub - 0.5;
          double sample = 0.0;
          for (const auto& s : segments)
            if (s.covers(x, y)) sample += s.contrast;
          for (const auto& h : planes)
            if (h.covers(x, y)) sample += h.contrast;
          for (const auto& p : polys)
            if (p.covers(x, y)) sample += p.contrast;
          v += sample * kSubWeight;
        }
      }
      img.at(r, c) = v;
    }
  }
  return img;
}

}  // namespace detail

/// Procedural "natural structure" stand-in: random lines, edges and convex
/// shapes, spectrally reshaped to the same 1/f amplitude profile as
/// sample_pink_noise (phases preserved), then power-normalized. The two
/// classes therefore differ in phase structure only.
inline Image sample_structured(int patch_size, std::uint64_t seed) {
  if (patch_size < 4) throw std::invalid_argument("sample_structured: patch_size >= 4");
  for (std::uint64_t attempt = 0;; ++attempt) {
    RandomStream rng(mix_seed(seed, attempt));
    const Image rendered = detail::render_structured(patch_size, rng);
    const Image shaped = detail::reshape_to_pink_spectrum(rendered);
    bool degenerate = false;
    Image out = power_normalize(shaped, &degenerate);
    if (!degenerate) return out;
    // pathological draw (blank canvas); redraw deterministically
  }
}

// ---------------------------------------------------------------------------
// natural patches

/// Samples `count` patches at uniform random positions from the readable
/// images under source_dir (sorted by filename for determinism); patches are
/// grayscale in [0,1] at ingestion and power-normalized on output.
inline std::vector<Image> ingest_patches(const std::string& source_dir, int patch_size,
                                         int count, std::uint64_t seed) {
  namespace fs = std::filesystem;
  if (count < 1) throw std::invalid_argument("ingest_patches: count >= 1");
  std::vector<std::string> files;
  {
    std::error_code ec;
    fs::directory_iterator it(source_dir, ec);
    if (ec) throw std::runtime_error("ingest_patches: cannot read directory " + source_dir);
    for (const auto& entry : it)
      if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  std::vector<Image> sources;
  for (const std::string& f : files) {
    try {
      Image img = read_image(f);
      if (img.width >= patch_size && img.height >= patch_size) sources.push_back(std::move(img));
    } catch (const std::exception&) {
      // unreadable or unsupported file; skip
    }
  }
  if (sources.empty())
    throw std::runtime_error("ingest_patches: no readable image of at least " +
                             std::to_string(patch_size) + "px in " + source_dir);

  RandomStream rng(seed);
  std::vector<Image> patches;
  patches.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Image& src = sources[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(sources.size())))];
    const int r0 = rng.uniform_int(src.height - patch_size + 1);
    const int c0 = rng.uniform_int(src.width - patch_size + 1);
    Image patch(patch_size, patch_size);
    for (int r = 0; r < patch_size; ++r)
      for (int c = 0; c < patch_size; ++c) patch.at(r, c) = src.at(r0 + r, c0 + c);
    patches.push_back(power_normalize(patch));
  }
  return patches;
}

/// Mean autocorrelation coefficient at a horizontal/vertical displacement,
/// averaged over an ensemble (the locality-of-correlation measurement).
inline double mean_shift_correlation(const std::vector<Image>& images, int displacement) {
  double total = 0.0;
  std::size_t terms = 0;
  for (const Image& img : images) {
    double num = 0.0, den_a = 0.0, den_b = 0.0;
    for (int r = 0; r < img.height; ++r)
      for (int c = 0; c + displacement < img.width; ++c) {
        num += img.at(r, c) * img.at(r, c + displacement);
        den_a += img.at(r, c) * img.at(r, c);
        den_b += img.at(r, c + displacement) * img.at(r, c + displacement);
      }
    for (int c = 0; c < img.width; ++c)
      for (int r = 0; r + displacement < img.height; ++r) {
        num += img.at(r, c) * img.at(r + displacement, c);
        den_a += img.at(r, c) * img.at(r, c);
        den_b += img.at(r + displacement, c) * img.at(r + displacement, c);
      }
    if (den_a > 0.0 && den_b > 0.0) {
      total += num / std::sqrt(den_a * den_b);
      ++terms;
    }
  }
  if (terms == 0) throw std::invalid_argument("mean_shift_correlation: empty ensemble");
  return total / static_cast<double>(terms);
}

// ---------------------------------------------------------------------------
// similarity warps

/// p ↦ scale·R(rotation)·p + translation, acting on (x, y) pixel coordinates.
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  std::pair<double, double> apply(double x, double y) const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    return {scale * (c * x - s * y) + tx, scale * (s * x + c * y) + ty};
  }

  SimilarityTransform inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = -rotation;
    const double c = std::cos(inv.rotation), s = std::sin(inv.rotation);
    inv.tx = -inv.scale * (c * tx - s * ty);
    inv.ty = -inv.scale * (s * tx + c * ty);
    return inv;
  }

  bool is_identity(double eps = 0.0) const {
    return std::abs(scale - 1.0) <= eps && std::abs(rotation) <= eps &&
           std::abs(tx) <= eps && std::abs(ty) <= eps;
  }
};

struct WarpSpec {
  double target_rms = 0.0;
  std::vector<std::pair<double, double>> reference_points;  // (x, y)
  std::uint64_t seed = 0;

  void validate() const {
    if (target_rms < 0.0) throw std::invalid_argument("WarpSpec: target_rms >= 0");
    if (reference_points.size() < 3)
      throw std::invalid_argument("WarpSpec: need at least 3 reference points");
    // non-collinearity
    const auto& a = reference_points[0];
    bool ok = false;
    for (std::size_t i = 1; i + 1 < reference_points.size() && !ok; ++i)
      for (std::size_t j = i + 1; j < reference_points.size() && !ok; ++j) {
        const auto& b = reference_points[i];
        const auto& c = reference_points[j];
        const double cross = (b.first - a.first) * (c.second - a.second) -
                             (b.second - a.second) * (c.first - a.first);
        if (std::abs(cross) > 1e-9) ok = true;
      }
    if (!ok) throw std::invalid_argument("WarpSpec: reference points are collinear");
  }
};

/// Corner + center reference grid for a width×height image.
inline std::vector<std::pair<double, double>> corner_reference_points(int width, int height) {
  const double w = width - 1.0, h = height - 1.0;
  return {{0.0, 0.0}, {w, 0.0}, {0.0, h}, {w, h}, {w / 2.0, h / 2.0}};
}

inline double rms_point_error(const SimilarityTransform& t,
                              const std::vector<std::pair<double, double>>& points) {
  double acc = 0.0;
  for (const auto& p : points) {
    const auto q = t.apply(p.first, p.second);
    const double dx = q.first - p.first, dy = q.second - p.second;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(points.size()));
}

namespace detail {

// Bake a center-relative perturbation (log-scale dσ, angle dθ, shift dx dy)
// into an origin-acting transform: p ↦ s·R·(p−c) + c + t.
inline SimilarityTransform bake_about_center(double log_scale, double angle, double dx,
                                             double dy, double cx, double cy) {
  SimilarityTransform t;
  t.scale = std::exp(log_scale);
  t.rotation = angle;
  const double c = std::cos(angle), s = std::sin(angle);
  t.tx = dx + cx - t.scale * (c * cx - s * cy);
  t.ty = dy + cy - t.scale * (s * cx + c * cy);
  return t;
}

}  // namespace detail

/// Draws an isotropic random direction in the 4-parameter similarity tangent
/// space (about the reference-point centroid) and rescales it until the RMS
/// displacement of the reference points matches target_rms within 1e−6
/// (bisection on the scaling factor). target_rms = 0 yields the identity.
inline SimilarityTransform sample_similarity_warp(const WarpSpec& spec) {
  spec.validate();
  if (spec.target_rms == 0.0) return SimilarityTransform{};

  RandomStream rng(spec.seed);
  const double u_scale = rng.normal();
  const double u_angle = rng.normal();
  const double u_dx = rng.normal();
  const double u_dy = rng.normal();

  double cx = 0.0, cy = 0.0;
  for (const auto& p : spec.reference_points) {
    cx += p.first;
    cy += p.second;
  }
  cx /= static_cast<double>(spec.reference_points.size());
  cy /= static_cast<double>(spec.reference_points.size());

  auto rms_at = [&](double lambda) {
    const SimilarityTransform t = detail::bake_about_center(
        lambda * u_scale, lambda * u_angle, lambda * u_dx, lambda * u_dy, cx, cy);
    return rms_point_error(t, spec.reference_points);
  };

  double hi = 1.0;
  for (int guard = 0; rms_at(hi) < spec.target_rms && guard < 200; ++guard) hi *= 2.0;
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (rms_at(mid) < spec.target_rms)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
  }
  const double lambda = 0.5 * (lo + hi);
  return detail::bake_about_center(lambda * u_scale, lambda * u_angle, lambda * u_dx,
                                   lambda * u_dy, cx, cy);
}

/// Inverse-mapped bilinear resampling; samples outside the input are 0.
inline Image warp_image(const Image& image, const SimilarityTransform& t) {
  const SimilarityTransform inv = t.inverse();
  Image out(image.width, image.height);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const auto src = inv.apply(static_cast<double>(c), static_cast<double>(r));
      const double x = src.first, y = src.second;
      const int x0 = static_cast<int>(std::floor(x));
      const int y0 = static_cast<int>(std::floor(y));
      const double fx = x - x0, fy = y - y0;
      auto sample = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= image.height || xx < 0 || xx >= image.width) return 0.0;
        return image.at(yy, xx);
      };
      out.at(r, c) = (1.0 - fy) * ((1.0 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                     fy * ((1.0 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthesized sets and manifests

struct SynthesizedExample {
  Image image;
  int base_index = 0;
  int copy_index = 0;
  std::uint64_t seed = 0;
  SimilarityTransform warp;
};

/// Per base image, `per_example` copies: copy 0 is the identity, later copies
/// are warped draws with seeds derived from (spec.seed, base index, copy
/// index) so regeneration is order-independent.
inline std::vector<SynthesizedExample> synthesize_set(const std::vector<Image>& base,
                                                      int per_example, const WarpSpec& spec,
                                                      bool include_identity_first = true) {
  if (per_example < 1) throw std::invalid_argument("synthesize_set: per_example >= 1");
  std::vector<SynthesizedExample> out;
  out.reserve(base.size() * static_cast<std::size_t>(per_example));
  for (std::size_t b = 0; b < base.size(); ++b) {
    for (int j = 0; j < per_example; ++j) {
      SynthesizedExample ex;
      ex.base_index = static_cast<int>(b);
      ex.copy_index = j;
      ex.seed = mix_seed(spec.seed, b, static_cast<std::uint64_t>(j));
      if ((include_identity_first && j == 0) || spec.target_rms == 0.0) {
        ex.warp = SimilarityTransform{};
        ex.image = base[b];
      } else {
        WarpSpec draw = spec;
        draw.seed = ex.seed;
        ex.warp = sample_similarity_warp(draw);
        ex.image = warp_image(base[b], ex.warp);
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

/// Text manifest: one line per sample (id, seed, label, warp parameters);
/// enough to regenerate a set exactly and to audit split hygiene.
struct ManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
  int label = 0;
  SimilarityTransform warp;
};

inline void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << "# id seed label scale rotation tx ty\n";
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%s %llu %d %.17g %.17g %.17g %.17g\n", e.id.c_str(),
                  static_cast<unsigned long long>(e.seed), e.label, e.warp.scale,
                  e.warp.rotation, e.warp.tx, e.warp.ty);
    out << buf;
  }
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    unsigned long long seed = 0;
    if (!(ss >> e.id >> seed >> e.label >> e.warp.scale >> e.warp.rotation >> e.warp.tx >>
          e.warp.ty))
      throw std::runtime_error("read_manifest: malformed line: " + line);
    e.seed = seed;
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace quadpix

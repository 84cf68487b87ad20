#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/linearized.hpp"
#include "wow/net.hpp"  // byte reader/writer helpers
#include "wow/rng.hpp"

namespace wow {

// ---------------------------------------------------------------------------
// Synthetic generators

// N i.i.d. points on the circle of the given radius around (cx, cy).
inline PointCloud gen_circle_cloud(double cx, double cy, double radius, int n,
                                   std::uint64_t seed) {
  if (!(radius > 0.0)) throw InputError("gen_circle_cloud: radius must be positive");
  if (n < 1) throw InputError("gen_circle_cloud: need at least one point");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd coords(2, n);
  for (int i = 0; i < n; ++i) {
    double ex = 0.0, ey = 0.0, norm = 0.0;
    do {
      ex = gauss(rng);
      ey = gauss(rng);
      norm = std::sqrt(ex * ex + ey * ey);
    } while (norm == 0.0);
    coords(0, i) = cx + radius * ex / norm;
    coords(1, i) = cy + radius * ey / norm;
  }
  return PointCloud(std::move(coords));
}

// N i.i.d. draws from the image treated as a 2D histogram on [0,1]^2; each
// draw lands uniformly inside its pixel's cell, which avoids lattice
// artifacts and duplicate points. Row 0 of the image is the top of the square.
inline PointCloud image_to_cloud(const Eigen::MatrixXd& image, int n, std::uint64_t seed) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  if (h < 1 || w < 1) throw InputError("image_to_cloud: empty image");
  if (n < 1) throw InputError("image_to_cloud: need at least one point");
  if ((image.array() < 0.0).any()) throw InputError("image_to_cloud: negative intensities");
  double total = image.sum();
  if (!(total > 0.0)) throw InputError("image_to_cloud: image has zero total mass");

  std::vector<double> cumulative(static_cast<std::size_t>(h) * w);
  double acc = 0.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      acc += image(r, c) / total;
      cumulative[static_cast<std::size_t>(r) * w + c] = acc;
    }
  cumulative.back() = 1.0;

  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd coords(2, n);
  for (int i = 0; i < n; ++i) {
    double u = unif(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    auto cell = static_cast<long>(it - cumulative.begin());
    int r = static_cast<int>(cell / w);
    int c = static_cast<int>(cell % w);
    coords(0, i) = (c + unif(rng)) / w;
    coords(1, i) = 1.0 - (r + unif(rng)) / h;
  }
  return PointCloud(std::move(coords));
}

// ---------------------------------------------------------------------------
// IDX ubyte reader (MNIST-style image files)

inline std::vector<Eigen::MatrixXd> parse_idx_images(const std::string& data) {
  detail::ByteReader rd{data, 0};
  auto read_be_u32 = [&](const char* what) {
    if (rd.pos + 4 > data.size())
      throw FormatError(std::string("truncated IDX header reading ") + what, rd.pos);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v = (v << 8) |
          static_cast<unsigned char>(data[rd.pos + static_cast<std::size_t>(i)]);
    rd.pos += 4;
    return v;
  };
  std::uint32_t magic = read_be_u32("magic");
  if (magic != 0x00000803u) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", magic);
    throw FormatError("bad IDX magic " + std::string(buf) + ", expected 0x00000803", 0);
  }
  std::uint32_t count = read_be_u32("image count");
  std::uint32_t rows = read_be_u32("rows");
  std::uint32_t cols = read_be_u32("cols");
  std::uint64_t expected = static_cast<std::uint64_t>(count) * rows * cols;
  std::uint64_t actual = data.size() - rd.pos;
  if (actual != expected)
    throw FormatError("IDX payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(actual),
                      rd.pos);
  std::vector<Eigen::MatrixXd> images;
  images.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    Eigen::MatrixXd img(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c)
        img(r, c) = static_cast<unsigned char>(data[rd.pos++]) / 255.0;
    images.push_back(std::move(img));
  }
  return images;
}

inline std::vector<Eigen::MatrixXd> read_idx(const std::string& path) {
  return parse_idx_images(detail::read_file_bytes(path));
}

// Writer used by tooling and tests to produce well-formed IDX files.
inline std::string serialize_idx_images(const std::vector<Eigen::MatrixXd>& images) {
  if (images.empty()) throw InputError("serialize_idx_images: no images");
  auto rows = static_cast<std::uint32_t>(images.front().rows());
  auto cols = static_cast<std::uint32_t>(images.front().cols());
  std::string out;
  auto put_be_u32 = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_be_u32(0x00000803u);
  put_be_u32(static_cast<std::uint32_t>(images.size()));
  put_be_u32(rows);
  put_be_u32(cols);
  for (const auto& img : images) {
    if (img.rows() != rows || img.cols() != cols)
      throw InputError("serialize_idx_images: images must share one shape");
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) {
        double v = std::clamp(img(r, c), 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// WOWDS1 cloud container

struct CloudDataset {
  int dim = 0;
  std::vector<PointCloud> clouds;
  std::vector<Permutation> perms;  // alignment to a shared reference; optional
  bool has_perms = false;

  int count() const { return static_cast<int>(clouds.size()); }

  void validate() const {
    for (const auto& c : clouds) {
      if (c.dim() != dim) throw InputError("CloudDataset: cloud dimension mismatch");
      if (!c.finite()) throw InputError("CloudDataset: non-finite coordinates");
    }
    if (has_perms && perms.size() != clouds.size())
      throw InputError("CloudDataset: one alignment permutation per cloud required");
  }
};

inline constexpr char kDatasetMagic[7] = {'W', 'O', 'W', 'D', 'S', '1', '\0'};

inline std::string serialize_dataset(const CloudDataset& ds) {
  ds.validate();
  std::string out(kDatasetMagic, sizeof(kDatasetMagic));
  detail::put_u32(out, 1);  // version
  detail::put_u32(out, static_cast<std::uint32_t>(ds.dim));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.clouds.size()));
  detail::put_u32(out, ds.has_perms ? 1u : 0u);
  for (std::size_t k = 0; k < ds.clouds.size(); ++k) {
    const PointCloud& c = ds.clouds[k];
    detail::put_u32(out, static_cast<std::uint32_t>(c.count()));
    for (int r = 0; r < c.dim(); ++r)
      for (int j = 0; j < c.count(); ++j) detail::put_f64(out, c.coords(r, j));
    if (ds.has_perms) {
      const Permutation& p = ds.perms[k];
      if (p.size() != c.count())
        throw InputError("serialize_dataset: permutation size mismatch");
      for (int i = 0; i < p.size(); ++i)
        detail::put_u32(out, static_cast<std::uint32_t>(p.map[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

inline CloudDataset deserialize_dataset(const std::string& data) {
  if (data.size() < sizeof(kDatasetMagic) ||
      std::memcmp(data.data(), kDatasetMagic, sizeof(kDatasetMagic)) != 0)
    throw FormatError("bad dataset magic, expected WOWDS1", 0);
  detail::ByteReader rd{data, sizeof(kDatasetMagic)};
  std::uint32_t version = rd.u32("version");
  if (version != 1)
    throw FormatError("unsupported dataset version " + std::to_string(version), rd.pos - 4);
  CloudDataset ds;
  ds.dim = static_cast<int>(rd.u32("dim"));
  std::uint32_t count = rd.u32("cloud count");
  std::uint32_t flags = rd.u32("flags");
  ds.has_perms = (flags & 1u) != 0;
  if (ds.dim < 1 && count > 0) throw FormatError("dataset dimension must be positive", 11);
  ds.clouds.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t n = rd.u32("point count");
    if (n < 1) throw FormatError("cloud " + std::to_string(k) + " has zero points", rd.pos - 4);
    Eigen::MatrixXd coords(ds.dim, static_cast<int>(n));
    for (int r = 0; r < ds.dim; ++r)
      for (std::uint32_t j = 0; j < n; ++j) coords(r, static_cast<int>(j)) = rd.f64("coordinate");
    ds.clouds.emplace_back(std::move(coords));
    if (ds.has_perms) {
      Permutation p;
      p.map.resize(n);
      for (std::uint32_t i = 0; i < n; ++i)
        p.map[i] = static_cast<int>(rd.u32("permutation index"));
      if (!p.valid())
        throw FormatError("cloud " + std::to_string(k) + " has an invalid permutation", rd.pos);
      ds.perms.push_back(std::move(p));
    }
  }
  if (rd.pos != data.size()) throw FormatError("trailing bytes after dataset payload", rd.pos);
  ds.validate();
  return ds;
}

inline void write_dataset(const std::string& path, const CloudDataset& ds) {
  detail::write_file_bytes(path, serialize_dataset(ds));
}

inline CloudDataset read_dataset(const std::string& path) {
  return deserialize_dataset(detail::read_file_bytes(path));
}

// The reference measure travels as a one-cloud container.
inline void write_reference(const std::string& path, const ReferenceMeasure& ref) {
  CloudDataset ds;
  ds.dim = ref.cloud.dim();
  ds.clouds.push_back(ref.cloud);
  write_dataset(path, ds);
}

inline ReferenceMeasure read_reference(const std::string& path) {
  CloudDataset ds = read_dataset(path);
  if (ds.count() != 1)
    throw FormatError("reference container must hold exactly one cloud, found " +
                          std::to_string(ds.count()),
                      0);
  ReferenceMeasure ref;
  ref.cloud = ds.clouds.front();
  return ref;
}

// ---------------------------------------------------------------------------
// Source metameasures

enum class SourceKind { pure_noise, barycentric_noise, empirical };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::pure_noise: return "pure_noise";
    case SourceKind::barycentric_noise: return "barycentric_noise";
    case SourceKind::empirical: return "empirical";
  }
  return "?";
}

inline SourceKind source_kind_from_string(const std::string& s) {
  if (s == "pure_noise") return SourceKind::pure_noise;
  if (s == "barycentric_noise") return SourceKind::barycentric_noise;
  if (s == "empirical") return SourceKind::empirical;
  throw InputError("unknown source kind '" + s +
                   "' (expected pure_noise|barycentric_noise|empirical)");
}

struct SourceSpec {
  SourceKind kind = SourceKind::pure_noise;
  int dim = 2;
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  std::shared_ptr<const ReferenceMeasure> ref;    // barycentric
  std::shared_ptr<const CloudDataset> dataset;    // empirical

  void validate() const {
    if (sigma_min > sigma_max) throw InputError("SourceSpec: sigma_min must not exceed sigma_max");
    if (kind == SourceKind::barycentric_noise && !ref)
      throw InputError("SourceSpec: barycentric noise requires a reference measure");
    if (kind == SourceKind::empirical && !dataset)
      throw InputError("SourceSpec: empirical source requires a dataset");
  }
};

namespace detail {

inline PointCloud subsample_cloud(const PointCloud& c, int n, std::mt19937_64& rng) {
  if (n == c.count()) return c;
  if (n > c.count())
    throw InputError("cannot draw " + std::to_string(n) + " points from a cloud of " +
                     std::to_string(c.count()));
  std::vector<int> idx(static_cast<std::size_t>(c.count()));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, c.count() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  Eigen::MatrixXd coords(c.dim(), n);
  for (int i = 0; i < n; ++i) coords.col(i) = c.coords.col(idx[static_cast<std::size_t>(i)]);
  return PointCloud(std::move(coords));
}

}  // namespace detail

// B clouds of N points from the configured source metameasure. Pure noise
// draws sigma once per cloud and fills i.i.d. Gaussian entries; barycentric
// noise perturbs the ordered reference vector entrywise (the result is
// pre-aligned to the reference); empirical draws dataset clouds uniformly.
inline MetaBatch draw_source(const SourceSpec& spec, int n, int b, std::uint64_t seed) {
  spec.validate();
  if (n < 1 || b < 1) throw InputError("draw_source: n and b must be >= 1");
  MetaBatch batch;
  batch.clouds.reserve(static_cast<std::size_t>(b));
  for (int k = 0; k < b; ++k) {
    auto rng = make_rng(derive_seed(seed, "source-cloud", static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> unif_sigma(spec.sigma_min, spec.sigma_max);
    std::normal_distribution<double> gauss(0.0, 1.0);
    switch (spec.kind) {
      case SourceKind::pure_noise: {
        double sigma = unif_sigma(rng);
        Eigen::MatrixXd coords(spec.dim, n);
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < spec.dim; ++r) coords(r, j) = sigma * gauss(rng);
        batch.clouds.emplace_back(std::move(coords));
        break;
      }
      case SourceKind::barycentric_noise: {
        const PointCloud& ref = spec.ref->cloud;
        if (ref.count() != n)
          throw InputError("draw_source: barycentric noise needs a reference with " +
                           std::to_string(n) + " points, got " + std::to_string(ref.count()));
        double sigma = unif_sigma(rng);
        Eigen::MatrixXd coords(ref.dim(), n);
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < ref.dim(); ++r) coords(r, j) = ref.coords(r, j) + sigma * gauss(rng);
        batch.clouds.emplace_back(std::move(coords));
        break;
      }
      case SourceKind::empirical: {
        const CloudDataset& ds = *spec.dataset;
        if (ds.count() == 0) throw InputError("draw_source: empirical dataset is empty");
        std::uniform_int_distribution<int> pick(0, ds.count() - 1);
        const PointCloud& c = ds.clouds[static_cast<std::size_t>(pick(rng))];
        batch.clouds.push_back(detail::subsample_cloud(c, n, rng));
        break;
      }
    }
  }
  return batch;
}

}  // namespace wow

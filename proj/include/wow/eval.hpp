#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/ot.hpp"
#include "wow/parallel.hpp"

namespace wow {

// Chamfer distance: sum over each cloud of the squared distance to the
// nearest point of the other cloud. Counts may differ.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
  require_same_dim(a, b, "chamfer");
  Eigen::MatrixXd sq = squared_euclidean_cost(a, b);
  double acc = 0.0;
  for (int i = 0; i < a.count(); ++i) acc += sq.row(i).minCoeff();
  for (int j = 0; j < b.count(); ++j) acc += sq.col(j).minCoeff();
  return acc;
}

enum class NNAMetric { chamfer, ot };

inline const char* to_string(NNAMetric m) {
  return m == NNAMetric::chamfer ? "chamfer" : "ot";
}

struct NNAReport {
  NNAMetric metric = NNAMetric::chamfer;
  double accuracy = 0.0;
  int n_generated = 0;
  int n_real = 0;
  std::uint64_t seed = 0;
};

struct NNAOptions {
  NNAMetric metric = NNAMetric::chamfer;
  std::optional<double> sinkhorn_reg;  // OT metric solver; absent -> exact
  int threads = 1;
  std::uint64_t seed = 0;
};

// Leave-one-out 1-NN accuracy over the pooled generated + real clouds. Each
// element predicts its label from its nearest other element; ties resolve to
// the lowest pooled index (generated clouds first). 0.5 is ideal, 1.0 worst.
inline NNAReport nna(const MetaBatch& generated, const MetaBatch& real, const NNAOptions& opt = {}) {
  generated.validate();
  real.validate();
  if (generated.dim() != real.dim()) throw InputError("nna: datasets have different dimensions");
  if (generated.size() < 2 || real.size() < 2)
    throw InputError("nna: need at least two clouds per side");
  const int g = generated.size();
  const int total = g + real.size();

  std::vector<const PointCloud*> pool;
  pool.reserve(static_cast<std::size_t>(total));
  for (const auto& c : generated.clouds) pool.push_back(&c);
  for (const auto& c : real.clouds) pool.push_back(&c);

  if (opt.metric == NNAMetric::ot) {
    int n = pool.front()->count();
    for (const auto* c : pool)
      if (c->count() != n)
        throw InputError("nna: the OT metric needs equal cloud sizes (downsample first)");
  }

  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(total, total);
  long entries = static_cast<long>(total) * (total - 1) / 2;
  parallel_for(entries, opt.threads, [&](long e) {
    // unrank the linear index into the strict upper triangle
    long i = 0;
    long remaining = e;
    while (remaining >= total - 1 - i) {
      remaining -= total - 1 - i;
      ++i;
    }
    long j = i + 1 + remaining;
    double d;
    if (opt.metric == NNAMetric::chamfer) {
      d = chamfer(*pool[static_cast<std::size_t>(i)], *pool[static_cast<std::size_t>(j)]);
    } else {
      W2Options w2;
      w2.sinkhorn_reg = opt.sinkhorn_reg;
      d = wasserstein2(*pool[static_cast<std::size_t>(i)], *pool[static_cast<std::size_t>(j)], w2)
              .distance_sq;
    }
    dist(i, j) = d;
    dist(j, i) = d;
  });

  int correct = 0;
  for (int i = 0; i < total; ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < total; ++j) {
      if (j == i) continue;
      if (dist(i, j) < best_d) {
        best_d = dist(i, j);
        best = j;
      }
    }
    bool label_i = i < g;
    bool label_nn = best < g;
    if (label_i == label_nn) ++correct;
  }

  NNAReport report;
  report.metric = opt.metric;
  report.accuracy = static_cast<double>(correct) / total;
  report.n_generated = g;
  report.n_real = real.size();
  report.seed = opt.seed;
  return report;
}

// ---------------------------------------------------------------------------
// KDE grids for visualization dumps (2D only)

// Gaussian KDE with the scaled Scott bandwidth h = 0.9 * N^{-1/6}, evaluated
// on a grid over [0,1]^2 that is extended by padding_frac per side and cropped
// back. Row 0 is the top of the square (image convention).
inline Eigen::MatrixXd kde_grid(const PointCloud& c, int resolution = 64,
                                double padding_frac = 0.15) {
  if (c.dim() != 2) throw InputError("kde_grid: only 2D clouds are supported");
  if (resolution < 1) throw InputError("kde_grid: resolution must be >= 1");
  const int n = c.count();
  const double h = 0.9 * std::pow(static_cast<double>(n), -1.0 / 6.0);
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double norm = 1.0 / (n * 2.0 * std::numbers::pi * h * h);
  const int pad = static_cast<int>(std::lround(resolution * padding_frac));
  const int padded = resolution + 2 * pad;
  const double cell = 1.0 / resolution;

  Eigen::MatrixXd grid(padded, padded);
  for (int r = 0; r < padded; ++r) {
    double y = 1.0 + (pad - r - 0.5) * cell;  // top row sits above the unit square
    for (int col = 0; col < padded; ++col) {
      double x = (col - pad + 0.5) * cell;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double dx = x - c.coords(0, j);
        double dy = y - c.coords(1, j);
        acc += std::exp(-(dx * dx + dy * dy) * inv2h2);
      }
      grid(r, col) = norm * acc;
    }
  }
  return grid.block(pad, pad, resolution, resolution);
}

// ASCII PGM (P2), values rescaled linearly to [0, 255], row-major.
inline void write_pgm(const std::string& path, const Eigen::MatrixXd& grid) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open PGM file '" + path + "' for writing", 0);
  double lo = grid.minCoeff();
  double hi = grid.maxCoeff();
  double span = hi - lo;
  out << "P2\n" << grid.cols() << " " << grid.rows() << "\n255\n";
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      int v = span > 0.0 ? static_cast<int>(std::lround((grid(r, c) - lo) / span * 255.0)) : 0;
      out << v << (c + 1 == grid.cols() ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace wow

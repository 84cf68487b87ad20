#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wow/errors.hpp"

namespace wow {

// Empirical measure mu = (1/N) sum_j delta_{x_j}, stored as a d x N matrix
// with one point per column. Uniform weights 1/N are implicit; column order
// carries no meaning except where a module pins a canonical ordering.
struct PointCloud {
  Eigen::MatrixXd coords;

  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd c) : coords(std::move(c)) {}

  int dim() const { return static_cast<int>(coords.rows()); }
  int count() const { return static_cast<int>(coords.cols()); }
  bool finite() const { return coords.allFinite(); }
};

inline void require_same_dim(const PointCloud& a, const PointCloud& b, const char* where) {
  if (a.dim() != b.dim())
    throw InputError(std::string(where) + ": dimension mismatch (" +
                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

inline void require_same_shape(const PointCloud& a, const PointCloud& b, const char* where) {
  require_same_dim(a, b, where);
  if (a.count() != b.count())
    throw InputError(std::string(where) + ": point count mismatch (" +
                     std::to_string(a.count()) + " vs " + std::to_string(b.count()) + ")");
}

struct Permutation {
  std::vector<int> map;  // output slot i reads input column map[i]

  int size() const { return static_cast<int>(map.size()); }

  static Permutation identity(int n) {
    Permutation p;
    p.map.resize(static_cast<std::size_t>(n));
    std::iota(p.map.begin(), p.map.end(), 0);
    return p;
  }

  Permutation inverse() const {
    Permutation inv;
    inv.map.assign(map.size(), 0);
    for (int i = 0; i < size(); ++i) inv.map[static_cast<std::size_t>(map[i])] = i;
    return inv;
  }

  bool valid() const {
    std::vector<int> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < size(); ++i)
      if (sorted[static_cast<std::size_t>(i)] != i) return false;
    return true;
  }
};

// A batch of B clouds sharing one ambient dimension; counts may vary.
struct MetaBatch {
  std::vector<PointCloud> clouds;

  int size() const { return static_cast<int>(clouds.size()); }

  int dim() const {
    if (clouds.empty()) throw InputError("MetaBatch: empty batch has no dimension");
    return clouds.front().dim();
  }

  void validate() const {
    if (clouds.empty()) throw InputError("MetaBatch: batch must contain at least one cloud");
    int d = clouds.front().dim();
    for (const auto& c : clouds)
      if (c.dim() != d) throw InputError("MetaBatch: clouds must share one dimension");
  }
};

// proj^t along the pairing established upstream: column j moves on the
// segment from a_j to b_j.
inline PointCloud interpolate(const PointCloud& a, const PointCloud& b, double t) {
  require_same_shape(a, b, "interpolate");
  return PointCloud((1.0 - t) * a.coords + t * b.coords);
}

inline PointCloud apply_permutation(const Permutation& p, const PointCloud& c) {
  if (p.size() != c.count())
    throw InputError("apply_permutation: permutation size " + std::to_string(p.size()) +
                     " does not match cloud count " + std::to_string(c.count()));
  Eigen::MatrixXd out(c.dim(), c.count());
  for (int i = 0; i < c.count(); ++i) out.col(i) = c.coords.col(p.map[static_cast<std::size_t>(i)]);
  return PointCloud(std::move(out));
}

// Pairwise squared Euclidean costs, entry (i, j) = ||a_i - b_j||^2.
inline Eigen::MatrixXd squared_euclidean_cost(const PointCloud& a, const PointCloud& b) {
  require_same_dim(a, b, "squared_euclidean_cost");
  Eigen::VectorXd an = a.coords.colwise().squaredNorm();
  Eigen::VectorXd bn = b.coords.colwise().squaredNorm();
  Eigen::MatrixXd cost = -2.0 * (a.coords.transpose() * b.coords);
  cost.colwise() += an;
  cost.rowwise() += bn.transpose();
  return cost.cwiseMax(0.0);
}

// Measures are unordered: the canonical form sorts columns lexicographically
// and is the cloud-equality notion used by tests and set comparisons.
inline PointCloud canonical(const PointCloud& c) {
  std::vector<int> idx(static_cast<std::size_t>(c.count()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    for (int r = 0; r < c.dim(); ++r) {
      if (c.coords(r, i) != c.coords(r, j)) return c.coords(r, i) < c.coords(r, j);
    }
    return false;
  });
  Eigen::MatrixXd out(c.dim(), c.count());
  for (int i = 0; i < c.count(); ++i) out.col(i) = c.coords.col(idx[static_cast<std::size_t>(i)]);
  return PointCloud(std::move(out));
}

inline bool equal_as_measures(const PointCloud& a, const PointCloud& b, double tol = 0.0) {
  if (a.dim() != b.dim() || a.count() != b.count()) return false;
  Eigen::MatrixXd diff = canonical(a).coords - canonical(b).coords;
  return diff.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace wow

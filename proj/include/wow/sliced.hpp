#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/ot.hpp"
#include "wow/rng.hpp"

namespace wow {

// L unit directions on S^{d-1}, one per column.
struct DirectionSet {
  Eigen::MatrixXd vectors;  // d x L

  int dim() const { return static_cast<int>(vectors.rows()); }
  int count() const { return static_cast<int>(vectors.cols()); }
};

inline DirectionSet sample_directions(int dim, int count, std::uint64_t seed) {
  if (dim < 1 || count < 1) throw InputError("sample_directions: dim and count must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd dirs(dim, count);
  for (int l = 0; l < count; ++l) {
    double norm = 0.0;
    do {
      for (int r = 0; r < dim; ++r) dirs(r, l) = gauss(rng);
      norm = dirs.col(l).norm();
    } while (norm == 0.0);
    dirs.col(l) /= norm;
  }
  return DirectionSet{std::move(dirs)};
}

namespace detail {

// Ascending order of the projections, ties broken by original point index so
// plans are reproducible.
inline std::vector<int> projection_order(const Eigen::VectorXd& proj) {
  std::vector<int> order(static_cast<std::size_t>(proj.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (proj(i) != proj(j)) return proj(i) < proj(j);
    return i < j;
  });
  return order;
}

}  // namespace detail

// Monte Carlo sliced W2^2: mean over directions of the 1D W2^2 between the
// projected measures, each 1D problem solved by sorting order statistics.
inline double sliced_w2(const PointCloud& a, const PointCloud& b, const DirectionSet& dirs) {
  require_same_shape(a, b, "sliced_w2");
  if (dirs.dim() != a.dim()) throw InputError("sliced_w2: direction dimension mismatch");
  const int n = a.count();
  const int L = dirs.count();
  Eigen::MatrixXd pa = dirs.vectors.transpose() * a.coords;  // L x N
  Eigen::MatrixXd pb = dirs.vectors.transpose() * b.coords;
  std::vector<double> ra(static_cast<std::size_t>(n)), rb(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) {
      ra[static_cast<std::size_t>(i)] = pa(l, i);
      rb[static_cast<std::size_t>(i)] = pb(l, i);
    }
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double diff = ra[static_cast<std::size_t>(i)] - rb[static_cast<std::size_t>(i)];
      s += diff * diff;
    }
    acc += s / n;
  }
  return acc / L;
}

// Average of the per-direction sort matchings, lifted to the original points.
// Collapses to a permutation plan when every direction induces the same
// matching (always for L = 1, and for identical clouds under index ties).
inline InnerPlan sliced_plan(const PointCloud& a, const PointCloud& b, const DirectionSet& dirs) {
  require_same_shape(a, b, "sliced_plan");
  if (dirs.dim() != a.dim()) throw InputError("sliced_plan: direction dimension mismatch");
  const int n = a.count();
  const int L = dirs.count();
  std::vector<std::vector<int>> matchings;
  matchings.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd pa = a.coords.transpose() * dirs.vectors.col(l);
    Eigen::VectorXd pb = b.coords.transpose() * dirs.vectors.col(l);
    std::vector<int> oa = detail::projection_order(pa);
    std::vector<int> ob = detail::projection_order(pb);
    std::vector<int> match(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      match[static_cast<std::size_t>(oa[static_cast<std::size_t>(k)])] =
          ob[static_cast<std::size_t>(k)];
    matchings.push_back(std::move(match));
  }
  bool all_equal = true;
  for (int l = 1; l < L && all_equal; ++l) all_equal = matchings[static_cast<std::size_t>(l)] == matchings[0];
  if (all_equal) return InnerPlan::from_permutation(std::move(matchings[0]));

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  double share = 1.0 / (static_cast<double>(L) * n);
  for (const auto& match : matchings)
    for (int i = 0; i < n; ++i) w(i, match[static_cast<std::size_t>(i)]) += share;
  return InnerPlan::from_matrix(std::move(w));
}

}  // namespace wow

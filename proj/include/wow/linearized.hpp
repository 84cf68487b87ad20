#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/ot.hpp"
#include "wow/rng.hpp"

namespace wow {

// Barycenter cloud rho-hat whose stored column order is the canonical vector
// x_rho. Columns must be pairwise distinct for alignment permutations to be
// almost-everywhere unique; `jittered` records a duplicate-column repair.
struct ReferenceMeasure {
  PointCloud cloud;
  bool jittered = false;
};

namespace detail {

inline double min_pairwise_gap(const PointCloud& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.count(); ++i)
    for (int j = i + 1; j < c.count(); ++j)
      best = std::min(best, (c.coords.col(i) - c.coords.col(j)).norm());
  return best;
}

}  // namespace detail

// Fixed-support-size Lloyd iteration for the free-support barycenter of the
// sample clouds: match the current support to every sample with exact OT,
// then move each support point to the mean of its matches. The objective
// sum_b W2^2(rho, nu_b) is non-increasing. Duplicate output columns are
// perturbed by 1e-9 jitter so the reference stays admissible.
inline ReferenceMeasure compute_barycenter(const MetaBatch& samples, int support_size,
                                           int max_iter, double tol, std::uint64_t seed,
                                           std::vector<double>* objective_log = nullptr) {
  samples.validate();
  const int b = samples.size();
  for (const auto& c : samples.clouds)
    if (c.count() != support_size)
      throw InputError("compute_barycenter: all sample clouds must have count " +
                       std::to_string(support_size) + ", got " + std::to_string(c.count()));

  auto rng = make_rng(derive_seed(seed, "barycenter-init"));
  int init = static_cast<int>(rng() % static_cast<std::uint64_t>(b));
  Eigen::MatrixXd support = samples.clouds[static_cast<std::size_t>(init)].coords;

  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(support.rows(), support.cols());
    double objective = 0.0;
    PointCloud current(support);
    for (const auto& sample : samples.clouds) {
      ExactResult res = solve_exact(squared_euclidean_cost(current, sample));
      objective += res.total_cost;
      for (int i = 0; i < support_size; ++i)
        next.col(i) += sample.coords.col(res.plan.perm[static_cast<std::size_t>(i)]);
    }
    next /= b;
    if (objective_log) objective_log->push_back(objective);
    double movement = (next - support).colwise().norm().maxCoeff();
    support = std::move(next);
    if (movement < tol) break;
  }

  ReferenceMeasure ref;
  ref.cloud = PointCloud(std::move(support));
  // Prop-4-style uniqueness needs pairwise distinct reference columns;
  // barycenters of symmetric data can collapse points.
  auto jrng = make_rng(derive_seed(seed, "barycenter-jitter"));
  std::uniform_real_distribution<double> jitter(-1e-9, 1e-9);
  for (int i = 0; i < ref.cloud.count(); ++i) {
    for (int j = 0; j < i; ++j) {
      if ((ref.cloud.coords.col(i) - ref.cloud.coords.col(j)).norm() < 1e-12) {
        for (int r = 0; r < ref.cloud.dim(); ++r) ref.cloud.coords(r, i) += jitter(jrng);
        ref.jittered = true;
        j = -1;  // recheck column i against all earlier columns
      }
    }
  }
  return ref;
}

// Exact-OT matching of c against the reference ordering: slot i of the
// returned permutation holds the column of c matched to reference column i.
inline Permutation align_to_reference(const PointCloud& c, const ReferenceMeasure& ref) {
  require_same_shape(c, ref.cloud, "align_to_reference");
  ExactResult res = solve_exact(squared_euclidean_cost(ref.cloud, c));
  Permutation p;
  p.map = res.plan.perm;
  return p;
}

// Lazy linear divergence: mean squared distance between x_mu (already in
// reference order) and x_nu re-ordered by its precomputed alignment. Always
// an upper bound on W2^2 since the pairing is a feasible coupling; equality
// holds in the concentration regime around the reference.
inline double llw2(const PointCloud& x_mu, const PointCloud& x_nu, const Permutation& perm_nu) {
  require_same_shape(x_mu, x_nu, "llw2");
  if (perm_nu.size() != x_nu.count())
    throw InputError("llw2: alignment permutation size does not match cloud count");
  double acc = 0.0;
  for (int i = 0; i < x_mu.count(); ++i)
    acc += (x_mu.coords.col(i) - x_nu.coords.col(perm_nu.map[static_cast<std::size_t>(i)]))
               .squaredNorm();
  return acc / x_mu.count();
}

// The lazy linear inner plan is a permutation by construction: no OT solve
// happens at call time.
inline InnerPlan llw_inner_plan(const PointCloud& x_mu, const PointCloud& x_nu,
                                const Permutation& perm_nu) {
  require_same_shape(x_mu, x_nu, "llw_inner_plan");
  if (perm_nu.size() != x_nu.count())
    throw InputError("llw_inner_plan: alignment permutation size does not match cloud count");
  return InnerPlan::from_permutation(perm_nu.map);
}

}  // namespace wow

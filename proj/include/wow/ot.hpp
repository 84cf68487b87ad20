#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"

namespace wow {

// Transport plan between two N-point uniform empirical measures. Row/column
// sums are 1/N. Permutation plans keep the pairing as an index map and the
// uniform product stays implicit; only genuinely fractional plans (sliced,
// Sinkhorn) are stored dense.
struct InnerPlan {
  enum class Kind { permutation, uniform, dense };

  Kind kind = Kind::uniform;
  int n = 0;
  std::vector<int> perm;    // kind == permutation: row i pairs with column perm[i]
  Eigen::MatrixXd weights;  // kind == dense

  bool is_permutation() const { return kind == Kind::permutation; }
  bool is_uniform() const { return kind == Kind::uniform; }

  static InnerPlan from_permutation(std::vector<int> p) {
    InnerPlan plan;
    plan.kind = Kind::permutation;
    plan.n = static_cast<int>(p.size());
    plan.perm = std::move(p);
    return plan;
  }

  static InnerPlan from_matrix(Eigen::MatrixXd w) {
    InnerPlan plan;
    plan.kind = Kind::dense;
    plan.n = static_cast<int>(w.rows());
    plan.weights = std::move(w);
    return plan;
  }

  static InnerPlan uniform(int n) {
    InnerPlan plan;
    plan.kind = Kind::uniform;
    plan.n = n;
    return plan;
  }

  double weight(int i, int j) const {
    switch (kind) {
      case Kind::permutation: return perm[static_cast<std::size_t>(i)] == j ? 1.0 / n : 0.0;
      case Kind::uniform: return 1.0 / (static_cast<double>(n) * n);
      case Kind::dense: return weights(i, j);
    }
    return 0.0;
  }

  Eigen::MatrixXd to_matrix() const {
    switch (kind) {
      case Kind::permutation: {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) w(i, perm[static_cast<std::size_t>(i)]) = 1.0 / n;
        return w;
      }
      case Kind::uniform:
        return Eigen::MatrixXd::Constant(n, n, 1.0 / (static_cast<double>(n) * n));
      case Kind::dense: return weights;
    }
    return {};
  }

  // max |marginal - 1/n| over all rows and columns
  double max_marginal_violation() const {
    if (kind != Kind::dense) return 0.0;
    double target = 1.0 / n;
    double viol = 0.0;
    Eigen::VectorXd rows = weights.rowwise().sum();
    Eigen::VectorXd cols = weights.colwise().sum();
    for (int i = 0; i < n; ++i) {
      viol = std::max(viol, std::abs(rows(i) - target));
      viol = std::max(viol, std::abs(cols(i) - target));
    }
    return viol;
  }
};

namespace detail {

// Shortest-augmenting-path assignment (Jonker-Volgenant style, O(N^3)) with
// dual potentials. Scan order is ascending with strict improvement, so equal
// costs resolve to the lowest feasible index deterministically.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-indexed with a virtual column 0
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> assigned_row(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    assigned_row[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = assigned_row[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                     v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(assigned_row[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (assigned_row[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      assigned_row[static_cast<std::size_t>(j0)] = assigned_row[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(assigned_row[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

struct ExactResult {
  InnerPlan plan;
  double total_cost = 0.0;  // (1/N) sum_i cost(i, sigma(i)), i.e. W2^2 for squared costs
};

inline ExactResult solve_exact(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols())
    throw InputError("solve_exact: cost matrix must be square, got " +
                     std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  if (cost.size() == 0) throw InputError("solve_exact: empty cost matrix");
  if (!cost.allFinite()) throw InputError("solve_exact: cost matrix has non-finite entries");
  const int n = static_cast<int>(cost.rows());
  std::vector<int> sigma = detail::solve_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, sigma[static_cast<std::size_t>(i)]);
  ExactResult res;
  res.plan = InnerPlan::from_permutation(std::move(sigma));
  res.total_cost = total / n;
  return res;
}

struct SinkhornResult {
  InnerPlan plan;
  double total_cost = 0.0;  // <plan, cost>, entropy term excluded
  int iterations = 0;
  double marginal_violation = 0.0;
};

// Log-domain Sinkhorn for uniform 1/N marginals; tolerates reg down to 1e-3
// without underflow. The regularizer anneals from the cost scale down to the
// target (potentials warm-started across levels), which replaces the long
// cold-start wandering phase at small reg. Stops when the worst row-marginal
// deviation from 1/N drops below tol (column marginals are exact after each
// column update).
inline SinkhornResult solve_sinkhorn(const Eigen::MatrixXd& cost, double reg,
                                     int max_iter = 10000, double tol = 1e-9) {
  if (cost.rows() != cost.cols())
    throw InputError("solve_sinkhorn: cost matrix must be square");
  if (cost.size() == 0) throw InputError("solve_sinkhorn: empty cost matrix");
  if (!cost.allFinite()) throw InputError("solve_sinkhorn: cost matrix has non-finite entries");
  if (!(reg > 0.0)) throw InputError("solve_sinkhorn: reg must be positive");

  const int n = static_cast<int>(cost.rows());
  const double log_mass = std::log(1.0 / n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);

  auto lse_rows = [&](const Eigen::VectorXd& pot_cols, double eps, Eigen::VectorXd& out) {
    // out(i) = log sum_j exp((pot_cols(j) - cost(i,j)) / eps)
    for (int i = 0; i < n; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) m = std::max(m, (pot_cols(j) - cost(i, j)) / eps);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp((pot_cols(j) - cost(i, j)) / eps - m);
      out(i) = m + std::log(s);
    }
  };
  auto lse_cols = [&](const Eigen::VectorXd& pot_rows, double eps, Eigen::VectorXd& out) {
    for (int j = 0; j < n; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) m = std::max(m, (pot_rows(i) - cost(i, j)) / eps);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::exp((pot_rows(i) - cost(i, j)) / eps - m);
      out(j) = m + std::log(s);
    }
  };

  Eigen::VectorXd lse(n);
  Eigen::MatrixXd plan(n, n);
  double viol = std::numeric_limits<double>::infinity();
  int it = 0;

  double level = std::max(reg, cost.maxCoeff());
  auto sweep = [&](double eps) {
    lse_rows(g, eps, lse);
    f = eps * (Eigen::VectorXd::Constant(n, log_mass) - lse);
    lse_cols(f, eps, lse);
    g = eps * (Eigen::VectorXd::Constant(n, log_mass) - lse);
    ++it;
  };
  while (level > reg && it < max_iter) {
    for (int k = 0; k < 10 && it < max_iter; ++k) sweep(level);
    level = std::max(reg, level / 2.0);
  }
  while (it < max_iter) {
    sweep(reg);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) plan(i, j) = std::exp((f(i) + g(j) - cost(i, j)) / reg);
    viol = 0.0;
    Eigen::VectorXd rows = plan.rowwise().sum();
    for (int i = 0; i < n; ++i) viol = std::max(viol, std::abs(rows(i) - 1.0 / n));
    if (viol <= tol) break;
  }
  if (viol > tol)
    throw ConvergenceError("solve_sinkhorn: marginal violation " + std::to_string(viol) +
                               " above tol after " + std::to_string(max_iter) + " iterations",
                           viol);
  SinkhornResult res;
  res.total_cost = (plan.array() * cost.array()).sum();
  res.plan = InnerPlan::from_matrix(std::move(plan));
  res.iterations = it;
  res.marginal_violation = viol;
  return res;
}

struct W2Options {
  std::optional<double> sinkhorn_reg;  // absent -> exact assignment solver
  int sinkhorn_max_iter = 10000;
  double sinkhorn_tol = 1e-9;
};

struct W2Result {
  double distance_sq = 0.0;
  InnerPlan plan;
};

// Squared 2-Wasserstein distance between equal-size uniform empirical
// measures. Unequal sizes are rejected: the whole pipeline only ever
// compares clouds of matching resolution.
inline W2Result wasserstein2(const PointCloud& a, const PointCloud& b,
                             const W2Options& opt = {}) {
  require_same_dim(a, b, "wasserstein2");
  if (a.count() != b.count())
    throw InputError("wasserstein2: only equal-size uniform measures are supported (" +
                     std::to_string(a.count()) + " vs " + std::to_string(b.count()) + ")");
  Eigen::MatrixXd cost = squared_euclidean_cost(a, b);
  W2Result out;
  if (opt.sinkhorn_reg) {
    SinkhornResult s =
        solve_sinkhorn(cost, *opt.sinkhorn_reg, opt.sinkhorn_max_iter, opt.sinkhorn_tol);
    out.distance_sq = s.total_cost;
    out.plan = std::move(s.plan);
  } else {
    ExactResult e = solve_exact(cost);
    out.distance_sq = e.total_cost;
    out.plan = std::move(e.plan);
  }
  return out;
}

}  // namespace wow

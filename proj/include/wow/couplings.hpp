#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/linearized.hpp"
#include "wow/ot.hpp"
#include "wow/parallel.hpp"
#include "wow/rng.hpp"
#include "wow/sliced.hpp"

namespace wow {

enum class PlanKind { ind, w, sw, llw };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::ind: return "ind";
    case PlanKind::w: return "w";
    case PlanKind::sw: return "sw";
    case PlanKind::llw: return "llw";
  }
  return "?";
}

inline PlanKind plan_kind_from_string(const std::string& s) {
  if (s == "ind") return PlanKind::ind;
  if (s == "w") return PlanKind::w;
  if (s == "sw") return PlanKind::sw;
  if (s == "llw") return PlanKind::llw;
  throw InputError("unknown coupling kind '" + s + "' (expected ind|w|sw|llw)");
}

struct CouplingConfig {
  PlanKind outer = PlanKind::ind;
  PlanKind inner = PlanKind::ind;
  int slices = 8;                      // sliced estimator directions
  std::optional<double> sinkhorn_reg;  // absent -> exact solver for w plans

  bool uses_llw() const { return outer == PlanKind::llw || inner == PlanKind::llw; }
};

// Coupling between two batches of B clouds each; marginals 1/B. Solved plans
// for equal uniform marginals are permutations scaled by 1/B; the independent
// outer plan is the dense uniform product.
struct OuterPlan {
  int b = 0;
  std::vector<int> perm;
  Eigen::MatrixXd weights;

  bool is_permutation() const { return !perm.empty(); }

  static OuterPlan uniform(int b) {
    OuterPlan p;
    p.b = b;
    p.weights = Eigen::MatrixXd::Constant(b, b, 1.0 / (static_cast<double>(b) * b));
    return p;
  }

  static OuterPlan from_permutation(std::vector<int> sigma) {
    OuterPlan p;
    p.b = static_cast<int>(sigma.size());
    p.perm = std::move(sigma);
    return p;
  }

  double weight(int i, int j) const {
    if (is_permutation()) return perm[static_cast<std::size_t>(i)] == j ? 1.0 / b : 0.0;
    return weights(i, j);
  }

  Eigen::MatrixXd to_matrix() const {
    if (!is_permutation()) return weights;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(b, b);
    for (int i = 0; i < b; ++i) w(i, perm[static_cast<std::size_t>(i)]) = 1.0 / b;
    return w;
  }
};

// Everything llw-flavoured needs: the reference and one alignment permutation
// per target cloud, indexed like the target batch.
struct LlwContext {
  const ReferenceMeasure* ref = nullptr;
  const std::vector<Permutation>* target_perms = nullptr;
};

// Pairwise LLW cost between flattened batches already in reference order:
// entry (i, j) = mean_p ||u_i[p] - w_j[p]||^2 with u, w shaped (d*N) x B.
// One Gram product covers the whole B x B matrix.
inline Eigen::MatrixXd llw_cost_from_aligned(const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                                             int n_points) {
  if (u.rows() != w.rows()) throw InputError("llw_cost_from_aligned: vector length mismatch");
  Eigen::VectorXd un = u.colwise().squaredNorm();
  Eigen::VectorXd wn = w.colwise().squaredNorm();
  Eigen::MatrixXd cost = -2.0 * (u.transpose() * w);
  cost.colwise() += un;
  cost.rowwise() += wn.transpose();
  return cost.cwiseMax(0.0) / n_points;
}

// B x B matrix of the configured divergence between source cloud i and target
// cloud i'. Not defined for outer = ind (the uniform product needs no costs).
inline Eigen::MatrixXd outer_cost_matrix(const MetaBatch& src, const MetaBatch& tgt,
                                         const CouplingConfig& cfg, std::uint64_t seed,
                                         const LlwContext& llw = {}, int threads = 1) {
  src.validate();
  tgt.validate();
  if (src.size() != tgt.size())
    throw InputError("outer_cost_matrix: batch sizes differ (" + std::to_string(src.size()) +
                     " vs " + std::to_string(tgt.size()) + ")");
  if (src.dim() != tgt.dim()) throw InputError("outer_cost_matrix: batch dimensions differ");
  const int b = src.size();
  Eigen::MatrixXd cost(b, b);

  switch (cfg.outer) {
    case PlanKind::ind:
      throw InputError("outer_cost_matrix: independent outer plan has no cost matrix");
    case PlanKind::w: {
      W2Options opt;
      opt.sinkhorn_reg = cfg.sinkhorn_reg;
      parallel_for(static_cast<long>(b) * b, threads, [&](long e) {
        int i = static_cast<int>(e / b), j = static_cast<int>(e % b);
        cost(i, j) = wasserstein2(src.clouds[static_cast<std::size_t>(i)],
                                  tgt.clouds[static_cast<std::size_t>(j)], opt)
                         .distance_sq;
      });
      break;
    }
    case PlanKind::sw: {
      // One fresh direction set per recomputation, shared across all entries.
      DirectionSet dirs = sample_directions(src.dim(), cfg.slices, derive_seed(seed, "op-sw-dirs"));
      parallel_for(static_cast<long>(b) * b, threads, [&](long e) {
        int i = static_cast<int>(e / b), j = static_cast<int>(e % b);
        cost(i, j) = sliced_w2(src.clouds[static_cast<std::size_t>(i)],
                               tgt.clouds[static_cast<std::size_t>(j)], dirs);
      });
      break;
    }
    case PlanKind::llw: {
      if (!llw.ref || !llw.target_perms)
        throw InputError("outer_cost_matrix: llw outer plan requires a reference measure and "
                         "precomputed target alignments");
      if (static_cast<int>(llw.target_perms->size()) != b)
        throw InputError("outer_cost_matrix: one alignment permutation per target cloud required");
      // Vectorized form of mean_i ||u_i - w_j||^2 over flattened clouds: the
      // per-step cost is a single B x B Gram product. Targets are gathered
      // into reference order in place.
      const int d = src.dim();
      const int count = src.clouds.front().count();
      const int dn = d * count;
      Eigen::MatrixXd u(dn, b), w(dn, b);
      for (int i = 0; i < b; ++i) {
        const PointCloud& s = src.clouds[static_cast<std::size_t>(i)];
        const PointCloud& t = tgt.clouds[static_cast<std::size_t>(i)];
        require_same_shape(s, llw.ref->cloud, "outer_cost_matrix(llw source)");
        require_same_shape(t, llw.ref->cloud, "outer_cost_matrix(llw target)");
        const Permutation& perm = (*llw.target_perms)[static_cast<std::size_t>(i)];
        if (perm.size() != count)
          throw InputError("outer_cost_matrix: alignment permutation size mismatch");
        u.col(i) = Eigen::Map<const Eigen::VectorXd>(s.coords.data(), dn);
        double* wcol = w.col(i).data();
        for (int j = 0; j < count; ++j) {
          const double* point = t.coords.col(perm.map[static_cast<std::size_t>(j)]).data();
          for (int r = 0; r < d; ++r) wcol[static_cast<std::size_t>(j) * d + r] = point[r];
        }
      }
      cost = llw_cost_from_aligned(u, w, count);
      break;
    }
  }
  return cost;
}

// Equal uniform marginals make the outer transport problem an assignment;
// the optimal plan is a permutation scaled by 1/B.
inline OuterPlan solve_outer(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) throw InputError("solve_outer: cost matrix has non-finite entries");
  ExactResult res = solve_exact(cost);
  return OuterPlan::from_permutation(res.plan.perm);
}

inline InnerPlan inner_plan(const PointCloud& a, const PointCloud& b, const CouplingConfig& cfg,
                            std::uint64_t seed, const ReferenceMeasure* ref = nullptr,
                            const Permutation* perm_nu = nullptr) {
  require_same_shape(a, b, "inner_plan");
  switch (cfg.inner) {
    case PlanKind::ind:
      return InnerPlan::uniform(a.count());
    case PlanKind::w: {
      W2Options opt;
      opt.sinkhorn_reg = cfg.sinkhorn_reg;
      return wasserstein2(a, b, opt).plan;
    }
    case PlanKind::sw: {
      DirectionSet dirs = sample_directions(a.dim(), cfg.slices, derive_seed(seed, "ip-sw-dirs"));
      return sliced_plan(a, b, dirs);
    }
    case PlanKind::llw: {
      if (!ref || !perm_nu)
        throw InputError("inner_plan: llw requires a reference measure and the target's "
                         "precomputed alignment permutation");
      return llw_inner_plan(a, b, *perm_nu);
    }
  }
  throw InputError("inner_plan: unknown kind");
}

// The sampled discrete surrogate of the random coupling: B (source, target)
// pairs drawn from the outer plan, each carrying its inner plan.
struct PairedBatch {
  struct Pair {
    PointCloud source;
    PointCloud target;
    InnerPlan inner;
  };
  std::vector<Pair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
};

namespace detail {

// One multinomial draw over the flattened weight matrix.
template <typename WeightFn>
inline std::pair<int, int> multinomial_cell(int rows, int cols, WeightFn w, double u) {
  double acc = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      acc += w(i, j);
      if (u < acc) return {i, j};
    }
  }
  return {rows - 1, cols - 1};  // guard against accumulated rounding
}

}  // namespace detail

inline PairedBatch sample_paired_batch(const MetaBatch& src, const MetaBatch& tgt,
                                       const CouplingConfig& cfg, std::uint64_t seed,
                                       const LlwContext& llw = {}, int threads = 1) {
  src.validate();
  tgt.validate();
  if (src.size() != tgt.size()) throw InputError("sample_paired_batch: batch sizes differ");
  const int b = src.size();

  OuterPlan outer;
  if (cfg.outer == PlanKind::ind) {
    outer = OuterPlan::uniform(b);
  } else {
    outer = solve_outer(outer_cost_matrix(src, tgt, cfg, derive_seed(seed, "outer-cost"), llw,
                                          threads));
  }

  auto rng = make_rng(derive_seed(seed, "outer-draw"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PairedBatch batch;
  batch.pairs.reserve(static_cast<std::size_t>(b));
  for (int k = 0; k < b; ++k) {
    auto [i, j] = detail::multinomial_cell(
        b, b, [&](int r, int c) { return outer.weight(r, c); }, unif(rng));
    PairedBatch::Pair pair;
    pair.source = src.clouds[static_cast<std::size_t>(i)];
    pair.target = tgt.clouds[static_cast<std::size_t>(j)];
    const Permutation* perm_nu = nullptr;
    if (cfg.inner == PlanKind::llw) {
      if (!llw.target_perms || static_cast<int>(llw.target_perms->size()) != b)
        throw InputError("sample_paired_batch: llw inner plan requires target alignments");
      perm_nu = &(*llw.target_perms)[static_cast<std::size_t>(j)];
    }
    pair.inner = inner_plan(pair.source, pair.target, cfg,
                            derive_seed(seed, "inner", static_cast<std::uint64_t>(k)), llw.ref,
                            perm_nu);
    batch.pairs.push_back(std::move(pair));
  }
  return batch;
}

// Matched point columns for one pair. Permutation plans use every matched
// pair exactly once (same expectation as resampling, less variance);
// fractional plans draw N multinomial samples from the N^2 plan entries.
inline std::pair<PointCloud, PointCloud> draw_matched_points(const PairedBatch::Pair& pair,
                                                             std::uint64_t seed) {
  const int n = pair.source.count();
  const int d = pair.source.dim();
  Eigen::MatrixXd x(d, n), xp(d, n);
  switch (pair.inner.kind) {
    case InnerPlan::Kind::permutation:
      for (int i = 0; i < n; ++i) {
        x.col(i) = pair.source.coords.col(i);
        xp.col(i) = pair.target.coords.col(pair.inner.perm[static_cast<std::size_t>(i)]);
      }
      break;
    case InnerPlan::Kind::uniform: {
      auto rng = make_rng(derive_seed(seed, "inner-draw"));
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int k = 0; k < n; ++k) {
        x.col(k) = pair.source.coords.col(pick(rng));
        xp.col(k) = pair.target.coords.col(pick(rng));
      }
      break;
    }
    case InnerPlan::Kind::dense: {
      auto rng = make_rng(derive_seed(seed, "inner-draw"));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> cumulative(static_cast<std::size_t>(n) * n);
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          acc += pair.inner.weights(i, j);
          cumulative[static_cast<std::size_t>(i) * n + j] = acc;
        }
      cumulative.back() = std::max(cumulative.back(), 1.0);
      for (int k = 0; k < n; ++k) {
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unif(rng));
        if (it == cumulative.end()) --it;
        auto cell = static_cast<long>(it - cumulative.begin());
        x.col(k) = pair.source.coords.col(static_cast<int>(cell / n));
        xp.col(k) = pair.target.coords.col(static_cast<int>(cell % n));
      }
      break;
    }
  }
  return {PointCloud(std::move(x)), PointCloud(std::move(xp))};
}

}  // namespace wow

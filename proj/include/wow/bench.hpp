#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "wow/couplings.hpp"
#include "wow/data.hpp"
#include "wow/errors.hpp"
#include "wow/rng.hpp"

namespace wow {

// One (outer, inner) combination timed per training step. inner = nullopt
// marks the lazy linear row, whose inner pairing is free by construction.
struct BenchRow {
  PlanKind outer = PlanKind::ind;
  std::optional<PlanKind> inner;
  int batch = 0;
  int n = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

struct BenchCase {
  PlanKind outer;
  std::optional<PlanKind> inner;
};

// The Table-4-style grid: per (B, N), time the transport work a training step
// pays for: outer cost matrix, outer solve, pair sampling, inner plans.
// Clouds are uniform in [0,1]^2. LLW alignment permutations are precomputed
// (that is a one-off preprocessing cost in training, not per-step work).
inline BenchRow bench_combination(const BenchCase& combo, int b, int n, int reps,
                                  std::uint64_t seed, int threads = 1) {
  auto make_batch = [&](std::uint64_t s) {
    MetaBatch batch;
    batch.clouds.reserve(static_cast<std::size_t>(b));
    auto rng = make_rng(s);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < b; ++k) {
      Eigen::MatrixXd coords(2, n);
      for (int j = 0; j < n; ++j) {
        coords(0, j) = unif(rng);
        coords(1, j) = unif(rng);
      }
      batch.clouds.emplace_back(std::move(coords));
    }
    return batch;
  };

  CouplingConfig cfg;
  cfg.outer = combo.outer;
  cfg.inner = combo.inner.value_or(PlanKind::llw);

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  using clock = std::chrono::steady_clock;
  // rep -1 is an unrecorded warmup pass (allocator and cache effects)
  for (int rep = -1; rep < reps; ++rep) {
    std::uint64_t rep_index = static_cast<std::uint64_t>(rep < 0 ? 0 : rep);
    MetaBatch src = make_batch(derive_seed(seed, "bench-src", rep_index));
    MetaBatch tgt = make_batch(derive_seed(seed, "bench-tgt", rep_index));

    ReferenceMeasure ref;
    std::vector<Permutation> perms;
    LlwContext llw;
    Eigen::MatrixXd aligned_src, aligned_tgt;  // flattened, reference order
    if (cfg.uses_llw()) {
      ref.cloud = src.clouds.front();
      perms.reserve(static_cast<std::size_t>(b));
      for (const auto& c : tgt.clouds) perms.push_back(align_to_reference(c, ref));
      llw.ref = &ref;
      llw.target_perms = &perms;
      // the lazy pipeline stores clouds pre-ordered: sources come out of the
      // barycentric sampler aligned, targets are aligned once when the
      // dataset is prepared
      const int dn = 2 * n;
      aligned_src.resize(dn, b);
      aligned_tgt.resize(dn, b);
      for (int i = 0; i < b; ++i) {
        aligned_src.col(i) =
            Eigen::Map<const Eigen::VectorXd>(src.clouds[static_cast<std::size_t>(i)].coords.data(), dn);
        PointCloud ordered = apply_permutation(perms[static_cast<std::size_t>(i)],
                                               tgt.clouds[static_cast<std::size_t>(i)]);
        aligned_tgt.col(i) = Eigen::Map<const Eigen::VectorXd>(ordered.coords.data(), dn);
      }
    }

    // Timed region mirrors what a training step pays the transport solver
    // for: outer cost + outer solve + pair draws + inner plans. Generic batch
    // assembly (cloud copies into the loss) is excluded; it is identical for
    // every combination.
    std::uint64_t step_seed = derive_seed(seed, "bench-step", rep_index);
    auto t0 = clock::now();
    OuterPlan outer;
    if (cfg.outer == PlanKind::ind) {
      outer = OuterPlan::uniform(b);
    } else if (cfg.outer == PlanKind::llw) {
      outer = solve_outer(llw_cost_from_aligned(aligned_src, aligned_tgt, n));
    } else {
      outer = solve_outer(
          outer_cost_matrix(src, tgt, cfg, derive_seed(step_seed, "outer-cost"), llw, threads));
    }
    auto rng = make_rng(derive_seed(step_seed, "outer-draw"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<InnerPlan> inner_plans;
    inner_plans.reserve(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k) {
      auto [i, j] = detail::multinomial_cell(
          b, b, [&](int r, int c) { return outer.weight(r, c); }, unif(rng));
      const Permutation* perm_nu =
          cfg.inner == PlanKind::llw ? &perms[static_cast<std::size_t>(j)] : nullptr;
      inner_plans.push_back(inner_plan(src.clouds[static_cast<std::size_t>(i)],
                                       tgt.clouds[static_cast<std::size_t>(j)], cfg,
                                       derive_seed(step_seed, "inner", static_cast<std::uint64_t>(k)),
                                       llw.ref, perm_nu));
    }
    double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    (void)inner_plans;
    if (rep >= 0) samples.push_back(ms);
  }

  BenchRow row;
  row.outer = combo.outer;
  row.inner = combo.inner;
  row.batch = b;
  row.n = n;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= reps;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  row.mean_ms = mean;
  row.std_ms = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
  return row;
}

inline void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open bench CSV '" + path + "' for writing", 0);
  out << "outer,inner,batch,n,mean_ms,std_ms\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.4f,%.4f\n", to_string(r.outer),
                  r.inner ? to_string(*r.inner) : "-", r.batch, r.n, r.mean_ms, r.std_ms);
    out << buf;
  }
}

}  // namespace wow

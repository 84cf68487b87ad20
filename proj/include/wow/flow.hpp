#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/couplings.hpp"
#include "wow/data.hpp"
#include "wow/errors.hpp"
#include "wow/net.hpp"
#include "wow/rng.hpp"

namespace wow {

struct TrainConfig {
  long steps = 0;   // gradient steps; if 0, derived from epochs
  long epochs = 0;  // passes over the target dataset (floor(count / batch) steps each)
  int batch = 8;
  double lr = 5e-4;
  CouplingConfig coupling;
  SourceSpec source;
  int n_min = 0;  // 0 -> use the target dataset's cloud size
  int n_max = 0;
  NetConfig net;
  std::uint64_t seed = 0;
  int threads = 1;
  long checkpoint_every = 0;  // 0 -> only the final checkpoint
  std::string checkpoint_path;
  std::string log_path;
};

struct StepLog {
  long step = 0;
  double loss = 0.0;
  double coupling_ms = 0.0;
  double step_ms = 0.0;
};

inline void write_training_log(const std::string& path, const std::vector<StepLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open training log '" + path + "' for writing", 0);
  out << "step,loss,coupling_ms,step_ms\n";
  char buf[160];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.6g,%.6g\n", row.step, row.loss, row.coupling_ms,
                  row.step_ms);
    out << buf;
  }
}

struct FmLossResult {
  double loss = 0.0;
  NetGrads grads;
};

// Monte Carlo flow-matching loss: per matched pair, regress the field at the
// interpolated cloud onto the displacement x' - x. Loss is the mean over the
// batch of the per-point mean squared deviation; gradients come from the
// traced reverse pass, accumulated in batch order.
inline FmLossResult fm_loss(const VelocityNet& net, const PairedBatch& batch, double t,
                            std::uint64_t seed) {
  if (batch.size() == 0) throw InputError("fm_loss: empty batch");
  FmLossResult out;
  out.grads = NetGrads::zeros_like(net);
  const int b = batch.size();
  for (int k = 0; k < b; ++k) {
    auto [x, xp] =
        draw_matched_points(batch.pairs[static_cast<std::size_t>(k)],
                            derive_seed(seed, "pair-draw", static_cast<std::uint64_t>(k)));
    PointCloud xt = interpolate(x, xp, t);
    Eigen::MatrixXd target = xp.coords - x.coords;
    ForwardTrace trace;
    Eigen::MatrixXd pred = forward(net, t, xt, &trace);
    Eigen::MatrixXd resid = pred - target;
    const int n = x.count();
    out.loss += resid.squaredNorm() / n;
    Eigen::MatrixXd upstream = resid * (2.0 / (static_cast<double>(b) * n));
    out.grads.accumulate(backward_from_trace(net, trace, upstream));
  }
  out.loss /= b;
  return out;
}

struct TrainResult {
  VelocityNet net;
  std::vector<StepLog> log;
};

namespace detail {

// Without-replacement sampling per pass over a dataset; reshuffles with a
// fresh derived seed when exhausted.
struct EpochStream {
  const CloudDataset* ds = nullptr;
  std::uint64_t seed = 0;
  std::vector<int> order;
  std::size_t pos = 0;
  std::uint64_t epoch = 0;

  int next() {
    if (pos >= order.size()) {
      order.resize(static_cast<std::size_t>(ds->count()));
      std::iota(order.begin(), order.end(), 0);
      auto rng = make_rng(derive_seed(seed, "epoch-shuffle", epoch++));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
      }
      pos = 0;
    }
    return order[pos++];
  }
};

}  // namespace detail

// One training run of the Monte Carlo objective. Per step: draw t and N, draw
// B source and B target clouds, build the configured outer/inner plans fresh,
// take one Adam step. Deterministic given the seed in single-threaded mode.
inline TrainResult train(const TrainConfig& cfg, const CloudDataset& targets,
                         const ReferenceMeasure* ref = nullptr) {
  targets.validate();
  if (targets.count() == 0) throw InputError("train: target dataset is empty");
  if (cfg.batch < 1) throw InputError("train: batch must be >= 1");
  cfg.source.validate();
  cfg.net.validate();

  int n_min = cfg.n_min > 0 ? cfg.n_min : targets.clouds.front().count();
  int n_max = cfg.n_max > 0 ? cfg.n_max : n_min;
  if (n_min > n_max) throw InputError("train: n_min must not exceed n_max");
  for (const auto& c : targets.clouds)
    if (c.count() < n_max)
      throw InputError("train: target clouds must hold at least n_max points");

  const bool uses_llw = cfg.coupling.uses_llw();
  if (uses_llw) {
    if (!ref) throw InputError("train: llw couplings require a reference measure (ref)");
    if (!targets.has_perms)
      throw InputError("train: llw couplings require precomputed target alignments "
                       "(run the barycenter step first)");
    if (n_min != n_max || n_min != ref->cloud.count())
      throw InputError("train: llw couplings require a fixed N equal to the reference size");
    for (const auto& c : targets.clouds)
      if (c.count() != n_min)
        throw InputError("train: llw couplings require all target clouds at the reference size");
  }
  if (cfg.source.kind == SourceKind::barycentric_noise) {
    if (!cfg.source.ref) throw InputError("train: barycentric noise requires a reference");
    if (n_min != n_max || cfg.source.ref->cloud.count() != n_min)
      throw InputError("train: barycentric noise requires a fixed N equal to the reference size");
  }

  long steps_per_epoch = targets.count() / cfg.batch;
  long steps = cfg.steps > 0 ? cfg.steps : cfg.epochs * steps_per_epoch;
  if (steps < 1) throw InputError("train: configured step count is zero");

  VelocityNet net = make_net(cfg.net, derive_seed(cfg.seed, "init"));
  AdamState adam = AdamState::init(net, cfg.lr);

  detail::EpochStream target_stream{&targets, derive_seed(cfg.seed, "target-stream")};
  detail::EpochStream source_stream;
  if (cfg.source.kind == SourceKind::empirical)
    source_stream = {cfg.source.dataset.get(), derive_seed(cfg.seed, "source-stream")};

  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(steps));
  using clock = std::chrono::steady_clock;

  for (long s = 0; s < steps; ++s) {
    auto t_begin = clock::now();
    std::uint64_t step_seed = derive_seed(cfg.seed, "step", static_cast<std::uint64_t>(s));
    auto rng = make_rng(derive_seed(step_seed, "draws"));
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    double t = unif01(rng);
    int n = n_min;
    if (n_max > n_min) {
      std::uniform_int_distribution<int> pick(n_min, n_max);
      n = pick(rng);
    }

    MetaBatch src;
    if (cfg.source.kind == SourceKind::empirical) {
      src.clouds.reserve(static_cast<std::size_t>(cfg.batch));
      for (int k = 0; k < cfg.batch; ++k) {
        const PointCloud& c =
            cfg.source.dataset->clouds[static_cast<std::size_t>(source_stream.next())];
        src.clouds.push_back(detail::subsample_cloud(c, n, rng));
      }
    } else {
      src = draw_source(cfg.source, n, cfg.batch, derive_seed(step_seed, "source"));
    }

    MetaBatch tgt;
    std::vector<Permutation> tgt_perms;
    tgt.clouds.reserve(static_cast<std::size_t>(cfg.batch));
    for (int k = 0; k < cfg.batch; ++k) {
      int idx = target_stream.next();
      tgt.clouds.push_back(
          detail::subsample_cloud(targets.clouds[static_cast<std::size_t>(idx)], n, rng));
      if (uses_llw) tgt_perms.push_back(targets.perms[static_cast<std::size_t>(idx)]);
    }

    LlwContext llw;
    if (uses_llw) {
      llw.ref = ref;
      llw.target_perms = &tgt_perms;
    }

    auto t_couple = clock::now();
    PairedBatch batch = sample_paired_batch(src, tgt, cfg.coupling,
                                            derive_seed(step_seed, "couple"), llw, cfg.threads);
    double coupling_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t_couple).count();

    FmLossResult fm = fm_loss(net, batch, t, derive_seed(step_seed, "loss"));
    if (!std::isfinite(fm.loss))
      throw NumericError("train: non-finite loss at step " + std::to_string(s) +
                             " (replay with step seed " + std::to_string(step_seed) + ")",
                         s);
    adam_step(adam, net, fm.grads);

    StepLog row;
    row.step = s;
    row.loss = fm.loss;
    row.coupling_ms = coupling_ms;
    row.step_ms = std::chrono::duration<double, std::milli>(clock::now() - t_begin).count();
    result.log.push_back(row);

    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (s + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(cfg.checkpoint_path, net);
  }

  if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, net);
  if (!cfg.log_path.empty()) write_training_log(cfg.log_path, result.log);
  result.net = std::move(net);
  return result;
}

// ---------------------------------------------------------------------------
// Sampling

struct Trajectory {
  std::vector<double> times;       // t_0 = 0 < ... < t_K = 1
  std::vector<PointCloud> states;  // K + 1 snapshots
};

// Fixed-step explicit Euler on the whole cloud jointly: the field is
// non-local, every point's velocity sees the full current cloud.
inline Trajectory euler_sample(const VelocityNet& net, const PointCloud& x0, int steps) {
  if (steps < 1) throw InputError("euler_sample: need at least one step");
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  PointCloud x = x0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) / steps;
    Eigen::MatrixXd v = forward(net, t, x);
    x.coords += dt * v;
    if (!x.finite())
      throw NumericError("euler_sample: non-finite state after step " + std::to_string(k), k);
    traj.times.push_back(static_cast<double>(k + 1) / steps);
    traj.states.push_back(x);
  }
  return traj;
}

// Mean over points of ||endpoint - start|| / path length; 1 for straight
// lines, and 1 by convention for stationary points.
inline double straightness(const Trajectory& traj) {
  if (traj.states.size() < 2) throw InputError("straightness: need at least two states");
  const PointCloud& first = traj.states.front();
  const int n = first.count();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double path = 0.0;
    for (std::size_t k = 1; k < traj.states.size(); ++k)
      path += (traj.states[k].coords.col(i) - traj.states[k - 1].coords.col(i)).norm();
    double chord = (traj.states.back().coords.col(i) - first.coords.col(i)).norm();
    acc += path == 0.0 ? 1.0 : chord / path;
  }
  return acc / n;
}

// CSV dump: one row per (time, cloud, point).
inline void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw InputError("write_trajectories: nothing to write");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open trajectory file '" + path + "' for writing", 0);
  int d = trajs.front().states.front().dim();
  out << "t,cloud_id,point_id";
  for (int r = 0; r < d; ++r) out << ",c" << r;
  out << "\n";
  char buf[64];
  for (std::size_t ci = 0; ci < trajs.size(); ++ci) {
    const Trajectory& traj = trajs[ci];
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const PointCloud& state = traj.states[k];
      for (int p = 0; p < state.count(); ++p) {
        std::snprintf(buf, sizeof(buf), "%.10g,%zu,%d", traj.times[k], ci, p);
        out << buf;
        for (int r = 0; r < d; ++r) {
          std::snprintf(buf, sizeof(buf), ",%.17g", state.coords(r, p));
          out << buf;
        }
        out << "\n";
      }
    }
  }
}

}  // namespace wow

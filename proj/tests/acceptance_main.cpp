// Acceptance suite: runs every advertised guarantee end-to-end and prints one
// pass/fail line per criterion. Exit code is the number of failed criteria.
//
//   ./acceptance          run everything
//   ./acceptance 3 10     run criteria 3 and 10 only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wow/wow.hpp"

using namespace wow;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// C1: exact solver equals brute force over all permutations

bool c1_exact_oracle(std::string& detail) {
  auto start = clock_type::now();
  std::mt19937_64 rng(20250101);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + static_cast<int>(rng() % 6);  // 2..7
    int d = 1 + static_cast<int>(rng() % 3);  // 1..3
    PointCloud a = oracle::random_cloud(d, n, rng());
    PointCloud b = oracle::random_cloud(d, n, rng());
    Eigen::MatrixXd cost = squared_euclidean_cost(a, b);
    double fast = solve_exact(cost).total_cost;
    double brute = oracle::brute_force_assignment(cost).total / n;
    worst = std::max(worst, std::abs(fast - brute));
    if (worst > 1e-9) {
      detail = "trial " + std::to_string(trial) + " deviates by " + std::to_string(worst);
      return false;
    }
  }
  double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "500 pairs, max |dev| %.2e, %.2f s", worst, elapsed);
  detail = buf;
  return elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// C2: optimal outer plan + exact inner distances reproduce brute-force WoW^2

bool c2_lemma1_identity(std::string& detail) {
  std::mt19937_64 rng(20250102);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int b = 2 + static_cast<int>(rng() % 3);  // 2..4
    int n = 2 + static_cast<int>(rng() % 3);  // 2..4
    int d = 1 + static_cast<int>(rng() % 3);
    MetaBatch src, tgt;
    for (int k = 0; k < b; ++k) {
      src.clouds.push_back(oracle::random_cloud(d, n, rng()));
      tgt.clouds.push_back(oracle::random_cloud(d, n, rng()));
    }
    CouplingConfig cfg;
    cfg.outer = PlanKind::w;
    Eigen::MatrixXd cost = outer_cost_matrix(src, tgt, cfg, 0);
    OuterPlan plan = solve_outer(cost);
    double expected = (plan.to_matrix().array() * cost.array()).sum();
    double brute = oracle::brute_force_wow(src.clouds, tgt.clouds);
    worst = std::max(worst, std::abs(expected - brute));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "100 cases, max |dev| %.2e", worst);
  detail = buf;
  return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// C3: lazy linear divergence equals the exact distance near the reference

bool c3_locality(std::string& detail) {
  ReferenceMeasure ref;
  ref.cloud = oracle::random_cloud(2, 16, 20250103);
  double eps = 1e-4 * detail::min_pairwise_gap(ref.cloud);
  int hits = 0;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    PointCloud target = oracle::random_cloud(2, 16, 31000 + trial);
    Permutation perm = align_to_reference(target, ref);
    PointCloud source = ref.cloud;
    source.coords += eps * oracle::random_cloud(2, 16, 32000 + trial).coords;
    double lazy = llw2(source, target, perm);
    double exact = wasserstein2(source, target).distance_sq;
    double dev = std::abs(lazy - exact);
    worst = std::max(worst, dev);
    if (dev <= 1e-9) ++hits;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/100 trials equal, max |dev| %.2e", hits, worst);
  detail = buf;
  return hits == 100;
}

// ---------------------------------------------------------------------------
// C4: sliced estimator is exact in 1D and converges in L

bool c4_sliced(std::string& detail) {
  double worst_1d = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    PointCloud a = oracle::random_cloud(1, 8, 41000 + trial);
    PointCloud b = oracle::random_cloud(1, 8, 42000 + trial);
    double sw = sliced_w2(a, b, sample_directions(1, 8, trial));
    double w2 = wasserstein2(a, b).distance_sq;
    worst_1d = std::max(worst_1d, std::abs(sw - w2));
  }
  if (worst_1d > 1e-9) {
    detail = "1D deviation " + std::to_string(worst_1d);
    return false;
  }

  double worst_rel = 0.0;
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    PointCloud a = oracle::random_cloud(2, 8, 43000 + pair);
    PointCloud b = oracle::random_cloud(2, 8, 44000 + pair);
    double estimate = sliced_w2(a, b, sample_directions(2, 100000, 45000 + pair));
    // 1e7-direction reference evaluated in 100 chunks of 1e5
    double reference = 0.0;
    for (std::uint64_t chunk = 0; chunk < 100; ++chunk)
      reference +=
          sliced_w2(a, b, sample_directions(2, 100000, 46000 + pair * 100 + chunk)) / 100.0;
    worst_rel = std::max(worst_rel, std::abs(estimate - reference) / reference);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "1D max |dev| %.2e, 2D max rel err %.3f%% (L=1e5 vs 1e7)",
                worst_1d, 100.0 * worst_rel);
  detail = buf;
  return worst_rel < 0.02;
}

// ---------------------------------------------------------------------------
// C5: Sinkhorn cost decreases toward the exact value as reg shrinks

bool c5_sinkhorn(std::string& detail) {
  double worst_gap = 0.0;
  double worst_mono = 0.0;
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    PointCloud a = oracle::uniform_cloud(2, 16, 51000 + pair);
    PointCloud b = oracle::uniform_cloud(2, 16, 52000 + pair);
    Eigen::MatrixXd cost = squared_euclidean_cost(a, b);
    double exact = solve_exact(cost).total_cost;
    double previous = std::numeric_limits<double>::infinity();
    for (double reg : {1.0, 1e-1, 1e-2, 1e-3}) {
      // 1e-6 marginal tolerance: hard small-reg instances cannot reach 1e-9
      // in any sane iteration budget, and the induced cost error sits orders
      // below the scales checked here
      double value = solve_sinkhorn(cost, reg, 300000, 1e-6).total_cost;
      worst_mono = std::max(worst_mono, value - previous);
      if (value < exact - 1e-6) {
        detail = "entropic cost undercuts the exact value";
        return false;
      }
      previous = value;
      if (reg == 1e-3) worst_gap = std::max(worst_gap, (value - exact) / exact);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "20 pairs, worst monotonicity slack %.2e, reg=1e-3 gap %.3f%%",
                std::max(worst_mono, 0.0), 100.0 * worst_gap);
  detail = buf;
  return worst_mono <= 1e-6 && worst_gap < 0.01;
}

// ---------------------------------------------------------------------------
// C6: end-to-end loss gradients match central finite differences

bool c6_gradients(std::string& detail) {
  std::mt19937_64 rng(20250106);
  NetConfig cfg;
  cfg.dim = 2;
  cfg.k_local = 2;
  cfg.mlp_layers = 1;
  cfg.hidden_width = 8;
  cfg.attn_heads = 2;
  cfg.attn_dim = 8;
  cfg.time_embed_dim = 4;
  VelocityNet net = make_net(cfg, rng());
  std::normal_distribution<double> gauss(0.0, 0.4);
  for (auto& w : net.weights)
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng);
  if (net.parameter_count() > 2000) {
    detail = "test net too large";
    return false;
  }

  PairedBatch batch;
  for (int k = 0; k < 2; ++k) {
    PairedBatch::Pair pair;
    pair.source = oracle::random_cloud(2, 5, rng());
    pair.target = oracle::random_cloud(2, 5, rng());
    pair.inner = wasserstein2(pair.source, pair.target).plan;
    batch.pairs.push_back(pair);
  }
  const double t = 0.45;
  const std::uint64_t seed = 61;
  FmLossResult fm = fm_loss(net, batch, t, seed);

  std::vector<double*> params;
  for (auto& w : net.weights)
    for (long i = 0; i < w.size(); ++i) params.push_back(w.data() + i);
  for (auto& b : net.biases)
    for (long i = 0; i < b.size(); ++i) params.push_back(b.data() + i);
  std::vector<double> analytic;
  for (const auto& w : fm.grads.weights)
    for (long i = 0; i < w.size(); ++i) analytic.push_back(w.data()[i]);
  for (const auto& b : fm.grads.biases)
    for (long i = 0; i < b.size(); ++i) analytic.push_back(b.data()[i]);

  const double h = 1e-5;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double saved = *params[i];
    *params[i] = saved + h;
    double up = fm_loss(net, batch, t, seed).loss;
    *params[i] = saved - h;
    double down = fm_loss(net, batch, t, seed).loss;
    *params[i] = saved;
    double numeric = (up - down) / (2 * h);
    max_rel = std::max(max_rel,
                       std::abs(numeric - analytic[i]) / std::max(1.0, std::abs(analytic[i])));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%ld parameters, max rel err %.2e", net.parameter_count(),
                max_rel);
  detail = buf;
  return max_rel <= 1e-4;
}

// ---------------------------------------------------------------------------
// C7: permutation equivariance of the field and of the integrated flow

bool c7_equivariance(std::string& detail) {
  std::mt19937_64 rng(20250107);
  NetConfig cfg;
  cfg.dim = 2;
  cfg.k_local = 4;
  cfg.mlp_layers = 2;
  cfg.hidden_width = 16;
  cfg.attn_heads = 4;
  cfg.attn_dim = 16;
  cfg.time_embed_dim = 8;
  double worst_forward = 0.0, worst_flow = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    VelocityNet net = make_net(cfg, rng());
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (auto& w : net.weights)
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng);
    int n = 6 + static_cast<int>(rng() % 7);
    PointCloud cloud = oracle::random_cloud(2, n, rng());
    std::vector<int> map(static_cast<std::size_t>(n));
    std::iota(map.begin(), map.end(), 0);
    std::shuffle(map.begin(), map.end(), rng);
    Permutation p{map};

    double t = 0.31;
    Eigen::MatrixXd base = forward(net, t, cloud);
    Eigen::MatrixXd permuted = forward(net, t, apply_permutation(p, cloud));
    for (int i = 0; i < n; ++i)
      worst_forward = std::max(
          worst_forward,
          (permuted.col(i) - base.col(p.map[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff());

    Trajectory traj = euler_sample(net, cloud, 5);
    Trajectory ptraj = euler_sample(net, apply_permutation(p, cloud), 5);
    for (int i = 0; i < n; ++i)
      worst_flow = std::max(worst_flow,
                            (ptraj.states.back().coords.col(i) -
                             traj.states.back().coords.col(p.map[static_cast<std::size_t>(i)]))
                                .cwiseAbs()
                                .maxCoeff());
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "field max |dev| %.2e, flow max |dev| %.2e", worst_forward,
                worst_flow);
  detail = buf;
  return worst_forward <= 1e-9 && worst_flow <= 1e-9;
}

// ---------------------------------------------------------------------------
// C8: circles experiment at desk scale

struct CirclesModel {
  PlanKind outer, inner;
  double straightness_mean = 0.0;
  double endpoint_gap = 0.0;
  double train_seconds = 0.0;
};

bool c8_circles(std::string& detail) {
  const int n = 30;
  CloudDataset sources, targets;
  sources.dim = targets.dim = 2;
  {
    auto rng = make_rng(20250108);
    std::uniform_real_distribution<double> unif_h(-20.0, 20.0);
    for (int k = 0; k < 2048; ++k) {
      sources.clouds.push_back(gen_circle_cloud(unif_h(rng), 0.0, 0.5, n, rng()));
      targets.clouds.push_back(gen_circle_cloud(unif_h(rng), 10.0, 2.0, n, rng()));
    }
  }
  MetaBatch test_sources;
  {
    auto rng = make_rng(20250109);
    std::uniform_real_distribution<double> unif_h(-20.0, 20.0);
    for (int k = 0; k < 64; ++k)
      test_sources.clouds.push_back(gen_circle_cloud(unif_h(rng), 0.0, 0.5, n, rng()));
  }

  std::vector<CirclesModel> models = {{PlanKind::ind, PlanKind::ind},
                                      {PlanKind::ind, PlanKind::w},
                                      {PlanKind::w, PlanKind::w}};
  for (auto& model : models) {
    TrainConfig tc;
    tc.steps = 7500;
    tc.batch = 8;
    tc.lr = 5e-4;
    tc.coupling.outer = model.outer;
    tc.coupling.inner = model.inner;
    tc.source.kind = SourceKind::empirical;
    tc.source.dim = 2;
    tc.source.dataset = std::make_shared<CloudDataset>(sources);
    tc.net.dim = 2;
    tc.net.k_local = 8;
    tc.net.mlp_layers = 3;
    tc.net.hidden_width = 64;
    tc.net.attn_heads = 4;
    tc.net.attn_dim = 32;
    tc.net.time_embed_dim = 32;
    tc.seed = 815;
    auto start = clock_type::now();
    TrainResult result = train(tc, targets);
    model.train_seconds = seconds_since(start);

    double straight = 0.0, gap = 0.0;
    for (const auto& x0 : test_sources.clouds) {
      Trajectory fine = euler_sample(result.net, x0, 125);
      Trajectory coarse = euler_sample(result.net, x0, 5);
      straight += straightness(fine) / test_sources.size();
      gap += wasserstein2(coarse.states.back(), fine.states.back()).distance_sq /
             test_sources.size();
    }
    model.straightness_mean = straight;
    model.endpoint_gap = gap;
  }

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "straightness ind/ind %.3f, ind/w %.3f, w/w %.3f; euler 5-vs-125 gap %.3g / %.3g "
                "/ %.3g; train %.0f/%.0f/%.0f s",
                models[0].straightness_mean, models[1].straightness_mean,
                models[2].straightness_mean, models[0].endpoint_gap, models[1].endpoint_gap,
                models[2].endpoint_gap, models[0].train_seconds, models[1].train_seconds,
                models[2].train_seconds);
  detail = buf;

  bool straightness_ok = models[2].straightness_mean >= models[0].straightness_mean + 0.05;
  bool gap_ok = models[2].endpoint_gap < models[0].endpoint_gap &&
                models[2].endpoint_gap < models[1].endpoint_gap;
  bool runtime_ok = models[0].train_seconds < 900 && models[1].train_seconds < 900 &&
                    models[2].train_seconds < 900;
  return straightness_ok && gap_ok && runtime_ok;
}

// ---------------------------------------------------------------------------
// C9: reduced-scale image experiment mirrors the full-scale coupling ordering

Eigen::MatrixXd synth_glyph(std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto jitter = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };
  const int size = 28;
  int cls = static_cast<int>(rng() % 6);
  double width = jitter(1.2, 2.0);

  double cx = jitter(11, 17), cy = jitter(11, 17);
  double radius = jitter(5, 9);
  double bar = jitter(9, 19);
  double ax = jitter(5, 9), ay = jitter(5, 9), bx = jitter(19, 23), by = jitter(19, 23);
  bool anti = rng() % 2 == 0;
  double dot2x = jitter(17, 21), dot2y = jitter(17, 21);

  auto seg_dist = [](double px, double py, double x0, double y0, double x1, double y1) {
    double vx = x1 - x0, vy = y1 - y0;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? std::clamp(((px - x0) * vx + (py - y0) * vy) / len2, 0.0, 1.0) : 0.0;
    double dx = px - (x0 + t * vx), dy = py - (y0 + t * vy);
    return std::sqrt(dx * dx + dy * dy);
  };

  Eigen::MatrixXd img(size, size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double px = c, py = r;
      double d = 1e9;
      switch (cls) {
        case 0:  // ring
          d = std::abs(std::hypot(px - cx, py - cy) - radius);
          break;
        case 1:  // vertical stroke
          d = seg_dist(px, py, bar, 5, bar, 23);
          break;
        case 2:  // horizontal stroke
          d = seg_dist(px, py, 5, bar, 23, bar);
          break;
        case 3:  // cross
          d = std::min(seg_dist(px, py, bar, 5, bar, 23), seg_dist(px, py, 5, bar, 23, bar));
          break;
        case 4:  // diagonal stroke
          d = anti ? seg_dist(px, py, bx, ay, ax, by) : seg_dist(px, py, ax, ay, bx, by);
          break;
        case 5:  // two dots
          d = std::min(std::hypot(px - ax, py - ay), std::hypot(px - dot2x, py - dot2y));
          break;
      }
      img(r, c) = std::exp(-d * d / (2 * width * width));
    }
  }
  return img;
}

bool c9_image_ordering(std::string& detail) {
  const int n = 32;
  CloudDataset train_clouds, eval_clouds;
  train_clouds.dim = eval_clouds.dim = 2;
  for (std::uint64_t k = 0; k < 2000; ++k)
    train_clouds.clouds.push_back(image_to_cloud(synth_glyph(91000 + k), n, 92000 + k));
  for (std::uint64_t k = 0; k < 512; ++k)
    eval_clouds.clouds.push_back(image_to_cloud(synth_glyph(93000 + k), n, 94000 + k));

  // reference barycenter over 8 training samples, then dataset alignment
  MetaBatch ref_samples;
  for (int k = 0; k < 8; ++k)
    ref_samples.clouds.push_back(train_clouds.clouds[static_cast<std::size_t>(k * 7)]);
  ReferenceMeasure ref = compute_barycenter(ref_samples, n, 100, 1e-9, 95000);
  train_clouds.has_perms = true;
  for (const auto& c : train_clouds.clouds)
    train_clouds.perms.push_back(align_to_reference(c, ref));

  auto run_model = [&](PlanKind outer, PlanKind inner, double& nna_out, double& secs) {
    TrainConfig tc;
    tc.epochs = 10;
    tc.batch = 8;
    tc.lr = 5e-4;
    tc.coupling.outer = outer;
    tc.coupling.inner = inner;
    tc.source.kind = SourceKind::barycentric_noise;
    tc.source.dim = 2;
    tc.source.sigma_min = 0.05;
    tc.source.sigma_max = 0.15;
    tc.source.ref = std::make_shared<ReferenceMeasure>(ref);
    tc.net.dim = 2;
    tc.net.k_local = 8;
    tc.net.mlp_layers = 4;
    tc.net.hidden_width = 256;
    tc.net.attn_heads = 4;
    tc.net.attn_dim = 32;
    tc.net.time_embed_dim = 32;
    tc.seed = 929;
    auto start = clock_type::now();
    TrainResult result = train(tc, train_clouds, &ref);
    secs = seconds_since(start);

    // generate with 5 Euler steps and score OT-NNA over 3 repetitions
    double acc = 0.0;
    const int reps = 3;
    for (int rep = 0; rep < reps; ++rep) {
      MetaBatch generated;
      for (int k = 0; k < 256; ++k) {
        MetaBatch draw =
            draw_source(tc.source, n, 1,
                        derive_seed(96000 + static_cast<std::uint64_t>(rep), "gen",
                                    static_cast<std::uint64_t>(k)));
        generated.clouds.push_back(euler_sample(result.net, draw.clouds.front(), 5).states.back());
      }
      MetaBatch real;
      auto rng = make_rng(derive_seed(97000 + static_cast<std::uint64_t>(rep), "real"));
      std::vector<int> idx(static_cast<std::size_t>(eval_clouds.count()));
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (int k = 0; k < 256; ++k)
        real.clouds.push_back(
            eval_clouds.clouds[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
      NNAOptions opt;
      opt.metric = NNAMetric::ot;
      opt.threads = 2;
      acc += nna(generated, real, opt).accuracy / reps;
    }
    nna_out = acc;
  };

  double nna_llw = 0.0, nna_ind = 0.0, secs_llw = 0.0, secs_ind = 0.0;
  run_model(PlanKind::llw, PlanKind::llw, nna_llw, secs_llw);
  run_model(PlanKind::ind, PlanKind::ind, nna_ind, secs_ind);

  char buf[160];
  std::snprintf(
      buf, sizeof(buf),
      "OT-NNA euler-5: llw/llw %.3f vs ind/ind %.3f (need gap >= 0.03); train %.0f/%.0f s",
      nna_llw, nna_ind, secs_llw, secs_ind);
  detail = buf;
  return nna_llw <= nna_ind - 0.03;
}

// ---------------------------------------------------------------------------
// C10: transport solver timing trends

bool c10_bench(std::string& detail) {
  BenchRow w_small = bench_combination({PlanKind::w, PlanKind::w}, 8, 64, 3, 20251010);
  BenchRow w_large = bench_combination({PlanKind::w, PlanKind::w}, 8, 1024, 3, 20251010);
  double ratio = w_large.mean_ms / std::max(w_small.mean_ms, 1e-9);

  double llw_worst = 0.0;
  for (int b : {8, 16, 32})
    for (int n : {64, 256, 1024}) {
      BenchRow row = bench_combination({PlanKind::llw, std::nullopt}, b, n, 5, 20251011);
      llw_worst = std::max(llw_worst, row.mean_ms);
    }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "(w,w) B=8: %.1f ms @N=64 vs %.0f ms @N=1024 (x%.0f); (llw,-) worst %.3f ms",
                w_small.mean_ms, w_large.mean_ms, ratio, llw_worst);
  detail = buf;
  return ratio >= 50.0 && llw_worst < 1.0;
}

// ---------------------------------------------------------------------------
// C11: NNA null calibration on same-distribution splits

bool c11_nna_null(std::string& detail) {
  auto make_cloud = [](std::uint64_t seed) {
    // one fixed family: a Gaussian blob whose center varies per cloud
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double cx = unif(rng), cy = unif(rng);
    Eigen::MatrixXd c(2, 16);
    for (int j = 0; j < 16; ++j) {
      c(0, j) = cx + 0.3 * gauss(rng);
      c(1, j) = cy + 0.3 * gauss(rng);
    }
    return PointCloud(std::move(c));
  };

  double mean_chamfer = 0.0, mean_ot = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    MetaBatch gen, real;
    for (int k = 0; k < 256; ++k) {
      gen.clouds.push_back(make_cloud(derive_seed(111000 + static_cast<std::uint64_t>(s), "a",
                                                  static_cast<std::uint64_t>(k))));
      real.clouds.push_back(make_cloud(derive_seed(111000 + static_cast<std::uint64_t>(s), "b",
                                                   static_cast<std::uint64_t>(k))));
    }
    NNAOptions chamfer_opt;
    chamfer_opt.metric = NNAMetric::chamfer;
    chamfer_opt.threads = 2;
    mean_chamfer += nna(gen, real, chamfer_opt).accuracy / seeds;
    NNAOptions ot_opt;
    ot_opt.metric = NNAMetric::ot;
    ot_opt.threads = 2;
    mean_ot += nna(gen, real, ot_opt).accuracy / seeds;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean accuracy chamfer %.3f, ot %.3f over %d seeds",
                mean_chamfer, mean_ot, seeds);
  detail = buf;
  return mean_chamfer >= 0.45 && mean_chamfer <= 0.55 && mean_ot >= 0.45 && mean_ot <= 0.55;
}

// ---------------------------------------------------------------------------
// C12: on-disk formats round-trip byte-identically and reject corruption

bool c12_formats(std::string& detail) {
  CloudDataset ds;
  ds.dim = 2;
  ds.has_perms = true;
  std::mt19937_64 rng(20251212);
  for (int k = 0; k < 5; ++k) {
    ds.clouds.push_back(oracle::random_cloud(2, 6, rng()));
    ds.perms.push_back(Permutation{{5, 3, 0, 1, 4, 2}});
  }
  std::string ds_bytes = serialize_dataset(ds);
  if (serialize_dataset(deserialize_dataset(ds_bytes)) != ds_bytes) {
    detail = "dataset re-serialization differs";
    return false;
  }

  NetConfig cfg;
  cfg.dim = 3;
  cfg.k_local = 2;
  cfg.mlp_layers = 2;
  cfg.hidden_width = 10;
  cfg.attn_heads = 2;
  cfg.attn_dim = 8;
  cfg.time_embed_dim = 6;
  VelocityNet net = make_net(cfg, rng());
  std::string net_bytes = serialize_net(net);
  if (serialize_net(deserialize_net(net_bytes)) != net_bytes) {
    detail = "checkpoint re-serialization differs";
    return false;
  }

  // IDX rejection with offset diagnostics
  std::string idx;
  auto be = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) idx.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  be(0x00000803);
  be(2);
  be(3);
  be(3);
  idx.append(18, '\x40');

  std::string bad_magic = idx;
  bad_magic[3] = '\x05';
  bool magic_rejected = false;
  try {
    parse_idx_images(bad_magic);
  } catch (const FormatError& e) {
    magic_rejected = e.byte_offset == 0 && std::string(e.what()).find("magic") != std::string::npos;
  }

  std::string truncated = idx.substr(0, idx.size() - 4);
  bool truncation_rejected = false;
  try {
    parse_idx_images(truncated);
  } catch (const FormatError& e) {
    truncation_rejected =
        e.byte_offset == 16 && std::string(e.what()).find("expected 18") != std::string::npos;
  }

  detail = std::string("round-trips byte-identical; corrupt magic ") +
           (magic_rejected ? "rejected" : "MISSED") + ", truncation " +
           (truncation_rejected ? "rejected" : "MISSED");
  return magic_rejected && truncation_rejected;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "exact OT equals brute-force enumeration", c1_exact_oracle},
      {2, "discrete WoW identity (optimal outer + inner)", c2_lemma1_identity},
      {3, "lazy linear divergence is exact near the reference", c3_locality},
      {4, "sliced estimator: 1D exactness and Monte Carlo consistency", c4_sliced},
      {5, "Sinkhorn cost approaches the exact value as reg shrinks", c5_sinkhorn},
      {6, "flow-matching loss gradients match finite differences", c6_gradients},
      {7, "field and integrated flow are permutation-equivariant", c7_equivariance},
      {8, "circles: WoW couplings straighten paths and stabilize few-step sampling", c8_circles},
      {9, "images: lazy linear couplings beat independent ones at Euler-5", c9_image_ordering},
      {10, "solver timing trends across the (B, N) grid", c10_bench},
      {11, "NNA null calibration near 0.5", c11_nna_null},
      {12, "on-disk formats round-trip and reject corruption", c12_formats},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.id)) continue;
    std::string detail;
    bool ok = false;
    auto start = clock_type::now();
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] C%02d %s -- %s (%.1f s)\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.title, detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures;
}

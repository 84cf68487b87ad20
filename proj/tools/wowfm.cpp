// wowfm: train, sample and evaluate Wasserstein-on-Wasserstein flow matching
// models for empirical point clouds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "wow/wow.hpp"

namespace {

using namespace wow;

constexpr const char* kUsage = R"(usage: wowfm <command> [--key value ...]

commands:
  train        train a velocity field on a WOWDS1 dataset
  generate     integrate a trained field from source draws (WOWDS1 + optional trajectory CSV)
  eval         nearest-neighbour accuracy of generated vs real clouds (CSV, optional KDE PGMs)
  barycenter   free-support barycenter reference + per-cloud alignment permutations
  bench        per-step transport solver timings over a (B, N) grid (CSV)
  convert-idx  IDX ubyte images -> point cloud dataset
  gen-circles  synthetic circle-cloud dataset

shared flags: --config PATH  --seed U64  --threads N  --out PATH  --dump-config
Every flag mirrors a config-file key (flat `key = value` lines, # comments);
flags override the file. See README.md for per-command keys.
)";

struct CliError {
  std::string message;
};

RunConfig build_config(int argc, char** argv, bool* dump) {
  std::vector<std::pair<std::string, std::string>> entries;
  *dump = false;
  for (int i = 2; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0) throw CliError{"expected a --flag, got '" + arg + "'"};
    std::string key = arg.substr(2);
    std::string value;
    std::size_t eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (key == "dump-config" || key == "kde") {
      value = "true";
    } else {
      if (i + 1 >= argc) throw CliError{"flag --" + key + " needs a value"};
      value = argv[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "dump_config") {
      *dump = true;
      continue;
    }
    entries.emplace_back(key, value);
  }

  RunConfig cfg;
  for (const auto& [key, value] : entries)
    if (key == "config") load_config_file(cfg, value);
  for (const auto& [key, value] : entries)
    if (key != "config") apply_config_entry(cfg, key, value);
  return cfg;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw CliError{message};
}

CloudDataset load_dataset_checked(const std::string& path, const std::string& what) {
  require(!path.empty(), "missing required field '" + what + "' (dataset path)");
  return read_dataset(path);
}

CouplingConfig coupling_from(const RunConfig& cfg) {
  CouplingConfig c;
  c.outer = plan_kind_from_string(cfg.outer);
  c.inner = plan_kind_from_string(cfg.inner);
  c.slices = cfg.slices;
  if (cfg.sinkhorn_reg > 0.0) c.sinkhorn_reg = cfg.sinkhorn_reg;
  return c;
}

SourceSpec source_from(const RunConfig& cfg, int dim,
                       std::shared_ptr<const ReferenceMeasure> ref) {
  SourceSpec spec;
  spec.kind = source_kind_from_string(cfg.source);
  spec.dim = dim;
  spec.sigma_min = cfg.sigma_min;
  spec.sigma_max = cfg.sigma_max;
  if (spec.kind == SourceKind::barycentric_noise) {
    require(ref != nullptr, "source = barycentric_noise requires --ref");
    spec.ref = std::move(ref);
  }
  if (spec.kind == SourceKind::empirical) {
    require(!cfg.source_data.empty(), "source = empirical requires --source-data");
    spec.dataset = std::make_shared<CloudDataset>(read_dataset(cfg.source_data));
  }
  return spec;
}

int cmd_train(const RunConfig& cfg) {
  CloudDataset targets = load_dataset_checked(cfg.data, "data");
  require(!(cfg.steps > 0 && cfg.epochs > 0), "set either steps or epochs, not both");
  require(cfg.steps > 0 || cfg.epochs > 0, "missing required field 'steps' (or 'epochs')");

  std::shared_ptr<const ReferenceMeasure> ref;
  if (!cfg.ref.empty()) ref = std::make_shared<ReferenceMeasure>(read_reference(cfg.ref));

  TrainConfig tc;
  tc.steps = cfg.steps;
  tc.epochs = cfg.epochs;
  tc.batch = cfg.batch;
  tc.lr = cfg.lr;
  tc.coupling = coupling_from(cfg);
  require(!tc.coupling.uses_llw() || ref != nullptr,
          "llw couplings require --ref (a reference measure container)");
  tc.source = source_from(cfg, targets.dim, ref);
  tc.n_min = cfg.n_min;
  tc.n_max = cfg.n_max;
  tc.net.dim = targets.dim;
  tc.net.k_local = cfg.k_local;
  tc.net.mlp_layers = cfg.mlp_layers;
  tc.net.hidden_width = cfg.hidden_width;
  tc.net.attn_heads = cfg.attn_heads;
  tc.net.attn_dim = cfg.attn_dim;
  tc.net.time_embed_dim = cfg.time_embed_dim;
  tc.seed = cfg.seed;
  tc.threads = cfg.threads;
  tc.checkpoint_every = cfg.checkpoint_every;
  tc.checkpoint_path = cfg.out.empty() ? "checkpoint.wownn" : cfg.out;
  tc.log_path = cfg.log.empty() ? "train_log.csv" : cfg.log;

  TrainResult result = train(tc, targets, ref.get());

  std::size_t window = std::min<std::size_t>(100, result.log.size());
  double mean = 0.0;
  for (std::size_t i = result.log.size() - window; i < result.log.size(); ++i)
    mean += result.log[i].loss;
  mean /= static_cast<double>(window);
  std::printf("trained %zu steps; final %zu-step mean loss %.6g\n", result.log.size(), window,
              mean);
  std::printf("checkpoint: %s\nlog: %s\n", tc.checkpoint_path.c_str(), tc.log_path.c_str());
  return 0;
}

int cmd_generate(const RunConfig& cfg) {
  require(!cfg.checkpoint.empty(), "missing required field 'checkpoint'");
  VelocityNet net = load_checkpoint(cfg.checkpoint);

  std::shared_ptr<const ReferenceMeasure> ref;
  if (!cfg.ref.empty()) ref = std::make_shared<ReferenceMeasure>(read_reference(cfg.ref));
  SourceSpec source = source_from(cfg, net.cfg.dim, ref);

  int n = cfg.n;
  if (n == 0) {
    if (source.kind == SourceKind::barycentric_noise) n = source.ref->cloud.count();
    else if (source.kind == SourceKind::empirical && source.dataset->count() > 0)
      n = source.dataset->clouds.front().count();
  }
  require(n > 0, "missing required field 'n' (points per generated cloud)");
  int steps = cfg.steps > 0 ? static_cast<int>(cfg.steps) : 25;

  CloudDataset out_ds;
  out_ds.dim = net.cfg.dim;
  std::vector<Trajectory> trajs;
  for (int k = 0; k < cfg.count; ++k) {
    MetaBatch batch = draw_source(source, n, 1, derive_seed(cfg.seed, "generate",
                                                            static_cast<std::uint64_t>(k)));
    Trajectory traj = euler_sample(net, batch.clouds.front(), steps);
    out_ds.clouds.push_back(traj.states.back());
    if (!cfg.traj.empty()) trajs.push_back(std::move(traj));
  }
  std::string out_path = cfg.out.empty() ? "generated.wowds" : cfg.out;
  write_dataset(out_path, out_ds);
  if (!cfg.traj.empty()) write_trajectories(cfg.traj, trajs);
  std::printf("generated %d clouds (N=%d, %d Euler steps) -> %s\n", cfg.count, n, steps,
              out_path.c_str());
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  CloudDataset generated = load_dataset_checked(cfg.gen, "gen");
  CloudDataset real = load_dataset_checked(cfg.data, "data");
  if (generated.dim != real.dim)
    throw FormatError("generated and real datasets have different dimensions (" +
                          std::to_string(generated.dim) + " vs " + std::to_string(real.dim) + ")",
                      0);

  std::vector<NNAMetric> metrics;
  for (const auto& m : split_list(cfg.metric)) {
    if (m == "chamfer") metrics.push_back(NNAMetric::chamfer);
    else if (m == "ot") metrics.push_back(NNAMetric::ot);
    else throw CliError{"unknown metric '" + m + "' (expected chamfer|ot)"};
  }
  require(!metrics.empty(), "at least one --metric required");

  int per_side = std::min({cfg.n, generated.count(), real.count()});
  require(per_side >= 2, "need at least 2 clouds per side after applying --n");

  // The OT metric compares equal-size clouds; downsample everything to the
  // smallest cloud in play when sizes differ.
  int min_count = std::numeric_limits<int>::max();
  for (const auto& c : generated.clouds) min_count = std::min(min_count, c.count());
  for (const auto& c : real.clouds) min_count = std::min(min_count, c.count());

  auto pick_side = [&](const CloudDataset& ds, std::uint64_t seed, bool downsample) {
    MetaBatch batch;
    auto rng = make_rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(ds.count()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < per_side; ++i) {
      std::uniform_int_distribution<int> pick(i, ds.count() - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    for (int i = 0; i < per_side; ++i) {
      const PointCloud& c = ds.clouds[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      batch.clouds.push_back(downsample && c.count() > min_count
                                 ? wow::detail::subsample_cloud(c, min_count, rng)
                                 : c);
    }
    return batch;
  };

  std::string out_path = cfg.out.empty() ? "nna.csv" : cfg.out;
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + out_path + "' for writing", 0);
  out << "metric,euler_steps,accuracy_mean,accuracy_std,n,seed\n";

  for (NNAMetric metric : metrics) {
    bool downsample = metric == NNAMetric::ot;
    std::vector<double> accs;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      std::uint64_t rep_seed = derive_seed(cfg.seed, "eval-rep", static_cast<std::uint64_t>(rep));
      MetaBatch g = pick_side(generated, derive_seed(rep_seed, "gen"), downsample);
      MetaBatch r = pick_side(real, derive_seed(rep_seed, "real"), downsample);
      NNAOptions opt;
      opt.metric = metric;
      if (cfg.sinkhorn_reg > 0.0) opt.sinkhorn_reg = cfg.sinkhorn_reg;
      opt.threads = cfg.threads;
      opt.seed = rep_seed;
      accs.push_back(nna(g, r, opt).accuracy);
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    double stdev = accs.size() > 1 ? std::sqrt(var / (static_cast<double>(accs.size()) - 1)) : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%d,%llu\n", to_string(metric),
                  cfg.euler_steps, mean, stdev, per_side,
                  static_cast<unsigned long long>(cfg.seed));
    out << buf;
    std::printf("%s-NNA: %.4f +/- %.4f (n=%d, reps=%d)\n", to_string(metric), mean, stdev,
                per_side, cfg.reps);
  }

  if (cfg.kde) {
    require(generated.dim == 2, "--kde needs 2D clouds");
    std::filesystem::create_directories(cfg.kde_dir);
    int limit = std::min(per_side, generated.count());
    for (int i = 0; i < limit; ++i) {
      Eigen::MatrixXd grid = kde_grid(generated.clouds[static_cast<std::size_t>(i)]);
      char name[64];
      std::snprintf(name, sizeof(name), "cloud_%04d.pgm", i);
      write_pgm((std::filesystem::path(cfg.kde_dir) / name).string(), grid);
    }
    std::printf("wrote %d KDE grids to %s\n", limit, cfg.kde_dir.c_str());
  }
  std::printf("report: %s\n", out_path.c_str());
  return 0;
}

int cmd_barycenter(const RunConfig& cfg) {
  CloudDataset ds = load_dataset_checked(cfg.data, "data");
  require(ds.count() > 0, "dataset is empty");
  int b_ref = std::min(cfg.b_ref, ds.count());

  auto rng = make_rng(derive_seed(cfg.seed, "barycenter-pick"));
  std::vector<int> idx(static_cast<std::size_t>(ds.count()));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < b_ref; ++i) {
    std::uniform_int_distribution<int> pick(i, ds.count() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  MetaBatch samples;
  for (int i = 0; i < b_ref; ++i)
    samples.clouds.push_back(ds.clouds[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);

  int support = samples.clouds.front().count();
  std::vector<double> objective;
  ReferenceMeasure ref =
      compute_barycenter(samples, support, cfg.max_iter, cfg.tol, cfg.seed, &objective);

  std::string out_path = cfg.out.empty() ? "reference.wowds" : cfg.out;
  write_reference(out_path, ref);
  std::printf("barycenter over %d samples (N=%d): objective %.6g -> %.6g in %zu iterations%s\n",
              b_ref, support, objective.empty() ? 0.0 : objective.front(),
              objective.empty() ? 0.0 : objective.back(), objective.size(),
              ref.jittered ? " (duplicate columns jittered)" : "");
  std::printf("reference: %s\n", out_path.c_str());

  if (!cfg.aligned.empty()) {
    CloudDataset aligned = ds;
    aligned.has_perms = true;
    aligned.perms.clear();
    for (const auto& c : ds.clouds) aligned.perms.push_back(align_to_reference(c, ref));
    write_dataset(cfg.aligned, aligned);
    std::printf("aligned dataset: %s\n", cfg.aligned.c_str());
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  std::vector<BenchCase> cases;
  for (const auto& combo : split_list(cfg.combos)) {
    std::size_t colon = combo.find(':');
    require(colon != std::string::npos, "combo '" + combo + "' is not outer:inner");
    BenchCase c;
    c.outer = plan_kind_from_string(combo.substr(0, colon));
    std::string inner = combo.substr(colon + 1);
    if (inner != "-") c.inner = plan_kind_from_string(inner);
    cases.push_back(c);
  }
  std::vector<BenchRow> rows;
  for (const auto& c : cases) {
    for (const auto& bs : split_list(cfg.b_list)) {
      for (const auto& ns : split_list(cfg.n_list)) {
        int b = static_cast<int>(std::stol(bs));
        int n = static_cast<int>(std::stol(ns));
        BenchRow row = bench_combination(c, b, n, cfg.reps, cfg.seed, cfg.threads);
        std::printf("(%s, %s) B=%d N=%d: %.3f +/- %.3f ms\n", to_string(row.outer),
                    row.inner ? to_string(*row.inner) : "-", b, n, row.mean_ms, row.std_ms);
        rows.push_back(row);
      }
    }
  }
  std::string out_path = cfg.out.empty() ? "bench.csv" : cfg.out;
  write_bench_csv(out_path, rows);
  std::printf("bench table: %s\n", out_path.c_str());
  return 0;
}

int cmd_convert_idx(const RunConfig& cfg) {
  require(!cfg.in.empty(), "missing required field 'in' (IDX file)");
  require(cfg.n > 0, "missing required field 'n' (points per cloud)");
  std::vector<Eigen::MatrixXd> images = read_idx(cfg.in);
  int limit = cfg.count > 0 ? std::min<int>(cfg.count, static_cast<int>(images.size()))
                            : static_cast<int>(images.size());
  CloudDataset ds;
  ds.dim = 2;
  ds.clouds.reserve(static_cast<std::size_t>(limit));
  for (int k = 0; k < limit; ++k)
    ds.clouds.push_back(image_to_cloud(images[static_cast<std::size_t>(k)], cfg.n,
                                       derive_seed(cfg.seed, "convert",
                                                   static_cast<std::uint64_t>(k))));
  std::string out_path = cfg.out.empty() ? "clouds.wowds" : cfg.out;
  write_dataset(out_path, ds);
  std::printf("converted %d images (N=%d per cloud) -> %s\n", limit, cfg.n, out_path.c_str());
  return 0;
}

int cmd_gen_circles(const RunConfig& cfg) {
  require(cfg.count > 0, "missing required field 'count' (number of clouds)");
  int n = cfg.n > 0 ? cfg.n : 30;
  CloudDataset ds;
  ds.dim = 2;
  auto rng = make_rng(derive_seed(cfg.seed, "circles"));
  std::uniform_real_distribution<double> unif_h(cfg.center_h_min, cfg.center_h_max);
  for (int k = 0; k < cfg.count; ++k) {
    double h = unif_h(rng);
    ds.clouds.push_back(gen_circle_cloud(h, cfg.offset_v, cfg.radius, n,
                                         derive_seed(cfg.seed, "circle-cloud",
                                                     static_cast<std::uint64_t>(k))));
  }
  std::string out_path = cfg.out.empty() ? "circles.wowds" : cfg.out;
  write_dataset(out_path, ds);
  std::printf("wrote %d circle clouds (N=%d, r=%g, v=%g) -> %s\n", cfg.count, n, cfg.radius,
              cfg.offset_v, out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return 2;
  }
  std::string cmd = argv[1];
  if (cmd == "--help" || cmd == "-h" || cmd == "help") {
    std::fputs(kUsage, stdout);
    return 0;
  }
  try {
    bool dump = false;
    RunConfig cfg = build_config(argc, argv, &dump);
    if (dump) {
      std::fputs(dump_config(cfg).c_str(), stdout);
      return 0;
    }
    if (cmd == "train") return cmd_train(cfg);
    if (cmd == "generate") return cmd_generate(cfg);
    if (cmd == "eval") return cmd_eval(cfg);
    if (cmd == "barycenter") return cmd_barycenter(cfg);
    if (cmd == "bench") return cmd_bench(cfg);
    if (cmd == "convert-idx") return cmd_convert_idx(cfg);
    if (cmd == "gen-circles") return cmd_gen_circles(cfg);
    std::fprintf(stderr, "wowfm: unknown command '%s'\n\n%s", cmd.c_str(), kUsage);
    return 2;
  } catch (const CliError& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.message.c_str());
    return 2;
  } catch (const wow::InputError& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const wow::FormatError& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.what());
    return 3;
  } catch (const wow::ConvergenceError& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.what());
    return 4;
  } catch (const wow::NumericError& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wowfm %s: %s\n", cmd.c_str(), e.what());
    return 3;
  }
}

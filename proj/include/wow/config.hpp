#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wow/errors.hpp"

namespace wow {

// Flat key = value configuration shared by every CLI subcommand. A config
// file seeds the fields, command-line flags override, everything else keeps
// its default. Unknown keys are rejected.
struct RunConfig {
  // shared
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  // datasets and models
  std::string data;         // target / real dataset
  std::string gen;          // generated dataset (eval)
  std::string ref;          // reference measure container
  std::string aligned;      // output path for the aligned dataset copy
  std::string checkpoint;   // trained model (generate)
  std::string in;           // input file (convert-idx)
  std::string log;          // training log CSV
  std::string traj;         // trajectory CSV (generate)
  std::string kde_dir = "kde";
  // training
  long steps = 0;
  long epochs = 0;
  long checkpoint_every = 0;
  int batch = 8;
  double lr = 5e-4;
  std::string outer = "ind";
  std::string inner = "ind";
  int slices = 8;
  double sinkhorn_reg = 0.0;  // 0 -> exact solver
  int n_min = 0;
  int n_max = 0;
  // source metameasure
  std::string source = "pure_noise";
  std::string source_data;
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  // network
  int k_local = 8;
  int mlp_layers = 3;
  int hidden_width = 64;
  int attn_heads = 4;
  int attn_dim = 32;
  int time_embed_dim = 32;
  // generate / eval
  int count = 512;
  int n = 0;
  int euler_steps = 0;
  int reps = 5;
  std::string metric = "chamfer,ot";
  bool kde = false;
  // barycenter
  int b_ref = 8;
  int max_iter = 100;
  double tol = 1e-7;
  // bench
  std::string b_list = "8,16,32";
  std::string n_list = "64,256,1024";
  std::string combos = "ind:ind,sw:sw,w:w,llw:-,ind:w";
  // gen-circles
  double radius = 0.5;
  double center_h_min = -20.0;
  double center_h_max = 20.0;
  double offset_v = 0.0;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    unsigned long long out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InputError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_long;
  using detail::parse_u64;
  if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "threads") cfg.threads = static_cast<int>(parse_long(key, value));
  else if (key == "out") cfg.out = value;
  else if (key == "data") cfg.data = value;
  else if (key == "gen") cfg.gen = value;
  else if (key == "ref") cfg.ref = value;
  else if (key == "aligned") cfg.aligned = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "in") cfg.in = value;
  else if (key == "log") cfg.log = value;
  else if (key == "traj") cfg.traj = value;
  else if (key == "kde_dir") cfg.kde_dir = value;
  else if (key == "steps") cfg.steps = parse_long(key, value);
  else if (key == "epochs") cfg.epochs = parse_long(key, value);
  else if (key == "checkpoint_every") cfg.checkpoint_every = parse_long(key, value);
  else if (key == "batch") cfg.batch = static_cast<int>(parse_long(key, value));
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "outer") cfg.outer = value;
  else if (key == "inner") cfg.inner = value;
  else if (key == "slices") cfg.slices = static_cast<int>(parse_long(key, value));
  else if (key == "sinkhorn_reg") cfg.sinkhorn_reg = parse_double(key, value);
  else if (key == "n_min") cfg.n_min = static_cast<int>(parse_long(key, value));
  else if (key == "n_max") cfg.n_max = static_cast<int>(parse_long(key, value));
  else if (key == "source") cfg.source = value;
  else if (key == "source_data") cfg.source_data = value;
  else if (key == "sigma_min") cfg.sigma_min = parse_double(key, value);
  else if (key == "sigma_max") cfg.sigma_max = parse_double(key, value);
  else if (key == "k_local") cfg.k_local = static_cast<int>(parse_long(key, value));
  else if (key == "mlp_layers") cfg.mlp_layers = static_cast<int>(parse_long(key, value));
  else if (key == "hidden_width") cfg.hidden_width = static_cast<int>(parse_long(key, value));
  else if (key == "attn_heads") cfg.attn_heads = static_cast<int>(parse_long(key, value));
  else if (key == "attn_dim") cfg.attn_dim = static_cast<int>(parse_long(key, value));
  else if (key == "time_embed_dim") cfg.time_embed_dim = static_cast<int>(parse_long(key, value));
  else if (key == "count") cfg.count = static_cast<int>(parse_long(key, value));
  else if (key == "n") cfg.n = static_cast<int>(parse_long(key, value));
  else if (key == "euler_steps") cfg.euler_steps = static_cast<int>(parse_long(key, value));
  else if (key == "reps") cfg.reps = static_cast<int>(parse_long(key, value));
  else if (key == "metric") cfg.metric = value;
  else if (key == "kde") cfg.kde = parse_bool(key, value);
  else if (key == "b_ref") cfg.b_ref = static_cast<int>(parse_long(key, value));
  else if (key == "max_iter") cfg.max_iter = static_cast<int>(parse_long(key, value));
  else if (key == "tol") cfg.tol = parse_double(key, value);
  else if (key == "b_list") cfg.b_list = value;
  else if (key == "n_list") cfg.n_list = value;
  else if (key == "combos") cfg.combos = value;
  else if (key == "radius") cfg.radius = parse_double(key, value);
  else if (key == "center_h_min") cfg.center_h_min = parse_double(key, value);
  else if (key == "center_h_max") cfg.center_h_max = parse_double(key, value);
  else if (key == "offset_v") cfg.offset_v = parse_double(key, value);
  else throw InputError("config: unknown key '" + key + "'");
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError("config: line " + std::to_string(lineno) + " of '" + path +
                       "' is not 'key = value'");
    apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

inline std::string dump_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "out = " << cfg.out << "\n";
  out << "data = " << cfg.data << "\n";
  out << "gen = " << cfg.gen << "\n";
  out << "ref = " << cfg.ref << "\n";
  out << "aligned = " << cfg.aligned << "\n";
  out << "checkpoint = " << cfg.checkpoint << "\n";
  out << "in = " << cfg.in << "\n";
  out << "log = " << cfg.log << "\n";
  out << "traj = " << cfg.traj << "\n";
  out << "kde_dir = " << cfg.kde_dir << "\n";
  out << "steps = " << cfg.steps << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "checkpoint_every = " << cfg.checkpoint_every << "\n";
  out << "batch = " << cfg.batch << "\n";
  out << "lr = " << cfg.lr << "\n";
  out << "outer = " << cfg.outer << "\n";
  out << "inner = " << cfg.inner << "\n";
  out << "slices = " << cfg.slices << "\n";
  out << "sinkhorn_reg = " << cfg.sinkhorn_reg << "\n";
  out << "n_min = " << cfg.n_min << "\n";
  out << "n_max = " << cfg.n_max << "\n";
  out << "source = " << cfg.source << "\n";
  out << "source_data = " << cfg.source_data << "\n";
  out << "sigma_min = " << cfg.sigma_min << "\n";
  out << "sigma_max = " << cfg.sigma_max << "\n";
  out << "k_local = " << cfg.k_local << "\n";
  out << "mlp_layers = " << cfg.mlp_layers << "\n";
  out << "hidden_width = " << cfg.hidden_width << "\n";
  out << "attn_heads = " << cfg.attn_heads << "\n";
  out << "attn_dim = " << cfg.attn_dim << "\n";
  out << "time_embed_dim = " << cfg.time_embed_dim << "\n";
  out << "count = " << cfg.count << "\n";
  out << "n = " << cfg.n << "\n";
  out << "euler_steps = " << cfg.euler_steps << "\n";
  out << "reps = " << cfg.reps << "\n";
  out << "metric = " << cfg.metric << "\n";
  out << "kde = " << (cfg.kde ? "true" : "false") << "\n";
  out << "b_ref = " << cfg.b_ref << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  out << "tol = " << cfg.tol << "\n";
  out << "b_list = " << cfg.b_list << "\n";
  out << "n_list = " << cfg.n_list << "\n";
  out << "combos = " << cfg.combos << "\n";
  out << "radius = " << cfg.radius << "\n";
  out << "center_h_min = " << cfg.center_h_min << "\n";
  out << "center_h_max = " << cfg.center_h_max << "\n";
  out << "offset_v = " << cfg.offset_v << "\n";
  return out.str();
}

inline RunConfig parse_config_string(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw InputError("config: line is not 'key = value': " + t);
    apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return cfg;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    std::string t = detail::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace wow

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "wow/cloud.hpp"
#include "wow/errors.hpp"
#include "wow/rng.hpp"

namespace wow {

// Sinusoidal embedding of t in [0,1]; E/2 geometrically spaced frequencies,
// output componentwise in [-1, 1].
struct TimeEmbedding {
  int dim;
  Eigen::VectorXd frequencies;

  explicit TimeEmbedding(int e) : dim(e) {
    if (e < 2 || e % 2 != 0) throw InputError("TimeEmbedding: dimension must be even and >= 2");
    int half = e / 2;
    frequencies.resize(half);
    const double lo = 1.0, hi = 1000.0;
    for (int k = 0; k < half; ++k)
      frequencies(k) = half == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (half - 1));
  }

  Eigen::VectorXd operator()(double t) const {
    Eigen::VectorXd out(dim);
    int half = dim / 2;
    for (int k = 0; k < half; ++k) {
      out(k) = std::sin(frequencies(k) * t);
      out(half + k) = std::cos(frequencies(k) * t);
    }
    return out;
  }
};

struct NetConfig {
  int dim = 2;
  int k_local = 8;      // neighbour distances per point
  int mlp_layers = 3;   // ReLU layers before the token projection
  int hidden_width = 64;
  int attn_heads = 4;
  int attn_dim = 32;    // attention model dimension; head dim = attn_dim / attn_heads
  int time_embed_dim = 32;

  int feature_dim() const { return dim + k_local + dim + dim * (dim + 1) / 2; }
  int input_dim() const { return feature_dim() + time_embed_dim; }

  void validate() const {
    if (dim < 1) throw InputError("NetConfig: dim must be >= 1");
    if (k_local < 1) throw InputError("NetConfig: k_local must be >= 1");
    if (mlp_layers < 1) throw InputError("NetConfig: mlp_layers must be >= 1");
    if (hidden_width < 1) throw InputError("NetConfig: hidden_width must be >= 1");
    if (attn_heads < 1 || attn_dim % attn_heads != 0)
      throw InputError("NetConfig: attn_dim must be divisible by attn_heads");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
      throw InputError("NetConfig: time_embed_dim must be even and >= 2");
  }

  bool operator==(const NetConfig&) const = default;
};

// Per-point features: own coordinates, k_local smallest distances to other
// points (sorted ascending), the cloud mean, and the upper-triangular entries
// of the population covariance. All permutation-equivariant by construction.
inline Eigen::MatrixXd features(const PointCloud& c, int k_local) {
  const int n = c.count();
  const int d = c.dim();
  if (n <= k_local)
    throw InputError("features: need more than k_local=" + std::to_string(k_local) +
                     " points, got " + std::to_string(n));
  Eigen::VectorXd mean = c.coords.rowwise().mean();
  Eigen::MatrixXd centered = c.coords.colwise() - mean;
  Eigen::MatrixXd cov = (centered * centered.transpose()) / n;

  const int fdim = d + k_local + d + d * (d + 1) / 2;
  Eigen::MatrixXd out(fdim, n);
  Eigen::MatrixXd sq = squared_euclidean_cost(c, c);
  std::vector<double> dists(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) dists[static_cast<std::size_t>(m++)] = sq(i, j);
    std::partial_sort(dists.begin(), dists.begin() + k_local, dists.end());
    int row = 0;
    for (int r = 0; r < d; ++r) out(row++, i) = c.coords(r, i);
    for (int k = 0; k < k_local; ++k) out(row++, i) = std::sqrt(dists[static_cast<std::size_t>(k)]);
    for (int r = 0; r < d; ++r) out(row++, i) = mean(r);
    for (int r = 0; r < d; ++r)
      for (int s = r; s < d; ++s) out(row++, i) = cov(r, s);
  }
  return out;
}

// Parameter layout (checkpoint order): mlp W/b per layer, token projection,
// attention q/k/v/o, output projection.
struct VelocityNet {
  NetConfig cfg;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int layer_count() const { return cfg.mlp_layers + 6; }

  long parameter_count() const {
    long total = 0;
    for (const auto& w : weights) total += w.size();
    for (const auto& b : biases) total += b.size();
    return total;
  }
};

inline VelocityNet make_net(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  VelocityNet net;
  net.cfg = cfg;
  auto rng = make_rng(derive_seed(seed, "net-init"));
  auto he_uniform = [&](int rows, int cols) {
    double bound = std::sqrt(6.0 / cols);  // fan-in scaling
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = u(rng);
    return w;
  };
  auto push = [&](Eigen::MatrixXd w) {
    net.biases.emplace_back(Eigen::VectorXd::Zero(w.rows()));
    net.weights.push_back(std::move(w));
  };
  int in = cfg.input_dim();
  for (int l = 0; l < cfg.mlp_layers; ++l) {
    push(he_uniform(cfg.hidden_width, l == 0 ? in : cfg.hidden_width));
  }
  push(he_uniform(cfg.attn_dim, cfg.hidden_width));  // token projection
  for (int k = 0; k < 4; ++k) push(he_uniform(cfg.attn_dim, cfg.attn_dim));  // q, k, v, o
  // zero-initialized output layer: the field starts at zero velocity
  push(Eigen::MatrixXd::Zero(cfg.dim, cfg.attn_dim));
  return net;
}

struct NetGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static NetGrads zeros_like(const VelocityNet& net) {
    NetGrads g;
    g.weights.reserve(net.weights.size());
    g.biases.reserve(net.biases.size());
    for (const auto& w : net.weights) g.weights.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : net.biases) g.biases.emplace_back(Eigen::VectorXd::Zero(b.size()));
    return g;
  }

  void accumulate(const NetGrads& other) {
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += other.weights[i];
    for (std::size_t i = 0; i < biases.size(); ++i) biases[i] += other.biases[i];
  }

  void scale(double s) {
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
  }
};

// Activations recorded by a traced forward pass, consumed by backward().
struct ForwardTrace {
  Eigen::MatrixXd input;                 // (F+E) x N
  std::vector<Eigen::MatrixXd> hidden;   // post-ReLU per mlp layer
  Eigen::MatrixXd tokens;                // A x N
  Eigen::MatrixXd q, k, v;               // A x N each
  std::vector<Eigen::MatrixXd> attn;     // per-head softmax matrices, N x N
  Eigen::MatrixXd concat;                // A x N, heads stacked
  Eigen::MatrixXd attn_out;              // A x N
};

inline Eigen::MatrixXd forward(const VelocityNet& net, double t, const PointCloud& c,
                               ForwardTrace* trace = nullptr) {
  const NetConfig& cfg = net.cfg;
  if (c.dim() != cfg.dim)
    throw InputError("forward: cloud dimension " + std::to_string(c.dim()) +
                     " does not match network dimension " + std::to_string(cfg.dim));
  const int n = c.count();
  Eigen::MatrixXd input(cfg.input_dim(), n);
  input.topRows(cfg.feature_dim()) = features(c, cfg.k_local);
  input.bottomRows(cfg.time_embed_dim) = TimeEmbedding(cfg.time_embed_dim)(t).replicate(1, n);

  int li = 0;
  Eigen::MatrixXd h = input;
  std::vector<Eigen::MatrixXd> hidden;
  for (int l = 0; l < cfg.mlp_layers; ++l, ++li) {
    h = ((net.weights[static_cast<std::size_t>(li)] * h).colwise() +
         net.biases[static_cast<std::size_t>(li)])
            .cwiseMax(0.0);
    if (trace) hidden.push_back(h);
  }
  Eigen::MatrixXd tokens = (net.weights[static_cast<std::size_t>(li)] * h).colwise() +
                           net.biases[static_cast<std::size_t>(li)];
  ++li;

  const int heads = cfg.attn_heads;
  const int hd = cfg.attn_dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  Eigen::MatrixXd q = (net.weights[static_cast<std::size_t>(li)] * tokens).colwise() +
                      net.biases[static_cast<std::size_t>(li)];
  ++li;
  Eigen::MatrixXd k = (net.weights[static_cast<std::size_t>(li)] * tokens).colwise() +
                      net.biases[static_cast<std::size_t>(li)];
  ++li;
  Eigen::MatrixXd v = (net.weights[static_cast<std::size_t>(li)] * tokens).colwise() +
                      net.biases[static_cast<std::size_t>(li)];
  ++li;

  Eigen::MatrixXd concat(cfg.attn_dim, n);
  std::vector<Eigen::MatrixXd> attn;
  for (int hidx = 0; hidx < heads; ++hidx) {
    auto qh = q.middleRows(hidx * hd, hd);
    auto kh = k.middleRows(hidx * hd, hd);
    auto vh = v.middleRows(hidx * hd, hd);
    Eigen::MatrixXd scores = (qh.transpose() * kh) * scale;  // N x N, row = query
    for (int i = 0; i < n; ++i) {
      double m = scores.row(i).maxCoeff();
      Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
      scores.row(i) = e / e.sum();
    }
    concat.middleRows(hidx * hd, hd) = vh * scores.transpose();
    if (trace) attn.push_back(std::move(scores));
  }
  Eigen::MatrixXd attn_out = (net.weights[static_cast<std::size_t>(li)] * concat).colwise() +
                             net.biases[static_cast<std::size_t>(li)];
  ++li;
  Eigen::MatrixXd out = (net.weights[static_cast<std::size_t>(li)] * attn_out).colwise() +
                        net.biases[static_cast<std::size_t>(li)];

  if (trace) {
    trace->input = std::move(input);
    trace->hidden = std::move(hidden);
    trace->tokens = std::move(tokens);
    trace->q = std::move(q);
    trace->k = std::move(k);
    trace->v = std::move(v);
    trace->attn = std::move(attn);
    trace->concat = std::move(concat);
    trace->attn_out = std::move(attn_out);
  }
  return out;
}

// Reverse pass for parameter gradients only (features are inputs, not
// differentiated through). upstream is dLoss/dOutput, shaped d x N.
inline NetGrads backward_from_trace(const VelocityNet& net, const ForwardTrace& trace,
                                    const Eigen::MatrixXd& upstream) {
  const NetConfig& cfg = net.cfg;
  NetGrads g = NetGrads::zeros_like(net);
  const int heads = cfg.attn_heads;
  const int hd = cfg.attn_dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const int n = static_cast<int>(upstream.cols());

  int li = net.layer_count() - 1;  // output layer
  g.weights[static_cast<std::size_t>(li)] = upstream * trace.attn_out.transpose();
  g.biases[static_cast<std::size_t>(li)] = upstream.rowwise().sum();
  Eigen::MatrixXd d_attn_out = net.weights[static_cast<std::size_t>(li)].transpose() * upstream;
  --li;

  g.weights[static_cast<std::size_t>(li)] = d_attn_out * trace.concat.transpose();
  g.biases[static_cast<std::size_t>(li)] = d_attn_out.rowwise().sum();
  Eigen::MatrixXd d_concat = net.weights[static_cast<std::size_t>(li)].transpose() * d_attn_out;
  --li;

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(cfg.attn_dim, n);
  Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(cfg.attn_dim, n);
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(cfg.attn_dim, n);
  for (int hidx = 0; hidx < heads; ++hidx) {
    const Eigen::MatrixXd& p = trace.attn[static_cast<std::size_t>(hidx)];
    auto qh = trace.q.middleRows(hidx * hd, hd);
    auto kh = trace.k.middleRows(hidx * hd, hd);
    auto vh = trace.v.middleRows(hidx * hd, hd);
    auto d_oh = d_concat.middleRows(hidx * hd, hd);
    dv.middleRows(hidx * hd, hd) = d_oh * p;
    Eigen::MatrixXd dp = d_oh.transpose() * vh;  // N x N
    Eigen::MatrixXd ds(n, n);
    for (int i = 0; i < n; ++i) {
      double dot = dp.row(i).dot(p.row(i));
      ds.row(i) = p.row(i).cwiseProduct((dp.row(i).array() - dot).matrix());
    }
    dq.middleRows(hidx * hd, hd) = (kh * ds.transpose()) * scale;
    dk.middleRows(hidx * hd, hd) = (qh * ds) * scale;
  }

  Eigen::MatrixXd d_tokens = Eigen::MatrixXd::Zero(cfg.attn_dim, n);
  // v, k, q in reverse parameter order
  g.weights[static_cast<std::size_t>(li)] = dv * trace.tokens.transpose();
  g.biases[static_cast<std::size_t>(li)] = dv.rowwise().sum();
  d_tokens += net.weights[static_cast<std::size_t>(li)].transpose() * dv;
  --li;
  g.weights[static_cast<std::size_t>(li)] = dk * trace.tokens.transpose();
  g.biases[static_cast<std::size_t>(li)] = dk.rowwise().sum();
  d_tokens += net.weights[static_cast<std::size_t>(li)].transpose() * dk;
  --li;
  g.weights[static_cast<std::size_t>(li)] = dq * trace.tokens.transpose();
  g.biases[static_cast<std::size_t>(li)] = dq.rowwise().sum();
  d_tokens += net.weights[static_cast<std::size_t>(li)].transpose() * dq;
  --li;

  const Eigen::MatrixXd& last_hidden = trace.hidden.back();
  g.weights[static_cast<std::size_t>(li)] = d_tokens * last_hidden.transpose();
  g.biases[static_cast<std::size_t>(li)] = d_tokens.rowwise().sum();
  Eigen::MatrixXd dh = net.weights[static_cast<std::size_t>(li)].transpose() * d_tokens;
  --li;

  for (int l = cfg.mlp_layers - 1; l >= 0; --l, --li) {
    const Eigen::MatrixXd& post = trace.hidden[static_cast<std::size_t>(l)];
    Eigen::MatrixXd dz = dh.cwiseProduct((post.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& below =
        l == 0 ? trace.input : trace.hidden[static_cast<std::size_t>(l) - 1];
    g.weights[static_cast<std::size_t>(li)] = dz * below.transpose();
    g.biases[static_cast<std::size_t>(li)] = dz.rowwise().sum();
    if (l > 0) dh = net.weights[static_cast<std::size_t>(li)].transpose() * dz;
  }
  return g;
}

inline NetGrads backward(const VelocityNet& net, double t, const PointCloud& c,
                         const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != net.cfg.dim || upstream.cols() != c.count())
    throw InputError("backward: upstream gradient must be shaped d x N");
  ForwardTrace trace;
  forward(net, t, c, &trace);
  return backward_from_trace(net, trace, upstream);
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(const VelocityNet& net, double lr) {
    AdamState s;
    s.lr = lr;
    for (const auto& w : net.weights) {
      s.mw.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      s.vw.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases) {
      s.mb.emplace_back(Eigen::VectorXd::Zero(b.size()));
      s.vb.emplace_back(Eigen::VectorXd::Zero(b.size()));
    }
    return s;
  }
};

// Standard bias-corrected Adam update.
inline void adam_step(AdamState& state, VelocityNet& net, const NetGrads& grads) {
  if (grads.weights.size() != net.weights.size() || grads.biases.size() != net.biases.size())
    throw InputError("adam_step: gradient shape mismatch");
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    state.mw[i] = state.beta1 * state.mw[i] + (1.0 - state.beta1) * grads.weights[i];
    state.vw[i] = state.beta2 * state.vw[i] +
                  (1.0 - state.beta2) * grads.weights[i].cwiseProduct(grads.weights[i]);
    net.weights[i].array() -=
        state.lr * (state.mw[i].array() / bc1) / ((state.vw[i].array() / bc2).sqrt() + state.eps);
  }
  for (std::size_t i = 0; i < net.biases.size(); ++i) {
    state.mb[i] = state.beta1 * state.mb[i] + (1.0 - state.beta1) * grads.biases[i];
    state.vb[i] = state.beta2 * state.vb[i] +
                  (1.0 - state.beta2) * grads.biases[i].cwiseProduct(grads.biases[i]);
    net.biases[i].array() -=
        state.lr * (state.mb[i].array() / bc1) / ((state.vb[i].array() / bc2).sqrt() + state.eps);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint format WOWNN1: magic "WOWNN1\0", then little-endian u32 version,
// seven u32 config fields, u32 tensor count, and per tensor u32 rank,
// u32 dims[rank], f64 values row-major. Round-trips bit-exactly.

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct ByteReader {
  const std::string& data;
  std::size_t pos = 0;

  std::uint32_t u32(const char* what) {
    if (pos + 4 > data.size())
      throw FormatError(std::string("truncated file reading ") + what + ": expected 4 bytes, " +
                            std::to_string(data.size() - pos) + " left",
                        pos);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos += 4;
    return v;
  }

  double f64(const char* what) {
    if (pos + 8 > data.size())
      throw FormatError(std::string("truncated file reading ") + what + ": expected 8 bytes, " +
                            std::to_string(data.size() - pos) + " left",
                        pos);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
              << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file '" + path + "'", 0);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline void write_file_bytes(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open file '" + path + "' for writing", 0);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("short write to '" + path + "'", 0);
}

}  // namespace detail

inline constexpr char kCheckpointMagic[7] = {'W', 'O', 'W', 'N', 'N', '1', '\0'};

inline std::string serialize_net(const VelocityNet& net) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_u32(out, 1);  // format version
  const NetConfig& c = net.cfg;
  for (int field : {c.dim, c.k_local, c.mlp_layers, c.hidden_width, c.attn_heads, c.attn_dim,
                    c.time_embed_dim})
    detail::put_u32(out, static_cast<std::uint32_t>(field));
  detail::put_u32(out, static_cast<std::uint32_t>(net.weights.size() + net.biases.size()));
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    const Eigen::MatrixXd& w = net.weights[i];
    detail::put_u32(out, 2);
    detail::put_u32(out, static_cast<std::uint32_t>(w.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(w.cols()));
    for (int r = 0; r < w.rows(); ++r)
      for (int cc = 0; cc < w.cols(); ++cc) detail::put_f64(out, w(r, cc));
    const Eigen::VectorXd& b = net.biases[i];
    detail::put_u32(out, 1);
    detail::put_u32(out, static_cast<std::uint32_t>(b.size()));
    for (int r = 0; r < b.size(); ++r) detail::put_f64(out, b(r));
  }
  return out;
}

inline VelocityNet deserialize_net(const std::string& data) {
  if (data.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw FormatError("bad checkpoint magic, expected WOWNN1", 0);
  detail::ByteReader rd{data, sizeof(kCheckpointMagic)};
  std::uint32_t version = rd.u32("version");
  if (version != 1)
    throw FormatError("unsupported checkpoint version " + std::to_string(version), rd.pos - 4);
  NetConfig cfg;
  cfg.dim = static_cast<int>(rd.u32("dim"));
  cfg.k_local = static_cast<int>(rd.u32("k_local"));
  cfg.mlp_layers = static_cast<int>(rd.u32("mlp_layers"));
  cfg.hidden_width = static_cast<int>(rd.u32("hidden_width"));
  cfg.attn_heads = static_cast<int>(rd.u32("attn_heads"));
  cfg.attn_dim = static_cast<int>(rd.u32("attn_dim"));
  cfg.time_embed_dim = static_cast<int>(rd.u32("time_embed_dim"));
  cfg.validate();
  VelocityNet net;
  net.cfg = cfg;
  std::uint32_t tensors = rd.u32("tensor count");
  if (tensors != static_cast<std::uint32_t>(2 * (cfg.mlp_layers + 6)))
    throw FormatError("tensor count " + std::to_string(tensors) + " does not match config",
                      rd.pos - 4);
  for (std::uint32_t ti = 0; ti < tensors; ++ti) {
    std::uint32_t rank = rd.u32("tensor rank");
    if (rank == 2) {
      std::uint32_t rows = rd.u32("rows"), cols = rd.u32("cols");
      Eigen::MatrixXd w(rows, cols);
      for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t cc = 0; cc < cols; ++cc) w(r, cc) = rd.f64("weight");
      net.weights.push_back(std::move(w));
    } else if (rank == 1) {
      std::uint32_t len = rd.u32("len");
      Eigen::VectorXd b(len);
      for (std::uint32_t r = 0; r < len; ++r) b(r) = rd.f64("bias");
      net.biases.push_back(std::move(b));
    } else {
      throw FormatError("unsupported tensor rank " + std::to_string(rank), rd.pos - 4);
    }
  }
  if (rd.pos != data.size())
    throw FormatError("trailing bytes after checkpoint payload", rd.pos);
  if (net.weights.size() != net.biases.size() ||
      static_cast<int>(net.weights.size()) != cfg.mlp_layers + 6)
    throw FormatError("checkpoint tensor layout does not match config", rd.pos);
  return net;
}

inline void save_checkpoint(const std::string& path, const VelocityNet& net) {
  detail::write_file_bytes(path, serialize_net(net));
}

inline VelocityNet load_checkpoint(const std::string& path) {
  return deserialize_net(detail::read_file_bytes(path));
}

}  // namespace wow

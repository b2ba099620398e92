#include "vsss/nn.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "vsss/error.hpp"

namespace vsss {

namespace {

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kIdentity:
      return z;
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
  }
  throw ContractError("unknown activation");
}

// Derivative expressed from z (preactivation) and a (activation output).
Eigen::ArrayXXd activation_derivative(Activation act, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::kIdentity:
      return Eigen::ArrayXXd::Ones(z.rows(), z.cols());
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - a.array().square();
  }
  throw ContractError("unknown activation");
}

constexpr char kCheckpointMagic[8] = {'V', 'S', 'N', 'N', '0', '0', '0', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ofstream& out, double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IoError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ContractError("MlpSpec needs at least input and output layers");
  for (int s : layer_sizes) {
    if (s <= 0) throw ContractError("MlpSpec layer sizes must be positive");
  }
}

MlpSpec MlpSpec::dense(int input, const std::vector<int>& hidden, int output,
                       Activation hidden_act, Activation output_act) {
  MlpSpec spec;
  spec.layer_sizes.push_back(input);
  for (int h : hidden) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(output);
  spec.hidden_activation = hidden_act;
  spec.output_activation = output_act;
  spec.validate();
  return spec;
}

MlpParams MlpParams::zeros(const MlpSpec& spec) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    p.weights.emplace_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
    p.biases.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
  }
  return p;
}

MlpParams MlpParams::random_init(const MlpSpec& spec, Rng& rng) {
  MlpParams p = zeros(spec);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_sizes[l]));
    for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j) {
        p.weights[l](i, j) = rng.uniform(-bound, bound);
      }
    }
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) {
      p.biases[l](i) = rng.uniform(-bound, bound);
    }
  }
  return p;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

bool MlpParams::same_shape(const MlpParams& other) const { return spec == other.spec; }

bool MlpParams::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

MlpGrads MlpGrads::zeros(const MlpSpec& spec) {
  MlpGrads g;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
    g.biases.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
  }
  return g;
}

void MlpGrads::scale(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                            ForwardCache* cache) {
  if (input.rows() != params.spec.input_size()) {
    throw ContractError("mlp_forward: input size " + std::to_string(input.rows()) +
                        " != spec input " + std::to_string(params.spec.input_size()));
  }
  if (cache) {
    cache->activations.clear();
    cache->preacts.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  const std::size_t layers = params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (params.weights[l] * a).colwise() + params.biases[l];
    const Activation act =
        l + 1 == layers ? params.spec.output_activation : params.spec.hidden_activation;
    a = apply_activation(act, z);
    if (cache) {
      cache->preacts.push_back(std::move(z));
      cache->activations.push_back(a);
    }
  }
  return a;
}

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& input,
                            ForwardCache* cache) {
  const Eigen::MatrixXd out = mlp_forward(params, Eigen::MatrixXd(input), cache);
  return out.col(0);
}

Eigen::MatrixXd mlp_backward(const MlpParams& params, const ForwardCache& cache,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads) {
  const std::size_t layers = params.weights.size();
  if (cache.preacts.size() != layers || cache.activations.size() != layers + 1) {
    throw ContractError("mlp_backward: cache does not match network spec");
  }
  if (output_grad.rows() != params.spec.output_size() ||
      output_grad.cols() != cache.activations.front().cols()) {
    throw ContractError("mlp_backward: output gradient shape mismatch");
  }
  grads = MlpGrads::zeros(params.spec);
  Eigen::MatrixXd delta;
  for (std::size_t li = layers; li-- > 0;) {
    const Activation act =
        li + 1 == layers ? params.spec.output_activation : params.spec.hidden_activation;
    const Eigen::ArrayXXd dact =
        activation_derivative(act, cache.preacts[li], cache.activations[li + 1]);
    if (li + 1 == layers) {
      delta = (output_grad.array() * dact).matrix();
    } else {
      delta = ((params.weights[li + 1].transpose() * delta).array() * dact).matrix();
    }
    grads.weights[li] = delta * cache.activations[li].transpose();
    grads.biases[li] = delta.rowwise().sum();
  }
  return params.weights[0].transpose() * delta;
}

AdamState AdamState::zeros(const MlpSpec& spec, const AdamConfig& cfg) {
  AdamState s;
  s.cfg = cfg;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    s.m_w.emplace_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
    s.v_w.emplace_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
    s.m_b.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
    s.v_b.emplace_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
  }
  return s;
}

void adam_update(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr) {
  if (grads.weights.size() != params.weights.size() || state.m_w.size() != params.weights.size()) {
    throw ContractError("adam_update: shape mismatch");
  }
  state.step += 1;
  const double b1 = state.cfg.beta1;
  const double b2 = state.cfg.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    state.m_w[l] = b1 * state.m_w[l] + (1.0 - b1) * grads.weights[l];
    state.v_w[l] =
        (b2 * state.v_w[l].array() + (1.0 - b2) * grads.weights[l].array().square()).matrix();
    params.weights[l].array() -= lr * (state.m_w[l].array() / bias1) /
                                 ((state.v_w[l].array() / bias2).sqrt() + state.cfg.eps);
    state.m_b[l] = b1 * state.m_b[l] + (1.0 - b1) * grads.biases[l];
    state.v_b[l] =
        (b2 * state.v_b[l].array() + (1.0 - b2) * grads.biases[l].array().square()).matrix();
    params.biases[l].array() -= lr * (state.m_b[l].array() / bias1) /
                                ((state.v_b[l].array() / bias2).sqrt() + state.cfg.eps);
  }
}

std::string_view to_string(CheckpointRole role) {
  switch (role) {
    case CheckpointRole::kGeneric: return "generic";
    case CheckpointRole::kDqnQ: return "dqn_q";
    case CheckpointRole::kDdpgActor: return "ddpg_actor";
    case CheckpointRole::kDdpgCritic: return "ddpg_critic";
    case CheckpointRole::kAdapter: return "adapter";
  }
  return "unknown";
}

void save_checkpoint(const MlpParams& params, CheckpointRole role, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, static_cast<std::uint32_t>(role));
  write_u32(out, static_cast<std::uint32_t>(params.spec.layer_sizes.size()));
  for (int s : params.spec.layer_sizes) write_u32(out, static_cast<std::uint32_t>(s));
  write_u32(out, static_cast<std::uint32_t>(params.spec.hidden_activation));
  write_u32(out, static_cast<std::uint32_t>(params.spec.output_activation));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& w = params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) write_f64(out, w(i, j));
    }
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) write_f64(out, params.biases[l](i));
  }
  out.flush();
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  const std::uint32_t role_raw = read_u32(in);
  if (role_raw > static_cast<std::uint32_t>(CheckpointRole::kAdapter)) {
    throw IoError("checkpoint has unknown role tag");
  }
  const std::uint32_t n_layers = read_u32(in);
  if (n_layers < 2 || n_layers > 64) throw IoError("checkpoint has implausible layer count");
  MlpSpec spec;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const std::uint32_t s = read_u32(in);
    if (s == 0 || s > 1'000'000) throw IoError("checkpoint has implausible layer size");
    spec.layer_sizes.push_back(static_cast<int>(s));
  }
  const std::uint32_t hidden_act = read_u32(in);
  const std::uint32_t output_act = read_u32(in);
  if (hidden_act > 2 || output_act > 2) throw IoError("checkpoint has unknown activation");
  spec.hidden_activation = static_cast<Activation>(hidden_act);
  spec.output_activation = static_cast<Activation>(output_act);

  LoadedCheckpoint loaded{MlpParams::zeros(spec), static_cast<CheckpointRole>(role_raw)};
  for (std::size_t l = 0; l < loaded.params.weights.size(); ++l) {
    auto& w = loaded.params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_f64(in);
    }
    for (Eigen::Index i = 0; i < loaded.params.biases[l].size(); ++i) {
      loaded.params.biases[l](i) = read_f64(in);
    }
  }
  // Must be at end of file now.
  char extra;
  in.read(&extra, 1);
  if (!in.eof()) throw IoError("checkpoint has trailing bytes: " + path);
  return loaded;
}

}  // namespace vsss

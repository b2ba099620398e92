#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "vsss/rng.hpp"

namespace vsss {

enum class Activation : std::uint32_t { kIdentity = 0, kRelu = 1, kTanh = 2 };

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }  // weight layers
  void validate() const;  // throws ContractError
  bool operator==(const MlpSpec&) const = default;

  static MlpSpec dense(int input, const std::vector<int>& hidden, int output,
                       Activation hidden_act = Activation::kRelu,
                       Activation output_act = Activation::kIdentity);
};

// Dense feed-forward parameters. weights[l] is (out x in); all math is f64.
struct MlpParams {
  MlpSpec spec;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpParams zeros(const MlpSpec& spec);
  // Uniform init scaled by 1/sqrt(fan_in), seed-controlled.
  static MlpParams random_init(const MlpSpec& spec, Rng& rng);
  std::size_t parameter_count() const;
  bool same_shape(const MlpParams& other) const;
  bool all_finite() const;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros(const MlpSpec& spec);
  void scale(double s);
};

// Cached forward pass over a batch (one column per sample).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // [0]=input, [l+1]=output of layer l
  std::vector<Eigen::MatrixXd> preacts;      // z_l before the activation
};

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                            ForwardCache* cache = nullptr);
Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::VectorXd& input,
                            ForwardCache* cache = nullptr);

// Exact reverse-mode gradients for the scalar loss whose d(loss)/d(output) is
// `output_grad` (one column per sample; batch contributions are summed).
// Returns d(loss)/d(input). `grads` is overwritten.
Eigen::MatrixXd mlp_backward(const MlpParams& params, const ForwardCache& cache,
                             const Eigen::MatrixXd& output_grad, MlpGrads& grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  std::int64_t step = 0;

  static AdamState zeros(const MlpSpec& spec, const AdamConfig& cfg = {});
};

// Bias-corrected Adam step; params updated in place, state.step incremented.
void adam_update(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr);

// Checkpoint role tag so tools can refuse mismatched networks.
enum class CheckpointRole : std::uint32_t {
  kGeneric = 0,
  kDqnQ = 1,
  kDdpgActor = 2,
  kDdpgCritic = 3,
  kAdapter = 4,
};

std::string_view to_string(CheckpointRole role);

// Binary checkpoint: magic, role, spec, then little-endian f64 weights/biases.
// save -> load -> save round-trips byte-identically.
void save_checkpoint(const MlpParams& params, CheckpointRole role, const std::string& path);

struct LoadedCheckpoint {
  MlpParams params;
  CheckpointRole role;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace vsss

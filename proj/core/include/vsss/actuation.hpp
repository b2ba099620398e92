#pragma once

#include <deque>
#include <functional>

#include "vsss/nn.hpp"
#include "vsss/physics.hpp"

namespace vsss {

// Closed-form inverse of the differential-drive map; output clamped to the
// wheel speed limit.
WheelCommand naive_inverse(double v, double omega, const SimParams& params);

// Perturbed actuation standing in for a physical robot: per-wheel gain
// asymmetry, command deadzone, actuation latency and Gaussian speed noise,
// followed by the usual first-order motor lag.
struct SurrogateParams {
  SimParams base;
  double gain_left = 1.0;
  double gain_right = 1.0;
  double deadzone = 0.0;      // rad/s; post-gain commands inside it drop to zero
  int latency_steps = 0;      // whole sim steps of command delay
  double noise_sigma = 0.0;   // rad/s, per-wheel per-step

  void validate() const;
  static SurrogateParams identity(const SimParams& base);
  // The pinned perturbation used by tracking/transfer experiments.
  static SurrogateParams canonical(const SimParams& base);
  static SurrogateParams from_config(const KeyValueConfig& cfg,
                                     const std::string& prefix = "plant.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "plant.") const;
};

// Pending-command queue for the latency stage.
struct SurrogateState {
  std::deque<WheelCommand> queue;
  void reset() { queue.clear(); }
};

// One actuation step: delay -> gain -> deadzone -> noise. Returns the
// effective commanded target this step; motor lag is applied downstream by
// the robot integrator exactly as for the unperturbed plant.
WheelCommand surrogate_effective(const WheelCommand& commanded, const SurrogateParams& plant,
                                 SurrogateState& state, Rng& rng);

// Maps a desired body twist plus current wheel speeds to a wheel command.
using WheelController =
    std::function<WheelCommand(double v_des, double omega_des, const WheelCommand& wheels_actual)>;

WheelController make_naive_controller(const SimParams& params);

// Normalization references for adapter networks, derived from SimParams so
// checkpoints stay self-contained given the run config.
struct AdapterScaling {
  double twist_v_ref;      // m/s
  double twist_omega_ref;  // rad/s
  double wheel_ref;        // rad/s

  static AdapterScaling from_params(const SimParams& p);
};

// Wraps a trained inverse-dynamics network (inputs: desired v, omega and the
// current wheel speeds; outputs: wheel command), denormalizing through the
// scaling above and clamping to the wheel limit.
WheelController make_adapter_controller(MlpParams adapter, const SimParams& params);

// A single robot driven through the surrogate chain on an open floor; the
// basis for dataset collection and tracking evaluation.
class SurrogatePlant {
 public:
  SurrogatePlant(const SurrogateParams& params, std::uint64_t seed);

  void reset(std::uint64_t seed, const Pose& start = {});
  // Advances one sim step under `commanded`.
  void step(const WheelCommand& commanded);
  const RobotState& robot() const { return robot_; }
  const SurrogateParams& params() const { return params_; }

 private:
  SurrogateParams params_;
  RobotState robot_;
  SurrogateState state_;
  Rng rng_;
};

}  // namespace vsss

#include "vsss/actuation.hpp"

#include <cmath>

#include "vsss/error.hpp"

namespace vsss {

WheelCommand naive_inverse(double v, double omega, const SimParams& params) {
  const double half_axle = params.axle_length / 2.0;
  WheelCommand cmd;
  cmd.left = (v - omega * half_axle) / params.wheel_radius;
  cmd.right = (v + omega * half_axle) / params.wheel_radius;
  return clamp_wheels(cmd, params.max_wheel_speed);
}

void SurrogateParams::validate() const {
  base.validate();
  if (!(gain_left > 0.0) || !(gain_right > 0.0))
    throw ConfigError("plant gains must be > 0");
  if (deadzone < 0.0) throw ConfigError("plant.deadzone must be >= 0");
  if (latency_steps < 0) throw ConfigError("plant.latency_steps must be >= 0");
  if (noise_sigma < 0.0) throw ConfigError("plant.noise_sigma must be >= 0");
}

SurrogateParams SurrogateParams::identity(const SimParams& base) {
  SurrogateParams p;
  p.base = base;
  return p;
}

SurrogateParams SurrogateParams::canonical(const SimParams& base) {
  SurrogateParams p;
  p.base = base;
  p.gain_left = 0.8;
  p.gain_right = 1.05;
  p.deadzone = 1.0;
  p.latency_steps = 2;
  p.noise_sigma = 0.1;
  return p;
}

SurrogateParams SurrogateParams::from_config(const KeyValueConfig& cfg,
                                             const std::string& prefix) {
  SurrogateParams p;
  p.base = SimParams::from_config(cfg);
  p.gain_left = cfg.get_double(prefix + "gain_left", p.gain_left);
  p.gain_right = cfg.get_double(prefix + "gain_right", p.gain_right);
  p.deadzone = cfg.get_double(prefix + "deadzone", p.deadzone);
  p.latency_steps = static_cast<int>(cfg.get_int(prefix + "latency_steps", p.latency_steps));
  p.noise_sigma = cfg.get_double(prefix + "noise_sigma", p.noise_sigma);
  p.validate();
  return p;
}

void SurrogateParams::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  base.to_config(cfg);
  cfg.set_double(prefix + "gain_left", gain_left);
  cfg.set_double(prefix + "gain_right", gain_right);
  cfg.set_double(prefix + "deadzone", deadzone);
  cfg.set_int(prefix + "latency_steps", latency_steps);
  cfg.set_double(prefix + "noise_sigma", noise_sigma);
}

WheelCommand surrogate_effective(const WheelCommand& commanded, const SurrogateParams& plant,
                                 SurrogateState& state, Rng& rng) {
  WheelCommand delayed = commanded;
  if (plant.latency_steps > 0) {
    state.queue.push_back(commanded);
    if (state.queue.size() > static_cast<std::size_t>(plant.latency_steps)) {
      delayed = state.queue.front();
      state.queue.pop_front();
    } else {
      delayed = {0.0, 0.0};  // nothing in flight yet
    }
  }
  WheelCommand eff{delayed.left * plant.gain_left, delayed.right * plant.gain_right};
  if (std::abs(eff.left) < plant.deadzone) eff.left = 0.0;
  if (std::abs(eff.right) < plant.deadzone) eff.right = 0.0;
  if (plant.noise_sigma > 0.0) {
    eff.left += rng.normal(0.0, plant.noise_sigma);
    eff.right += rng.normal(0.0, plant.noise_sigma);
  }
  return eff;
}

WheelController make_naive_controller(const SimParams& params) {
  return [params](double v, double omega, const WheelCommand&) {
    return naive_inverse(v, omega, params);
  };
}

AdapterScaling AdapterScaling::from_params(const SimParams& p) {
  AdapterScaling s;
  s.wheel_ref = p.max_wheel_speed;
  s.twist_v_ref = p.max_linear_speed();
  s.twist_omega_ref = p.wheel_radius * 2.0 * p.max_wheel_speed / p.axle_length;
  return s;
}

WheelController make_adapter_controller(MlpParams adapter, const SimParams& params) {
  if (adapter.spec.input_size() != 4 || adapter.spec.output_size() != 2) {
    throw ContractError("adapter network must map 4 inputs to 2 outputs");
  }
  const AdapterScaling sc = AdapterScaling::from_params(params);
  const double max_speed = params.max_wheel_speed;
  return [adapter = std::move(adapter), sc, max_speed](double v, double omega,
                                                       const WheelCommand& wheels) {
    Eigen::VectorXd in(4);
    in << v / sc.twist_v_ref, omega / sc.twist_omega_ref, wheels.left / sc.wheel_ref,
        wheels.right / sc.wheel_ref;
    const Eigen::VectorXd out = mlp_forward(adapter, in);
    return clamp_wheels({out(0) * sc.wheel_ref, out(1) * sc.wheel_ref}, max_speed);
  };
}

SurrogatePlant::SurrogatePlant(const SurrogateParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  params_.validate();
}

void SurrogatePlant::reset(std::uint64_t seed, const Pose& start) {
  robot_ = RobotState{};
  robot_.pose = start;
  state_.reset();
  rng_ = Rng(seed);
}

void SurrogatePlant::step(const WheelCommand& commanded) {
  const WheelCommand clamped = clamp_wheels(commanded, params_.base.max_wheel_speed);
  const WheelCommand eff = surrogate_effective(clamped, params_, state_, rng_);
  step_robot(robot_, eff, params_.base);
}

}  // namespace vsss

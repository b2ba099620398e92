#pragma once

#include <string>
#include <vector>

#include "vsss/actuation.hpp"
#include "vsss/agents.hpp"
#include "vsss/env.hpp"

namespace vsss {

// One supervised pair for the inverse actuation map: the twist a command
// window actually achieved (plus the wheel state when it was issued) against
// the wheel command that produced it.
struct AdapterSample {
  double v_des = 0.0;
  double omega_des = 0.0;
  double wheel_left = 0.0;   // wheels_actual when the command was issued
  double wheel_right = 0.0;
  double target_left = 0.0;  // the command held over the window
  double target_right = 0.0;
};

struct ExcitationConfig {
  int window_steps = 30;       // sim steps each random command is held
  int measure_steps = 10;      // trailing steps used for pose differencing
  double envelope_scale = 1.2; // twist draws overshoot the action envelope
  double direct_wheel_fraction = 0.3;  // share of raw wheel-space draws
  double v_max = 0.8;
  double omega_max = 12.0;
};

// Drives the plant with persistent-excitation commands and records one sample
// per settled window. Seed-deterministic.
std::vector<AdapterSample> collect_adapter_dataset(const SurrogateParams& plant,
                                                   std::size_t n_samples,
                                                   const ExcitationConfig& excitation,
                                                   std::uint64_t seed);

// CSV columns: v_des,omega_des,wheel_left,wheel_right,target_left,target_right
void write_dataset_csv(const std::vector<AdapterSample>& dataset, const std::string& path,
                       const std::string& manifest_comment = "");
std::vector<AdapterSample> read_dataset_csv(const std::string& path);

struct AdapterTrainConfig {
  int epochs = 40;
  int batch_size = 64;
  double lr = 1e-3;
  double val_fraction = 0.1;
  bool shuffle = true;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;

  void validate() const;
  static AdapterTrainConfig from_config(const KeyValueConfig& cfg,
                                        const std::string& prefix = "adapter.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "adapter.") const;
};

struct AdapterTrainReport {
  double train_rmse = 0.0;  // rad/s, denormalized
  double val_rmse = 0.0;    // rad/s; NaN when val_fraction = 0
  int epochs_run = 0;
};

// Mean-squared-error regression of the inverse map on normalized features.
// Returns the trained network through `out`.
AdapterTrainReport train_adapter(const std::vector<AdapterSample>& dataset,
                                 const AdapterTrainConfig& cfg, const SimParams& sim,
                                 MlpParams& out);

struct TrackingCommand {
  double v = 0.0;
  double omega = 0.0;
};

struct CommandTrackingError {
  TrackingCommand desired;
  double v_achieved = 0.0;
  double omega_achieved = 0.0;
  double err_v = 0.0;
  double err_omega = 0.0;
};

struct TrackingReport {
  double rmse_v = 0.0;      // m/s
  double rmse_omega = 0.0;  // rad/s
  // Unit-free combination: sqrt((rmse_v/v_ref)^2 + (rmse_omega/omega_ref)^2).
  double combined = 0.0;
  double v_ref = 0.0;
  double omega_ref = 0.0;
  std::vector<CommandTrackingError> per_command;
};

struct TrackingEvalConfig {
  int settle_steps = 60;
  int measure_steps = 40;
  double v_ref = 0.8;
  double omega_ref = 12.0;
};

// Runs each desired twist on the plant through `controller`, measures the
// achieved twist by pose differencing over the trailing window, and reports
// RMS errors. Deterministic given the seed.
TrackingReport evaluate_tracking(const WheelController& controller, const SurrogateParams& plant,
                                 std::span<const TrackingCommand> commands, std::uint64_t seed,
                                 const TrackingEvalConfig& eval_cfg = {});

// The default command grid used by tracking experiments: 7x7 over the action
// envelope.
std::vector<TrackingCommand> default_tracking_grid(double v_max = 0.8, double omega_max = 12.0);

struct TransferArm {
  EvalStats stats;
  std::string label;
};

struct TransferReport {
  TransferArm adapter_off;  // naive inverse through the plant
  TransferArm adapter_on;   // trained adapter through the plant
};

// Replays a trained policy in an environment actuated by the surrogate plant,
// with and without the adapter in the control path.
TransferReport transfer_policy_eval(const PolicyFn& policy, const MlpParams& adapter,
                                    const SurrogateParams& plant, const EnvConfig& env_cfg,
                                    int episodes, std::uint64_t seed);

}  // namespace vsss

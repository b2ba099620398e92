#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsss/env.hpp"
#include "vsss/nn.hpp"
#include "vsss/replay_buffer.hpp"

namespace vsss {

struct DqnConfig {
  double gamma = 0.95;
  double lr = 1e-3;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::int64_t target_sync_period = 1000;  // gradient steps between hard syncs
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_steps = 50000;
  std::int64_t warmup_steps = 2000;
  std::int64_t max_env_steps = 150000;
  std::int64_t eval_period = 10000;
  int eval_episodes = 10;
  std::vector<int> hidden = {64, 64};

  void validate() const;
  static DqnConfig from_config(const KeyValueConfig& cfg, const std::string& prefix = "dqn.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "dqn.") const;
};

struct DdpgConfig {
  double gamma = 0.95;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_mu = 0.0;
  double ou_dt = 1.0;
  std::int64_t warmup_steps = 2000;
  std::int64_t max_env_steps = 50000;
  std::int64_t eval_period = 5000;
  int eval_episodes = 10;
  std::vector<int> hidden = {64, 64};

  void validate() const;
  static DdpgConfig from_config(const KeyValueConfig& cfg, const std::string& prefix = "ddpg.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "ddpg.") const;
};

// Linear decay from epsilon_start to epsilon_end, reaching the end value
// exactly at epsilon_decay_steps.
double epsilon_at(const DqnConfig& cfg, std::int64_t env_step);

// y_i = r_i + gamma * max_a Q_target(s'_i, a) * (1 - done_i)
Eigen::VectorXd dqn_td_targets(std::span<const Transition* const> batch,
                               const MlpParams& q_target, double gamma);

// Epsilon-greedy with lowest-index tie-break on the greedy path.
int dqn_select_action(std::span<const double> q_values, double epsilon, Rng& rng);
int argmax_lowest(std::span<const double> values);

// theta_target <- tau * theta_source + (1 - tau) * theta_target
void soft_update(MlpParams& target, const MlpParams& source, double tau);

// One Euler-Maruyama step of an Ornstein-Uhlenbeck process.
double ou_noise_step(double x, double theta, double mu, double sigma, double dt, Rng& rng);

struct DdpgNets {
  MlpParams actor;
  MlpParams critic;
  MlpParams actor_target;
  MlpParams critic_target;
  AdamState actor_opt;
  AdamState critic_opt;

  static DdpgNets init(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& rng);
};

struct DdpgLosses {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) before the actor step
};

// Critic regression to soft targets, actor ascent through the critic's input
// gradient, then Polyak updates of both targets.
DdpgLosses ddpg_update(std::span<const Transition* const> batch, DdpgNets& nets,
                       const DdpgConfig& cfg);

struct CurvePoint {
  std::int64_t env_step = 0;
  double eval_return = 0.0;
  double eval_steps_to_goal = 0.0;  // NaN when no eval episode scored
  double eval_score_rate = 0.0;
};

struct EvalStats {
  int episodes = 0;
  int scored = 0;
  double mean_return = 0.0;
  std::vector<int> steps_to_goal;  // scoring episodes only

  double score_rate() const { return episodes ? static_cast<double>(scored) / episodes : 0.0; }
  double steps_mean() const;  // NaN when empty
  double steps_std() const;   // population std; NaN when empty
};

using PolicyFn = std::function<Action(const Observation&)>;

// Greedy/noise-free rollout of `policy` over `episodes` with fixed derived
// seeds; used for learning curves and final reports.
EvalStats evaluate_policy(Env& env, const PolicyFn& policy, int episodes, std::uint64_t seed,
                          std::string_view seed_stream = "eval");

PolicyFn make_dqn_policy(const MlpParams& q_net);
PolicyFn make_ddpg_policy(const MlpParams& actor, const EnvConfig& cfg);
PolicyFn make_random_discrete_policy(std::shared_ptr<Rng> rng, int table_size);

using EnvFactory = std::function<Env()>;

struct TrainOptions {
  std::optional<std::string> diagnostics_dir;  // NaN-abort checkpoint location
  std::function<void(const CurvePoint&)> on_eval;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  MlpParams final_params;   // Q net / actor
  MlpParams best_params;    // best eval_return seen
  double best_eval_return = 0.0;
  std::int64_t env_steps = 0;
};

// Standard interact -> store -> sample -> update loops. Fully deterministic
// for a fixed seed; all randomness flows from named substreams of `seed`.
TrainResult train_dqn(const EnvFactory& factory, const DqnConfig& cfg, std::uint64_t seed,
                      const TrainOptions& options = {});
TrainResult train_ddpg(const EnvFactory& factory, const DdpgConfig& cfg, std::uint64_t seed,
                       const TrainOptions& options = {});

}  // namespace vsss

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "vsss/actuation.hpp"
#include "vsss/physics.hpp"
#include "vsss/rng.hpp"

namespace vsss {

// Desired body twist, the high-level action for continuous policies.
struct ActionContinuous {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

struct ActionDiscrete {
  int index = 0;
};

using Action = std::variant<ActionContinuous, ActionDiscrete>;

struct Observation {
  std::vector<double> features;
};

struct RewardWeights {
  double goal = 10.0;
  double ball_potential = 1.0;
  double robot_ball_potential = 0.2;
  double energy = 1e-4;
};

// Components are stored already weighted; total is their plain sum.
struct RewardBreakdown {
  double goal = 0.0;
  double ball_potential = 0.0;
  double robot_ball_potential = 0.0;
  double energy_penalty = 0.0;
  double total = 0.0;
};

enum class DoneReason { kGoalFor, kGoalAgainst, kMaxSteps };
std::string_view to_string(DoneReason r);
std::optional<DoneReason> done_reason_from_string(std::string_view s);

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  std::optional<DoneReason> done_reason;  // set iff done
  std::map<std::string, double> info;
};

enum class OpponentPolicy { kStationary, kRandom, kScriptedStriker };
enum class ActionMode { kContinuous, kDiscrete };
enum class SpawnMode { kFixed, kRandom };

struct EnvConfig {
  SimParams sim;
  FieldSpec field;
  int team_size = 1;           // robots per side, 1..3
  int controlled_robot = 0;    // index within the controlled team
  Side controlled_side = Side::kBlue;
  OpponentPolicy opponent_policy = OpponentPolicy::kStationary;
  int max_steps = 400;         // control steps per episode
  ActionMode action_mode = ActionMode::kContinuous;
  RewardWeights reward_weights;
  SpawnMode spawn_mode = SpawnMode::kFixed;
  double v_max = 0.8;          // m/s, action clamp
  double omega_max = 12.0;     // rad/s, action clamp
  int control_interval_steps = 8;  // sim steps per env step

  double control_dt() const { return sim.dt * control_interval_steps; }
  // ball (4) + 7 per robot, controlled robot first
  int observation_size() const { return 4 + 7 * 2 * team_size; }
  Vec2 attack_goal_center() const;   // goal the controlled team shoots at
  Vec2 defend_goal_center() const;

  void validate() const;  // throws ConfigError
  static EnvConfig from_config(const KeyValueConfig& cfg);
  void to_config(KeyValueConfig& cfg) const;
  std::map<std::string, std::string> to_flat_map() const;
  static EnvConfig from_flat_map(const std::map<std::string, std::string>& entries);
};

// The fixed 3x3 (v, omega) command grid; index = 3 * v_index + omega_index
// with v in {-v_max/2, 0, +v_max} and omega in {-omega_max, 0, +omega_max}.
// Index 4 is the all-stop entry.
std::vector<ActionContinuous> discrete_action_table(const EnvConfig& config);

// Normalized feature vector in the controlled team's attack frame (attack
// direction mapped to +x): ball [px, py, vx, vy], then per robot (controlled
// first, then teammates, then opponents, each by index)
// [px, py, vx, vy, sin(theta), cos(theta), omega]. Everything is scaled to
// nominal ranges and clamped to [-1.25, 1.25].
Observation build_observation(const WorldState& world, const EnvConfig& config);

struct StepEvents {
  std::optional<Side> goal_scored_against;
  WheelCommand controlled_wheels;  // commanded this interval, for the energy term
  double control_dt = 0.0;         // seconds actually simulated this interval
};

// Potential-based shaping plus goal indicator and an energy penalty. The
// potential terms telescope over an episode by construction.
RewardBreakdown compute_reward(const WorldState& prev, const WorldState& curr,
                               const StepEvents& events, const RewardWeights& weights,
                               const EnvConfig& config);

enum class StrikerMode { kRecover, kAlign, kStrike };

// Deterministic three-mode attacker controlling robot 0 of `side`: get behind
// the ball relative to the goal, line up with the ball-goal axis, then drive
// through the ball. Pure function of the world.
ActionContinuous scripted_striker(const WorldState& world, Side side, const EnvConfig& config);
StrikerMode striker_mode(const WorldState& world, Side side, const EnvConfig& config);

// Per-interval controller for the leading opponent robot; overrides the
// configured opponent policy when set (used to play checkpoints against each
// other in matches).
using OpponentController = std::function<ActionContinuous(const WorldState&, Side)>;

// Episodic step/reset environment over the physics core. Single-threaded;
// instances are independent values.
class Env {
 public:
  explicit Env(EnvConfig config);

  Observation reset(std::uint64_t seed);
  StepResult step(const Action& action);

  const WorldState& world() const { return world_; }
  const EnvConfig& config() const { return config_; }
  bool episode_active() const { return started_ && !done_; }
  bool done() const { return done_; }
  int episode_step() const { return step_count_; }
  std::uint64_t sim_steps() const { return world_.step; }

  // Replaces the default naive-inverse map from (v, omega) to wheel speeds.
  void set_wheel_controller(WheelController controller);
  // Routes the controlled robot's commands through a perturbed plant.
  void set_actuation_surrogate(const SurrogateParams& plant);
  void clear_actuation_surrogate();
  void set_opponent_controller(OpponentController controller);
  // Per-step JSONL episode log; pass nullptr to disable.
  void set_jsonl_sink(std::ostream* sink) { jsonl_sink_ = sink; }
  // Called with every world snapshot (including the reset state).
  void set_snapshot_recorder(std::function<void(const WorldState&)> recorder);

 private:
  void spawn_fixed();
  void spawn_random();
  ActionContinuous clamp_action(const ActionContinuous& a) const;
  ActionContinuous resolve_action(const Action& action) const;
  ActionContinuous opponent_action(Side side);
  void log_step(const Action& action, const StepResult& result) const;

  EnvConfig config_;
  std::vector<ActionContinuous> action_table_;
  WorldState world_;
  Rng rng_{0};
  WheelController controller_;
  OpponentController opponent_override_;
  std::optional<SurrogateParams> surrogate_;
  SurrogateState surrogate_state_;
  bool started_ = false;
  bool done_ = false;
  int step_count_ = 0;
  std::ostream* jsonl_sink_ = nullptr;
  std::function<void(const WorldState&)> recorder_;
};

}  // namespace vsss

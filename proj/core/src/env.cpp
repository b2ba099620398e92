#include "vsss/env.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "vsss/error.hpp"

namespace vsss {

namespace {

// Velocity normalization references for observations. The ball can briefly
// exceed robot speed after an impulse, hence the wider reference.
constexpr double kBallSpeedRef = 2.5;   // m/s
constexpr double kObsClamp = 1.25;

struct SpawnPose {
  double x, y, theta;
};

// Canonical kick-off placements for the default field. The yellow leader sits
// off the center line so a straight push from the blue side is not walled off.
constexpr SpawnPose kBlueSpawns[3] = {
    {-0.20, 0.00, 0.0}, {-0.50, 0.30, 0.0}, {-0.50, -0.30, 0.0}};
constexpr SpawnPose kYellowSpawns[3] = {
    {0.35, 0.30, -kPi}, {0.55, -0.30, -kPi}, {0.55, 0.30, -kPi}};

double obs_clamp(double v) { return std::clamp(v, -kObsClamp, kObsClamp); }

// Transform into the controlled team's attack frame. Blue already attacks +x;
// yellow views are point-reflected through the field center.
struct AttackFrame {
  double sign;  // +1 blue, -1 yellow

  Vec2 pos(const Vec2& p) const { return p * sign; }
  Vec2 vel(const Vec2& v) const { return v * sign; }
  double heading(double theta) const { return sign > 0 ? theta : wrap_angle(theta + kPi); }
};

AttackFrame frame_for(Side side) { return {side == Side::kBlue ? 1.0 : -1.0}; }

void append_robot_features(std::vector<double>& out, const RobotState& r,
                           const AttackFrame& f, const EnvConfig& cfg) {
  const double v_ref = cfg.sim.max_linear_speed();
  const Vec2 p = f.pos(r.pose.position);
  const Vec2 v = f.vel(r.lin_vel);
  const double heading = f.heading(r.pose.theta);
  out.push_back(obs_clamp(p.x / cfg.field.half_length()));
  out.push_back(obs_clamp(p.y / cfg.field.half_width()));
  out.push_back(obs_clamp(v.x / v_ref));
  out.push_back(obs_clamp(v.y / v_ref));
  out.push_back(obs_clamp(std::sin(heading)));
  out.push_back(obs_clamp(std::cos(heading)));
  out.push_back(obs_clamp(r.ang_vel / cfg.omega_max));
}

nlohmann::json action_to_json(const Action& action) {
  if (const auto* c = std::get_if<ActionContinuous>(&action)) {
    return {{"mode", "continuous"}, {"v", c->v}, {"omega", c->omega}};
  }
  const auto& d = std::get<ActionDiscrete>(action);
  return {{"mode", "discrete"}, {"index", d.index}};
}

}  // namespace

std::string_view to_string(DoneReason r) {
  switch (r) {
    case DoneReason::kGoalFor: return "goal_for";
    case DoneReason::kGoalAgainst: return "goal_against";
    case DoneReason::kMaxSteps: return "max_steps";
  }
  return "unknown";
}

std::optional<DoneReason> done_reason_from_string(std::string_view s) {
  if (s == "goal_for") return DoneReason::kGoalFor;
  if (s == "goal_against") return DoneReason::kGoalAgainst;
  if (s == "max_steps") return DoneReason::kMaxSteps;
  return std::nullopt;
}

Vec2 EnvConfig::attack_goal_center() const {
  const double x = field.half_length();
  return controlled_side == Side::kBlue ? Vec2{x, 0.0} : Vec2{-x, 0.0};
}

Vec2 EnvConfig::defend_goal_center() const { return -attack_goal_center(); }

void EnvConfig::validate() const {
  sim.validate();
  field.validate();
  if (team_size < 1 || team_size > 3) throw ConfigError("env.team_size must be 1..3");
  if (controlled_robot < 0 || controlled_robot >= team_size)
    throw ConfigError("env.controlled_robot must be in [0, team_size)");
  if (max_steps <= 0) throw ConfigError("env.max_steps must be > 0");
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("env.v_max must be > 0");
  if (!(omega_max > 0.0) || !std::isfinite(omega_max))
    throw ConfigError("env.omega_max must be > 0");
  if (control_interval_steps < 1) throw ConfigError("env.control_interval_steps must be >= 1");
  const double weights[] = {reward_weights.goal, reward_weights.ball_potential,
                            reward_weights.robot_ball_potential, reward_weights.energy};
  for (double w : weights) {
    if (!std::isfinite(w)) throw ConfigError("reward weights must be finite");
  }
}

namespace {

OpponentPolicy opponent_from_string(const std::string& s) {
  if (s == "stationary") return OpponentPolicy::kStationary;
  if (s == "random") return OpponentPolicy::kRandom;
  if (s == "scripted_striker") return OpponentPolicy::kScriptedStriker;
  throw ConfigError("env.opponent must be stationary|random|scripted_striker, got '" + s + "'");
}

std::string opponent_to_string(OpponentPolicy p) {
  switch (p) {
    case OpponentPolicy::kStationary: return "stationary";
    case OpponentPolicy::kRandom: return "random";
    case OpponentPolicy::kScriptedStriker: return "scripted_striker";
  }
  return "stationary";
}

}  // namespace

EnvConfig EnvConfig::from_config(const KeyValueConfig& cfg) {
  EnvConfig c;
  c.sim = SimParams::from_config(cfg);
  c.field = FieldSpec::from_config(cfg);
  c.team_size = static_cast<int>(cfg.get_int("env.team_size", c.team_size));
  c.controlled_robot = static_cast<int>(cfg.get_int("env.controlled_robot", c.controlled_robot));
  const std::string side = cfg.get_string("env.controlled_side", "blue");
  if (side == "blue") {
    c.controlled_side = Side::kBlue;
  } else if (side == "yellow") {
    c.controlled_side = Side::kYellow;
  } else {
    throw ConfigError("env.controlled_side must be blue|yellow");
  }
  c.opponent_policy = opponent_from_string(cfg.get_string("env.opponent", "stationary"));
  c.max_steps = static_cast<int>(cfg.get_int("env.max_steps", c.max_steps));
  const std::string mode = cfg.get_string("env.action_mode", "continuous");
  if (mode == "continuous") {
    c.action_mode = ActionMode::kContinuous;
  } else if (mode == "discrete") {
    c.action_mode = ActionMode::kDiscrete;
  } else {
    throw ConfigError("env.action_mode must be continuous|discrete");
  }
  const std::string spawn = cfg.get_string("env.spawn", "fixed");
  if (spawn == "fixed") {
    c.spawn_mode = SpawnMode::kFixed;
  } else if (spawn == "random") {
    c.spawn_mode = SpawnMode::kRandom;
  } else {
    throw ConfigError("env.spawn must be fixed|random");
  }
  c.v_max = cfg.get_double("env.v_max", c.v_max);
  c.omega_max = cfg.get_double("env.omega_max", c.omega_max);
  c.control_interval_steps =
      static_cast<int>(cfg.get_int("env.control_interval_steps", c.control_interval_steps));
  c.reward_weights.goal = cfg.get_double("reward.goal", c.reward_weights.goal);
  c.reward_weights.ball_potential =
      cfg.get_double("reward.ball_potential", c.reward_weights.ball_potential);
  c.reward_weights.robot_ball_potential =
      cfg.get_double("reward.robot_ball_potential", c.reward_weights.robot_ball_potential);
  c.reward_weights.energy = cfg.get_double("reward.energy", c.reward_weights.energy);
  c.validate();
  return c;
}

void EnvConfig::to_config(KeyValueConfig& cfg) const {
  sim.to_config(cfg);
  field.to_config(cfg);
  cfg.set_int("env.team_size", team_size);
  cfg.set_int("env.controlled_robot", controlled_robot);
  cfg.set("env.controlled_side", std::string(to_string(controlled_side)));
  cfg.set("env.opponent", opponent_to_string(opponent_policy));
  cfg.set_int("env.max_steps", max_steps);
  cfg.set("env.action_mode", action_mode == ActionMode::kContinuous ? "continuous" : "discrete");
  cfg.set("env.spawn", spawn_mode == SpawnMode::kFixed ? "fixed" : "random");
  cfg.set_double("env.v_max", v_max);
  cfg.set_double("env.omega_max", omega_max);
  cfg.set_int("env.control_interval_steps", control_interval_steps);
  cfg.set_double("reward.goal", reward_weights.goal);
  cfg.set_double("reward.ball_potential", reward_weights.ball_potential);
  cfg.set_double("reward.robot_ball_potential", reward_weights.robot_ball_potential);
  cfg.set_double("reward.energy", reward_weights.energy);
}

std::map<std::string, std::string> EnvConfig::to_flat_map() const {
  KeyValueConfig cfg;
  to_config(cfg);
  return cfg.entries();
}

EnvConfig EnvConfig::from_flat_map(const std::map<std::string, std::string>& entries) {
  KeyValueConfig cfg;
  for (const auto& [k, v] : entries) cfg.set(k, v);
  EnvConfig c = from_config(cfg);
  cfg.expect_fully_consumed();
  return c;
}

std::vector<ActionContinuous> discrete_action_table(const EnvConfig& config) {
  const double vs[3] = {-config.v_max / 2.0, 0.0, config.v_max};
  const double ws[3] = {-config.omega_max, 0.0, config.omega_max};
  std::vector<ActionContinuous> table;
  table.reserve(9);
  for (double v : vs) {
    for (double w : ws) table.push_back({v, w});
  }
  return table;
}

Observation build_observation(const WorldState& world, const EnvConfig& config) {
  const AttackFrame f = frame_for(config.controlled_side);
  Observation obs;
  obs.features.reserve(static_cast<std::size_t>(config.observation_size()));
  const Vec2 bp = f.pos(world.ball.position);
  const Vec2 bv = f.vel(world.ball.velocity);
  obs.features.push_back(obs_clamp(bp.x / config.field.half_length()));
  obs.features.push_back(obs_clamp(bp.y / config.field.half_width()));
  obs.features.push_back(obs_clamp(bv.x / kBallSpeedRef));
  obs.features.push_back(obs_clamp(bv.y / kBallSpeedRef));

  const auto& own =
      config.controlled_side == Side::kBlue ? world.robots_blue : world.robots_yellow;
  const auto& other =
      config.controlled_side == Side::kBlue ? world.robots_yellow : world.robots_blue;
  const auto controlled = static_cast<std::size_t>(config.controlled_robot);
  append_robot_features(obs.features, own.at(controlled), f, config);
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (i != controlled) append_robot_features(obs.features, own[i], f, config);
  }
  for (const RobotState& r : other) append_robot_features(obs.features, r, f, config);
  return obs;
}

RewardBreakdown compute_reward(const WorldState& prev, const WorldState& curr,
                               const StepEvents& events, const RewardWeights& weights,
                               const EnvConfig& config) {
  RewardBreakdown r;
  if (events.goal_scored_against) {
    r.goal = *events.goal_scored_against == config.controlled_side ? -weights.goal : weights.goal;
  }
  const Vec2 goal_center = config.attack_goal_center();
  const double phi_ball_prev = distance(prev.ball.position, goal_center);
  const double phi_ball_curr = distance(curr.ball.position, goal_center);
  r.ball_potential = weights.ball_potential * (phi_ball_prev - phi_ball_curr);

  const auto& prev_team =
      config.controlled_side == Side::kBlue ? prev.robots_blue : prev.robots_yellow;
  const auto& curr_team =
      config.controlled_side == Side::kBlue ? curr.robots_blue : curr.robots_yellow;
  const auto idx = static_cast<std::size_t>(config.controlled_robot);
  const double phi_robot_prev = distance(prev_team.at(idx).pose.position, prev.ball.position);
  const double phi_robot_curr = distance(curr_team.at(idx).pose.position, curr.ball.position);
  r.robot_ball_potential = weights.robot_ball_potential * (phi_robot_prev - phi_robot_curr);

  r.energy_penalty = -weights.energy *
                     (std::abs(events.controlled_wheels.left) +
                      std::abs(events.controlled_wheels.right)) *
                     events.control_dt;
  r.total = r.goal + r.ball_potential + r.robot_ball_potential + r.energy_penalty;
  return r;
}

// --- scripted striker --------------------------------------------------------

namespace {

struct StrikerGeometry {
  const RobotState* me;
  Vec2 ball;
  Vec2 goal;
  Vec2 to_goal_dir;   // unit ball -> goal
  Vec2 rel;           // robot - ball
  double ahead;       // rel projected on attack line; > 0 means goal-side
  double standoff;
};

StrikerGeometry striker_geometry(const WorldState& world, Side side, const EnvConfig& cfg) {
  StrikerGeometry g;
  const auto& team = side == Side::kBlue ? world.robots_blue : world.robots_yellow;
  g.me = &team.at(0);
  g.ball = world.ball.position;
  const double sign = side == Side::kBlue ? 1.0 : -1.0;
  g.goal = {sign * cfg.field.half_length(), 0.0};
  g.to_goal_dir = (g.goal - g.ball).normalized_or({sign, 0.0});
  g.rel = g.me->pose.position - g.ball;
  g.ahead = g.rel.dot(g.to_goal_dir);
  g.standoff = cfg.sim.robot_radius() + cfg.sim.ball_radius + 0.02;
  return g;
}

ActionContinuous drive_to(const RobotState& me, const Vec2& target, const EnvConfig& cfg,
                          double speed_scale) {
  const Vec2 d = target - me.pose.position;
  const double dist = d.norm();
  if (dist < 5e-3) return {0.0, 0.0};
  const double desired = std::atan2(d.y, d.x);
  const double err = wrap_angle(desired - me.pose.theta);
  const double omega = clamp_abs(8.0 * err, cfg.omega_max);
  const double v =
      speed_scale * cfg.v_max * std::max(0.0, std::cos(err)) * std::min(1.0, dist / 0.15);
  return {v, omega};
}

Vec2 clamp_into_field(const Vec2& p, const EnvConfig& cfg) {
  const double margin = cfg.sim.robot_radius() + 0.01;
  return {std::clamp(p.x, -cfg.field.half_length() + margin, cfg.field.half_length() - margin),
          std::clamp(p.y, -cfg.field.half_width() + margin, cfg.field.half_width() - margin)};
}

}  // namespace

StrikerMode striker_mode(const WorldState& world, Side side, const EnvConfig& config) {
  const StrikerGeometry g = striker_geometry(world, side, config);
  if (g.ahead > -0.5 * g.standoff) return StrikerMode::kRecover;
  const Vec2 to_ball = (g.ball - g.me->pose.position).normalized_or(g.to_goal_dir);
  // 0.9063 ~= cos(25 deg)
  if (to_ball.dot(g.to_goal_dir) < 0.9063) return StrikerMode::kAlign;
  return StrikerMode::kStrike;
}

ActionContinuous scripted_striker(const WorldState& world, Side side, const EnvConfig& config) {
  const StrikerGeometry g = striker_geometry(world, side, config);
  const StrikerMode mode = striker_mode(world, side, config);
  const Vec2 perp = g.to_goal_dir.perp();
  const double lat = g.rel.dot(perp);
  const double side_sign = lat >= 0.0 ? 1.0 : -1.0;

  switch (mode) {
    case StrikerMode::kRecover: {
      Vec2 target = g.ball - g.to_goal_dir * (2.5 * g.standoff);
      // Swing wide when the direct path to the approach point would clip the ball.
      if (std::abs(lat) < 2.0 * g.standoff) {
        target = g.ball + perp * (side_sign * 2.5 * g.standoff) - g.to_goal_dir * (0.5 * g.standoff);
      }
      return drive_to(*g.me, clamp_into_field(target, config), config, 1.0);
    }
    case StrikerMode::kAlign: {
      const Vec2 target = g.ball - g.to_goal_dir * (2.0 * g.standoff);
      return drive_to(*g.me, clamp_into_field(target, config), config, 0.6);
    }
    case StrikerMode::kStrike: {
      // Aim through the ball toward the goal.
      const Vec2 target = g.ball + g.to_goal_dir * 0.3;
      const Vec2 d = target - g.me->pose.position;
      const double err = wrap_angle(std::atan2(d.y, d.x) - g.me->pose.theta);
      const double omega = clamp_abs(8.0 * err, config.omega_max);
      const double v = config.v_max * std::max(0.2, std::cos(err));
      return {v, omega};
    }
  }
  return {0.0, 0.0};
}

// --- Env ---------------------------------------------------------------------

Env::Env(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  action_table_ = discrete_action_table(config_);
  controller_ = make_naive_controller(config_.sim);
  world_ = make_world(static_cast<std::size_t>(config_.team_size),
                      static_cast<std::size_t>(config_.team_size));
}

void Env::set_wheel_controller(WheelController controller) {
  if (!controller) throw ContractError("Env::set_wheel_controller: empty controller");
  controller_ = std::move(controller);
}

void Env::set_actuation_surrogate(const SurrogateParams& plant) {
  plant.validate();
  surrogate_ = plant;
  surrogate_state_.reset();
}

void Env::clear_actuation_surrogate() {
  surrogate_.reset();
  surrogate_state_.reset();
}

void Env::set_opponent_controller(OpponentController controller) {
  opponent_override_ = std::move(controller);
}

void Env::spawn_fixed() {
  for (int i = 0; i < config_.team_size; ++i) {
    auto& blue = world_.robots_blue[static_cast<std::size_t>(i)];
    blue = RobotState{};
    blue.pose = {{kBlueSpawns[i].x, kBlueSpawns[i].y}, kBlueSpawns[i].theta};
    blue.pose.position = clamp_into_field(blue.pose.position, config_);
    auto& yellow = world_.robots_yellow[static_cast<std::size_t>(i)];
    yellow = RobotState{};
    yellow.pose = {{kYellowSpawns[i].x, kYellowSpawns[i].y}, kYellowSpawns[i].theta};
    yellow.pose.position = clamp_into_field(yellow.pose.position, config_);
  }
  world_.ball = BallState{};
}

void Env::spawn_random() {
  const double rr = config_.sim.robot_radius();
  const double margin = rr + 0.01;
  const double xmax = config_.field.half_length() - margin;
  const double ymax = config_.field.half_width() - margin;
  const double min_gap = 2.0 * rr + 0.01;

  // Ball first, then blue robots, then yellow; rejection keeps bodies apart.
  const double ball_margin = config_.sim.ball_radius + 0.03;
  world_.ball = BallState{};
  world_.ball.position = {rng_.uniform(-config_.field.half_length() + ball_margin,
                                       config_.field.half_length() - ball_margin),
                          rng_.uniform(-config_.field.half_width() + ball_margin,
                                       config_.field.half_width() - ball_margin)};

  std::vector<Vec2> placed;
  for (std::size_t i = 0; i < world_.robot_count(); ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      const Vec2 cand{rng_.uniform(-xmax, xmax), rng_.uniform(-ymax, ymax)};
      ok = distance(cand, world_.ball.position) >= rr + config_.sim.ball_radius + 0.01;
      for (const Vec2& p : placed) {
        if (distance(cand, p) < min_gap) {
          ok = false;
          break;
        }
      }
      if (ok) {
        RobotState& r = world_.robot_at(i);
        r = RobotState{};
        r.pose.position = cand;
        r.pose.theta = rng_.uniform(-kPi, kPi);
        placed.push_back(cand);
      }
    }
    if (!ok) throw ContractError("spawn_random: could not place robots without overlap");
  }
}

Observation Env::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  world_.step = 0;
  if (config_.spawn_mode == SpawnMode::kFixed) {
    spawn_fixed();
  } else {
    spawn_random();
  }
  surrogate_state_.reset();
  started_ = true;
  done_ = false;
  step_count_ = 0;
  if (recorder_) recorder_(world_);
  return build_observation(world_, config_);
}

ActionContinuous Env::clamp_action(const ActionContinuous& a) const {
  if (!std::isfinite(a.v) || !std::isfinite(a.omega)) {
    throw ContractError("action components must be finite");
  }
  return {clamp_abs(a.v, config_.v_max), clamp_abs(a.omega, config_.omega_max)};
}

ActionContinuous Env::resolve_action(const Action& action) const {
  if (const auto* d = std::get_if<ActionDiscrete>(&action)) {
    if (d->index < 0 || static_cast<std::size_t>(d->index) >= action_table_.size()) {
      throw ContractError("discrete action index " + std::to_string(d->index) +
                          " outside table of " + std::to_string(action_table_.size()));
    }
    return action_table_[static_cast<std::size_t>(d->index)];
  }
  return clamp_action(std::get<ActionContinuous>(action));
}

ActionContinuous Env::opponent_action(Side side) {
  if (opponent_override_) return clamp_action(opponent_override_(world_, side));
  switch (config_.opponent_policy) {
    case OpponentPolicy::kStationary:
      return {0.0, 0.0};
    case OpponentPolicy::kRandom:
      return {rng_.uniform(-config_.v_max, config_.v_max),
              rng_.uniform(-config_.omega_max, config_.omega_max)};
    case OpponentPolicy::kScriptedStriker:
      return clamp_action(scripted_striker(world_, side, config_));
  }
  return {0.0, 0.0};
}

StepResult Env::step(const Action& action) {
  if (!started_) throw ContractError("Env::step before reset");
  if (done_) throw ContractError("Env::step after episode done");

  const ActionContinuous desired = resolve_action(action);
  const Side own_side = config_.controlled_side;
  const Side opp_side = opposite(own_side);
  const std::size_t controlled_flat =
      (own_side == Side::kBlue ? 0 : world_.robots_blue.size()) +
      static_cast<std::size_t>(config_.controlled_robot);

  const WheelCommand controlled_cmd =
      clamp_wheels(controller_(desired.v, desired.omega,
                               world_.robot_at(controlled_flat).wheels_actual),
                   config_.sim.max_wheel_speed);

  // One command per robot per control interval; camera-rate for everyone.
  std::vector<WheelCommand> commands(world_.robot_count());
  const ActionContinuous opp = opponent_action(opp_side);
  const std::size_t opp_flat = (opp_side == Side::kBlue ? 0 : world_.robots_blue.size());
  commands[opp_flat] = naive_inverse(opp.v, opp.omega, config_.sim);
  commands[controlled_flat] = controlled_cmd;

  const WorldState prev = world_;
  std::optional<Side> goal;
  int executed = 0;
  for (int k = 0; k < config_.control_interval_steps; ++k) {
    if (surrogate_) {
      commands[controlled_flat] =
          surrogate_effective(controlled_cmd, *surrogate_, surrogate_state_, rng_);
    }
    world_ = step_sim(world_, commands, config_.sim, config_.field);
    ++executed;
    if (recorder_) recorder_(world_);
    goal = detect_goal(world_, config_.field);
    if (goal) break;
  }

  StepEvents events;
  events.goal_scored_against = goal;
  events.controlled_wheels = controlled_cmd;
  events.control_dt = executed * config_.sim.dt;

  StepResult result;
  result.reward = compute_reward(prev, world_, events, config_.reward_weights, config_);
  ++step_count_;
  if (goal) {
    result.done = true;
    result.done_reason = *goal == own_side ? DoneReason::kGoalAgainst : DoneReason::kGoalFor;
  } else if (step_count_ >= config_.max_steps) {
    result.done = true;
    result.done_reason = DoneReason::kMaxSteps;
  }
  done_ = result.done;
  result.observation = build_observation(world_, config_);
  result.info["episode_step"] = static_cast<double>(step_count_);
  result.info["sim_step"] = static_cast<double>(world_.step);
  if (jsonl_sink_) log_step(action, result);
  return result;
}

void Env::set_snapshot_recorder(std::function<void(const WorldState&)> recorder) {
  recorder_ = std::move(recorder);
}

void Env::log_step(const Action& action, const StepResult& result) const {
  nlohmann::json line{
      {"step", step_count_},
      {"action", action_to_json(action)},
      {"reward",
       {{"goal", result.reward.goal},
        {"ball_potential", result.reward.ball_potential},
        {"robot_ball_potential", result.reward.robot_ball_potential},
        {"energy_penalty", result.reward.energy_penalty},
        {"total", result.reward.total}}},
      {"done", result.done},
      {"done_reason",
       result.done_reason ? nlohmann::json(std::string(to_string(*result.done_reason)))
                          : nlohmann::json(nullptr)},
  };
  *jsonl_sink_ << line.dump() << '\n';
}

}  // namespace vsss

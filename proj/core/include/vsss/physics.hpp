#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vsss/config.hpp"
#include "vsss/vec2.hpp"

namespace vsss {

// Fixed masses used for collision impulse ratios and kinetic-energy reporting.
// Typical small-league hardware: ~450 g robot, golf-ball sized 46 g ball.
inline constexpr double kRobotMassKg = 0.45;
inline constexpr double kBallMassKg = 0.046;

enum class Side { kBlue, kYellow };

inline Side opposite(Side s) { return s == Side::kBlue ? Side::kYellow : Side::kBlue; }
std::string_view to_string(Side s);

struct WheelCommand {
  double left = 0.0;   // rad/s
  double right = 0.0;  // rad/s
  bool operator==(const WheelCommand&) const = default;
};

struct Pose {
  Vec2 position;        // meters
  double theta = 0.0;   // radians, kept in [-pi, pi)
};

struct RobotState {
  Pose pose;
  Vec2 lin_vel;               // m/s
  double ang_vel = 0.0;       // rad/s
  WheelCommand wheels_actual;     // after motor lag
  WheelCommand wheels_commanded;  // last command, clamped on entry
};

struct BallState {
  Vec2 position;  // meters
  Vec2 velocity;  // m/s
};

struct WorldState {
  std::uint64_t step = 0;
  std::vector<RobotState> robots_blue;
  std::vector<RobotState> robots_yellow;
  BallState ball;

  std::size_t robot_count() const { return robots_blue.size() + robots_yellow.size(); }
  // Flat index: blue robots first, then yellow.
  RobotState& robot_at(std::size_t flat);
  const RobotState& robot_at(std::size_t flat) const;
  Side side_of(std::size_t flat) const {
    return flat < robots_blue.size() ? Side::kBlue : Side::kYellow;
  }
};

struct SimParams {
  double dt = 0.005;                  // s, integration step
  double wheel_radius = 0.026;        // m
  double axle_length = 0.075;         // m, distance between wheel contacts
  double max_wheel_speed = 50.0;      // rad/s, symmetric clamp
  double motor_tau = 0.05;            // s, first-order lag; 0 = instantaneous
  double ground_friction_robot = 2.0; // 1/s, decay of coasting (non-driven) motion
  double ground_friction_ball = 1.2;  // 1/s
  double restitution_wall = 0.75;         // ball vs wall
  double restitution_robot_ball = 0.5;    // robot vs ball
  double robot_half_size = 0.0375;    // m, half of the square footprint
  double ball_radius = 0.02135;       // m

  // Robots collide as bounding circles of the square footprint.
  double robot_radius() const { return robot_half_size * 1.4142135623730951; }
  double max_linear_speed() const { return wheel_radius * max_wheel_speed; }

  void validate() const;  // throws ConfigError
  static SimParams from_config(const KeyValueConfig& cfg, const std::string& prefix = "sim.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "sim.") const;
};

struct FieldSpec {
  double length = 1.5;      // m, along x; goals sit on x = +-length/2
  double width = 1.3;       // m, along y
  double goal_width = 0.4;  // m, opening centered on y = 0
  double goal_depth = 0.1;  // m, pocket behind each goal line

  double half_length() const { return length / 2.0; }
  double half_width() const { return width / 2.0; }

  void validate() const;
  static FieldSpec from_config(const KeyValueConfig& cfg, const std::string& prefix = "field.");
  void to_config(KeyValueConfig& cfg, const std::string& prefix = "field.") const;
};

struct BodyTwist {
  double v = 0.0;      // m/s forward
  double omega = 0.0;  // rad/s counter-clockwise
};

WheelCommand clamp_wheels(const WheelCommand& cmd, double max_speed);

// Forward differential-drive map: wheel speeds to body-frame twist.
BodyTwist diff_drive_kinematics(const WheelCommand& cmd, const SimParams& params);

// One step of first-order motor lag toward the commanded speeds.
// tau = 0 passes the command through; dt/tau is clamped to 1 for stability.
WheelCommand apply_motor_dynamics(const WheelCommand& actual, const WheelCommand& commanded,
                                  double dt, double tau);

// Advances a single robot one step in free space: command clamp, motor lag,
// kinematic integration. The per-robot kernel of step_sim.
void step_robot(RobotState& robot, const WheelCommand& commanded, const SimParams& params);

// Advances the world by one fixed step: motor lag, robot/ball integration,
// collision resolution. Goal detection is a separate query. commands holds one
// entry per robot in flat order (blue then yellow). Deterministic.
WorldState step_sim(const WorldState& world, std::span<const WheelCommand> commands,
                    const SimParams& params, const FieldSpec& field);

// Positional correction + impulse for circle/circle and circle/wall contacts.
// Walls exclude the goal mouths so the ball can enter the pockets. Contacts
// resolve in a fixed order (walls, robot-robot by index pair, robot-ball by
// robot index) over two sweeps.
WorldState resolve_collisions(const WorldState& world, const SimParams& params,
                              const FieldSpec& field);

// Side scored *against*: ball center strictly past a goal line within the
// goal mouth. Blue defends the left goal (x < 0).
std::optional<Side> detect_goal(const WorldState& world, const FieldSpec& field);

// Field rectangle plus the two goal pockets, shrunk by `radius`.
bool inside_playable_region(const Vec2& p, double radius, const FieldSpec& field);

// Sum of translational + rotational kinetic energy, in joules, using the
// fixed masses above and the square footprint's gyration radius.
double kinetic_energy(const WorldState& world, const SimParams& params);

WorldState make_world(std::size_t blue_count, std::size_t yellow_count);

// Canonical little-endian byte layout (fixed field order); equal worlds
// serialize to equal bytes. Used by determinism checks and replay files.
std::vector<std::uint8_t> serialize_world(const WorldState& world);
WorldState deserialize_world(std::span<const std::uint8_t> bytes);
std::size_t serialized_world_size(std::size_t blue_count, std::size_t yellow_count);

}  // namespace vsss

#include "vsss/physics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "vsss/error.hpp"

namespace vsss {

namespace {

// Gyration radius^2 of a uniform square of side 2*half_size: side^2 / 6.
double robot_gyration_sq(const SimParams& p) {
  const double side = 2.0 * p.robot_half_size;
  return side * side / 6.0;
}

struct WallSegment {
  Vec2 a;
  Vec2 b;
};

// Walls seen by the ball: outer boundary with open goal mouths, plus the two
// goal pockets. Robots use the plain outer rectangle instead.
std::vector<WallSegment> ball_walls(const FieldSpec& f) {
  const double hl = f.half_length();
  const double hw = f.half_width();
  const double gw = f.goal_width / 2.0;
  const double back = hl + f.goal_depth;
  return {
      {{-hl, hw}, {hl, hw}},      // top
      {{-hl, -hw}, {hl, -hw}},    // bottom
      {{-hl, gw}, {-hl, hw}},     // left wall above mouth
      {{-hl, -hw}, {-hl, -gw}},   // left wall below mouth
      {{hl, gw}, {hl, hw}},       // right wall above mouth
      {{hl, -hw}, {hl, -gw}},     // right wall below mouth
      {{-back, -gw}, {-back, gw}},  // left pocket back
      {{-back, gw}, {-hl, gw}},     // left pocket top
      {{-back, -gw}, {-hl, -gw}},   // left pocket bottom
      {{back, -gw}, {back, gw}},    // right pocket back
      {{back, gw}, {hl, gw}},       // right pocket top
      {{back, -gw}, {hl, -gw}},     // right pocket bottom
  };
}

Vec2 closest_point_on_segment(const Vec2& p, const WallSegment& s) {
  const Vec2 ab = s.b - s.a;
  const double len_sq = ab.squared_norm();
  if (len_sq <= 0.0) return s.a;
  double t = (p - s.a).dot(ab) / len_sq;
  t = std::clamp(t, 0.0, 1.0);
  return s.a + ab * t;
}

// Kinematic integration of a single robot. Driven motion comes straight from
// the wheels (translation along the half-step heading so constant commands
// trace exact lines and near-exact arcs); with both wheels at rest the robot
// coasts and ground friction decays whatever velocity collisions left behind.
void integrate_robot(RobotState& r, const SimParams& p) {
  if (r.wheels_actual.left == 0.0 && r.wheels_actual.right == 0.0) {
    const double decay = std::exp(-p.ground_friction_robot * p.dt);
    r.lin_vel *= decay;
    r.ang_vel *= decay;
  } else {
    const BodyTwist t = diff_drive_kinematics(r.wheels_actual, p);
    const double mid_heading = r.pose.theta + 0.5 * t.omega * p.dt;
    r.lin_vel = t.v * Vec2::from_angle(mid_heading);
    r.ang_vel = t.omega;
  }
  r.pose.position += r.lin_vel * p.dt;
  r.pose.theta = wrap_angle(r.pose.theta + r.ang_vel * p.dt);
}

// Robot vs outer rectangle: positional clamp, inward velocity zeroed.
void collide_robot_bounds(RobotState& r, const SimParams& p, const FieldSpec& f) {
  const double rr = p.robot_radius();
  const double xmax = f.half_length() - rr;
  const double ymax = f.half_width() - rr;
  Vec2& pos = r.pose.position;
  if (pos.x < -xmax) {
    pos.x = -xmax;
    r.lin_vel.x = std::max(r.lin_vel.x, 0.0);
  } else if (pos.x > xmax) {
    pos.x = xmax;
    r.lin_vel.x = std::min(r.lin_vel.x, 0.0);
  }
  if (pos.y < -ymax) {
    pos.y = -ymax;
    r.lin_vel.y = std::max(r.lin_vel.y, 0.0);
  } else if (pos.y > ymax) {
    pos.y = ymax;
    r.lin_vel.y = std::min(r.lin_vel.y, 0.0);
  }
}

void collide_ball_walls(BallState& ball, const SimParams& p,
                        const std::vector<WallSegment>& walls) {
  for (const WallSegment& w : walls) {
    const Vec2 cp = closest_point_on_segment(ball.position, w);
    const Vec2 delta = ball.position - cp;
    const double dist = delta.norm();
    if (dist >= p.ball_radius) continue;
    // Degenerate center-on-wall: push toward the field center.
    const Vec2 n = dist > 1e-12 ? delta * (1.0 / dist) : (-cp).normalized_or({1.0, 0.0});
    ball.position = cp + n * p.ball_radius;
    const double vn = ball.velocity.dot(n);
    if (vn < 0.0) {
      ball.velocity -= (1.0 + p.restitution_wall) * vn * n;
    }
  }
}

// Equal-mass, fully inelastic robot-robot contact: split the positional
// correction and remove the approaching velocity component.
void collide_robot_robot(RobotState& a, RobotState& b, const SimParams& p) {
  const double contact = 2.0 * p.robot_radius();
  Vec2 delta = b.pose.position - a.pose.position;
  double dist = delta.norm();
  if (dist >= contact) return;
  Vec2 n = dist > 1e-9 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};
  const double depth = contact - dist;
  a.pose.position -= n * (0.5 * depth);
  b.pose.position += n * (0.5 * depth);
  const double approach = (b.lin_vel - a.lin_vel).dot(n);
  if (approach < 0.0) {
    a.lin_vel += n * (0.5 * approach);
    b.lin_vel -= n * (0.5 * approach);
  }
}

// Two-body impulse with the fixed robot/ball masses; positional correction is
// split by inverse mass so the heavy robot barely moves.
void collide_robot_ball(RobotState& robot, BallState& ball, const SimParams& p) {
  const double contact = p.robot_radius() + p.ball_radius;
  Vec2 delta = ball.position - robot.pose.position;
  double dist = delta.norm();
  if (dist >= contact) return;
  Vec2 n = dist > 1e-9 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};
  const double depth = contact - dist;
  const double inv_mr = 1.0 / kRobotMassKg;
  const double inv_mb = 1.0 / kBallMassKg;
  const double inv_sum = inv_mr + inv_mb;
  robot.pose.position -= n * (depth * inv_mr / inv_sum);
  ball.position += n * (depth * inv_mb / inv_sum);
  const double approach = (ball.velocity - robot.lin_vel).dot(n);
  if (approach < 0.0) {
    const double j = -(1.0 + p.restitution_robot_ball) * approach / inv_sum;
    ball.velocity += n * (j * inv_mb);
    robot.lin_vel -= n * (j * inv_mr);
  }
}

void clamp_ball_into_region(BallState& ball, const SimParams& p, const FieldSpec& f) {
  const double rb = p.ball_radius;
  const double hl = f.half_length();
  const double hw = f.half_width();
  const double gw = f.goal_width / 2.0;
  Vec2& pos = ball.position;
  pos.y = std::clamp(pos.y, -hw + rb, hw - rb);
  const bool in_mouth = std::abs(pos.y) <= gw - rb;
  const double xmax = in_mouth ? hl + f.goal_depth - rb : hl - rb;
  pos.x = std::clamp(pos.x, -xmax, xmax);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void require(std::size_t n) const {
    if (pos + n > bytes.size()) throw IoError("world blob truncated");
  }
};

void put_robot(std::vector<std::uint8_t>& out, const RobotState& r) {
  put_f64(out, r.pose.position.x);
  put_f64(out, r.pose.position.y);
  put_f64(out, r.pose.theta);
  put_f64(out, r.lin_vel.x);
  put_f64(out, r.lin_vel.y);
  put_f64(out, r.ang_vel);
  put_f64(out, r.wheels_actual.left);
  put_f64(out, r.wheels_actual.right);
  put_f64(out, r.wheels_commanded.left);
  put_f64(out, r.wheels_commanded.right);
}

RobotState read_robot(ByteReader& in) {
  RobotState r;
  r.pose.position.x = in.f64();
  r.pose.position.y = in.f64();
  r.pose.theta = in.f64();
  r.lin_vel.x = in.f64();
  r.lin_vel.y = in.f64();
  r.ang_vel = in.f64();
  r.wheels_actual.left = in.f64();
  r.wheels_actual.right = in.f64();
  r.wheels_commanded.left = in.f64();
  r.wheels_commanded.right = in.f64();
  return r;
}

}  // namespace

std::string_view to_string(Side s) { return s == Side::kBlue ? "blue" : "yellow"; }

RobotState& WorldState::robot_at(std::size_t flat) {
  return flat < robots_blue.size() ? robots_blue[flat]
                                   : robots_yellow[flat - robots_blue.size()];
}

const RobotState& WorldState::robot_at(std::size_t flat) const {
  return flat < robots_blue.size() ? robots_blue[flat]
                                   : robots_yellow[flat - robots_blue.size()];
}

void SimParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (!(wheel_radius > 0.0)) throw ConfigError("sim.wheel_radius must be > 0");
  if (!(axle_length > 0.0)) throw ConfigError("sim.axle_length must be > 0");
  if (!(max_wheel_speed > 0.0)) throw ConfigError("sim.max_wheel_speed must be > 0");
  if (!(motor_tau >= 0.0)) throw ConfigError("sim.motor_tau must be >= 0");
  if (!(ground_friction_robot >= 0.0)) throw ConfigError("sim.ground_friction_robot must be >= 0");
  if (!(ground_friction_ball >= 0.0)) throw ConfigError("sim.ground_friction_ball must be >= 0");
  if (restitution_wall < 0.0 || restitution_wall > 1.0)
    throw ConfigError("sim.restitution_wall must be in [0, 1]");
  if (restitution_robot_ball < 0.0 || restitution_robot_ball > 1.0)
    throw ConfigError("sim.restitution_robot_ball must be in [0, 1]");
  if (!(robot_half_size > 0.0)) throw ConfigError("sim.robot_half_size must be > 0");
  if (!(ball_radius > 0.0)) throw ConfigError("sim.ball_radius must be > 0");
}

SimParams SimParams::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  SimParams p;
  p.dt = cfg.get_double(prefix + "dt", p.dt);
  p.wheel_radius = cfg.get_double(prefix + "wheel_radius", p.wheel_radius);
  p.axle_length = cfg.get_double(prefix + "axle_length", p.axle_length);
  p.max_wheel_speed = cfg.get_double(prefix + "max_wheel_speed", p.max_wheel_speed);
  p.motor_tau = cfg.get_double(prefix + "motor_tau", p.motor_tau);
  p.ground_friction_robot = cfg.get_double(prefix + "ground_friction_robot", p.ground_friction_robot);
  p.ground_friction_ball = cfg.get_double(prefix + "ground_friction_ball", p.ground_friction_ball);
  p.restitution_wall = cfg.get_double(prefix + "restitution_wall", p.restitution_wall);
  p.restitution_robot_ball =
      cfg.get_double(prefix + "restitution_robot_ball", p.restitution_robot_ball);
  p.robot_half_size = cfg.get_double(prefix + "robot_half_size", p.robot_half_size);
  p.ball_radius = cfg.get_double(prefix + "ball_radius", p.ball_radius);
  p.validate();
  return p;
}

void SimParams::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  cfg.set_double(prefix + "dt", dt);
  cfg.set_double(prefix + "wheel_radius", wheel_radius);
  cfg.set_double(prefix + "axle_length", axle_length);
  cfg.set_double(prefix + "max_wheel_speed", max_wheel_speed);
  cfg.set_double(prefix + "motor_tau", motor_tau);
  cfg.set_double(prefix + "ground_friction_robot", ground_friction_robot);
  cfg.set_double(prefix + "ground_friction_ball", ground_friction_ball);
  cfg.set_double(prefix + "restitution_wall", restitution_wall);
  cfg.set_double(prefix + "restitution_robot_ball", restitution_robot_ball);
  cfg.set_double(prefix + "robot_half_size", robot_half_size);
  cfg.set_double(prefix + "ball_radius", ball_radius);
}

void FieldSpec::validate() const {
  if (!(length > 0.0) || !(width > 0.0)) throw ConfigError("field dimensions must be > 0");
  if (!(goal_width > 0.0) || goal_width >= width)
    throw ConfigError("field.goal_width must be in (0, width)");
  if (!(goal_depth > 0.0)) throw ConfigError("field.goal_depth must be > 0");
}

FieldSpec FieldSpec::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  FieldSpec f;
  f.length = cfg.get_double(prefix + "length", f.length);
  f.width = cfg.get_double(prefix + "width", f.width);
  f.goal_width = cfg.get_double(prefix + "goal_width", f.goal_width);
  f.goal_depth = cfg.get_double(prefix + "goal_depth", f.goal_depth);
  f.validate();
  return f;
}

void FieldSpec::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  cfg.set_double(prefix + "length", length);
  cfg.set_double(prefix + "width", width);
  cfg.set_double(prefix + "goal_width", goal_width);
  cfg.set_double(prefix + "goal_depth", goal_depth);
}

WheelCommand clamp_wheels(const WheelCommand& cmd, double max_speed) {
  return {clamp_abs(cmd.left, max_speed), clamp_abs(cmd.right, max_speed)};
}

BodyTwist diff_drive_kinematics(const WheelCommand& cmd, const SimParams& params) {
  BodyTwist t;
  t.v = params.wheel_radius * (cmd.right + cmd.left) / 2.0;
  t.omega = params.wheel_radius * (cmd.right - cmd.left) / params.axle_length;
  return t;
}

WheelCommand apply_motor_dynamics(const WheelCommand& actual, const WheelCommand& commanded,
                                  double dt, double tau) {
  if (!(dt > 0.0)) throw ContractError("apply_motor_dynamics: dt must be > 0");
  if (tau < 0.0) throw ContractError("apply_motor_dynamics: tau must be >= 0");
  if (tau == 0.0) return commanded;
  const double alpha = std::min(dt / tau, 1.0);
  return {actual.left + alpha * (commanded.left - actual.left),
          actual.right + alpha * (commanded.right - actual.right)};
}

void step_robot(RobotState& robot, const WheelCommand& commanded, const SimParams& params) {
  robot.wheels_commanded = clamp_wheels(commanded, params.max_wheel_speed);
  robot.wheels_actual =
      apply_motor_dynamics(robot.wheels_actual, robot.wheels_commanded, params.dt, params.motor_tau);
  integrate_robot(robot, params);
}

WorldState step_sim(const WorldState& world, std::span<const WheelCommand> commands,
                    const SimParams& params, const FieldSpec& field) {
  if (commands.size() != world.robot_count()) {
    throw ContractError("step_sim: got " + std::to_string(commands.size()) +
                        " commands for " + std::to_string(world.robot_count()) + " robots");
  }
  WorldState out = world;
  for (std::size_t i = 0; i < out.robot_count(); ++i) {
    step_robot(out.robot_at(i), commands[i], params);
  }
  out.ball.velocity *= std::exp(-params.ground_friction_ball * params.dt);
  out.ball.position += out.ball.velocity * params.dt;
  out = resolve_collisions(out, params, field);
  out.step = world.step + 1;
  return out;
}

WorldState resolve_collisions(const WorldState& world, const SimParams& params,
                              const FieldSpec& field) {
  WorldState out = world;
  const auto walls = ball_walls(field);
  const std::size_t n = out.robot_count();
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) collide_robot_bounds(out.robot_at(i), params, field);
    collide_ball_walls(out.ball, params, walls);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        collide_robot_robot(out.robot_at(i), out.robot_at(j), params);
      }
    }
    for (std::size_t i = 0; i < n; ++i) collide_robot_ball(out.robot_at(i), out.ball, params);
  }
  clamp_ball_into_region(out.ball, params, field);
  return out;
}

std::optional<Side> detect_goal(const WorldState& world, const FieldSpec& field) {
  const Vec2& b = world.ball.position;
  if (std::abs(b.y) >= field.goal_width / 2.0) return std::nullopt;
  if (b.x < -field.half_length()) return Side::kBlue;    // blue defends the left goal
  if (b.x > field.half_length()) return Side::kYellow;
  return std::nullopt;
}

bool inside_playable_region(const Vec2& p, double radius, const FieldSpec& field) {
  const double hl = field.half_length();
  const double hw = field.half_width();
  const double gw = field.goal_width / 2.0;
  if (std::abs(p.y) > hw - radius) return false;
  if (std::abs(p.x) <= hl - radius) return true;
  return std::abs(p.y) <= gw - radius && std::abs(p.x) <= hl + field.goal_depth - radius;
}

double kinetic_energy(const WorldState& world, const SimParams& params) {
  double e = 0.5 * kBallMassKg * world.ball.velocity.squared_norm();
  const double gyr_sq = robot_gyration_sq(params);
  for (std::size_t i = 0; i < world.robot_count(); ++i) {
    const RobotState& r = world.robot_at(i);
    e += 0.5 * kRobotMassKg * (r.lin_vel.squared_norm() + r.ang_vel * r.ang_vel * gyr_sq);
  }
  return e;
}

WorldState make_world(std::size_t blue_count, std::size_t yellow_count) {
  WorldState w;
  w.robots_blue.resize(blue_count);
  w.robots_yellow.resize(yellow_count);
  return w;
}

std::size_t serialized_world_size(std::size_t blue_count, std::size_t yellow_count) {
  return 8 + 4 + 4 + (blue_count + yellow_count) * 10 * 8 + 4 * 8;
}

std::vector<std::uint8_t> serialize_world(const WorldState& world) {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_world_size(world.robots_blue.size(), world.robots_yellow.size()));
  put_u64(out, world.step);
  put_u32(out, static_cast<std::uint32_t>(world.robots_blue.size()));
  put_u32(out, static_cast<std::uint32_t>(world.robots_yellow.size()));
  for (const RobotState& r : world.robots_blue) put_robot(out, r);
  for (const RobotState& r : world.robots_yellow) put_robot(out, r);
  put_f64(out, world.ball.position.x);
  put_f64(out, world.ball.position.y);
  put_f64(out, world.ball.velocity.x);
  put_f64(out, world.ball.velocity.y);
  return out;
}

WorldState deserialize_world(std::span<const std::uint8_t> bytes) {
  ByteReader in{bytes};
  WorldState w;
  w.step = in.u64();
  const std::uint32_t n_blue = in.u32();
  const std::uint32_t n_yellow = in.u32();
  if (n_blue > 16 || n_yellow > 16) throw IoError("world blob: implausible team size");
  w.robots_blue.reserve(n_blue);
  w.robots_yellow.reserve(n_yellow);
  for (std::uint32_t i = 0; i < n_blue; ++i) w.robots_blue.push_back(read_robot(in));
  for (std::uint32_t i = 0; i < n_yellow; ++i) w.robots_yellow.push_back(read_robot(in));
  w.ball.position.x = in.f64();
  w.ball.position.y = in.f64();
  w.ball.velocity.x = in.f64();
  w.ball.velocity.y = in.f64();
  if (in.pos != bytes.size()) throw IoError("world blob: trailing bytes");
  return w;
}

}  // namespace vsss

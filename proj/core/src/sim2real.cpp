#include "vsss/sim2real.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "vsss/error.hpp"

namespace vsss {

namespace {

// Inverts the constant-twist arc: given start/end pose over horizon T, recover
// the (v, omega) that would trace that chord. Valid while |d_theta| < pi.
void measure_twist(const Pose& start, const Pose& end, double horizon, double& v_out,
                   double& omega_out) {
  const double d_theta = wrap_angle(end.theta - start.theta);
  omega_out = d_theta / horizon;
  const Vec2 chord = end.position - start.position;
  const double along = chord.dot(Vec2::from_angle(start.theta + 0.5 * d_theta));
  double correction = 1.0;
  if (std::abs(d_theta) > 1e-9) {
    correction = (0.5 * d_theta) / std::sin(0.5 * d_theta);
  }
  v_out = along * correction / horizon;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

std::vector<AdapterSample> collect_adapter_dataset(const SurrogateParams& plant,
                                                   std::size_t n_samples,
                                                   const ExcitationConfig& excitation,
                                                   std::uint64_t seed) {
  if (n_samples == 0) throw ContractError("collect_adapter_dataset: n_samples must be > 0");
  if (excitation.measure_steps <= 0 || excitation.window_steps <= excitation.measure_steps) {
    throw ContractError("collect_adapter_dataset: window must exceed the measure window");
  }
  plant.validate();
  SurrogatePlant body(plant, derive_seed(seed, "collect.plant"));
  body.reset(derive_seed(seed, "collect.plant"));
  Rng draw(derive_seed(seed, "collect.draw"));
  const SimParams& base = plant.base;

  std::vector<AdapterSample> out;
  out.reserve(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    WheelCommand cmd;
    if (draw.uniform() < excitation.direct_wheel_fraction) {
      cmd = {draw.uniform(-base.max_wheel_speed, base.max_wheel_speed),
             draw.uniform(-base.max_wheel_speed, base.max_wheel_speed)};
    } else {
      const double v = draw.uniform(-excitation.v_max, excitation.v_max) * excitation.envelope_scale;
      const double w =
          draw.uniform(-excitation.omega_max, excitation.omega_max) * excitation.envelope_scale;
      cmd = naive_inverse(v, w, base);
    }
    const WheelCommand wheels_at_issue = body.robot().wheels_actual;
    const int settle = excitation.window_steps - excitation.measure_steps;
    for (int k = 0; k < settle; ++k) body.step(cmd);
    const Pose measure_start = body.robot().pose;
    for (int k = 0; k < excitation.measure_steps; ++k) body.step(cmd);
    AdapterSample s;
    measure_twist(measure_start, body.robot().pose, excitation.measure_steps * base.dt, s.v_des,
                  s.omega_des);
    s.wheel_left = wheels_at_issue.left;
    s.wheel_right = wheels_at_issue.right;
    s.target_left = cmd.left;
    s.target_right = cmd.right;
    out.push_back(s);
  }
  return out;
}

void write_dataset_csv(const std::vector<AdapterSample>& dataset, const std::string& path,
                       const std::string& manifest_comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open dataset for writing: " + path);
  if (!manifest_comment.empty()) out << "# " << manifest_comment << '\n';
  out << "v_des,omega_des,wheel_left,wheel_right,target_left,target_right\n";
  for (const AdapterSample& s : dataset) {
    out << format_double_shortest(s.v_des) << ',' << format_double_shortest(s.omega_des) << ','
        << format_double_shortest(s.wheel_left) << ',' << format_double_shortest(s.wheel_right)
        << ',' << format_double_shortest(s.target_left) << ','
        << format_double_shortest(s.target_right) << '\n';
  }
  if (!out) throw IoError("failed writing dataset: " + path);
}

std::vector<AdapterSample> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::vector<AdapterSample> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    double fields[6];
    std::size_t pos = 0;
    for (int f = 0; f < 6; ++f) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), fields[f]);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw IoError("bad dataset row in " + path + ": '" + line + "'");
      }
      if (comma == std::string::npos && f < 5) throw IoError("short dataset row in " + path);
      pos = comma + 1;
    }
    out.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]});
  }
  return out;
}

void AdapterTrainConfig::validate() const {
  if (epochs <= 0) throw ConfigError("adapter.epochs must be > 0");
  if (batch_size <= 0) throw ConfigError("adapter.batch_size must be > 0");
  if (!(lr > 0.0)) throw ConfigError("adapter.lr must be > 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw ConfigError("adapter.val_fraction must be in [0, 1)");
}

AdapterTrainConfig AdapterTrainConfig::from_config(const KeyValueConfig& cfg,
                                                   const std::string& prefix) {
  AdapterTrainConfig c;
  c.epochs = static_cast<int>(cfg.get_int(prefix + "epochs", c.epochs));
  c.batch_size = static_cast<int>(cfg.get_int(prefix + "batch_size", c.batch_size));
  c.lr = cfg.get_double(prefix + "lr", c.lr);
  c.val_fraction = cfg.get_double(prefix + "val_fraction", c.val_fraction);
  c.shuffle = cfg.get_bool(prefix + "shuffle", c.shuffle);
  c.validate();
  return c;
}

void AdapterTrainConfig::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  cfg.set_int(prefix + "epochs", epochs);
  cfg.set_int(prefix + "batch_size", batch_size);
  cfg.set_double(prefix + "lr", lr);
  cfg.set_double(prefix + "val_fraction", val_fraction);
  cfg.set_bool(prefix + "shuffle", shuffle);
}

namespace {

double rmse_on(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
               double wheel_ref) {
  if (x.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd pred = mlp_forward(net, x);
  const double mse = (pred - t).squaredNorm() / static_cast<double>(pred.size());
  return std::sqrt(mse) * wheel_ref;
}

}  // namespace

AdapterTrainReport train_adapter(const std::vector<AdapterSample>& dataset,
                                 const AdapterTrainConfig& cfg, const SimParams& sim,
                                 MlpParams& out) {
  if (dataset.empty()) throw ContractError("train_adapter: empty dataset");
  cfg.validate();
  const AdapterScaling sc = AdapterScaling::from_params(sim);

  const auto n = static_cast<Eigen::Index>(dataset.size());
  Eigen::MatrixXd features(4, n);
  Eigen::MatrixXd targets(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const AdapterSample& s = dataset[static_cast<std::size_t>(i)];
    features.col(i) << s.v_des / sc.twist_v_ref, s.omega_des / sc.twist_omega_ref,
        s.wheel_left / sc.wheel_ref, s.wheel_right / sc.wheel_ref;
    targets.col(i) << s.target_left / sc.wheel_ref, s.target_right / sc.wheel_ref;
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(cfg.seed, "adapter.shuffle"));
  if (cfg.shuffle) shuffle_indices(order, shuffle_rng);

  const auto val_count = static_cast<Eigen::Index>(
      std::floor(cfg.val_fraction * static_cast<double>(dataset.size())));
  const Eigen::Index train_count = n - val_count;
  if (train_count <= 0) throw ContractError("train_adapter: no training rows after split");

  Eigen::MatrixXd train_x(4, train_count), train_t(2, train_count);
  Eigen::MatrixXd val_x(4, val_count), val_t(2, val_count);
  for (Eigen::Index i = 0; i < train_count; ++i) {
    train_x.col(i) = features.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]));
    train_t.col(i) = targets.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]));
  }
  for (Eigen::Index i = 0; i < val_count; ++i) {
    const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(train_count + i)]);
    val_x.col(i) = features.col(src);
    val_t.col(i) = targets.col(src);
  }

  Rng init_rng(derive_seed(cfg.seed, "adapter.init"));
  out = MlpParams::random_init(
      MlpSpec::dense(4, cfg.hidden, 2, Activation::kRelu, Activation::kIdentity), init_rng);
  AdamState opt = AdamState::zeros(out.spec);

  std::vector<std::size_t> epoch_order(static_cast<std::size_t>(train_count));
  std::iota(epoch_order.begin(), epoch_order.end(), 0);

  AdapterTrainReport report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_indices(epoch_order, shuffle_rng);
    for (Eigen::Index start = 0; start < train_count; start += cfg.batch_size) {
      const Eigen::Index this_batch = std::min<Eigen::Index>(cfg.batch_size, train_count - start);
      Eigen::MatrixXd bx(4, this_batch), bt(2, this_batch);
      for (Eigen::Index i = 0; i < this_batch; ++i) {
        const auto src = static_cast<Eigen::Index>(epoch_order[static_cast<std::size_t>(start + i)]);
        bx.col(i) = train_x.col(src);
        bt.col(i) = train_t.col(src);
      }
      ForwardCache cache;
      const Eigen::MatrixXd pred = mlp_forward(out, bx, &cache);
      const Eigen::MatrixXd err = pred - bt;
      const double loss = err.squaredNorm() / static_cast<double>(err.size());
      if (!std::isfinite(loss)) {
        throw TrainingError("train_adapter: non-finite loss at epoch " + std::to_string(epoch));
      }
      const Eigen::MatrixXd dout = (2.0 / static_cast<double>(err.size())) * err;
      MlpGrads grads;
      mlp_backward(out, cache, dout, grads);
      adam_update(out, grads, opt, cfg.lr);
    }
    ++report.epochs_run;
  }
  report.train_rmse = rmse_on(out, train_x, train_t, sc.wheel_ref);
  report.val_rmse = rmse_on(out, val_x, val_t, sc.wheel_ref);
  return report;
}

std::vector<TrackingCommand> default_tracking_grid(double v_max, double omega_max) {
  std::vector<TrackingCommand> out;
  constexpr int kPoints = 7;
  for (int i = 0; i < kPoints; ++i) {
    for (int j = 0; j < kPoints; ++j) {
      const double v = -v_max + 2.0 * v_max * i / (kPoints - 1);
      const double w = -omega_max + 2.0 * omega_max * j / (kPoints - 1);
      out.push_back({v, w});
    }
  }
  return out;
}

TrackingReport evaluate_tracking(const WheelController& controller, const SurrogateParams& plant,
                                 std::span<const TrackingCommand> commands, std::uint64_t seed,
                                 const TrackingEvalConfig& eval_cfg) {
  if (commands.empty()) throw ContractError("evaluate_tracking: empty command set");
  plant.validate();
  TrackingReport report;
  report.v_ref = eval_cfg.v_ref;
  report.omega_ref = eval_cfg.omega_ref;

  double sq_v = 0.0;
  double sq_w = 0.0;
  SurrogatePlant body(plant, seed);
  for (std::size_t idx = 0; idx < commands.size(); ++idx) {
    const TrackingCommand& cmd = commands[idx];
    body.reset(derive_seed(seed, "tracking", idx));
    for (int k = 0; k < eval_cfg.settle_steps; ++k) {
      body.step(controller(cmd.v, cmd.omega, body.robot().wheels_actual));
    }
    const Pose start = body.robot().pose;
    for (int k = 0; k < eval_cfg.measure_steps; ++k) {
      body.step(controller(cmd.v, cmd.omega, body.robot().wheels_actual));
    }
    CommandTrackingError e;
    e.desired = cmd;
    measure_twist(start, body.robot().pose, eval_cfg.measure_steps * plant.base.dt, e.v_achieved,
                  e.omega_achieved);
    e.err_v = e.v_achieved - cmd.v;
    e.err_omega = e.omega_achieved - cmd.omega;
    sq_v += e.err_v * e.err_v;
    sq_w += e.err_omega * e.err_omega;
    report.per_command.push_back(e);
  }
  const double n = static_cast<double>(commands.size());
  report.rmse_v = std::sqrt(sq_v / n);
  report.rmse_omega = std::sqrt(sq_w / n);
  const double nv = report.rmse_v / eval_cfg.v_ref;
  const double nw = report.rmse_omega / eval_cfg.omega_ref;
  report.combined = std::sqrt(nv * nv + nw * nw);
  return report;
}

TransferReport transfer_policy_eval(const PolicyFn& policy, const MlpParams& adapter,
                                    const SurrogateParams& plant, const EnvConfig& env_cfg,
                                    int episodes, std::uint64_t seed) {
  if (episodes <= 0) throw ContractError("transfer_policy_eval: episodes must be > 0");
  TransferReport report;

  Env off_env(env_cfg);
  off_env.set_actuation_surrogate(plant);
  report.adapter_off.label = "naive_inverse";
  report.adapter_off.stats =
      evaluate_policy(off_env, policy, episodes, seed, "transfer");

  Env on_env(env_cfg);
  on_env.set_actuation_surrogate(plant);
  on_env.set_wheel_controller(make_adapter_controller(adapter, env_cfg.sim));
  report.adapter_on.label = "adapter";
  report.adapter_on.stats = evaluate_policy(on_env, policy, episodes, seed, "transfer");
  return report;
}

}  // namespace vsss

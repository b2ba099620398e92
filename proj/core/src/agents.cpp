#include "vsss/agents.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "vsss/error.hpp"

namespace vsss {

namespace {

std::vector<int> hidden_from_config(const KeyValueConfig& cfg, const std::string& key,
                                    const std::vector<int>& fallback) {
  if (!cfg.has(key)) return fallback;
  const std::string text = cfg.get_string(key);  // e.g. "64,64"
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad layer list '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty layer list");
  return out;
}

std::string hidden_to_string(const std::vector<int>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(hidden[i]);
  }
  return s;
}

Eigen::MatrixXd stack_obs(std::span<const Transition* const> batch, bool next) {
  const auto dim = static_cast<Eigen::Index>(next ? batch[0]->next_obs.size()
                                                  : batch[0]->obs.size());
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& v = next ? batch[i]->next_obs : batch[i]->obs;
    for (Eigen::Index j = 0; j < dim; ++j) m(j, static_cast<Eigen::Index>(i)) = v[j];
  }
  return m;
}

std::vector<double> one_hot(int index, int size) {
  std::vector<double> v(static_cast<std::size_t>(size), 0.0);
  v[static_cast<std::size_t>(index)] = 1.0;
  return v;
}

void maybe_save_diagnostics(const MlpParams& params, const TrainOptions& options,
                            const std::string& name) {
  if (!options.diagnostics_dir) return;
  std::filesystem::create_directories(*options.diagnostics_dir);
  save_checkpoint(params, CheckpointRole::kGeneric,
                  *options.diagnostics_dir + "/" + name + ".diag.bin");
}

}  // namespace

void DqnConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("dqn.gamma must be in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("dqn.lr must be > 0");
  if (batch_size <= 0) throw ConfigError("dqn.batch_size must be > 0");
  if (buffer_capacity == 0) throw ConfigError("dqn.buffer_capacity must be > 0");
  if (target_sync_period <= 0) throw ConfigError("dqn.target_sync_period must be > 0");
  if (epsilon_end > epsilon_start) throw ConfigError("dqn.epsilon_end must be <= epsilon_start");
  if (epsilon_decay_steps <= 0) throw ConfigError("dqn.epsilon_decay_steps must be > 0");
  if (warmup_steps <= 0) throw ConfigError("dqn.warmup_steps must be > 0");
  if (max_env_steps <= 0) throw ConfigError("dqn.max_env_steps must be > 0");
  if (eval_period <= 0) throw ConfigError("dqn.eval_period must be > 0");
  if (eval_episodes <= 0) throw ConfigError("dqn.eval_episodes must be > 0");
}

DqnConfig DqnConfig::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  DqnConfig c;
  c.gamma = cfg.get_double(prefix + "gamma", c.gamma);
  c.lr = cfg.get_double(prefix + "lr", c.lr);
  c.batch_size = static_cast<int>(cfg.get_int(prefix + "batch_size", c.batch_size));
  c.buffer_capacity = static_cast<std::size_t>(
      cfg.get_int(prefix + "buffer_capacity", static_cast<std::int64_t>(c.buffer_capacity)));
  c.target_sync_period = cfg.get_int(prefix + "target_sync_period", c.target_sync_period);
  c.epsilon_start = cfg.get_double(prefix + "epsilon_start", c.epsilon_start);
  c.epsilon_end = cfg.get_double(prefix + "epsilon_end", c.epsilon_end);
  c.epsilon_decay_steps = cfg.get_int(prefix + "epsilon_decay_steps", c.epsilon_decay_steps);
  c.warmup_steps = cfg.get_int(prefix + "warmup_steps", c.warmup_steps);
  c.max_env_steps = cfg.get_int(prefix + "max_env_steps", c.max_env_steps);
  c.eval_period = cfg.get_int(prefix + "eval_period", c.eval_period);
  c.eval_episodes = static_cast<int>(cfg.get_int(prefix + "eval_episodes", c.eval_episodes));
  c.hidden = hidden_from_config(cfg, prefix + "hidden", c.hidden);
  c.validate();
  return c;
}

void DqnConfig::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  cfg.set_double(prefix + "gamma", gamma);
  cfg.set_double(prefix + "lr", lr);
  cfg.set_int(prefix + "batch_size", batch_size);
  cfg.set_int(prefix + "buffer_capacity", static_cast<std::int64_t>(buffer_capacity));
  cfg.set_int(prefix + "target_sync_period", target_sync_period);
  cfg.set_double(prefix + "epsilon_start", epsilon_start);
  cfg.set_double(prefix + "epsilon_end", epsilon_end);
  cfg.set_int(prefix + "epsilon_decay_steps", epsilon_decay_steps);
  cfg.set_int(prefix + "warmup_steps", warmup_steps);
  cfg.set_int(prefix + "max_env_steps", max_env_steps);
  cfg.set_int(prefix + "eval_period", eval_period);
  cfg.set_int(prefix + "eval_episodes", eval_episodes);
  cfg.set(prefix + "hidden", hidden_to_string(hidden));
}

void DdpgConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("ddpg.gamma must be in [0, 1)");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("ddpg learning rates must be > 0");
  if (!(tau > 0.0) || tau > 1.0) throw ConfigError("ddpg.tau must be in (0, 1]");
  if (batch_size <= 0) throw ConfigError("ddpg.batch_size must be > 0");
  if (buffer_capacity == 0) throw ConfigError("ddpg.buffer_capacity must be > 0");
  if (ou_sigma < 0.0) throw ConfigError("ddpg.ou_sigma must be >= 0");
  if (!(ou_theta > 0.0)) throw ConfigError("ddpg.ou_theta must be > 0");
  if (!(ou_dt > 0.0)) throw ConfigError("ddpg.ou_dt must be > 0");
  if (warmup_steps <= 0) throw ConfigError("ddpg.warmup_steps must be > 0");
  if (max_env_steps <= 0) throw ConfigError("ddpg.max_env_steps must be > 0");
  if (eval_period <= 0) throw ConfigError("ddpg.eval_period must be > 0");
  if (eval_episodes <= 0) throw ConfigError("ddpg.eval_episodes must be > 0");
}

DdpgConfig DdpgConfig::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  DdpgConfig c;
  c.gamma = cfg.get_double(prefix + "gamma", c.gamma);
  c.actor_lr = cfg.get_double(prefix + "actor_lr", c.actor_lr);
  c.critic_lr = cfg.get_double(prefix + "critic_lr", c.critic_lr);
  c.tau = cfg.get_double(prefix + "tau", c.tau);
  c.batch_size = static_cast<int>(cfg.get_int(prefix + "batch_size", c.batch_size));
  c.buffer_capacity = static_cast<std::size_t>(
      cfg.get_int(prefix + "buffer_capacity", static_cast<std::int64_t>(c.buffer_capacity)));
  c.ou_theta = cfg.get_double(prefix + "ou_theta", c.ou_theta);
  c.ou_sigma = cfg.get_double(prefix + "ou_sigma", c.ou_sigma);
  c.ou_mu = cfg.get_double(prefix + "ou_mu", c.ou_mu);
  c.ou_dt = cfg.get_double(prefix + "ou_dt", c.ou_dt);
  c.warmup_steps = cfg.get_int(prefix + "warmup_steps", c.warmup_steps);
  c.max_env_steps = cfg.get_int(prefix + "max_env_steps", c.max_env_steps);
  c.eval_period = cfg.get_int(prefix + "eval_period", c.eval_period);
  c.eval_episodes = static_cast<int>(cfg.get_int(prefix + "eval_episodes", c.eval_episodes));
  c.hidden = hidden_from_config(cfg, prefix + "hidden", c.hidden);
  c.validate();
  return c;
}

void DdpgConfig::to_config(KeyValueConfig& cfg, const std::string& prefix) const {
  cfg.set_double(prefix + "gamma", gamma);
  cfg.set_double(prefix + "actor_lr", actor_lr);
  cfg.set_double(prefix + "critic_lr", critic_lr);
  cfg.set_double(prefix + "tau", tau);
  cfg.set_int(prefix + "batch_size", batch_size);
  cfg.set_int(prefix + "buffer_capacity", static_cast<std::int64_t>(buffer_capacity));
  cfg.set_double(prefix + "ou_theta", ou_theta);
  cfg.set_double(prefix + "ou_sigma", ou_sigma);
  cfg.set_double(prefix + "ou_mu", ou_mu);
  cfg.set_double(prefix + "ou_dt", ou_dt);
  cfg.set_int(prefix + "warmup_steps", warmup_steps);
  cfg.set_int(prefix + "max_env_steps", max_env_steps);
  cfg.set_int(prefix + "eval_period", eval_period);
  cfg.set_int(prefix + "eval_episodes", eval_episodes);
  cfg.set(prefix + "hidden", hidden_to_string(hidden));
}

double epsilon_at(const DqnConfig& cfg, std::int64_t env_step) {
  if (env_step >= cfg.epsilon_decay_steps) return cfg.epsilon_end;
  const double frac = static_cast<double>(env_step) / static_cast<double>(cfg.epsilon_decay_steps);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

Eigen::VectorXd dqn_td_targets(std::span<const Transition* const> batch,
                               const MlpParams& q_target, double gamma) {
  if (batch.empty()) throw ContractError("dqn_td_targets: empty batch");
  const Eigen::MatrixXd next = stack_obs(batch, /*next=*/true);
  const Eigen::MatrixXd q_next = mlp_forward(q_target, next);
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double max_q = q_next.col(static_cast<Eigen::Index>(i)).maxCoeff();
    const double cont = batch[i]->done ? 0.0 : gamma * max_q;
    y(static_cast<Eigen::Index>(i)) = batch[i]->reward + cont;
  }
  return y;
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax over empty span");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int dqn_select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw ContractError("dqn_select_action: empty q_values");
  if (rng.uniform() < epsilon) {
    return static_cast<int>(rng.uniform_index(q_values.size()));
  }
  return argmax_lowest(q_values);
}

void soft_update(MlpParams& target, const MlpParams& source, double tau) {
  if (!target.same_shape(source)) throw ContractError("soft_update: spec mismatch");
  if (!(tau >= 0.0) || tau > 1.0) throw ContractError("soft_update: tau must be in [0, 1]");
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = tau * source.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * source.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

double ou_noise_step(double x, double theta, double mu, double sigma, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw ContractError("ou_noise_step: dt must be > 0");
  return x + theta * (mu - x) * dt + sigma * std::sqrt(dt) * rng.normal();
}

DdpgNets DdpgNets::init(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& rng) {
  DdpgNets nets;
  const MlpSpec actor_spec =
      MlpSpec::dense(obs_dim, hidden, action_dim, Activation::kRelu, Activation::kTanh);
  const MlpSpec critic_spec =
      MlpSpec::dense(obs_dim + action_dim, hidden, 1, Activation::kRelu, Activation::kIdentity);
  nets.actor = MlpParams::random_init(actor_spec, rng);
  nets.critic = MlpParams::random_init(critic_spec, rng);
  nets.actor_target = nets.actor;
  nets.critic_target = nets.critic;
  nets.actor_opt = AdamState::zeros(actor_spec);
  nets.critic_opt = AdamState::zeros(critic_spec);
  return nets;
}

DdpgLosses ddpg_update(std::span<const Transition* const> batch, DdpgNets& nets,
                       const DdpgConfig& cfg) {
  if (batch.empty()) throw ContractError("ddpg_update: empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd obs = stack_obs(batch, /*next=*/false);
  const Eigen::MatrixXd next_obs = stack_obs(batch, /*next=*/true);
  const auto action_dim = static_cast<Eigen::Index>(batch[0]->action.size());
  Eigen::MatrixXd actions(action_dim, b);
  Eigen::VectorXd rewards(b);
  Eigen::VectorXd not_done(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const Transition* t = batch[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < action_dim; ++j) actions(j, i) = t->action[j];
    rewards(i) = t->reward;
    not_done(i) = t->done ? 0.0 : 1.0;
  }

  // Soft targets from the target networks.
  const Eigen::MatrixXd next_actions = mlp_forward(nets.actor_target, next_obs);
  Eigen::MatrixXd next_in(next_obs.rows() + action_dim, b);
  next_in << next_obs, next_actions;
  const Eigen::MatrixXd q_next = mlp_forward(nets.critic_target, next_in);
  const Eigen::VectorXd y =
      rewards.array() + cfg.gamma * not_done.array() * q_next.row(0).transpose().array();

  // Critic regression.
  Eigen::MatrixXd critic_in(obs.rows() + action_dim, b);
  critic_in << obs, actions;
  ForwardCache critic_cache;
  const Eigen::MatrixXd q = mlp_forward(nets.critic, critic_in, &critic_cache);
  const Eigen::VectorXd err = q.row(0).transpose() - y;
  DdpgLosses losses;
  losses.critic_loss = err.squaredNorm() / static_cast<double>(b);
  Eigen::MatrixXd dq(1, b);
  dq.row(0) = (2.0 / static_cast<double>(b)) * err.transpose();
  MlpGrads critic_grads;
  mlp_backward(nets.critic, critic_cache, dq, critic_grads);
  adam_update(nets.critic, critic_grads, nets.critic_opt, cfg.critic_lr);

  // Actor ascent on mean Q(s, mu(s)) through the updated critic.
  ForwardCache actor_cache;
  const Eigen::MatrixXd mu = mlp_forward(nets.actor, obs, &actor_cache);
  Eigen::MatrixXd actor_critic_in(obs.rows() + action_dim, b);
  actor_critic_in << obs, mu;
  ForwardCache q_cache;
  const Eigen::MatrixXd q_mu = mlp_forward(nets.critic, actor_critic_in, &q_cache);
  losses.actor_objective = q_mu.row(0).mean();
  Eigen::MatrixXd dq_mu = Eigen::MatrixXd::Constant(1, b, -1.0 / static_cast<double>(b));
  MlpGrads scratch;
  const Eigen::MatrixXd dinput = mlp_backward(nets.critic, q_cache, dq_mu, scratch);
  const Eigen::MatrixXd daction = dinput.bottomRows(action_dim);
  MlpGrads actor_grads;
  mlp_backward(nets.actor, actor_cache, daction, actor_grads);
  adam_update(nets.actor, actor_grads, nets.actor_opt, cfg.actor_lr);

  soft_update(nets.actor_target, nets.actor, cfg.tau);
  soft_update(nets.critic_target, nets.critic, cfg.tau);
  return losses;
}

double EvalStats::steps_mean() const {
  if (steps_to_goal.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (int v : steps_to_goal) s += v;
  return s / static_cast<double>(steps_to_goal.size());
}

double EvalStats::steps_std() const {
  if (steps_to_goal.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = steps_mean();
  double acc = 0.0;
  for (int v : steps_to_goal) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(steps_to_goal.size()));
}

EvalStats evaluate_policy(Env& env, const PolicyFn& policy, int episodes, std::uint64_t seed,
                          std::string_view seed_stream) {
  if (episodes <= 0) throw ContractError("evaluate_policy: episodes must be > 0");
  EvalStats stats;
  stats.episodes = episodes;
  double total_return = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset(derive_seed(seed, seed_stream, static_cast<std::uint64_t>(ep)));
    double ep_return = 0.0;
    while (true) {
      const StepResult r = env.step(policy(obs));
      ep_return += r.reward.total;
      obs = r.observation;
      if (r.done) {
        if (r.done_reason == DoneReason::kGoalFor) {
          ++stats.scored;
          stats.steps_to_goal.push_back(env.episode_step());
        }
        break;
      }
    }
    total_return += ep_return;
  }
  stats.mean_return = total_return / episodes;
  return stats;
}

PolicyFn make_dqn_policy(const MlpParams& q_net) {
  return [q = q_net](const Observation& obs) -> Action {
    const Eigen::VectorXd out = mlp_forward(
        q, Eigen::Map<const Eigen::VectorXd>(obs.features.data(),
                                             static_cast<Eigen::Index>(obs.features.size())));
    return ActionDiscrete{argmax_lowest({out.data(), static_cast<std::size_t>(out.size())})};
  };
}

PolicyFn make_ddpg_policy(const MlpParams& actor, const EnvConfig& cfg) {
  const double v_max = cfg.v_max;
  const double omega_max = cfg.omega_max;
  return [net = actor, v_max, omega_max](const Observation& obs) -> Action {
    const Eigen::VectorXd a = mlp_forward(
        net, Eigen::Map<const Eigen::VectorXd>(obs.features.data(),
                                               static_cast<Eigen::Index>(obs.features.size())));
    return ActionContinuous{a(0) * v_max, a(1) * omega_max};
  };
}

PolicyFn make_random_discrete_policy(std::shared_ptr<Rng> rng, int table_size) {
  return [rng, table_size](const Observation&) -> Action {
    return ActionDiscrete{static_cast<int>(rng->uniform_index(static_cast<std::uint64_t>(table_size)))};
  };
}

namespace {

struct EvalHook {
  const EnvFactory& factory;
  std::uint64_t seed;
  int episodes;

  CurvePoint run(const PolicyFn& policy, std::int64_t env_step) const {
    Env eval_env = factory();
    const EvalStats stats = evaluate_policy(eval_env, policy, episodes, seed);
    CurvePoint p;
    p.env_step = env_step;
    p.eval_return = stats.mean_return;
    p.eval_steps_to_goal = stats.steps_mean();
    p.eval_score_rate = stats.score_rate();
    return p;
  }
};

}  // namespace

TrainResult train_dqn(const EnvFactory& factory, const DqnConfig& cfg, std::uint64_t seed,
                      const TrainOptions& options) {
  cfg.validate();
  Env env = factory();
  const int obs_dim = env.config().observation_size();
  const int n_actions = static_cast<int>(discrete_action_table(env.config()).size());

  Rng init_rng(derive_seed(seed, "dqn.init"));
  MlpParams q = MlpParams::random_init(
      MlpSpec::dense(obs_dim, cfg.hidden, n_actions, Activation::kRelu, Activation::kIdentity),
      init_rng);
  MlpParams q_target = q;
  AdamState opt = AdamState::zeros(q.spec);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng agent_rng(derive_seed(seed, "dqn.agent"));
  Rng sample_rng(derive_seed(seed, "dqn.sample"));
  const EvalHook eval{factory, derive_seed(seed, "dqn.eval"), cfg.eval_episodes};

  TrainResult result;
  result.best_eval_return = -std::numeric_limits<double>::infinity();
  std::uint64_t episode = 0;
  Observation obs = env.reset(derive_seed(seed, "dqn.env", episode));
  std::int64_t grad_steps = 0;

  for (std::int64_t step = 1; step <= cfg.max_env_steps; ++step) {
    const Eigen::VectorXd q_values = mlp_forward(
        q, Eigen::Map<const Eigen::VectorXd>(obs.features.data(),
                                             static_cast<Eigen::Index>(obs.features.size())));
    const int action = dqn_select_action({q_values.data(), static_cast<std::size_t>(q_values.size())},
                                         epsilon_at(cfg, step), agent_rng);
    const StepResult sr = env.step(ActionDiscrete{action});
    buffer.push({obs.features, one_hot(action, n_actions), sr.reward.total,
                 sr.observation.features, sr.done});
    obs = sr.done ? env.reset(derive_seed(seed, "dqn.env", ++episode)) : sr.observation;

    if (step > cfg.warmup_steps && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), sample_rng);
      const Eigen::VectorXd y = dqn_td_targets(batch, q_target, cfg.gamma);
      const Eigen::MatrixXd x = stack_obs(batch, /*next=*/false);
      ForwardCache cache;
      const Eigen::MatrixXd q_all = mlp_forward(q, x, &cache);
      Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q_all.rows(), q_all.cols());
      double loss = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const int a = argmax_lowest({batch[i]->action.data(), batch[i]->action.size()});
        const auto col = static_cast<Eigen::Index>(i);
        const double err = q_all(a, col) - y(col);
        loss += err * err;
        dq(a, col) = 2.0 * err / static_cast<double>(batch.size());
      }
      loss /= static_cast<double>(batch.size());
      if (!std::isfinite(loss)) {
        maybe_save_diagnostics(q, options, "dqn_nan");
        throw TrainingError("dqn: non-finite TD loss at env step " + std::to_string(step));
      }
      MlpGrads grads;
      mlp_backward(q, cache, dq, grads);
      adam_update(q, grads, opt, cfg.lr);
      ++grad_steps;
      if (grad_steps % cfg.target_sync_period == 0) q_target = q;
    }

    if (step % cfg.eval_period == 0 || step == cfg.max_env_steps) {
      const CurvePoint p = eval.run(make_dqn_policy(q), step);
      result.curve.push_back(p);
      if (options.on_eval) options.on_eval(p);
      if (p.eval_return > result.best_eval_return) {
        result.best_eval_return = p.eval_return;
        result.best_params = q;
      }
    }
  }
  result.final_params = q;
  if (result.best_params.weights.empty()) result.best_params = q;
  result.env_steps = cfg.max_env_steps;
  return result;
}

TrainResult train_ddpg(const EnvFactory& factory, const DdpgConfig& cfg, std::uint64_t seed,
                       const TrainOptions& options) {
  cfg.validate();
  Env env = factory();
  const int obs_dim = env.config().observation_size();
  constexpr int kActionDim = 2;

  Rng init_rng(derive_seed(seed, "ddpg.init"));
  DdpgNets nets = DdpgNets::init(obs_dim, kActionDim, cfg.hidden, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng agent_rng(derive_seed(seed, "ddpg.agent"));
  Rng sample_rng(derive_seed(seed, "ddpg.sample"));
  const EvalHook eval{factory, derive_seed(seed, "ddpg.eval"), cfg.eval_episodes};
  const double v_max = env.config().v_max;
  const double omega_max = env.config().omega_max;

  TrainResult result;
  result.best_eval_return = -std::numeric_limits<double>::infinity();
  std::uint64_t episode = 0;
  Observation obs = env.reset(derive_seed(seed, "ddpg.env", episode));
  double noise[kActionDim] = {cfg.ou_mu, cfg.ou_mu};

  for (std::int64_t step = 1; step <= cfg.max_env_steps; ++step) {
    const Eigen::VectorXd mu = mlp_forward(
        nets.actor, Eigen::Map<const Eigen::VectorXd>(
                        obs.features.data(), static_cast<Eigen::Index>(obs.features.size())));
    std::vector<double> a_norm(kActionDim);
    for (int j = 0; j < kActionDim; ++j) {
      noise[j] = ou_noise_step(noise[j], cfg.ou_theta, cfg.ou_mu, cfg.ou_sigma, cfg.ou_dt,
                               agent_rng);
      a_norm[static_cast<std::size_t>(j)] = std::clamp(mu(j) + noise[j], -1.0, 1.0);
    }
    const StepResult sr = env.step(ActionContinuous{a_norm[0] * v_max, a_norm[1] * omega_max});
    buffer.push({obs.features, a_norm, sr.reward.total, sr.observation.features, sr.done});
    if (sr.done) {
      obs = env.reset(derive_seed(seed, "ddpg.env", ++episode));
      noise[0] = cfg.ou_mu;
      noise[1] = cfg.ou_mu;
    } else {
      obs = sr.observation;
    }

    if (step > cfg.warmup_steps && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), sample_rng);
      const DdpgLosses losses = ddpg_update(batch, nets, cfg);
      if (!std::isfinite(losses.critic_loss) || !std::isfinite(losses.actor_objective)) {
        maybe_save_diagnostics(nets.actor, options, "ddpg_actor_nan");
        maybe_save_diagnostics(nets.critic, options, "ddpg_critic_nan");
        throw TrainingError("ddpg: non-finite loss at env step " + std::to_string(step));
      }
    }

    if (step % cfg.eval_period == 0 || step == cfg.max_env_steps) {
      const CurvePoint p = eval.run(make_ddpg_policy(nets.actor, env.config()), step);
      result.curve.push_back(p);
      if (options.on_eval) options.on_eval(p);
      if (p.eval_return > result.best_eval_return) {
        result.best_eval_return = p.eval_return;
        result.best_params = nets.actor;
      }
    }
  }
  result.final_params = nets.actor;
  if (result.best_params.weights.empty()) result.best_params = nets.actor;
  result.env_steps = cfg.max_env_steps;
  return result;
}

}  // namespace vsss

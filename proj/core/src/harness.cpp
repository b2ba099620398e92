#include "vsss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "vsss/error.hpp"

namespace vsss {

namespace {

EnvConfig config_for_side(const EnvConfig& cfg, Side side) {
  EnvConfig out = cfg;
  out.controlled_side = side;
  out.controlled_robot = 0;
  return out;
}

class CheckpointPolicy final : public MatchPolicy {
 public:
  CheckpointPolicy(LoadedCheckpoint loaded, std::string label)
      : loaded_(std::move(loaded)), label_(std::move(label)) {}

  std::string name() const override { return label_; }

  Action act(const WorldState& world, Side side, const EnvConfig& cfg, Rng&) const override {
    const Observation obs = build_observation(world, config_for_side(cfg, side));
    const Eigen::Map<const Eigen::VectorXd> x(obs.features.data(),
                                              static_cast<Eigen::Index>(obs.features.size()));
    const Eigen::VectorXd out = mlp_forward(loaded_.params, Eigen::VectorXd(x));
    if (loaded_.role == CheckpointRole::kDdpgActor) {
      return ActionContinuous{out(0) * cfg.v_max, out(1) * cfg.omega_max};
    }
    return ActionDiscrete{argmax_lowest({out.data(), static_cast<std::size_t>(out.size())})};
  }

  const LoadedCheckpoint& checkpoint() const { return loaded_; }

 private:
  LoadedCheckpoint loaded_;
  std::string label_;
};

class ScriptedPolicy final : public MatchPolicy {
 public:
  std::string name() const override { return "scripted"; }
  Action act(const WorldState& world, Side side, const EnvConfig& cfg, Rng&) const override {
    return scripted_striker(world, side, cfg);
  }
};

class StationaryPolicy final : public MatchPolicy {
 public:
  std::string name() const override { return "stationary"; }
  Action act(const WorldState&, Side, const EnvConfig&, Rng&) const override {
    return ActionContinuous{0.0, 0.0};
  }
};

class RandomPolicy final : public MatchPolicy {
 public:
  std::string name() const override { return "random"; }
  Action act(const WorldState&, Side, const EnvConfig& cfg, Rng& rng) const override {
    if (cfg.action_mode == ActionMode::kDiscrete) {
      const auto table_size = discrete_action_table(cfg).size();
      return ActionDiscrete{static_cast<int>(rng.uniform_index(table_size))};
    }
    return ActionContinuous{rng.uniform(-cfg.v_max, cfg.v_max),
                            rng.uniform(-cfg.omega_max, cfg.omega_max)};
  }
};

struct EpisodeOutcome {
  bool blue_is_a = false;
  std::optional<DoneReason> reason;  // from blue's perspective
  int steps = 0;
};

// One match episode: `blue` controls the blue leader through env.step, the
// other policy drives yellow through the opponent hook with a mirrored view.
EpisodeOutcome play_episode(Env& env, const MatchPolicy& blue, const MatchPolicy& yellow,
                            const EnvConfig& cfg, std::uint64_t spawn_seed,
                            std::uint64_t blue_rng_seed, std::uint64_t yellow_rng_seed) {
  Rng blue_rng(blue_rng_seed);
  auto yellow_rng = std::make_shared<Rng>(yellow_rng_seed);
  env.set_opponent_controller([&yellow, yellow_rng, &cfg](const WorldState& w, Side side) {
    const Action a = yellow.act(w, side, cfg, *yellow_rng);
    if (const auto* c = std::get_if<ActionContinuous>(&a)) return *c;
    const auto table = discrete_action_table(cfg);
    return table.at(static_cast<std::size_t>(std::get<ActionDiscrete>(a).index));
  });
  env.reset(spawn_seed);
  EpisodeOutcome outcome;
  while (true) {
    const StepResult r = env.step(blue.act(env.world(), Side::kBlue, cfg, blue_rng));
    if (r.done) {
      outcome.reason = r.done_reason;
      outcome.steps = env.episode_step();
      return outcome;
    }
  }
}

}  // namespace

std::unique_ptr<MatchPolicy> make_match_policy(const std::string& spec, const EnvConfig& cfg) {
  (void)cfg;
  if (spec == "scripted") return std::make_unique<ScriptedPolicy>();
  if (spec == "stationary") return std::make_unique<StationaryPolicy>();
  if (spec == "random") return std::make_unique<RandomPolicy>();
  LoadedCheckpoint loaded = load_checkpoint(spec);
  if (loaded.role == CheckpointRole::kDdpgCritic || loaded.role == CheckpointRole::kAdapter) {
    throw ContractError("checkpoint '" + spec + "' holds a " +
                        std::string(to_string(loaded.role)) + " network, not a policy");
  }
  return std::make_unique<CheckpointPolicy>(std::move(loaded), spec);
}

nlohmann::json MatchStats::to_json() const {
  return {{"goals_a", goals_a},
          {"goals_b", goals_b},
          {"episodes", episodes},
          {"scoring_a", scoring_a},
          {"scoring_b", scoring_b},
          {"timeouts", timeouts},
          {"steps_to_goal_mean", steps_to_goal.empty() ? nlohmann::json(nullptr)
                                                       : nlohmann::json(steps_to_goal.mean)},
          {"steps_to_goal_std", steps_to_goal.empty() ? nlohmann::json(nullptr)
                                                      : nlohmann::json(steps_to_goal.stddev)},
          {"steps_to_goal", format_stat(steps_to_goal)},
          {"steps_to_goal_a", format_stat(steps_to_goal_a)},
          {"steps_to_goal_b", format_stat(steps_to_goal_b)}};
}

MatchStats run_match(const MatchPolicy& policy_a, const MatchPolicy& policy_b,
                     const EnvConfig& cfg, int episodes, std::uint64_t seed, int threads) {
  if (episodes <= 0) throw ContractError("run_match: episodes must be > 0");
  EnvConfig match_cfg = config_for_side(cfg, Side::kBlue);
  match_cfg.validate();

  std::vector<EpisodeOutcome> outcomes(static_cast<std::size_t>(episodes));
  const auto worker = [&](int worker_id, int worker_count) {
    Env env(match_cfg);
    for (int ep = worker_id; ep < episodes; ep += worker_count) {
      const std::uint64_t pair = static_cast<std::uint64_t>(ep) / 2;
      const bool blue_is_a = (ep % 2) == 0;
      const MatchPolicy& blue = blue_is_a ? policy_a : policy_b;
      const MatchPolicy& yellow = blue_is_a ? policy_b : policy_a;
      EpisodeOutcome outcome = play_episode(
          env, blue, yellow, match_cfg, derive_seed(seed, "match.spawn", pair),
          derive_seed(seed, blue_is_a ? "match.policy_a" : "match.policy_b",
                      static_cast<std::uint64_t>(ep)),
          derive_seed(seed, blue_is_a ? "match.policy_b" : "match.policy_a",
                      static_cast<std::uint64_t>(ep)));
      outcome.blue_is_a = blue_is_a;
      outcomes[static_cast<std::size_t>(ep)] = outcome;
    }
  };

  if (threads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (std::thread& t : pool) t.join();
  }

  MatchStats stats;
  stats.episodes = episodes;
  std::vector<int> steps_all, steps_a, steps_b;
  for (const EpisodeOutcome& o : outcomes) {
    if (!o.reason || *o.reason == DoneReason::kMaxSteps) {
      ++stats.timeouts;
      continue;
    }
    const bool blue_scored = *o.reason == DoneReason::kGoalFor;
    const bool a_scored = blue_scored == o.blue_is_a;
    if (a_scored) {
      ++stats.goals_a;
      ++stats.scoring_a;
      steps_a.push_back(o.steps);
    } else {
      ++stats.goals_b;
      ++stats.scoring_b;
      steps_b.push_back(o.steps);
    }
    steps_all.push_back(o.steps);
  }
  stats.steps_to_goal = summarize_steps(steps_all);
  stats.steps_to_goal_a = summarize_steps(steps_a);
  stats.steps_to_goal_b = summarize_steps(steps_b);
  return stats;
}

EvalStats evaluate_match_policy(const EnvConfig& cfg, const MatchPolicy& policy, int episodes,
                                std::uint64_t seed, int threads) {
  if (episodes <= 0) throw ContractError("evaluate_match_policy: episodes must be > 0");
  struct Record {
    double ep_return = 0.0;
    bool scored = false;
    int steps = 0;
  };
  std::vector<Record> records(static_cast<std::size_t>(episodes));
  const auto worker = [&](int worker_id, int worker_count) {
    Env env(cfg);
    for (int ep = worker_id; ep < episodes; ep += worker_count) {
      Rng policy_rng(derive_seed(seed, "eval.policy", static_cast<std::uint64_t>(ep)));
      env.reset(derive_seed(seed, "eval", static_cast<std::uint64_t>(ep)));
      Record rec;
      while (true) {
        const StepResult r =
            env.step(policy.act(env.world(), cfg.controlled_side, cfg, policy_rng));
        rec.ep_return += r.reward.total;
        if (r.done) {
          rec.scored = r.done_reason == DoneReason::kGoalFor;
          rec.steps = env.episode_step();
          break;
        }
      }
      records[static_cast<std::size_t>(ep)] = rec;
    }
  };
  if (threads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (std::thread& t : pool) t.join();
  }

  EvalStats stats;
  stats.episodes = episodes;
  double total = 0.0;
  for (const Record& rec : records) {
    total += rec.ep_return;
    if (rec.scored) {
      ++stats.scored;
      stats.steps_to_goal.push_back(rec.steps);
    }
  }
  stats.mean_return = total / episodes;
  return stats;
}

ReplayFile record_episode(const EnvConfig& cfg, const MatchPolicy& policy, std::uint64_t seed,
                          const RunManifest& manifest) {
  ReplayFile replay;
  replay.manifest = manifest;
  replay.field = cfg.field;
  replay.blue_count = static_cast<std::uint32_t>(cfg.team_size);
  replay.yellow_count = static_cast<std::uint32_t>(cfg.team_size);
  replay.dt = cfg.sim.dt;

  Env env(cfg);
  env.set_snapshot_recorder([&replay](const WorldState& w) { replay.snapshots.push_back(w); });
  Rng policy_rng(derive_seed(seed, "replay.policy"));
  env.reset(derive_seed(seed, "replay.env"));
  while (true) {
    const StepResult r = env.step(policy.act(env.world(), cfg.controlled_side, cfg, policy_rng));
    if (r.done) break;
  }
  return replay;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path,
                     const RunManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write curve: " + path);
  out << "# " << manifest.comment_line() << '\n';
  out << "env_step,eval_return,steps_to_goal\n";
  for (const CurvePoint& p : curve) {
    out << p.env_step << ',' << format_double_shortest(p.eval_return) << ','
        << format_double_shortest(p.eval_steps_to_goal) << '\n';
  }
  if (!out) throw IoError("failed writing curve: " + path);
}

void write_json_artifact(const nlohmann::json& payload, const std::string& path,
                         const RunManifest& manifest) {
  nlohmann::json j = payload;
  j["manifest"] = manifest.core_json();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write artifact: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing artifact: " + path);
}

nlohmann::json eval_stats_to_json(const EvalStats& stats) {
  const StatSummary steps = summarize_steps(stats.steps_to_goal);
  return {{"episodes", stats.episodes},
          {"scored", stats.scored},
          {"score_rate", stats.score_rate()},
          {"mean_return", stats.mean_return},
          {"steps_to_goal_mean",
           steps.empty() ? nlohmann::json(nullptr) : nlohmann::json(steps.mean)},
          {"steps_to_goal_std",
           steps.empty() ? nlohmann::json(nullptr) : nlohmann::json(steps.stddev)},
          {"steps_to_goal", format_stat(steps)}};
}

nlohmann::json tracking_report_to_json(const TrackingReport& report) {
  nlohmann::json per = nlohmann::json::array();
  for (const CommandTrackingError& e : report.per_command) {
    per.push_back({{"v", e.desired.v},
                   {"omega", e.desired.omega},
                   {"v_achieved", e.v_achieved},
                   {"omega_achieved", e.omega_achieved},
                   {"err_v", e.err_v},
                   {"err_omega", e.err_omega}});
  }
  return {{"rmse_v", report.rmse_v},
          {"rmse_omega", report.rmse_omega},
          {"combined", report.combined},
          {"v_ref", report.v_ref},
          {"omega_ref", report.omega_ref},
          {"per_command", per}};
}

nlohmann::json transfer_report_to_json(const TransferReport& report) {
  return {{"adapter_off", eval_stats_to_json(report.adapter_off.stats)},
          {"adapter_on", eval_stats_to_json(report.adapter_on.stats)}};
}

double binomial_two_sided_p(int successes, int trials) {
  if (trials <= 0) return 1.0;
  if (successes < 0 || successes > trials) throw ContractError("binomial test: bad arguments");
  // log C(n, k) via lgamma keeps n in the hundreds exact enough.
  auto log_pmf = [trials](int k) {
    return std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) -
           trials * std::log(2.0);
  };
  double lower = 0.0;
  double upper = 0.0;
  for (int k = 0; k <= trials; ++k) {
    const double p = std::exp(log_pmf(k));
    if (k <= successes) lower += p;
    if (k >= successes) upper += p;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace vsss

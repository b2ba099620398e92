#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "vsss/agents.hpp"
#include "vsss/env.hpp"
#include "vsss/manifest.hpp"
#include "vsss/replay_file.hpp"
#include "vsss/sim2real.hpp"
#include "vsss/stats.hpp"

namespace vsss {

// A policy that can play either side of a match. Implementations are
// immutable; per-episode randomness comes through the rng argument.
class MatchPolicy {
 public:
  virtual ~MatchPolicy() = default;
  virtual std::string name() const = 0;
  virtual Action act(const WorldState& world, Side side, const EnvConfig& cfg, Rng& rng) const = 0;
};

// spec: "scripted" | "random" | "stationary" | path to a checkpoint file.
std::unique_ptr<MatchPolicy> make_match_policy(const std::string& spec, const EnvConfig& cfg);

struct MatchStats {
  long goals_a = 0;
  long goals_b = 0;
  int episodes = 0;
  int scoring_a = 0;
  int scoring_b = 0;
  int timeouts = 0;
  StatSummary steps_to_goal;    // all scoring episodes
  StatSummary steps_to_goal_a;  // episodes won by A
  StatSummary steps_to_goal_b;

  nlohmann::json to_json() const;
};

// Plays `episodes` episodes, alternating which policy controls blue; both
// episodes of a mirrored pair reuse the same spawn seed so side bias cancels
// in the totals. Deterministic per seed, including under threads > 1
// (episodes are seeded independently and reduced in index order).
MatchStats run_match(const MatchPolicy& policy_a, const MatchPolicy& policy_b,
                     const EnvConfig& cfg, int episodes, std::uint64_t seed, int threads = 1);

// Evaluation loop that works for any MatchPolicy (checkpoints, scripted,
// random); the opponent comes from cfg.opponent_policy.
EvalStats evaluate_match_policy(const EnvConfig& cfg, const MatchPolicy& policy, int episodes,
                                std::uint64_t seed, int threads = 1);

// Rolls out one episode with snapshot recording and packages it for export.
ReplayFile record_episode(const EnvConfig& cfg, const MatchPolicy& policy, std::uint64_t seed,
                          const RunManifest& manifest);

// Artifact writers. Every artifact embeds the manifest's deterministic core.
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path,
                     const RunManifest& manifest);
void write_json_artifact(const nlohmann::json& payload, const std::string& path,
                         const RunManifest& manifest);
nlohmann::json eval_stats_to_json(const EvalStats& stats);
nlohmann::json tracking_report_to_json(const TrackingReport& report);
nlohmann::json transfer_report_to_json(const TransferReport& report);

// Exact two-sided binomial test with p = 1/2; used by match symmetry checks.
double binomial_two_sided_p(int successes, int trials);

}  // namespace vsss

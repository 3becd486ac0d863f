#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "arena/grpo.hpp"
#include "arena/policy.hpp"
#include "arena/rewards.hpp"
#include "arena/world.hpp"

namespace arena {

// Full training configuration. Field defaults are the documented toy-scale
// defaults; the config file loader maps dotted keys onto these.
struct TrainConfig {
  // world.seed left at this sentinel derives the scene stream from train.seed.
  static constexpr std::uint64_t derive_world_seed = ~0ull;

  WorldConfig world;

  int max_len = 8;            // rollout token cap, both roles
  double init_scale = 0.02;   // uniform init half-width
  double grammar_bias = 4.0;  // shared format prior strength, 0 = pure random

  RewardConfig reward;
  double epsilon = 1e-8;  // group normalization regularizer

  int k = 3;         // solver rollouts per claim
  int f_c = 2;       // challenger update period (steps with step % f_c == 0)
  int steps = 2000;  // training steps
  double lr_solver = 0.05;
  double lr_challenger = 0.02;
  double grad_clip = 5.0;  // global-norm clip, 0 disables
  std::uint64_t seed = 1;
  int metrics_interval = 1;
  // Probability an episode's positive branch is replaced by a second query
  // on the false claim with target "no" (negative-heavy target mix used by
  // the rejection-bias studies). 0 keeps the standard paired episode.
  double negative_mix = 0.0;
  bool dump_episodes = false;
  int threads = 1;  // <= 1 runs the serial reference kernels

  TrainConfig() { world.seed = derive_world_seed; }

  std::uint64_t world_seed_effective() const;
  WorldConfig world_effective() const;  // world with the derived seed filled in
  PolicySpec policy_spec() const;
  void validate() const;
};

struct SolverQuery {
  Claim claim;
  Decision target = Decision::yes;
  Polarity query_polarity = Polarity::positive;  // which claim is being verified
};

struct EpisodeRecord {
  std::uint64_t step = 0;
  Scene scene;
  bool valid = false;  // false: a challenger pass failed to parse, no updates

  Rollout challenger_plus;   // generation pass z=1
  Rollout challenger_minus;  // generation pass z=0, conditioned on the true claim
  std::optional<Claim> claim_plus;
  std::optional<Claim> claim_minus;

  double edit_distance = 0.0;
  double r_stealth = 0.0;
  bool plus_negated = false;  // negative_mix replaced the positive branch

  std::vector<SolverQuery> queries;  // [plus-branch, minus-branch]
  std::vector<Rollout> solver_plus, solver_minus;
  std::vector<Decision> decision_plus, decision_minus;
  std::vector<RewardBundle> bundles;  // one per k
  AdvantageSet advantages;
  double r_challenger = 0.0;
};

struct MetricsRow {
  std::uint64_t step = 0;  // last step of the reporting window
  double r_true = 0.0;     // mean solver reward on true-claim (target yes) queries
  double r_false = 0.0;    // mean solver reward on false-claim (target no) queries
  double solver_win_rate = 0.0;
  double challenger_win_rate = 0.0;  // always exactly 1 - solver_win_rate
  double edit_distance = 0.0;
  double stealth = 0.0;
  double degenerate_frac = 0.0;
  int unparseable = 0;  // invalid episodes in the window
  int n_valid = 0;

  nlohmann::ordered_json to_json() const;
  static MetricsRow from_json(const nlohmann::json& j);
};

struct TrainResult {
  PolicyParams challenger;
  PolicyParams solver;
  std::vector<EpisodeRecord> records;
  std::vector<MetricsRow> metrics;
};

// 2K solver rollouts for one claim pair, each drawn from its own
// pre-assigned stream. The parallel path fills the same pre-addressed slots
// the serial path does, so both are bit-identical.
struct SolverGroup {
  std::vector<Rollout> plus, minus;
};
SolverGroup sample_solver_group_serial(const PolicyParams& solver, const Context& ctx_plus,
                                       const Context& ctx_minus, int k, std::uint64_t stream_base,
                                       int max_len);
SolverGroup sample_solver_group_parallel(const PolicyParams& solver, const Context& ctx_plus,
                                         const Context& ctx_minus, int k,
                                         std::uint64_t stream_base, int max_len, int threads);
SolverGroup sample_solver_group(const PolicyParams& solver, const Context& ctx_plus,
                                const Context& ctx_minus, int k, std::uint64_t stream_base,
                                int max_len, int threads);

// One full episode: generate the claim pair, run the solver group, score
// everything. Pure function of (config, policies, step_index).
EpisodeRecord run_episode(const TrainConfig& config, const PolicyParams& challenger,
                          const PolicyParams& solver, std::uint64_t step_index);

// The co-evolution loop. Solver updates every valid episode; challenger
// updates on valid episodes where step % f_c == 0. Invalid episodes update
// nothing. Throws NumericalError (with the step) on non-finite parameters.
TrainResult train(const TrainConfig& config);

// Moving average of per-valid-episode edit distance (the curriculum
// difficulty trace). window 1 is the identity.
std::vector<double> curriculum_series(const std::vector<EpisodeRecord>& records, int window);

// Replay-grade episode serialization: tokens, claims, decisions, rewards,
// and scene facts survive the round trip (sampling contexts are rebuilt
// from those, not stored).
nlohmann::ordered_json episode_to_json(const EpisodeRecord& record);
EpisodeRecord episode_from_json(const nlohmann::json& j);

}  // namespace arena

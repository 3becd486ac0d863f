#include "arena/selfplay.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arena/claims.hpp"
#include "arena/util.hpp"

namespace arena {

namespace {

constexpr std::uint64_t kWorldSeedTag = 0x9a11e7;
constexpr std::uint64_t kEpisodeTag = 0xe9150de;
constexpr std::uint64_t kChallengerPlusTag = 1;
constexpr std::uint64_t kChallengerMinusTag = 2;
constexpr std::uint64_t kNegativeMixTag = 3;
constexpr std::uint64_t kSolverSlotTag = 16;

std::vector<double> bag_of_tokens(const Vocabulary& vocab, const std::vector<int>& tokens) {
  std::vector<double> bag(static_cast<std::size_t>(vocab.size()), 0.0);
  for (int t : tokens) bag[static_cast<std::size_t>(t)] += 1.0;
  return bag;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

const char* polarity_name(Polarity p) {
  return p == Polarity::positive ? "positive" : "negative";
}
Polarity polarity_from_name(const std::string& s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  throw std::invalid_argument("bad polarity: " + s);
}
const char* decision_name(Decision d) {
  switch (d) {
    case Decision::yes: return "yes";
    case Decision::no: return "no";
    default: return "undecided";
  }
}
Decision decision_from_name(const std::string& s) {
  if (s == "yes") return Decision::yes;
  if (s == "no") return Decision::no;
  if (s == "undecided") return Decision::undecided;
  throw std::invalid_argument("bad decision: " + s);
}

nlohmann::ordered_json rollout_to_json(const Rollout& r) {
  return {{"tokens", r.tokens}, {"mean_logprob", r.mean_logprob}};
}
Rollout rollout_from_json(const nlohmann::json& j) {
  Rollout r;
  r.tokens = j.at("tokens").get<std::vector<int>>();
  r.mean_logprob = j.at("mean_logprob").get<double>();
  return r;
}

nlohmann::ordered_json claim_to_json(const Claim& c) {
  return {{"tokens", c.tokens},
          {"polarity", polarity_name(c.polarity)},
          {"source_tokens", c.source_tokens}};
}
Claim claim_from_json(const nlohmann::json& j) {
  Claim c;
  c.tokens = j.at("tokens").get<std::vector<int>>();
  c.polarity = polarity_from_name(j.at("polarity").get<std::string>());
  c.source_tokens = j.at("source_tokens").get<std::vector<int>>();
  return c;
}

}  // namespace

std::uint64_t TrainConfig::world_seed_effective() const {
  return world.seed == derive_world_seed ? mix_seed(seed, kWorldSeedTag) : world.seed;
}

WorldConfig TrainConfig::world_effective() const {
  WorldConfig w = world;
  w.seed = world_seed_effective();
  return w;
}

PolicySpec TrainConfig::policy_spec() const {
  return PolicySpec{world.vocabulary().size(), world.feature_dim()};
}

void TrainConfig::validate() const {
  world_effective().validate();
  reward.validate();
  if (max_len < 1) throw ConfigError("policy.max_len must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("policy.init_scale must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("grpo.epsilon must be > 0");
  if (k < 1) throw ConfigError("train.k must be >= 1");
  if (f_c < 1) throw ConfigError("train.f_c must be >= 1");
  if (steps < 1) throw ConfigError("train.steps must be >= 1");
  if (!(lr_solver >= 0.0)) throw ConfigError("train.lr_solver must be >= 0");
  if (!(lr_challenger >= 0.0)) throw ConfigError("train.lr_challenger must be >= 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("train.grad_clip must be >= 0");
  if (metrics_interval < 1) throw ConfigError("train.metrics_interval must be >= 1");
  if (!(negative_mix >= 0.0 && negative_mix < 1.0)) {
    throw ConfigError("train.negative_mix must be in [0, 1)");
  }
  if (threads < 0) throw ConfigError("train.threads must be >= 0");
}

SolverGroup sample_solver_group_serial(const PolicyParams& solver, const Context& ctx_plus,
                                       const Context& ctx_minus, int k, std::uint64_t stream_base,
                                       int max_len) {
  SolverGroup group;
  group.plus.resize(static_cast<std::size_t>(k));
  group.minus.resize(static_cast<std::size_t>(k));
  for (int slot = 0; slot < 2 * k; ++slot) {
    const int branch = slot % 2;
    const int i = slot / 2;
    RngStream rng(mix_seed(stream_base, kSolverSlotTag + static_cast<std::uint64_t>(slot)));
    Rollout r = sample(solver, branch == 0 ? ctx_plus : ctx_minus, rng, max_len);
    (branch == 0 ? group.plus : group.minus)[static_cast<std::size_t>(i)] = std::move(r);
  }
  return group;
}

SolverGroup sample_solver_group_parallel(const PolicyParams& solver, const Context& ctx_plus,
                                         const Context& ctx_minus, int k,
                                         std::uint64_t stream_base, int max_len, int threads) {
  SolverGroup group;
  group.plus.resize(static_cast<std::size_t>(k));
  group.minus.resize(static_cast<std::size_t>(k));
  // Each slot owns a pre-assigned stream and a pre-addressed output, so the
  // schedule cannot change the result.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (int slot = 0; slot < 2 * k; ++slot) {
    const int branch = slot % 2;
    const int i = slot / 2;
    RngStream rng(mix_seed(stream_base, kSolverSlotTag + static_cast<std::uint64_t>(slot)));
    Rollout r = sample(solver, branch == 0 ? ctx_plus : ctx_minus, rng, max_len);
    (branch == 0 ? group.plus : group.minus)[static_cast<std::size_t>(i)] = std::move(r);
  }
  return group;
}

SolverGroup sample_solver_group(const PolicyParams& solver, const Context& ctx_plus,
                                const Context& ctx_minus, int k, std::uint64_t stream_base,
                                int max_len, int threads) {
  const int n = resolve_threads(threads);
  if (n <= 1) {
    return sample_solver_group_serial(solver, ctx_plus, ctx_minus, k, stream_base, max_len);
  }
  return sample_solver_group_parallel(solver, ctx_plus, ctx_minus, k, stream_base, max_len, n);
}

EpisodeRecord run_episode(const TrainConfig& config, const PolicyParams& challenger,
                          const PolicyParams& solver, std::uint64_t step_index) {
  const WorldConfig world = config.world_effective();
  const Vocabulary vocab = world.vocabulary();

  EpisodeRecord rec;
  rec.step = step_index;
  rec.scene = generate_scene(world, step_index);

  const std::uint64_t base = mix_seed(mix_seed(config.seed, kEpisodeTag), step_index);

  // Generation pass z=1: the claim meant to be true.
  Context ctx_plus_gen;
  ctx_plus_gen.scene = rec.scene.features;
  ctx_plus_gen.z = 1;
  {
    RngStream rng(mix_seed(base, kChallengerPlusTag));
    rec.challenger_plus = sample(challenger, ctx_plus_gen, rng, config.max_len);
  }
  auto claim_plus = parse_claim(vocab, rec.challenger_plus.tokens);
  if (!claim_plus) return rec;  // unparseable, episode carries no updates
  claim_plus->polarity = Polarity::positive;
  rec.claim_plus = *claim_plus;

  // Generation pass z=0: the minimal edit, conditioned on the true claim.
  Context ctx_minus_gen;
  ctx_minus_gen.scene = rec.scene.features;
  ctx_minus_gen.z = 0;
  ctx_minus_gen.bag = bag_of_tokens(vocab, claim_plus->tokens);
  {
    RngStream rng(mix_seed(base, kChallengerMinusTag));
    rec.challenger_minus = sample(challenger, ctx_minus_gen, rng, config.max_len);
  }
  auto claim_minus = parse_claim(vocab, rec.challenger_minus.tokens);
  if (!claim_minus) return rec;
  claim_minus->polarity = Polarity::negative;
  rec.claim_minus = *claim_minus;

  rec.valid = true;
  rec.edit_distance = edit_distance_normalized(claim_plus->tokens, claim_minus->tokens);
  rec.r_stealth = std::exp(-config.reward.alpha * rec.edit_distance);

  rec.plus_negated = false;
  if (config.negative_mix > 0.0) {
    RngStream rng(mix_seed(base, kNegativeMixTag));
    rec.plus_negated = rng.next_double() < config.negative_mix;
  }
  SolverQuery plus_query{*claim_plus, Decision::yes, Polarity::positive};
  if (rec.plus_negated) plus_query = SolverQuery{*claim_minus, Decision::no, Polarity::negative};
  SolverQuery minus_query{*claim_minus, Decision::no, Polarity::negative};
  rec.queries = {plus_query, minus_query};

  Context ctx_plus;
  ctx_plus.scene = rec.scene.features;
  ctx_plus.bag = bag_of_tokens(vocab, plus_query.claim.tokens);
  Context ctx_minus;
  ctx_minus.scene = rec.scene.features;
  ctx_minus.bag = bag_of_tokens(vocab, minus_query.claim.tokens);

  SolverGroup group = sample_solver_group(solver, ctx_plus, ctx_minus, config.k, base,
                                          config.max_len, config.threads);
  rec.solver_plus = std::move(group.plus);
  rec.solver_minus = std::move(group.minus);

  std::vector<double> pair_rewards;
  pair_rewards.reserve(static_cast<std::size_t>(config.k));
  for (int i = 0; i < config.k; ++i) {
    const Rollout& sp = rec.solver_plus[static_cast<std::size_t>(i)];
    const Rollout& sm = rec.solver_minus[static_cast<std::size_t>(i)];
    const Decision dp = extract_decision(vocab, sp.tokens);
    const Decision dm = extract_decision(vocab, sm.tokens);
    rec.decision_plus.push_back(dp);
    rec.decision_minus.push_back(dm);

    RewardBundle b;
    b.sigma_plus = correctness_sign(dp, plus_query.target);
    b.sigma_minus = correctness_sign(dm, minus_query.target);
    b.r_plus = solver_reward(b.sigma_plus, sp.mean_logprob, config.reward);
    b.r_minus = solver_reward(b.sigma_minus, sm.mean_logprob, config.reward);
    b.r_pair = paired_solver_reward(b.r_plus, b.r_minus);
    b.r_stealth = rec.r_stealth;
    rec.bundles.push_back(b);
    pair_rewards.push_back(b.r_pair);
  }

  rec.advantages = normalize_group(Group{pair_rewards, config.epsilon});

  double mean_pair = 0.0;
  for (double r : pair_rewards) mean_pair += r;
  mean_pair /= static_cast<double>(config.k);
  rec.r_challenger = challenger_reward(mean_pair, rec.r_stealth, config.reward);
  for (RewardBundle& b : rec.bundles) b.r_challenger = rec.r_challenger;

  return rec;
}

namespace {

struct MetricsAccumulator {
  double sum_r_true = 0.0, sum_r_false = 0.0;
  int n_true = 0, n_false = 0;
  int wins = 0, rollouts = 0;
  double sum_d = 0.0, sum_stealth = 0.0;
  int degenerate = 0, unparseable = 0, valid = 0;

  void add(const EpisodeRecord& rec) {
    if (!rec.valid) {
      ++unparseable;
      return;
    }
    ++valid;
    sum_d += rec.edit_distance;
    sum_stealth += rec.r_stealth;
    if (rec.advantages.degenerate) ++degenerate;
    for (const RewardBundle& b : rec.bundles) {
      rollouts += 2;
      if (b.sigma_plus == 1) ++wins;
      if (b.sigma_minus == 1) ++wins;
      if (rec.queries[0].query_polarity == Polarity::positive) {
        sum_r_true += b.r_plus;
        ++n_true;
      } else {
        sum_r_false += b.r_plus;
        ++n_false;
      }
      sum_r_false += b.r_minus;
      ++n_false;
    }
  }

  MetricsRow flush(std::uint64_t step) {
    MetricsRow row;
    row.step = step;
    row.r_true = n_true ? sum_r_true / n_true : 0.0;
    row.r_false = n_false ? sum_r_false / n_false : 0.0;
    row.solver_win_rate = rollouts ? static_cast<double>(wins) / rollouts : 0.0;
    row.challenger_win_rate = 1.0 - row.solver_win_rate;
    row.edit_distance = valid ? sum_d / valid : 0.0;
    row.stealth = valid ? sum_stealth / valid : 0.0;
    row.degenerate_frac = valid ? static_cast<double>(degenerate) / valid : 0.0;
    row.unparseable = unparseable;
    row.n_valid = valid;
    *this = MetricsAccumulator{};
    return row;
  }
};

}  // namespace

TrainResult train(const TrainConfig& config) {
  config.validate();
  const Vocabulary vocab = config.world.vocabulary();
  const PolicySpec spec = config.policy_spec();

  TrainResult result{
      init_policy(spec, Role::challenger, vocab, config.seed, config.init_scale,
                  config.grammar_bias),
      init_policy(spec, Role::solver, vocab, config.seed, config.init_scale, config.grammar_bias),
      {},
      {}};
  result.records.reserve(static_cast<std::size_t>(config.steps));

  MetricsAccumulator acc;
  for (int step = 0; step < config.steps; ++step) {
    EpisodeRecord rec =
        run_episode(config, result.challenger, result.solver, static_cast<std::uint64_t>(step));

    if (rec.valid) {
      // Both gradients are computed against the policies that produced the
      // episode, then applied.
      const Gradient g_solver = solver_objective_gradient(result.solver, rec.solver_plus,
                                                          rec.solver_minus, rec.advantages);
      const bool update_challenger = step % config.f_c == 0;
      Gradient g_challenger;
      if (update_challenger) {
        g_challenger = challenger_objective_gradient(result.challenger, rec.challenger_plus,
                                                     rec.challenger_minus, rec.r_challenger);
      }
      try {
        apply_update(result.solver, g_solver, config.lr_solver, config.grad_clip);
        if (update_challenger) {
          apply_update(result.challenger, g_challenger, config.lr_challenger, config.grad_clip);
        }
      } catch (const NumericalError& e) {
        throw NumericalError("step " + std::to_string(step) + ": " + e.what());
      }
    }

    acc.add(rec);
    const bool window_end = (step + 1) % config.metrics_interval == 0;
    const bool last = step + 1 == config.steps;
    if (window_end || last) {
      result.metrics.push_back(acc.flush(static_cast<std::uint64_t>(step)));
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::vector<double> curriculum_series(const std::vector<EpisodeRecord>& records, int window) {
  if (window < 1) throw std::invalid_argument("curriculum window must be >= 1");
  std::vector<double> d;
  for (const EpisodeRecord& rec : records) {
    if (rec.valid) d.push_back(rec.edit_distance);
  }
  if (static_cast<int>(d.size()) < window) return {};
  std::vector<double> out;
  out.reserve(d.size() - static_cast<std::size_t>(window) + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum += d[i];
    if (i + 1 >= static_cast<std::size_t>(window)) {
      out.push_back(sum / window);
      sum -= d[i + 1 - static_cast<std::size_t>(window)];
    }
  }
  return out;
}

nlohmann::ordered_json MetricsRow::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["r_true"] = r_true;
  j["r_false"] = r_false;
  j["solver_win_rate"] = solver_win_rate;
  j["challenger_win_rate"] = challenger_win_rate;
  j["edit_distance"] = edit_distance;
  j["stealth"] = stealth;
  j["degenerate_frac"] = degenerate_frac;
  j["unparseable"] = unparseable;
  j["n_valid"] = n_valid;
  return j;
}

MetricsRow MetricsRow::from_json(const nlohmann::json& j) {
  MetricsRow row;
  row.step = j.at("step").get<std::uint64_t>();
  row.r_true = j.at("r_true").get<double>();
  row.r_false = j.at("r_false").get<double>();
  row.solver_win_rate = j.at("solver_win_rate").get<double>();
  row.challenger_win_rate = j.at("challenger_win_rate").get<double>();
  row.edit_distance = j.at("edit_distance").get<double>();
  row.stealth = j.at("stealth").get<double>();
  row.degenerate_frac = j.at("degenerate_frac").get<double>();
  row.unparseable = j.at("unparseable").get<int>();
  row.n_valid = j.at("n_valid").get<int>();
  return row;
}

nlohmann::ordered_json episode_to_json(const EpisodeRecord& rec) {
  nlohmann::ordered_json j;
  j["step"] = rec.step;
  j["valid"] = rec.valid;
  nlohmann::ordered_json facts = nlohmann::ordered_json::array();
  for (const Fact& f : rec.scene.facts) facts.push_back({f.object, f.attribute, f.value});
  j["scene"] = {{"index", rec.scene.episode_index}, {"facts", facts}};
  j["challenger_plus"] = rollout_to_json(rec.challenger_plus);
  j["challenger_minus"] = rollout_to_json(rec.challenger_minus);
  if (rec.claim_plus) j["claim_plus"] = claim_to_json(*rec.claim_plus);
  if (rec.claim_minus) j["claim_minus"] = claim_to_json(*rec.claim_minus);
  if (!rec.valid) return j;

  j["edit_distance"] = rec.edit_distance;
  j["r_stealth"] = rec.r_stealth;
  j["plus_negated"] = rec.plus_negated;
  auto rollouts = [](const std::vector<Rollout>& rs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Rollout& r : rs) arr.push_back(rollout_to_json(r));
    return arr;
  };
  j["solver_plus"] = rollouts(rec.solver_plus);
  j["solver_minus"] = rollouts(rec.solver_minus);
  auto decisions = [](const std::vector<Decision>& ds) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (Decision d : ds) arr.push_back(decision_name(d));
    return arr;
  };
  j["decision_plus"] = decisions(rec.decision_plus);
  j["decision_minus"] = decisions(rec.decision_minus);
  nlohmann::ordered_json bundles = nlohmann::ordered_json::array();
  for (const RewardBundle& b : rec.bundles) {
    bundles.push_back({{"r_plus", b.r_plus},
                       {"r_minus", b.r_minus},
                       {"r_pair", b.r_pair},
                       {"r_stealth", b.r_stealth},
                       {"r_challenger", b.r_challenger},
                       {"sigma_plus", b.sigma_plus},
                       {"sigma_minus", b.sigma_minus}});
  }
  j["bundles"] = bundles;
  j["advantages"] = rec.advantages.advantages;
  j["degenerate"] = rec.advantages.degenerate;
  j["r_challenger"] = rec.r_challenger;
  return j;
}

EpisodeRecord episode_from_json(const nlohmann::json& j) {
  EpisodeRecord rec;
  rec.step = j.at("step").get<std::uint64_t>();
  rec.valid = j.at("valid").get<bool>();
  rec.scene.episode_index = j.at("scene").at("index").get<std::uint64_t>();
  for (const auto& f : j.at("scene").at("facts")) {
    rec.scene.facts.push_back(Fact{f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});
  }
  rec.challenger_plus = rollout_from_json(j.at("challenger_plus"));
  rec.challenger_minus = rollout_from_json(j.at("challenger_minus"));
  if (j.contains("claim_plus")) rec.claim_plus = claim_from_json(j.at("claim_plus"));
  if (j.contains("claim_minus")) rec.claim_minus = claim_from_json(j.at("claim_minus"));
  if (!rec.valid) return rec;

  rec.edit_distance = j.at("edit_distance").get<double>();
  rec.r_stealth = j.at("r_stealth").get<double>();
  rec.plus_negated = j.at("plus_negated").get<bool>();
  SolverQuery plus_query{*rec.claim_plus, Decision::yes, Polarity::positive};
  if (rec.plus_negated) plus_query = SolverQuery{*rec.claim_minus, Decision::no, Polarity::negative};
  rec.queries = {plus_query, SolverQuery{*rec.claim_minus, Decision::no, Polarity::negative}};
  for (const auto& r : j.at("solver_plus")) rec.solver_plus.push_back(rollout_from_json(r));
  for (const auto& r : j.at("solver_minus")) rec.solver_minus.push_back(rollout_from_json(r));
  for (const auto& d : j.at("decision_plus")) {
    rec.decision_plus.push_back(decision_from_name(d.get<std::string>()));
  }
  for (const auto& d : j.at("decision_minus")) {
    rec.decision_minus.push_back(decision_from_name(d.get<std::string>()));
  }
  for (const auto& b : j.at("bundles")) {
    RewardBundle bundle;
    bundle.r_plus = b.at("r_plus").get<double>();
    bundle.r_minus = b.at("r_minus").get<double>();
    bundle.r_pair = b.at("r_pair").get<double>();
    bundle.r_stealth = b.at("r_stealth").get<double>();
    bundle.r_challenger = b.at("r_challenger").get<double>();
    bundle.sigma_plus = b.at("sigma_plus").get<int>();
    bundle.sigma_minus = b.at("sigma_minus").get<int>();
    rec.bundles.push_back(bundle);
  }
  rec.advantages.advantages = j.at("advantages").get<std::vector<double>>();
  rec.advantages.degenerate = j.at("degenerate").get<bool>();
  rec.r_challenger = j.at("r_challenger").get<double>();
  return rec;
}

}  // namespace arena

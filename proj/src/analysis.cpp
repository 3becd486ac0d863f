#include "arena/analysis.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "arena/claims.hpp"
#include "arena/rng.hpp"
#include "arena/util.hpp"

namespace arena {

namespace {

constexpr std::uint64_t kEvalTag = 0xe7a1;
constexpr std::uint64_t kEvalWorldTag = 0xe7a1b;

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

struct ClaimTriple {
  std::vector<int> tokens;
  std::string label;
};

std::vector<ClaimTriple> enumerate_claims(const WorldConfig& world) {
  const Vocabulary vocab = world.vocabulary();
  std::vector<ClaimTriple> claims;
  for (int o = 0; o < world.n_objects; ++o) {
    for (int a = 0; a < world.n_attributes; ++a) {
      for (int v = 0; v < world.n_values; ++v) {
        ClaimTriple c;
        c.tokens = {vocab.object_token(o), vocab.attribute_token(a), vocab.value_token(v)};
        c.label = vocab.token_name(c.tokens[0]) + " " + vocab.token_name(c.tokens[1]) + " " +
                  vocab.token_name(c.tokens[2]);
        claims.push_back(std::move(c));
      }
    }
  }
  return claims;
}

double pure_payoff(const ClaimTriple& c_plus, const ClaimTriple& c_minus, bool yes_on_plus,
                   bool yes_on_minus, const RewardConfig& reward) {
  const int sigma_plus = yes_on_plus ? 1 : -1;    // target yes on the true claim
  const int sigma_minus = yes_on_minus ? -1 : 1;  // target no on the edited claim
  const double d = edit_distance_normalized(c_plus.tokens, c_minus.tokens);
  return static_cast<double>(sigma_plus + sigma_minus) -
         reward.lambda_stealth * std::exp(-reward.alpha * d);
}

// Shared per-episode evaluation body used by the serial and parallel
// hardness kernels; everything is keyed off the episode index.
struct EvalOutcome {
  bool valid = false;
  bool plus_yes = false;
  bool minus_no = false;
  bool plus_true = false;
  bool minus_true = false;
};

EvalOutcome evaluate_episode(const TrainConfig& config, const WorldConfig& eval_world,
                             const Vocabulary& vocab, const PolicyParams& challenger,
                             const PolicyParams& solver, int index) {
  EvalOutcome out;
  const Scene scene = generate_scene(eval_world, static_cast<std::uint64_t>(index));
  const std::uint64_t base =
      mix_seed(mix_seed(config.seed, kEvalTag), static_cast<std::uint64_t>(index));

  Context ctx_gen_plus;
  ctx_gen_plus.scene = scene.features;
  ctx_gen_plus.z = 1;
  RngStream rng_plus(mix_seed(base, 1));
  const Rollout o_plus = sample(challenger, ctx_gen_plus, rng_plus, config.max_len);
  auto claim_plus = parse_claim(vocab, o_plus.tokens);
  if (!claim_plus) return out;

  Context ctx_gen_minus;
  ctx_gen_minus.scene = scene.features;
  ctx_gen_minus.z = 0;
  ctx_gen_minus.bag = bag_of_tokens(vocab, claim_plus->tokens);
  RngStream rng_minus(mix_seed(base, 2));
  const Rollout o_minus = sample(challenger, ctx_gen_minus, rng_minus, config.max_len);
  auto claim_minus = parse_claim(vocab, o_minus.tokens);
  if (!claim_minus) return out;

  out.valid = true;
  Context ctx_plus;
  ctx_plus.scene = scene.features;
  ctx_plus.bag = bag_of_tokens(vocab, claim_plus->tokens);
  Context ctx_minus;
  ctx_minus.scene = scene.features;
  ctx_minus.bag = bag_of_tokens(vocab, claim_minus->tokens);
  RngStream rng_sp(mix_seed(base, 4));
  RngStream rng_sm(mix_seed(base, 5));
  const Rollout s_plus = sample(solver, ctx_plus, rng_sp, config.max_len);
  const Rollout s_minus = sample(solver, ctx_minus, rng_sm, config.max_len);
  out.plus_yes = extract_decision(vocab, s_plus.tokens) == Decision::yes;
  out.minus_no = extract_decision(vocab, s_minus.tokens) == Decision::no;
  out.plus_true = claim_truth(eval_world, scene, *claim_plus) == Truth::is_true;
  out.minus_true = claim_truth(eval_world, scene, *claim_minus) == Truth::is_true;
  return out;
}

HardnessReport reduce_outcomes(const std::vector<EvalOutcome>& outcomes) {
  HardnessReport report;
  report.n_episodes = static_cast<int>(outcomes.size());
  int plus_yes = 0, minus_no = 0, plus_true = 0, minus_true = 0;
  for (const EvalOutcome& o : outcomes) {
    if (!o.valid) continue;
    ++report.n_valid;
    plus_yes += o.plus_yes;
    minus_no += o.minus_no;
    plus_true += o.plus_true;
    minus_true += o.minus_true;
  }
  if (report.n_valid > 0) {
    report.acc_plus = static_cast<double>(plus_yes) / report.n_valid;
    report.acc_minus = static_cast<double>(minus_no) / report.n_valid;
    report.truth_rate_plus = static_cast<double>(plus_true) / report.n_valid;
    report.truth_rate_minus = static_cast<double>(minus_true) / report.n_valid;
  }
  report.abs_diff = std::abs(report.acc_plus - report.acc_minus);
  return report;
}

}  // namespace

MatrixGame build_matrix_game(const WorldConfig& world, const RewardConfig& reward, int cell_budget,
                             int threads) {
  world.validate();
  reward.validate();
  const std::vector<ClaimTriple> claims = enumerate_claims(world);
  const std::size_t n_claims = claims.size();
  if (n_claims > 20) throw ConfigError("claim space too large to enumerate decision rules");
  const std::size_t n_pairs = n_claims * n_claims;
  const std::size_t n_rules = std::size_t{1} << n_claims;
  if (n_pairs * n_rules > static_cast<std::size_t>(cell_budget)) {
    throw ConfigError("matrix game would need " + std::to_string(n_pairs * n_rules) +
                      " cells, over the budget of " + std::to_string(cell_budget));
  }

  MatrixGame game;
  game.payoff.assign(n_pairs, std::vector<double>(n_rules, 0.0));
  game.row_labels.resize(n_pairs);
  game.col_labels.resize(n_rules);
  for (std::size_t r = 0; r < n_rules; ++r) game.col_labels[r] = "rule" + std::to_string(r);

  const int n = resolve_threads(threads);
  // Cells are independent and exact; any schedule gives identical output.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n) if (n > 1)
#endif
  for (long long p = 0; p < static_cast<long long>(n_pairs); ++p) {
    const std::size_t ip = static_cast<std::size_t>(p) / n_claims;
    const std::size_t im = static_cast<std::size_t>(p) % n_claims;
    game.row_labels[static_cast<std::size_t>(p)] = claims[ip].label + " | " + claims[im].label;
    for (std::size_t r = 0; r < n_rules; ++r) {
      const bool yes_on_plus = (r >> ip) & 1;
      const bool yes_on_minus = (r >> im) & 1;
      game.payoff[static_cast<std::size_t>(p)][r] =
          pure_payoff(claims[ip], claims[im], yes_on_plus, yes_on_minus, reward);
    }
  }
  return game;
}

HardnessReport balanced_hardness_check_serial(const TrainConfig& config,
                                              const PolicyParams& challenger,
                                              const PolicyParams& solver, int n_episodes) {
  if (n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
  WorldConfig eval_world = config.world_effective();
  eval_world.seed = mix_seed(eval_world.seed, kEvalWorldTag);
  const Vocabulary vocab = eval_world.vocabulary();
  std::vector<EvalOutcome> outcomes(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i) {
    outcomes[static_cast<std::size_t>(i)] =
        evaluate_episode(config, eval_world, vocab, challenger, solver, i);
  }
  return reduce_outcomes(outcomes);
}

HardnessReport balanced_hardness_check(const TrainConfig& config, const PolicyParams& challenger,
                                       const PolicyParams& solver, int n_episodes, int threads) {
  const int n = resolve_threads(threads);
  if (n <= 1) return balanced_hardness_check_serial(config, challenger, solver, n_episodes);

  WorldConfig eval_world = config.world_effective();
  eval_world.seed = mix_seed(eval_world.seed, kEvalWorldTag);
  const Vocabulary vocab = eval_world.vocabulary();
  std::vector<EvalOutcome> outcomes(static_cast<std::size_t>(n_episodes));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n)
#endif
  for (int i = 0; i < n_episodes; ++i) {
    outcomes[static_cast<std::size_t>(i)] =
        evaluate_episode(config, eval_world, vocab, challenger, solver, i);
  }
  return reduce_outcomes(outcomes);  // fixed-order reduction over the slots
}

double mutual_information(const std::vector<std::vector<int>>& counts) {
  double total = 0.0;
  for (const auto& row : counts) {
    for (int c : row) {
      if (c < 0) throw std::invalid_argument("negative count");
      total += c;
    }
  }
  if (total == 0.0) return 0.0;
  std::vector<double> px(counts.size(), 0.0);
  std::vector<double> py(counts.empty() ? 0 : counts[0].size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      px[i] += counts[i][j];
      py[j] += counts[i][j];
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      if (counts[i][j] == 0) continue;
      const double pxy = counts[i][j] / total;
      mi += pxy * std::log(pxy * total * total / (px[i] * py[j]));
    }
  }
  return std::max(mi, 0.0);
}

double spearman_rank_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("rank correlation size mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;

  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };

  const std::vector<double> rx = ranks(xs);
  const std::vector<double> ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

MiReport mi_vs_distance(const std::vector<EpisodeRecord>& records, int n_buckets,
                        int min_per_bucket) {
  if (n_buckets < 1) throw std::invalid_argument("n_buckets must be >= 1");
  if (min_per_bucket < 1) throw std::invalid_argument("min_per_bucket must be >= 1");

  // Samples: plus-branch decisions vs the value id of the scene's first
  // fact, bucketed by the episode's claim-pair edit distance.
  struct BucketAcc {
    std::map<std::pair<int, int>, int> counts;  // (decision, category) -> n
    double sum_d = 0.0;
    int n = 0;
  };
  std::vector<BucketAcc> acc(static_cast<std::size_t>(n_buckets));
  for (const EpisodeRecord& rec : records) {
    if (!rec.valid || rec.scene.facts.empty()) continue;
    const int category = rec.scene.facts[0].value;
    int b = static_cast<int>(rec.edit_distance * n_buckets);
    b = std::clamp(b, 0, n_buckets - 1);
    for (Decision d : rec.decision_plus) {
      BucketAcc& bucket = acc[static_cast<std::size_t>(b)];
      ++bucket.counts[{static_cast<int>(d), category}];
      bucket.sum_d += rec.edit_distance;
      ++bucket.n;
    }
  }

  MiReport report;
  std::vector<double> ds, mis;
  for (int b = 0; b < n_buckets; ++b) {
    const BucketAcc& bucket = acc[static_cast<std::size_t>(b)];
    if (bucket.n == 0) continue;
    if (bucket.n < min_per_bucket) {
      ++report.excluded;
      continue;
    }
    // Re-index the sparse counts into a dense joint table.
    std::map<int, std::size_t> dec_ix, cat_ix;
    for (const auto& [key, cnt] : bucket.counts) {
      dec_ix.emplace(key.first, dec_ix.size());
      cat_ix.emplace(key.second, cat_ix.size());
    }
    std::vector<std::vector<int>> table(dec_ix.size(), std::vector<int>(cat_ix.size(), 0));
    for (const auto& [key, cnt] : bucket.counts) {
      table[dec_ix[key.first]][cat_ix[key.second]] = cnt;
    }
    MiBucket out;
    out.lo = static_cast<double>(b) / n_buckets;
    out.hi = static_cast<double>(b + 1) / n_buckets;
    out.mean_distance = bucket.sum_d / bucket.n;
    out.mi = mutual_information(table);
    out.n = bucket.n;
    report.buckets.push_back(out);
    ds.push_back(out.mean_distance);
    mis.push_back(out.mi);
  }
  report.spearman = spearman_rank_correlation(ds, mis);
  return report;
}

VarianceDiagnostic variance_preservation_diagnostic(const std::vector<double>& mean_lls,
                                                    const std::vector<int>& sigmas,
                                                    const RewardConfig& config, double epsilon) {
  if (mean_lls.size() != sigmas.size() || mean_lls.empty()) {
    throw std::invalid_argument("diagnostic needs matched, nonempty inputs");
  }
  VarianceDiagnostic out;
  out.unanimous = std::all_of(sigmas.begin(), sigmas.end(),
                              [&](int s) { return s == sigmas.front(); });

  RewardConfig outcome = config;
  outcome.outcome_only = true;
  RewardConfig calibrated = config;
  calibrated.outcome_only = false;

  Group g_outcome{{}, epsilon}, g_calibrated{{}, epsilon};
  for (std::size_t i = 0; i < mean_lls.size(); ++i) {
    g_outcome.rewards.push_back(solver_reward(sigmas[i], mean_lls[i], outcome));
    g_calibrated.rewards.push_back(solver_reward(sigmas[i], mean_lls[i], calibrated));
  }
  for (double a : normalize_group(g_outcome).advantages) {
    out.max_abs_outcome = std::max(out.max_abs_outcome, std::abs(a));
  }
  for (double a : normalize_group(g_calibrated).advantages) {
    out.max_abs_calibrated = std::max(out.max_abs_calibrated, std::abs(a));
  }
  return out;
}

}  // namespace arena

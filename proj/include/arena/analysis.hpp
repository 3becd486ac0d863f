#pragma once

#include <string>
#include <vector>

#include "arena/selfplay.hpp"

namespace arena {

// Zero-sum matrix abstraction of the claim game plus the empirical
// diagnostics used to check the self-play dynamics.

struct MatrixGame {
  // payoff[i][j] is the row player's utility under the standard
  // solve_minimax convention (row maximizes). build_matrix_game stores the
  // expected solver utility with rows = challenger pure strategies, so
  // equilibria of that game are solved on the transpose.
  std::vector<std::vector<double>> payoff;
  std::vector<std::string> row_labels, col_labels;

  int rows() const { return static_cast<int>(payoff.size()); }
  int cols() const { return payoff.empty() ? 0 : static_cast<int>(payoff[0].size()); }
};

MatrixGame transpose(const MatrixGame& game);

// Enumerate the claim game exactly: rows are ordered claim pairs (c+, c-),
// columns are deterministic decision rules (claim -> yes/no), and each cell
// holds the outcome-level solver utility sigma(rule(c+), yes) +
// sigma(rule(c-), no) - lambda * stealth(c+, c-). A pure decision rule has
// no sequence likelihood, so the calibrated magnitude has no meaning here.
// Refuses grids larger than cell_budget.
MatrixGame build_matrix_game(const WorldConfig& world, const RewardConfig& reward,
                             int cell_budget = 1024, int threads = 1);

struct Equilibrium {
  std::vector<double> row_strategy, col_strategy;
  double value = 0.0;
  double gap = 0.0;  // best-response duality gap on the input matrix
};

// Dense-simplex LP solve of the zero-sum game (row player maximizes).
// Throws NumericalError if the achieved gap exceeds tolerance.
Equilibrium solve_minimax(const MatrixGame& game, double tolerance);

struct HardnessReport {
  int n_episodes = 0;  // attempted
  int n_valid = 0;     // both claims parsed
  double acc_plus = 0.0;   // P(decision yes | true-claim query)
  double acc_minus = 0.0;  // P(decision no | false-claim query)
  double abs_diff = 0.0;
  // Oracle ground truth rates of the generated claims; evaluation only.
  double truth_rate_plus = 0.0;
  double truth_rate_minus = 0.0;
};

// Fresh evaluation episodes with frozen policies on a dedicated stream
// space (never overlapping training episodes). One solver rollout per
// polarity per episode.
HardnessReport balanced_hardness_check(const TrainConfig& config, const PolicyParams& challenger,
                                       const PolicyParams& solver, int n_episodes,
                                       int threads = 1);
HardnessReport balanced_hardness_check_serial(const TrainConfig& config,
                                              const PolicyParams& challenger,
                                              const PolicyParams& solver, int n_episodes);

struct MiBucket {
  double lo = 0.0, hi = 0.0;  // edit-distance interval
  double mean_distance = 0.0;
  double mi = 0.0;  // plug-in mutual information, nats
  int n = 0;        // samples (plus-branch decisions)
};

struct MiReport {
  std::vector<MiBucket> buckets;  // retained buckets only
  int excluded = 0;               // under-filled buckets dropped
  double spearman = 0.0;          // rank correlation of (mean_distance, mi)
};

// Discrete plug-in MI between the solver decision and the scene fact
// category (value id of the scene's first fact), within equal-width edit
// distance buckets. Buckets with fewer than min_per_bucket samples are
// excluded so the plug-in bias stays below ~0.02 nats.
MiReport mi_vs_distance(const std::vector<EpisodeRecord>& records, int n_buckets,
                        int min_per_bucket = 100);

// Plug-in MI of a joint count table, nats.
double mutual_information(const std::vector<std::vector<int>>& counts);

// Spearman rank correlation with average ranks on ties; 0 when either side
// has no rank variance.
double spearman_rank_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

struct VarianceDiagnostic {
  double max_abs_outcome = 0.0;
  double max_abs_calibrated = 0.0;
  bool unanimous = false;  // precondition: all correctness signs equal
};

// The degenerate-advantage probe: outcome-only rewards on a unanimous group
// normalize to zero advantage, the calibrated reward keeps spread. Mixed
// signs are reported (unanimous=false), not rejected.
VarianceDiagnostic variance_preservation_diagnostic(const std::vector<double>& mean_lls,
                                                    const std::vector<int>& sigmas,
                                                    const RewardConfig& config, double epsilon);

}  // namespace arena

#pragma once

#include <vector>

#include "arena/policy.hpp"

namespace arena {

// Group-relative advantage normalization and the paired policy-gradient
// objectives built on it. Advantages and rewards are treated as constants
// by every gradient here (stop-gradient).
struct Group {
  std::vector<double> rewards;
  double epsilon = 1e-8;
};

struct AdvantageSet {
  std::vector<double> advantages;
  bool degenerate = false;  // zero spread in the group (includes size 1)
};

// (r - mean) / (population_std + epsilon). A group with zero spread (all
// rewards equal, or a single member) is degenerate and gets all-zero
// advantages rather than noise amplified off float rounding.
AdvantageSet normalize_group(const Group& group);

// (1/K) * sum_k A_k * (grad log pi(s_plus_k) + grad log pi(s_minus_k)).
// Accumulation order is fixed (k ascending) so results are reproducible.
Gradient solver_objective_gradient(const PolicyParams& params, const std::vector<Rollout>& plus,
                                   const std::vector<Rollout>& minus,
                                   const AdvantageSet& advantages);

// r_challenger * (grad log pi(o_plus) + grad log pi(o_minus)); the episode
// challenger reward multiplies both generation passes.
Gradient challenger_objective_gradient(const PolicyParams& params, const Rollout& o_plus,
                                       const Rollout& o_minus, double r_challenger);

}  // namespace arena

#include "arena/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arena {

AdvantageSet normalize_group(const Group& group) {
  const std::size_t k = group.rewards.size();
  if (k == 0) throw std::invalid_argument("empty reward group");
  if (!(group.epsilon > 0.0)) throw std::invalid_argument("group epsilon must be > 0");

  AdvantageSet out;
  out.advantages.assign(k, 0.0);

  const auto [lo, hi] = std::minmax_element(group.rewards.begin(), group.rewards.end());
  if (k == 1 || *lo == *hi) {
    out.degenerate = true;  // zero spread exactly; avoid dividing rounding noise
    return out;
  }

  double mean = 0.0;
  for (double r : group.rewards) mean += r;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double r : group.rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(k);  // population variance
  const double denom = std::sqrt(var) + group.epsilon;
  for (std::size_t i = 0; i < k; ++i) {
    out.advantages[i] = (group.rewards[i] - mean) / denom;
  }
  return out;
}

Gradient solver_objective_gradient(const PolicyParams& params, const std::vector<Rollout>& plus,
                                   const std::vector<Rollout>& minus,
                                   const AdvantageSet& advantages) {
  const std::size_t k = advantages.advantages.size();
  if (plus.size() != k || minus.size() != k) {
    throw std::invalid_argument("rollout/advantage group sizes disagree");
  }
  Gradient grad = zero_gradient(params.spec);
  const double inv_k = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double a = advantages.advantages[i] * inv_k;
    accumulate_score_gradient(params, plus[i].context, plus[i].tokens, a, grad);
    accumulate_score_gradient(params, minus[i].context, minus[i].tokens, a, grad);
  }
  return grad;
}

Gradient challenger_objective_gradient(const PolicyParams& params, const Rollout& o_plus,
                                       const Rollout& o_minus, double r_challenger) {
  Gradient grad = zero_gradient(params.spec);
  accumulate_score_gradient(params, o_plus.context, o_plus.tokens, r_challenger, grad);
  accumulate_score_gradient(params, o_minus.context, o_minus.tokens, r_challenger, grad);
  return grad;
}

}  // namespace arena

#include "arena/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arena/util.hpp"

namespace arena {

void RewardConfig::validate() const {
  stealth().validate();
  if (!(r_min >= 0.0 && r_min <= 1.0)) throw ConfigError("reward.r_min must be in [0, 1]");
  if (!(gamma_soft > 0.0 && gamma_soft <= 1.0)) {
    throw ConfigError("reward.gamma_soft must be in (0, 1]");
  }
  if (!(max_clip >= 0.0)) throw ConfigError("reward.max_clip must be >= 0");
}

int correctness_sign(Decision decision, Decision target) {
  if (target != Decision::yes && target != Decision::no) {
    throw std::invalid_argument("verification targets must be yes or no");
  }
  return decision == target ? 1 : -1;
}

double solver_reward(int sigma, double mean_ll, const RewardConfig& config) {
  if (sigma != 1 && sigma != -1) throw std::invalid_argument("sigma must be +1 or -1");
  if (mean_ll > 0.0) throw std::invalid_argument("mean log-likelihood must be <= 0");
  if (config.outcome_only) return static_cast<double>(sigma);

  double r = sigma * (-mean_ll);
  if (config.gamma_mode == RewardConfig::GammaMode::blend_to_binary) {
    if (config.gamma_soft < 1.0) {
      r = config.gamma_soft * sigma + (1.0 - config.gamma_soft) * r;
    }
  } else {
    r = (1.0 - config.gamma_soft) * sigma + config.gamma_soft * r;
  }
  if (config.max_clip > 0.0) r = std::clamp(r, -config.max_clip, config.max_clip);
  if (sigma == 1 && config.r_min > 0.0) r = std::max(r, config.r_min);
  return r;
}

double paired_solver_reward(double r_plus, double r_minus) { return r_plus + r_minus; }

double challenger_reward(double mean_paired_reward, double r_stealth, const RewardConfig& config) {
  if (!(r_stealth > 0.0 && r_stealth <= 1.0)) {
    throw std::invalid_argument("stealth reward must lie in (0, 1]");
  }
  return -mean_paired_reward + config.lambda_stealth * r_stealth;
}

}  // namespace arena

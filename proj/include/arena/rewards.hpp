#pragma once

#include "arena/claims.hpp"

namespace arena {

// Calibrated likelihood reward for the solver and the zero-sum-plus-stealth
// reward for the challenger.
struct RewardConfig {
  double lambda_stealth = 0.2;
  double alpha = 5.0;
  double r_min = 0.0;       // floor on correct-decision rewards, 0 disables
  double gamma_soft = 1.0;  // 1 = pure calibrated reward
  bool outcome_only = false;
  double max_clip = 0.0;  // symmetric magnitude clip, <= 0 disables

  // The soft-reward blend has two contradictory published readings; both
  // are available. blend_to_binary (default): gamma < 1 mixes
  // gamma*sigma + (1-gamma)*calibrated, gamma = 1 stays calibrated.
  // blend_to_calibrated: (1-gamma)*sigma + gamma*calibrated (continuous).
  enum class GammaMode { blend_to_binary, blend_to_calibrated };
  GammaMode gamma_mode = GammaMode::blend_to_binary;

  StealthParams stealth() const { return StealthParams{alpha, lambda_stealth}; }
  void validate() const;
};

// +1 when the decision matches the target, -1 otherwise; undecided never
// matches. Targets are yes/no only.
int correctness_sign(Decision decision, Decision target);

// sigma * (-mean_ll), then gamma blend, optional clip, and the r_min floor
// (floor applies only to correct decisions). outcome_only short-circuits to
// sigma itself. mean_ll must be <= 0.
double solver_reward(int sigma, double mean_ll, const RewardConfig& config);

double paired_solver_reward(double r_plus, double r_minus);

// -mean_paired_reward + lambda_stealth * r_stealth; the zero-sum side plus
// the stealth shaping term. r_stealth must lie in (0, 1].
double challenger_reward(double mean_paired_reward, double r_stealth, const RewardConfig& config);

// Per-rollout-pair reward record. r_stealth and r_challenger are episode
// level and repeat across a group's bundles.
struct RewardBundle {
  double r_plus = 0.0;
  double r_minus = 0.0;
  double r_pair = 0.0;  // always exactly r_plus + r_minus
  double r_stealth = 0.0;
  double r_challenger = 0.0;
  int sigma_plus = 0;
  int sigma_minus = 0;
};

}  // namespace arena

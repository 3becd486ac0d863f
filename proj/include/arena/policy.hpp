#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "arena/rng.hpp"
#include "arena/vocab.hpp"

namespace arena {

// Linear autoregressive token model. Logits are a linear map of the
// concatenated context [scene features | previous-token one-hot (plus a
// start slot) | polarity flag one-hot | conditioning bag-of-tokens | bias].
// Small enough that expected gradients can be checked by exhaustive
// sequence enumeration.
struct PolicySpec {
  int vocab_size = 0;  // sampleable tokens
  int scene_dim = 0;

  int prev_offset() const { return scene_dim; }
  int z_offset() const { return scene_dim + vocab_size + 1; }
  int bag_offset() const { return z_offset() + 2; }
  int bias_index() const { return bag_offset() + vocab_size; }
  int context_dim() const { return bias_index() + 1; }

  bool operator==(const PolicySpec&) const = default;
};

// Per-step model input. z is the generation polarity flag (-1 when the
// role does not receive one); bag holds conditioning-claim token counts.
struct Context {
  std::vector<double> scene;  // size scene_dim
  int z = -1;                 // -1 absent, else 0/1
  std::vector<double> bag;    // size vocab_size, or empty for none
};

enum class Role { challenger, solver };

struct PolicyParams {
  PolicySpec spec;
  Role role = Role::solver;
  std::vector<double> w;  // row-major [vocab_size][context_dim]

  double& at(int token, int j) { return w[static_cast<std::size_t>(token) * spec.context_dim() + j]; }
  double at(int token, int j) const { return w[static_cast<std::size_t>(token) * spec.context_dim() + j]; }
};

// Both roles are initialized from one shared draw: small uniform noise plus
// a grammar prior on previous-token transitions (claim delimiters and
// decision endings), the toy stand-in for starting from a format-following
// pretrained model. grammar_bias 0 gives a pure random init.
PolicyParams init_policy(const PolicySpec& spec, Role role, const Vocabulary& vocab,
                         std::uint64_t seed, double init_scale, double grammar_bias);

struct Rollout {
  std::vector<int> tokens;            // includes the terminating EOS when sampled
  std::vector<double> step_logprobs;  // one per token, each <= 0
  double mean_logprob = 0.0;          // cached mean of step_logprobs
  Context context;                    // the conditioning this rollout was sampled under
};

// Autoregressive sampling: categorical over softmax logits per step, until
// EOS or max_len tokens. Deterministic given the stream.
Rollout sample(const PolicyParams& params, const Context& ctx, RngStream& rng, int max_len);

// Per-token mean log-likelihood of a fixed token sequence under the policy.
double mean_log_likelihood(const PolicyParams& params, const Context& ctx,
                           const std::vector<int>& tokens);

using Gradient = std::vector<double>;  // same shape as PolicyParams::w

Gradient zero_gradient(const PolicySpec& spec);

// Accumulates advantage * d(log pi(tokens | ctx))/dW into grad.
void accumulate_score_gradient(const PolicyParams& params, const Context& ctx,
                               const std::vector<int>& tokens, double advantage, Gradient& grad);

Gradient score_gradient(const PolicyParams& params, const Context& ctx,
                        const std::vector<int>& tokens, double advantage);

// Gradient-ascent step with optional global-norm clipping (clip <= 0 off).
// Non-finite values in the gradient or the updated weights raise
// NumericalError.
void apply_update(PolicyParams& params, const Gradient& grad, double lr, double clip);

// Text tensor snapshot with a shape header; round-trips bit-exactly.
void save_params(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_params(const std::filesystem::path& path);

// Shared helpers for anything that needs per-step distributions (sampling,
// scoring, the exhaustive enumeration in tests).
std::vector<double> context_vector(const PolicySpec& spec, const Context& ctx, int prev_token);
std::vector<double> step_probabilities(const PolicyParams& params, const std::vector<double>& x);

}  // namespace arena

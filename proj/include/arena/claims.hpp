#pragma once

#include <optional>
#include <span>
#include <vector>

#include "arena/vocab.hpp"

namespace arena {

enum class Polarity { positive, negative };

// A parsed claim: normalized content tokens plus the raw emitted sequence
// they came from. Normalization is idempotent, so re-parsing a claim's own
// tokens is a no-op.
struct Claim {
  std::vector<int> tokens;         // nonempty, content tokens only
  Polarity polarity = Polarity::positive;
  std::vector<int> source_tokens;  // raw sequence before parsing
};

// Canonicalize token ids and drop structural tokens. Idempotent.
std::vector<int> normalize_tokens(const Vocabulary& vocab, std::span<const int> tokens);

// Extract the span between the first claim-open delimiter and the next
// claim-close delimiter, normalized. Missing delimiters or an empty span
// mean the output is unparseable.
std::optional<Claim> parse_claim(const Vocabulary& vocab, const std::vector<int>& output_sequence);

enum class Decision { yes, no, undecided };

// The decision is the final token of the rollout (one trailing EOS
// ignored). Anything but the reserved YES/NO tokens is undecided.
Decision extract_decision(const Vocabulary& vocab, const std::vector<int>& rollout_tokens);

// Token-level Levenshtein distance with unit costs, divided by the longer
// length. Both sequences must be nonempty; result is in [0, 1].
double edit_distance_normalized(std::span<const int> a, std::span<const int> b);

struct StealthParams {
  double alpha = 5.0;
  double lambda_stealth = 0.2;
  void validate() const;  // alpha > 0, lambda_stealth >= 0
};

// exp(-alpha * d) over the normalized distance between the two claims'
// token sequences; in (0, 1], decreasing in d.
double stealth_reward(const Claim& c_plus, const Claim& c_minus, const StealthParams& params);

}  // namespace arena

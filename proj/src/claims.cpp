#include "arena/claims.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arena/util.hpp"

namespace arena {

std::vector<int> normalize_tokens(const Vocabulary& vocab, std::span<const int> tokens) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int t : tokens) {
    if (!vocab.in_range(t)) throw std::out_of_range("token id out of range: " + std::to_string(t));
    const int c = vocab.canonical(t);
    if (vocab.is_content(c)) out.push_back(c);
  }
  return out;
}

std::optional<Claim> parse_claim(const Vocabulary& vocab, const std::vector<int>& output_sequence) {
  auto open = std::find(output_sequence.begin(), output_sequence.end(), Vocabulary::clm);
  if (open == output_sequence.end()) return std::nullopt;
  auto close = std::find(open + 1, output_sequence.end(), Vocabulary::eclm);
  if (close == output_sequence.end()) return std::nullopt;

  Claim claim;
  claim.tokens = normalize_tokens(vocab, std::span<const int>(&*(open + 1), static_cast<std::size_t>(close - open - 1)));
  if (claim.tokens.empty()) return std::nullopt;  // empty span is not a claim
  claim.source_tokens = output_sequence;
  return claim;
}

Decision extract_decision(const Vocabulary& vocab, const std::vector<int>& rollout_tokens) {
  std::size_t n = rollout_tokens.size();
  if (n > 0 && rollout_tokens[n - 1] == Vocabulary::eos) --n;  // trailing end marker
  if (n == 0) return Decision::undecided;
  const int last = rollout_tokens[n - 1];
  if (!vocab.in_range(last)) throw std::out_of_range("token id out of range: " + std::to_string(last));
  if (last == Vocabulary::yes) return Decision::yes;
  if (last == Vocabulary::no) return Decision::no;
  return Decision::undecided;
}

double edit_distance_normalized(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("edit distance requires nonempty sequences");

  // Two-row Levenshtein with unit costs.
  const std::size_t n = b.size();
  std::vector<int> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  const double dist = static_cast<double>(prev[n]);
  return dist / static_cast<double>(std::max(a.size(), b.size()));
}

void StealthParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("reward.alpha must be > 0");
  if (!(lambda_stealth >= 0.0)) throw ConfigError("reward.lambda_stealth must be >= 0");
}

double stealth_reward(const Claim& c_plus, const Claim& c_minus, const StealthParams& params) {
  params.validate();
  const double d = edit_distance_normalized(c_plus.tokens, c_minus.tokens);
  return std::exp(-params.alpha * d);
}

}  // namespace arena

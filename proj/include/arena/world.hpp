#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "arena/vocab.hpp"

namespace arena {

struct Claim;

// Synthetic scene sampler. A scene is a small set of (object, attribute,
// value) facts; its feature vector is the concatenated one-hot encoding the
// policies condition on.
struct WorldConfig {
  int n_objects = 4;
  int n_attributes = 4;
  int n_values = 4;
  int facts_per_scene = 3;
  std::uint64_t seed = 1;

  int feature_dim() const { return n_objects * n_attributes * n_values; }
  Vocabulary vocabulary() const;
  void validate() const;  // throws ConfigError
};

struct Fact {
  int object = 0;
  int attribute = 0;
  int value = 0;
  auto operator<=>(const Fact&) const = default;
};

struct Scene {
  std::uint64_t episode_index = 0;
  std::vector<Fact> facts;         // sorted; (object, attribute) cells unique
  std::vector<double> features;    // one-hot block per fact, size feature_dim()
};

// One-hot encoding of a fact set; generate_scene uses this and tests
// re-encode with it to pin the layout.
std::vector<double> encode_features(const WorldConfig& config, const std::vector<Fact>& facts);

// Pure function of (config.seed, episode_index): uniform over distinct
// (object, attribute) cells, then a uniform value per chosen cell.
Scene generate_scene(const WorldConfig& config, std::uint64_t episode_index);

enum class Truth { is_true, is_false, unparseable };

// Evaluation-only oracle: does the claim state a fact of this scene?
// Never consulted during training.
Truth claim_truth(const WorldConfig& config, const Scene& scene, const Claim& claim);

}  // namespace arena

#include "arena/world.hpp"

#include <algorithm>
#include <numeric>

#include "arena/claims.hpp"
#include "arena/rng.hpp"
#include "arena/util.hpp"

namespace arena {

namespace {
constexpr std::uint64_t kSceneStreamTag = 0x5ce7e5a317;
}

Vocabulary WorldConfig::vocabulary() const {
  return Vocabulary{n_objects, n_attributes, n_values};
}

void WorldConfig::validate() const {
  if (n_objects < 1) throw ConfigError("world.n_objects must be >= 1");
  if (n_attributes < 1) throw ConfigError("world.n_attributes must be >= 1");
  if (n_values < 1) throw ConfigError("world.n_values must be >= 1");
  if (facts_per_scene < 1) throw ConfigError("world.facts_per_scene must be >= 1");
  if (facts_per_scene > n_objects * n_attributes) {
    throw ConfigError("world.facts_per_scene exceeds the number of (object, attribute) cells");
  }
}

std::vector<double> encode_features(const WorldConfig& config, const std::vector<Fact>& facts) {
  std::vector<double> features(static_cast<std::size_t>(config.feature_dim()), 0.0);
  for (const Fact& f : facts) {
    const int idx = (f.object * config.n_attributes + f.attribute) * config.n_values + f.value;
    features[static_cast<std::size_t>(idx)] = 1.0;
  }
  return features;
}

Scene generate_scene(const WorldConfig& config, std::uint64_t episode_index) {
  config.validate();
  RngStream rng(mix_seed(mix_seed(config.seed, kSceneStreamTag), episode_index));

  // Partial Fisher-Yates over all (object, attribute) cells keeps the cell
  // subset uniform, which the distinctness test's collision count relies on.
  const int n_cells = config.n_objects * config.n_attributes;
  std::vector<int> cells(static_cast<std::size_t>(n_cells));
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 0; i < config.facts_per_scene; ++i) {
    const std::size_t j = i + rng.next_index(static_cast<std::size_t>(n_cells - i));
    std::swap(cells[static_cast<std::size_t>(i)], cells[j]);
  }

  Scene scene;
  scene.episode_index = episode_index;
  scene.facts.reserve(static_cast<std::size_t>(config.facts_per_scene));
  for (int i = 0; i < config.facts_per_scene; ++i) {
    const int cell = cells[static_cast<std::size_t>(i)];
    Fact f;
    f.object = cell / config.n_attributes;
    f.attribute = cell % config.n_attributes;
    f.value = static_cast<int>(rng.next_index(static_cast<std::size_t>(config.n_values)));
    scene.facts.push_back(f);
  }
  std::sort(scene.facts.begin(), scene.facts.end());
  scene.features = encode_features(config, scene.facts);
  return scene;
}

Truth claim_truth(const WorldConfig& config, const Scene& scene, const Claim& claim) {
  const Vocabulary vocab = config.vocabulary();
  // A checkable claim is exactly one (object, attribute, value) triple.
  if (claim.tokens.size() != 3) return Truth::unparseable;
  const int ot = claim.tokens[0], at = claim.tokens[1], vt = claim.tokens[2];
  if (!vocab.in_range(ot) || !vocab.in_range(at) || !vocab.in_range(vt)) return Truth::unparseable;
  if (!vocab.is_object(ot) || !vocab.is_attribute(at) || !vocab.is_value(vt)) {
    return Truth::unparseable;
  }
  const Fact f{vocab.object_id(ot), vocab.attribute_id(at), vocab.value_id(vt)};
  const bool present = std::binary_search(scene.facts.begin(), scene.facts.end(), f);
  return present ? Truth::is_true : Truth::is_false;
}

}  // namespace arena

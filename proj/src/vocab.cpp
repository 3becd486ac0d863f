#include "arena/vocab.hpp"

#include <stdexcept>

#include "arena/util.hpp"

namespace arena {

std::string Vocabulary::token_name(int t) const {
  if (!in_range(t)) throw std::out_of_range("token id out of range: " + std::to_string(t));
  switch (t) {
    case eos: return "eos";
    case clm: return "clm";
    case eclm: return "eclm";
    case evid: return "evid";
    case yes: return "yes";
    case no: return "no";
    default: break;
  }
  if (is_object(t)) return "obj" + std::to_string(object_id(t));
  if (is_attribute(t)) return "att" + std::to_string(attribute_id(t));
  return "val" + std::to_string(value_id(t));
}

nlohmann::ordered_json Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["n_objects"] = n_objects;
  j["n_attributes"] = n_attributes;
  j["n_values"] = n_values;
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (int t = 0; t < size(); ++t) {
    table.push_back({{"id", t}, {"name", token_name(t)}});
  }
  j["tokens"] = table;
  return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.n_objects = j.at("n_objects").get<int>();
  v.n_attributes = j.at("n_attributes").get<int>();
  v.n_values = j.at("n_values").get<int>();
  if (v.n_objects < 1 || v.n_attributes < 1 || v.n_values < 1) {
    throw ConfigError("vocabulary table has non-positive dimensions");
  }
  return v;
}

}  // namespace arena

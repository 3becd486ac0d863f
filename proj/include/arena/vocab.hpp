#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace arena {

// Shared token table for both policies. Layout: six reserved structural
// tokens first, then object, attribute, and value tokens in contiguous
// ranges. Token ids are the only currency; there is no text tokenizer.
struct Vocabulary {
  int n_objects = 0;
  int n_attributes = 0;
  int n_values = 0;

  static constexpr int eos = 0;   // ends generation
  static constexpr int clm = 1;   // opens a claim span
  static constexpr int eclm = 2;  // closes a claim span
  static constexpr int evid = 3;  // opens an evidence span (reward-neutral)
  static constexpr int yes = 4;
  static constexpr int no = 5;
  static constexpr int n_reserved = 6;

  int size() const { return n_reserved + n_objects + n_attributes + n_values; }

  int object_token(int i) const { return n_reserved + i; }
  int attribute_token(int i) const { return n_reserved + n_objects + i; }
  int value_token(int i) const { return n_reserved + n_objects + n_attributes + i; }

  bool in_range(int t) const { return t >= 0 && t < size(); }
  bool is_reserved(int t) const { return t >= 0 && t < n_reserved; }
  bool is_content(int t) const { return t >= n_reserved && t < size(); }
  bool is_object(int t) const { return t >= object_token(0) && t < attribute_token(0); }
  bool is_attribute(int t) const { return t >= attribute_token(0) && t < value_token(0); }
  bool is_value(int t) const { return t >= value_token(0) && t < size(); }

  int object_id(int t) const { return t - object_token(0); }
  int attribute_id(int t) const { return t - attribute_token(0); }
  int value_id(int t) const { return t - value_token(0); }

  // Canonical id map. Content tokens are their own canonical form at this
  // scale; the hook exists so normalization stays a real (idempotent) map.
  int canonical(int t) const { return t; }

  std::string token_name(int t) const;

  nlohmann::ordered_json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
};

}  // namespace arena

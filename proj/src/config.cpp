#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "arena/harness.hpp"
#include "arena/util.hpp"

namespace arena {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

long long parse_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": expected an integer, got \"" + value + "\"");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": expected a number, got \"" + value + "\"");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' || value[0] == '-') {
    throw ConfigError("config key " + key + ": expected an unsigned integer, got \"" + value +
                      "\"");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key " + key + ": expected true/false, got \"" + value + "\"");
}

}  // namespace

void set_config_key(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "world.n_objects") {
    c.world.n_objects = static_cast<int>(parse_int(key, value));
  } else if (key == "world.n_attributes") {
    c.world.n_attributes = static_cast<int>(parse_int(key, value));
  } else if (key == "world.n_values") {
    c.world.n_values = static_cast<int>(parse_int(key, value));
  } else if (key == "world.facts_per_scene") {
    c.world.facts_per_scene = static_cast<int>(parse_int(key, value));
  } else if (key == "world.seed") {
    // -1 keeps the derive-from-train-seed sentinel.
    c.world.seed = (value == "-1") ? TrainConfig::derive_world_seed : parse_u64(key, value);
  } else if (key == "policy.max_len") {
    c.max_len = static_cast<int>(parse_int(key, value));
  } else if (key == "policy.init_scale") {
    c.init_scale = parse_double(key, value);
  } else if (key == "policy.grammar_bias") {
    c.grammar_bias = parse_double(key, value);
  } else if (key == "reward.lambda_stealth") {
    c.reward.lambda_stealth = parse_double(key, value);
  } else if (key == "reward.alpha") {
    c.reward.alpha = parse_double(key, value);
  } else if (key == "reward.r_min") {
    c.reward.r_min = parse_double(key, value);
  } else if (key == "reward.gamma_soft") {
    c.reward.gamma_soft = parse_double(key, value);
  } else if (key == "reward.outcome_only") {
    c.reward.outcome_only = parse_bool(key, value);
  } else if (key == "reward.max_clip") {
    c.reward.max_clip = parse_double(key, value);
  } else if (key == "reward.gamma_mode") {
    if (value == "blend_to_binary") {
      c.reward.gamma_mode = RewardConfig::GammaMode::blend_to_binary;
    } else if (value == "blend_to_calibrated") {
      c.reward.gamma_mode = RewardConfig::GammaMode::blend_to_calibrated;
    } else {
      throw ConfigError(
          "config key reward.gamma_mode: expected blend_to_binary or "
          "blend_to_calibrated, got \"" +
          value + "\"");
    }
  } else if (key == "grpo.epsilon") {
    c.epsilon = parse_double(key, value);
  } else if (key == "train.k") {
    c.k = static_cast<int>(parse_int(key, value));
  } else if (key == "train.f_c") {
    c.f_c = static_cast<int>(parse_int(key, value));
  } else if (key == "train.steps") {
    c.steps = static_cast<int>(parse_int(key, value));
  } else if (key == "train.lr_solver") {
    c.lr_solver = parse_double(key, value);
  } else if (key == "train.lr_challenger") {
    c.lr_challenger = parse_double(key, value);
  } else if (key == "train.grad_clip") {
    c.grad_clip = parse_double(key, value);
  } else if (key == "train.seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "train.metrics_interval") {
    c.metrics_interval = static_cast<int>(parse_int(key, value));
  } else if (key == "train.negative_mix") {
    c.negative_mix = parse_double(key, value);
  } else if (key == "train.dump_episodes") {
    c.dump_episodes = parse_bool(key, value);
  } else if (key == "train.threads") {
    c.threads = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    set_config_key(config, key, value);
  }
  config.validate();
  return config;
}

TrainConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string save_config_text(const TrainConfig& c) {
  std::ostringstream out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  put("world.n_objects", std::to_string(c.world.n_objects));
  put("world.n_attributes", std::to_string(c.world.n_attributes));
  put("world.n_values", std::to_string(c.world.n_values));
  put("world.facts_per_scene", std::to_string(c.world.facts_per_scene));
  put("world.seed",
      c.world.seed == TrainConfig::derive_world_seed ? "-1" : std::to_string(c.world.seed));
  put("policy.max_len", std::to_string(c.max_len));
  put("policy.init_scale", format_double(c.init_scale));
  put("policy.grammar_bias", format_double(c.grammar_bias));
  put("reward.lambda_stealth", format_double(c.reward.lambda_stealth));
  put("reward.alpha", format_double(c.reward.alpha));
  put("reward.r_min", format_double(c.reward.r_min));
  put("reward.gamma_soft", format_double(c.reward.gamma_soft));
  put("reward.outcome_only", c.reward.outcome_only ? "true" : "false");
  put("reward.max_clip", format_double(c.reward.max_clip));
  put("reward.gamma_mode", c.reward.gamma_mode == RewardConfig::GammaMode::blend_to_binary
                               ? "blend_to_binary"
                               : "blend_to_calibrated");
  put("grpo.epsilon", format_double(c.epsilon));
  put("train.k", std::to_string(c.k));
  put("train.f_c", std::to_string(c.f_c));
  put("train.steps", std::to_string(c.steps));
  put("train.lr_solver", format_double(c.lr_solver));
  put("train.lr_challenger", format_double(c.lr_challenger));
  put("train.grad_clip", format_double(c.grad_clip));
  put("train.seed", std::to_string(c.seed));
  put("train.metrics_interval", std::to_string(c.metrics_interval));
  put("train.negative_mix", format_double(c.negative_mix));
  put("train.dump_episodes", c.dump_episodes ? "true" : "false");
  put("train.threads", std::to_string(c.threads));
  return out.str();
}

std::uint64_t config_hash(const TrainConfig& config) { return fnv1a(save_config_text(config)); }

SweepSpec parse_sweep_spec_text(const std::string& text) {
  SweepSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("sweep spec line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "axis") {
      // axis = <config key> : v1, v2, ...
      auto colon = value.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("sweep spec line " + std::to_string(line_no) +
                          ": axis needs \"<key> : v1, v2, ...\"");
      }
      SweepAxis axis;
      axis.key = trim(value.substr(0, colon));
      std::istringstream vals(value.substr(colon + 1));
      std::string tok;
      while (std::getline(vals, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) axis.values.push_back(tok);
      }
      if (axis.key.empty() || axis.values.empty()) {
        throw ConfigError("sweep spec line " + std::to_string(line_no) +
                          ": axis needs a key and at least one value");
      }
      // Reject unknown keys and unparsable values up front.
      TrainConfig probe;
      for (const auto& v : axis.values) set_config_key(probe, axis.key, v);
      spec.axes.push_back(std::move(axis));
    } else if (key == "seeds") {
      std::istringstream vals(value);
      std::string tok;
      while (std::getline(vals, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) spec.seeds.push_back(parse_u64("seeds", tok));
      }
      if (spec.seeds.empty()) {
        throw ConfigError("sweep spec line " + std::to_string(line_no) + ": empty seeds list");
      }
    } else if (key == "steps") {
      spec.steps_override = static_cast<int>(parse_int("steps", value));
      if (spec.steps_override < 1) {
        throw ConfigError("sweep spec: steps must be >= 1");
      }
    } else if (key == "budget") {
      spec.budget = static_cast<int>(parse_int("budget", value));
      if (spec.budget < 1) {
        throw ConfigError("sweep spec: budget must be >= 1");
      }
    } else {
      throw ConfigError("sweep spec line " + std::to_string(line_no) + ": unknown key \"" + key +
                        "\" (expected axis, seeds, steps, or budget)");
    }
  }
  if (spec.axes.empty()) {
    throw ConfigError("sweep spec declares no axes");
  }
  return spec;
}

SweepSpec load_sweep_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep spec: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep_spec_text(buf.str());
}

}  // namespace arena

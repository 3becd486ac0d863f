#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace arena {

// Bad user input: malformed config, unknown key, impossible grid.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite parameters or gradients mid-run. Maps to exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a, used for config snapshot hashes in run manifests.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Canonical double formatting: %.17g round-trips exactly and keeps
// serialized configs byte-stable across runs.
std::string format_double(double v);

}  // namespace arena

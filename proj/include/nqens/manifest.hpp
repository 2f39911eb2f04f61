#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nqens {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

// Provenance record emitted (to stderr) by every CLI command: the resolved
// configuration, input digests, tool version, seed and wall-clock duration.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::optional<std::uint64_t> seed;
  double duration_seconds = 0.0;

  void add_input(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace nqens

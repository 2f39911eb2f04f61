#include "nqens/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "nqens/errors.hpp"

namespace nqens {

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for digesting");
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, file_digest(path));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  nlohmann::json ins = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) {
    ins.push_back({{"path", path}, {"fnv1a64", digest}});
  }
  j["inputs"] = std::move(ins);
  j["version"] = kToolVersion;
  j["seed"] = seed.has_value() ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["duration_seconds"] = duration_seconds;
  return j;
}

}  // namespace nqens

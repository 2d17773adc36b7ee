#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace negobench {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  nlohmann::json resolved_config;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // (path, fnv64 hex)
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  long peak_rss_kb = 0;
};

std::string file_hash_hex(const std::string& path);

// Written via temp file + rename so readers never see a partial manifest.
void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace negobench

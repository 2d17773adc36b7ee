#include "negobench/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "negobench/errors.hpp"
#include "negobench/rng.hpp"

namespace negobench {

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot hash missing file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  char out[17];
  std::snprintf(out, sizeof out, "%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return std::string(out);
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command"] = manifest.command;
  j["resolved_config"] = manifest.resolved_config;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [p, h] : manifest.input_hashes)
    inputs.push_back(nlohmann::json{{"path", p}, {"fnv64", h}});
  j["inputs"] = inputs;
  j["outputs"] = manifest.outputs;
  j["telemetry"] = nlohmann::json{{"wall_seconds", manifest.wall_seconds},
                                  {"peak_rss_kb", manifest.peak_rss_kb}};
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write manifest: " + tmp);
    out << j.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ValidationError("cannot finalize manifest: " + path);
}

}  // namespace negobench

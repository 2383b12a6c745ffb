#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <openssl/evp.h>

#include "shockstab/config.hpp"
#include "shockstab/core.hpp"
#include "shockstab/scenario.hpp"

namespace shockstab {

inline constexpr const char* kVersion = "1.0.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  os << s;
}

/// Writes every artifact, report.json and manifest.json into dir. Returns the manifest.
inline json write_run(const std::filesystem::path& dir, const std::string& command, const std::string& config_text,
                      const json& config, const RunOverrides& o, const RunOutput& r, double runtime_s) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    files.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  };
  for (const auto& a : r.artifacts) emit(a.name, a.content);
  emit("report.json", r.report.dump(2) + "\n");
  json ov = json::object();
  if (o.seed) ov["seed"] = *o.seed;
  if (o.ablate_diffusion_wave) ov["ablate_diffusion_wave"] = true;
  if (o.fidelity) ov["fidelity"] = *o.fidelity;
  if (o.transverse) ov["transverse"] = {o.transverse->first, o.transverse->second};
  json m = {{"command", command},
            {"config_text", config_text},
            {"config", config},
            {"overrides", ov},
            {"versions", {{"shockstab", kVersion}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}},
            {"runtime_s", runtime_s},
            {"files", files}};
  for (const char* key : {"steps", "initial_mass_defect", "mass_iterations"})
    if (r.report.contains(key)) m["audit"][key] = r.report[key];
  if (r.report.contains("series") && r.report["series"].is_array() && !r.report["series"].empty()) {
    double audit = 0.0;
    for (const auto& s : r.report["series"]) audit = std::max(audit, s.value("audit", 0.0));
    m["audit"]["conservation_max"] = audit;
  }
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

/// Recomputes the hashes listed in dir/manifest.json.
inline json verify_run(const std::filesystem::path& dir) {
  const json m = json::parse(read_text_file(dir / "manifest.json"));
  json files = json::array();
  bool ok = true;
  for (const auto& f : m.at("files")) {
    const std::string path = f.at("path");
    bool match = false;
    if (std::filesystem::exists(dir / path)) match = sha256_hex(read_text_file(dir / path)) == f.at("sha256");
    ok = ok && match;
    files.push_back({{"path", path}, {"hash_ok", match}});
  }
  return {{"command", m.value("command", "")}, {"files", files}, {"all_hashes_ok", ok}};
}

}  // namespace shockstab

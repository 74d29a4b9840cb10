#pragma once

// On-disk campaigns: manifest.json plus one CSV per trace, every file hashed.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "homodyne/simulate.hpp"

namespace homodyne {

inline constexpr const char* tool_version = "1.0.0";
inline constexpr const char* manifest_name = "manifest.json";

struct ManifestFile {
  std::string path;  // relative to the campaign directory
  std::string role;  // step, danl, dark, s21, transimpedance, noise_budget
  std::string sha256;
};

struct RunManifest {
  std::vector<std::string> arguments;  // command line, output directory excluded
  nlohmann::json config;               // model + sweep snapshot
  std::uint64_t seed = 0;
  std::string version = tool_version;
  std::string model_hash;
  std::vector<ManifestFile> files;
};

// Writes all traces and the manifest; returns the manifest written.
RunManifest write_campaign(const std::filesystem::path& dir, const CampaignResult& campaign,
                           const std::vector<std::string>& arguments);

// Throws invalid_argument when there is no manifest, integrity_error when a listed
// file is missing or its hash differs.
CampaignResult read_campaign(const std::filesystem::path& dir);

}  // namespace homodyne

#include "homodyne/campaign.hpp"

#include <cstdio>
#include <sstream>

#include "homodyne/errors.hpp"
#include "homodyne/io.hpp"

namespace homodyne {

using nlohmann::json;

namespace {

std::string step_file(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%02zu.csv", index);
  return buf;
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream ss;
  w(ss);
  return ss.str();
}

json manifest_to_json(const RunManifest& m, const json& steps) {
  json j;
  j["version"] = m.version;
  j["arguments"] = m.arguments;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["model_hash"] = m.model_hash;
  j["steps"] = steps;
  json files = json::array();
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"role", f.role}, {"sha256", f.sha256}});
  j["files"] = files;
  return j;
}

}  // namespace

RunManifest write_campaign(const std::filesystem::path& dir, const CampaignResult& campaign,
                           const std::vector<std::string>& arguments) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorCode::io_error, "cannot create campaign directory " + dir.string());

  RunManifest manifest;
  manifest.arguments = arguments;
  manifest.config = {{"model", model_to_json(campaign.model)}, {"sweep", sweep_to_json(campaign.sweep)}};
  manifest.seed = campaign.seed;
  manifest.model_hash = model_hash(campaign.model);

  auto emit = [&](const std::string& name, const std::string& role, const std::string& bytes) {
    write_file(dir / name, bytes);
    manifest.files.push_back({name, role, sha256_hex(bytes)});
  };

  json steps = json::array();
  for (std::size_t k = 0; k < campaign.steps.size(); ++k) {
    const auto& s = campaign.steps[k];
    const auto name = step_file(k);
    emit(name, "step", render([&](std::ostream& o) { write_trace_csv(o, s.trace); }));
    steps.push_back({{"file", name},
                     {"lo_power_dbm", s.lo_power_dbm},
                     {"qe_scale_bottom", s.qe_scale_bottom},
                     {"i_top_a", s.currents.I_top},
                     {"i_bottom_a", s.currents.I_bottom}});
  }
  emit("danl.csv", "danl", render([&](std::ostream& o) { write_trace_csv(o, campaign.danl); }));
  emit("dark.csv", "dark", render([&](std::ostream& o) { write_trace_csv(o, campaign.dark); }));
  emit("s21.csv", "s21", render([&](std::ostream& o) { write_s21_csv(o, campaign.s21); }));

  const auto amp = analyze_amplifier(campaign.model);
  const auto Z = amp.transimpedance(campaign.danl.freqs);
  emit("transimpedance.csv", "transimpedance", render([&](std::ostream& o) { write_complex_csv(o, Z); }));
  const auto budget = noise_budget(campaign.model, amp.bias, amp.hpi);
  const auto table_freqs = linspace(campaign.danl.freqs.front(), campaign.danl.freqs.back(), 11);
  const auto rows = noise_budget_table(budget, table_freqs);
  emit("noise_budget.csv", "noise_budget", render([&](std::ostream& o) { write_noise_budget_csv(o, rows); }));

  write_file(dir / manifest_name, manifest_to_json(manifest, steps).dump(2) + "\n");
  return manifest;
}

CampaignResult read_campaign(const std::filesystem::path& dir) {
  const auto manifest_path = dir / manifest_name;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(manifest_path, ec))
    throw Error(ErrorCode::invalid_argument, "no " + std::string(manifest_name) + " in " + dir.string());

  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::integrity_error, std::string("manifest is not valid JSON: ") + e.what());
  }

  try {
    for (const auto& f : j.at("files")) {
      const auto rel = f.at("path").get<std::string>();
      const auto path = dir / rel;
      if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorCode::integrity_error, "campaign file missing: " + rel);
      if (sha256_hex(read_file(path)) != f.at("sha256").get<std::string>())
        throw Error(ErrorCode::integrity_error, "hash mismatch for " + rel);
    }

    CampaignResult c;
    c.model = model_from_json(j.at("config").at("model"));
    c.sweep = sweep_from_json(j.at("config").at("sweep"));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.model_hash = j.at("model_hash").get<std::string>();
    if (c.model_hash != model_hash(c.model))
      throw Error(ErrorCode::integrity_error, "model snapshot does not match its recorded hash");
    for (const auto& s : j.at("steps")) {
      CampaignStep step;
      step.lo_power_dbm = s.at("lo_power_dbm").get<double>();
      step.qe_scale_bottom = s.at("qe_scale_bottom").get<double>();
      step.currents = {s.at("i_top_a").get<double>(), s.at("i_bottom_a").get<double>()};
      step.trace = read_trace_csv(dir / s.at("file").get<std::string>());
      c.steps.push_back(std::move(step));
    }
    c.danl = read_trace_csv(dir / "danl.csv");
    c.dark = read_trace_csv(dir / "dark.csv");
    c.s21 = read_s21_csv(dir / "s21.csv");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::integrity_error, std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace homodyne

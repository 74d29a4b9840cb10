#pragma once

// File formats: YAML detector/run configs, JSON snapshots, CSV traces.
//
// Config schema (every key optional, defaults are the built-in "paper" preset):
//
//   name: paper
//   notes: free text
//   constants:  { temperature_k }
//   hbt:        { f_t_hz, beta, i_c_opt_a, v_be_v, r_b_ohm, v_breakdown_v,
//                 c_ratio, c_mu_fraction }
//   tia:        { r_f_ohm, r_c_ohm, r_e_ohm, v_cc1_v, v_cc2_v }
//   input:      { c_pd_each_f, c_interconnect_f, c_amp_in_f }
//   frontend:   { coupler_loss_db, split_t, split_r, responsivity_top_a_w,
//                 responsivity_bottom_a_w, qe_scale_bottom,
//                 top_arm: transmission|reflection, rin_dbc_hz }
//   esa:        { danl_dbm_hz }
//   sweep:      { power_start_dbm, power_stop_dbm, n_steps, rbw_hz, f_lo_hz, f_hi_hz,
//                 n_points, balance, mode: analytic|monte_carlo, mc_averages,
//                 cable_loss_db_per_ghz }
//
// Trace CSV: optional "# key=value" metadata lines (rbw_hz, stage), then the header
// `freq_hz,value,unit` and one row per bin.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "homodyne/model.hpp"
#include "homodyne/noise.hpp"
#include "homodyne/simulate.hpp"
#include "homodyne/trace.hpp"

namespace homodyne {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

struct RunConfig {
  DetectorModel model;
  LOSweep sweep;
};

RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_yaml(const RunConfig& config);
std::string model_to_yaml(const DetectorModel& model);

nlohmann::json model_to_json(const DetectorModel& model);
DetectorModel model_from_json(const nlohmann::json& j);
nlohmann::json sweep_to_json(const LOSweep& sweep);
LOSweep sweep_from_json(const nlohmann::json& j);

std::string model_hash(const DetectorModel& model);

void write_trace_csv(std::ostream& out, const SpectrumTrace& trace);
SpectrumTrace read_trace_csv(std::istream& in);
SpectrumTrace read_trace_csv(const std::filesystem::path& path);

void write_s21_csv(std::ostream& out, const S21Trace& s21);
S21Trace read_s21_csv(std::istream& in);
S21Trace read_s21_csv(const std::filesystem::path& path);

// `freq_hz,re_ohm,im_ohm`
void write_complex_csv(std::ostream& out, const ComplexSpectrum& spectrum);

// `freq_hz,term,value_a2_per_hz`
void write_noise_budget_csv(std::ostream& out, std::span<const NoiseTermRow> rows);

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace homodyne

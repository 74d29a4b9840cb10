#include "homodyne/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "homodyne/campaign.hpp"
#include "homodyne/design.hpp"
#include "homodyne/errors.hpp"
#include "homodyne/fit.hpp"
#include "homodyne/io.hpp"
#include "homodyne/report.hpp"
#include "homodyne/simulate.hpp"

#ifndef HOMODYNE_DEFAULT_PRESET_DIR
#define HOMODYNE_DEFAULT_PRESET_DIR "presets"
#endif

namespace homodyne::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path preset_dir() {
  if (const char* env = std::getenv(preset_dir_env); env && *env) return env;
  return HOMODYNE_DEFAULT_PRESET_DIR;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names = builtin_preset_names();
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(preset_dir(), ec)) {
    if (entry.path().extension() != ".yaml") continue;
    const auto stem = entry.path().stem().string();
    if (std::find(names.begin(), names.end(), stem) == names.end()) names.push_back(stem);
  }
  std::sort(names.begin(), names.end());
  return names;
}

RunConfig load_preset(const std::string& name) {
  const auto file = preset_dir() / (name + ".yaml");
  std::error_code ec;
  if (fs::is_regular_file(file, ec)) return load_config(file);
  if (auto m = builtin_preset(name)) return RunConfig{*m, LOSweep{}};
  throw Error(ErrorCode::invalid_argument, "unknown preset '" + name + "'");
}

RunConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    throw Error(ErrorCode::invalid_argument, "give either --config or --preset, not both");
  if (!config_path.empty()) return load_config(config_path);
  return load_preset(preset.empty() ? "paper" : preset);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::integrity_error: return exit_io;
    case ErrorCode::no_convergence: return exit_no_convergence;
    default: return exit_usage;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != cell.size()) throw Error(ErrorCode::invalid_argument, "'" + cell + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "empty number list");
  return out;
}

BandwidthShape parse_shape(const std::string& s) {
  if (s == "printed") return BandwidthShape::printed;
  if (s == "butterworth2") return BandwidthShape::butterworth2;
  throw Error(ErrorCode::invalid_argument, "--shape must be printed or butterworth2");
}

std::vector<std::pair<double, double>> read_points_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::pair<double, double>> points;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "i_total_a,variance")
        throw Error(ErrorCode::parse_error, "points CSV header must be 'i_total_a,variance'");
      header = true;
      continue;
    }
    const auto v = parse_list(line);
    if (v.size() != 2) throw Error(ErrorCode::parse_error, "points CSV rows need 2 columns");
    points.emplace_back(v[0], v[1]);
  }
  return points;
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

int fit_exit(bool converged) { return converged ? exit_ok : exit_no_convergence; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homodyne detector toolkit: simulate, fit, design and report"};
  app.name("homodyne");
  app.require_subcommand(1);
  std::function<int()> action;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run an LO power sweep and write a campaign directory");
  std::string sim_config, sim_preset, sim_out, sim_mode;
  std::uint64_t sim_seed = 1;
  sim->add_option("--config", sim_config, "YAML run configuration");
  sim->add_option("--preset", sim_preset, "Preset name (default: paper)");
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output campaign directory")->required();
  sim->add_option("--mode", sim_mode, "Override trace mode: analytic or monte_carlo");
  sim->callback([&] {
    action = [&] {
      auto cfg = resolve_config(sim_config, sim_preset);
      if (sim_mode == "analytic") cfg.sweep.mode = TraceMode::analytic;
      else if (sim_mode == "monte_carlo") cfg.sweep.mode = TraceMode::monte_carlo;
      else if (!sim_mode.empty()) throw Error(ErrorCode::invalid_argument, "--mode must be analytic or monte_carlo");
      auto campaign = run_lo_sweep(cfg.model, cfg.sweep, sim_seed);
      campaign.model_hash = model_hash(campaign.model);
      std::vector<std::string> recorded;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
          ++i;
          continue;
        }
        if (args[i].rfind("--out=", 0) == 0) continue;
        recorded.push_back(args[i]);
      }
      const auto manifest = write_campaign(sim_out, campaign, recorded);
      out << "wrote " << campaign.steps.size() << " steps and " << manifest.files.size() << " files to " << sim_out
          << "\n";
      return exit_ok;
    };
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a figure of merit from trace files or numbers");
  fit->require_subcommand(1);

  auto* fit_bw = fit->add_subcommand("bandwidth", "Fit the 3 dB bandwidth of a transimpedance power trace");
  std::string bw_trace, bw_s21, bw_shape = "printed";
  fit_bw->add_option("--trace", bw_trace, "Trace CSV (noise-subtracted)")->required();
  fit_bw->add_option("--s21", bw_s21, "S21 CSV to de-embed first");
  fit_bw->add_option("--shape", bw_shape, "printed or butterworth2")->capture_default_str();
  fit_bw->callback([&] {
    action = [&] {
      auto trace = read_trace_csv(fs::path(bw_trace));
      if (!bw_s21.empty()) trace = de_embed(trace, read_s21_csv(fs::path(bw_s21)));
      const auto r = fit_bandwidth(trace, parse_shape(bw_shape));
      print_json(out, {{"kind", "bandwidth"},
                       {"f3db_hz", r.f3db},
                       {"f3db_err_hz", r.f3db_err},
                       {"dc_gain", r.dc_gain},
                       {"in_band", r.in_band},
                       {"fit", fit_result_to_json(r.fit)}});
      return fit_exit(r.fit.converged);
    };
  });

  auto* fit_cl = fit->add_subcommand("clearance", "Fit A/(B + C f^2) + 1 to a clearance ratio trace");
  std::string cl_trace, cl_thresholds = "10,3,1";
  bool cl_fix_c = false;
  fit_cl->add_option("--trace", cl_trace, "Clearance trace CSV (unit ratio)")->required();
  fit_cl->add_flag("--fix-c-zero", cl_fix_c, "Hold C at 0 (two-parameter model)");
  fit_cl->add_option("--thresholds", cl_thresholds, "Comma-separated crossing thresholds in dB")->capture_default_str();
  fit_cl->callback([&] {
    action = [&] {
      ClearanceFitOptions o;
      o.fix_c_zero = cl_fix_c;
      o.thresholds_db = parse_list(cl_thresholds);
      const auto r = fit_clearance(read_trace_csv(fs::path(cl_trace)), o);
      json crossings = json::object();
      for (const auto& [t, f] : r.crossings)
        crossings[format_double(t) + "_db"] = std::isfinite(f) ? json(f) : json(nullptr);
      print_json(out, {{"kind", "clearance"},
                       {"A", r.model.A},
                       {"B", r.model.B},
                       {"C", r.model.C},
                       {"crossings_hz", crossings},
                       {"fit", fit_result_to_json(r.fit)}});
      return fit_exit(r.fit.converged);
    };
  });

  auto* fit_gr = fit->add_subcommand("gradient", "Log-log gradient of variance against photocurrent");
  std::string gr_points;
  fit_gr->add_option("--points", gr_points, "CSV with header i_total_a,variance")->required();
  fit_gr->callback([&] {
    action = [&] {
      const auto pts = read_points_csv(gr_points);
      const auto r = fit_loglog_gradient(pts);
      print_json(out, {{"kind", "gradient"},
                       {"gradient", r.value("gradient")},
                       {"gradient_err", r.error("gradient")},
                       {"fit", fit_result_to_json(r)}});
      return fit_exit(r.converged);
    };
  });

  auto* fit_cm = fit->add_subcommand("cmrr", "CMRR from single-diode and balanced tone powers");
  double cm_single = 0.0, cm_both = 0.0;
  fit_cm->add_option("--single", cm_single, "Tone power with one diode, dBm")->required();
  fit_cm->add_option("--both", cm_both, "Tone power with both diodes, dBm")->required();
  fit_cm->callback([&] {
    action = [&] {
      print_json(out, {{"kind", "cmrr"}, {"cmrr_db", extract_cmrr(cm_single, cm_both)}});
      return exit_ok;
    };
  });

  auto* fit_rs = fit->add_subcommand("responsivity", "Responsivity from summed photocurrent and LO power");
  double rs_current = 0.0, rs_power = 0.0, rs_loss = 4.0;
  fit_rs->add_option("--current", rs_current, "Summed photocurrent, A")->required();
  fit_rs->add_option("--power", rs_power, "Off-chip LO power, W")->required();
  fit_rs->add_option("--coupler-loss-db", rs_loss, "Grating coupler loss, dB")->capture_default_str();
  fit_rs->callback([&] {
    action = [&] {
      print_json(out, {{"kind", "responsivity"}, {"responsivity_a_w", extract_responsivity(rs_current, rs_power, rs_loss)}});
      return exit_ok;
    };
  });

  // design
  auto* design = app.add_subcommand("design", "Design-space helpers");
  design->require_subcommand(1);

  auto* d_rf = design->add_subcommand("rf", "Feedback resistor range from clearance and bandwidth");
  DesignConstraints rf_c;
  double rf_iref = 2e-3;
  std::string rf_csv;
  d_rf->add_option("--min-clearance-db", rf_c.min_clearance_db, "DC clearance target, dB")->capture_default_str();
  d_rf->add_option("--min-bandwidth", rf_c.min_bandwidth, "Bandwidth target, Hz")->capture_default_str();
  d_rf->add_option("--a0fa", rf_c.A0fA, "Gain-bandwidth product A0 fA, Hz")->capture_default_str();
  d_rf->add_option("--c-in", rf_c.C_in, "Total input capacitance, F")->capture_default_str();
  d_rf->add_option("--i-ref", rf_iref, "Reference total photocurrent, A")->capture_default_str();
  d_rf->add_option("--termination-ohm", rf_c.termination_ohm, "Include an output termination floor")->capture_default_str();
  d_rf->add_option("--csv", rf_csv, "Also write the result as CSV");
  d_rf->callback([&] {
    action = [&] {
      const auto r = select_feedback_resistor(rf_c, rf_iref);
      if (r.feasible) out << "feasible: R_F in [" << format_double(r.r_min) << ", " << format_double(r.r_max) << "] ohm\n";
      else out << "infeasible: " << r.binding << "\n";
      out << "  r_min_ohm  " << format_double(r.r_min) << "\n  r_max_ohm  " << format_double(r.r_max) << "\n";
      if (!rf_csv.empty())
        write_file(rf_csv, "feasible,r_min_ohm,r_max_ohm,binding\n" + std::string(r.feasible ? "true" : "false") +
                               "," + format_double(r.r_min) + "," + format_double(r.r_max) + "," + r.binding + "\n");
      return exit_ok;
    };
  });

  auto* d_bias = design->add_subcommand("bias", "Tune R_C and R_E for a target collector current");
  double bias_target = 4.5e-3;
  std::string bias_config, bias_preset, bias_csv;
  d_bias->add_option("--target", bias_target, "Target I_C, A")->capture_default_str();
  d_bias->add_option("--config", bias_config, "YAML run configuration");
  d_bias->add_option("--preset", bias_preset, "Preset name (default: paper)");
  d_bias->add_option("--csv", bias_csv, "Also write the result as CSV");
  d_bias->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(bias_config, bias_preset);
      const auto& m = cfg.model;
      const auto r = tune_bias_resistors(bias_target, m.tia, m.hbt, m.constants);
      out << "R_C_ohm  " << format_double(r.R_C) << "\nR_E_ohm  " << format_double(r.R_E) << "\nI_C_a    "
          << format_double(r.bias.I_C) << "\nV_CE_v   " << format_double(r.bias.V_CE) << "\n";
      if (!bias_csv.empty())
        write_file(bias_csv, "r_c_ohm,r_e_ohm,i_c_a,v_ce_v\n" + format_double(r.R_C) + "," + format_double(r.R_E) +
                                 "," + format_double(r.bias.I_C) + "," + format_double(r.bias.V_CE) + "\n");
      return exit_ok;
    };
  });

  auto* d_ic = design->add_subcommand("interconnect", "Bandwidth ratio for alternative interconnect capacitances");
  std::string ic_alts, ic_config, ic_preset, ic_csv;
  d_ic->add_option("--alts", ic_alts, "Comma-separated interconnect capacitances, F")->required();
  d_ic->add_option("--config", ic_config, "YAML run configuration");
  d_ic->add_option("--preset", ic_preset, "Preset name (default: paper)");
  d_ic->add_option("--csv", ic_csv, "Also write the table as CSV");
  d_ic->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(ic_config, ic_preset);
      const auto alts = parse_list(ic_alts);
      const auto rows = interconnect_tradeoff(cfg.model.input, alts);
      std::string csv = "c_interconnect_f,c_in_f,bandwidth_ratio,speedup\n";
      out << "c_interconnect_f  c_in_f  bandwidth_ratio  speedup\n";
      for (const auto& r : rows) {
        out << format_double(r.C_interconnect) << "  " << format_double(r.C_in) << "  "
            << format_double(r.bandwidth_ratio) << "  " << format_double(r.speedup) << "\n";
        csv += format_double(r.C_interconnect) + "," + format_double(r.C_in) + "," + format_double(r.bandwidth_ratio) +
               "," + format_double(r.speedup) + "\n";
      }
      if (!ic_csv.empty()) write_file(ic_csv, csv);
      return exit_ok;
    };
  });

  // report
  auto* rep = app.add_subcommand("report", "Full characterization report for a campaign directory");
  std::string rep_dir, rep_shape = "printed", rep_out;
  double rep_freq = 1e9;
  rep->add_option("--campaign", rep_dir, "Campaign directory")->required();
  rep->add_option("--shape", rep_shape, "Bandwidth shape: printed or butterworth2")->capture_default_str();
  rep->add_option("--variance-frequency", rep_freq, "Frequency for the linearity analysis, Hz")->capture_default_str();
  rep->add_option("--out", rep_out, "Also write the report to this file");
  rep->callback([&] {
    action = [&] {
      ReportOptions o;
      o.shape = parse_shape(rep_shape);
      o.variance_frequency = rep_freq;
      const auto report = build_report(read_campaign(rep_dir), o);
      const auto text = report.dump(2) + "\n";
      out << text;
      if (!rep_out.empty()) write_file(rep_out, text);
      return exit_ok;
    };
  });

  // preset
  auto* preset = app.add_subcommand("preset", "List or show detector presets");
  preset->require_subcommand(1);
  auto* p_list = preset->add_subcommand("list", "List available presets");
  p_list->callback([&] {
    action = [&] {
      for (const auto& n : preset_names()) out << n << "\n";
      return exit_ok;
    };
  });
  auto* p_show = preset->add_subcommand("show", "Print a preset as YAML");
  std::string show_name;
  p_show->add_option("name", show_name, "Preset name")->required();
  p_show->callback([&] {
    action = [&] {
      out << config_to_yaml(load_preset(show_name));
      return exit_ok;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  if (!action) {
    out << app.help();
    return exit_usage;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
}

}  // namespace homodyne::cli

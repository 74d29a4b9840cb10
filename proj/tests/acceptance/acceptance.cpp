// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "homodyne/circuit.hpp"
#include "homodyne/cli.hpp"
#include "homodyne/design.hpp"
#include "homodyne/fit.hpp"
#include "homodyne/io.hpp"
#include "homodyne/noise.hpp"
#include "homodyne/simulate.hpp"
#include "homodyne/units.hpp"

using namespace homodyne;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. Closed-form bandwidth over the plausible gain-bandwidth range.
Outcome bandwidth_estimate() {
  const auto m = paper_device();
  const double C_in = m.input.total();
  double lo = INFINITY, hi = 0.0;
  for (double a = 180e9; a <= 220e9 + 1.0; a += 1e9) {
    const double f = f3db_butterworth_estimate(a, C_in, m.tia.R_F);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  const bool ok = std::abs(C_in - 125e-15) < 1e-18 && m.tia.R_F == 600.0 && lo >= 17e9 && hi <= 23e9 &&
                  lo <= 19.8e9 && hi >= 19.8e9;
  return {ok, fmt("estimate spans [%.3f, %.3f] GHz", lo / 1e9, hi / 1e9)};
}

// 2. Circuit solve against the closed form on random designs with loop gain > 10.
Outcome mna_vs_formula() {
  testing::Gen gen(20201);
  int n = 0;
  double worst = 0.0, lo = INFINITY, hi = 0.0;
  while (n < 100) {
    const double I_C = gen.log_uniform(2e-3, 8e-3);
    const double R_F = gen.log_uniform(300.0, 1500.0);
    const double R_C = gen.log_uniform(150.0, 600.0);
    const double R_E = gen.uniform(0.0, 1.0);
    const double C_ext = gen.log_uniform(20e-15, 200e-15);
    HBTParams hbt;
    hbt.f_T = gen.log_uniform(150e9, 300e9);
    hbt.C_mu_fraction = 0.0;
    hbt.R_b = 0.0;
    BiasPoint bias;
    bias.I_C = I_C;
    auto hpi = small_signal_params(hbt, bias, PhysicalConstants{});
    const double gm_eff = hpi.g_m / (1.0 + hpi.g_m * R_E);
    const double R = R_C * R_F / (R_C + R_F);
    const double A0 = gm_eff * R;
    if (A0 <= 10.0) continue;
    // Output pole placed for a maximally flat closed loop.
    const double C_T = C_ext + hpi.C_total();
    const double T_F = R_F * C_T;
    const double T_A = T_F * (A0 - std::sqrt(A0 * A0 - 1.0));
    const double C_L = T_A / R;
    hbt.C_ratio = hpi.C_total() / C_L;
    TIADesign tia;
    tia.R_F = R_F;
    tia.R_C = R_C;
    tia.R_E = R_E;
    InputNode in;
    in.C_pd_each = 0.0;
    in.C_amp_in = 0.0;
    in.C_interconnect = C_ext;
    const auto net = build_tia_network(tia, hbt, hpi, in);
    const double est = f3db_butterworth_estimate(gm_eff / (2.0 * std::numbers::pi * C_L), C_T, R_F);
    const auto grid = logspace(est * 1e-3, est * 10.0, 3000);
    const double f3 = f3db_from_spectrum(ac_transimpedance(net, grid));
    const double r = f3 / est;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    worst = std::max(worst, std::abs(r - 1.0));
    ++n;
  }
  return {worst <= 0.25, fmt("f3dB/estimate in [%.3f, %.3f] over 100 designs", lo, hi)};
}

// 3. Bandwidth fit recovery under 0.2 dB multiplicative noise.
Outcome bandwidth_recovery() {
  testing::Gen gen(30303);
  const std::size_t n = 4096;
  const auto grid = linspace(26.5e9 / static_cast<double>(n), 26.5e9, n);
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const double f3 = gen.uniform(10e9, 25e9);
    const double a0 = gen.log_uniform(0.1, 10.0);
    std::vector<double> y;
    for (double f : grid) y.push_back(bandwidth_shape(BandwidthShape::printed, f, a0, f3) *
                                      units::db_to_ratio(gen.normal(0.0, 0.2)));
    const auto r = fit_bandwidth(make_trace(grid, y, TraceUnit::ratio, 100e3, TraceStage::deembedded));
    const double err = std::abs(r.f3db / f3 - 1.0);
    worst = std::max(worst, err);
    if (!r.fit.converged || err > 0.005) ++failures;
  }
  return {failures == 0, fmt("worst relative error %.4f%% over 200 trials, %.0f outside", worst * 100.0,
                             static_cast<double>(failures))};
}

// 4. Clearance pipeline recovers planted parameters from 1 % noise.
Outcome clearance_recovery() {
  const double f_edge = 26.5e9;
  const double A = units::db_to_ratio(15.0) - 1.0;
  const ClearanceModel planted{A, 1.0, (A / (units::db_to_ratio(10.0) - 1.0) - 1.0) / (f_edge * f_edge)};
  testing::Gen gen(40404);
  const auto grid = linspace(f_edge / 1024.0, f_edge, 1024);
  double worst_a = 0.0, worst_c = 0.0, worst_b = 0.0;
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y;
    for (double f : grid) y.push_back(planted.at(f) * (1.0 + gen.normal(0.0, 0.01)));
    const auto r = fit_clearance(make_trace(grid, y, TraceUnit::ratio, 0.0, TraceStage::electronics_subtracted));
    const double ea = std::abs(r.model.A / planted.A - 1.0);
    const double eb = std::abs(r.model.B / planted.B - 1.0);
    const double ec = std::abs(r.model.C / planted.C - 1.0);
    worst_a = std::max(worst_a, ea);
    worst_b = std::max(worst_b, eb);
    worst_c = std::max(worst_c, ec);
    const double at_edge = units::ratio_to_db(r.model.at(f_edge));
    ok = ok && r.fit.converged && ea <= 0.05 && eb <= 0.05 && ec <= 0.05 && std::abs(at_edge - 10.0) < 0.2 &&
         std::abs(units::ratio_to_db(r.model.at(0.0)) - 15.0) < 0.2;
  }
  return {ok, fmt("worst errors A %.2f%%, B %.2f%%, C %.2f%% (20 trials)", worst_a * 100.0, worst_b * 100.0,
                  worst_c * 100.0)};
}

FitResult gradient_of(const CampaignResult& c) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : variance_vs_photocurrent(c, 1e9)) xy.emplace_back(p.I_total, p.electronics_subtracted);
  return fit_loglog_gradient(xy);
}

// 5. Shot-noise linearity, balanced and unbalanced with RIN.
Outcome linearity() {
  const auto m = paper_device();
  LOSweep s;
  const double balanced = gradient_of(run_lo_sweep(m, s, 5)).value("gradient");
  auto rin = m;
  rin.frontend.rin_dbc_hz = -135.0;
  LOSweep u;
  u.balance = false;
  const double unbalanced = gradient_of(run_lo_sweep(rin, u, 5)).value("gradient");
  const bool ok = std::abs(balanced - 1.0) <= 0.02 && unbalanced > 1.1 && s.power_start_dbm == 13.5 &&
                  s.power_stop_dbm == -26.5;
  return {ok, fmt("balanced gradient %.4f, unbalanced with RIN %.4f", balanced, unbalanced)};
}

// 6. Balancing the 42:58 split.
Outcome balancing() {
  const auto fe = paper_device().frontend;
  double worst = 0.0, last = 0.0;
  for (double dbm = 13.5; dbm >= -26.5; dbm -= 5.0) {
    last = balance_photocurrents(fe, units::dbm_to_watt(dbm));
    worst = std::max(worst, std::abs(last - 0.724));
  }
  return {worst <= 1e-3, fmt("qe_scale_bottom %.5f", last)};
}

// 7. CMRR unbalanced and after balancing with residual mismatch.
Outcome cmrr() {
  const auto m = paper_device();
  const auto un = simulate_cmrr_experiment(m, 500e6, 0.1, 10e-3);
  const double un_db = extract_cmrr(un.tone_single_dbm, un.tone_both_dbm);
  const double balanced = balance_photocurrents(m.frontend, 10e-3);
  double worst = INFINITY;
  for (double residual : {-0.045, -0.03, -0.01, 0.01, 0.03, 0.045}) {
    auto r = m;
    r.frontend.qe_scale_bottom = balanced * (1.0 + residual);
    const auto e = simulate_cmrr_experiment(r, 500e6, 0.1, 10e-3);
    worst = std::min(worst, extract_cmrr(e.tone_single_dbm, e.tone_both_dbm));
  }
  return {std::abs(un_db - 15.9) <= 0.1 && worst >= 27.0,
          fmt("unbalanced %.3f dB, worst balanced within 4.5%% residual %.2f dB", un_db, worst)};
}

// 8. Shot-noise efficiency at 15 dB clearance.
Outcome efficiency() {
  const double e = shot_noise_efficiency(15.0);
  return {std::abs(e - 0.968) <= 1e-3 && e >= 0.95, fmt("efficiency %.5f", e)};
}

// 9. Interconnect trade-off.
Outcome interconnect() {
  const std::vector<double> alts{7e-15, 105e-15};
  const auto rows = interconnect_tradeoff(paper_device().input, alts);
  const double s = rows.size() == 2 ? rows[1].speedup : NAN;
  return {std::abs(s - 1.336) <= 1e-3, fmt("speedup %.5f", s)};
}

// 10. Monte Carlo periodograms against analytic PSDs.
Outcome monte_carlo_oracle() {
  testing::Gen gen(101010);
  MonteCarloOptions o;
  const double dof = 2.0 * static_cast<double>(o.n_averages);
  const boost::math::chi_squared chi(dof);
  const double lo = boost::math::quantile(chi, 0.00135) / dof;
  const double hi = boost::math::quantile(chi, 0.99865) / dof;
  std::size_t bins = 0, outside = 0;
  int mean_failures = 0;
  double worst_mean = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto m = gen.model();
    const auto amp = analyze_amplifier(m);
    const auto pair = photocurrents(m.frontend, gen.log_uniform(1e-5, 2e-2));
    const auto mc = monte_carlo_trace(m, amp, pair, o, gen.bits());
    const auto an = analytic_esa_trace(m, amp, amp.transimpedance(mc.freqs), pair, mc.freqs, mc.rbw);
    const auto a = an.linear(), b = mc.linear();
    double mean = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double r = b[k] / a[k];
      mean += r;
      if (r < lo || r > hi) ++outside;
    }
    bins += a.size();
    mean /= static_cast<double>(a.size());
    // Adjacent Hann bins are correlated; 1.5 bins per independent sample is conservative.
    const double sigma = std::sqrt(1.5 / (static_cast<double>(o.n_averages) * static_cast<double>(a.size())));
    worst_mean = std::max(worst_mean, std::abs(mean - 1.0) / sigma);
    if (std::abs(mean - 1.0) > 3.0 * sigma) ++mean_failures;
  }
  const double frac = static_cast<double>(outside) / static_cast<double>(bins);
  return {frac <= 0.01 && mean_failures == 0,
          fmt("%.3f%% of bins outside the 3 sigma band, worst mean offset %.2f sigma", frac * 100.0, worst_mean)};
}

// 11. simulate then report is byte-identical for equal seeds.
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "homodyne_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  std::string reports[2][2];
  bool files_equal = true;
  const char* modes[2] = {"analytic", "monte_carlo"};
  for (int mode = 0; mode < 2; ++mode) {
    for (int run = 0; run < 2; ++run) {
      const auto dir = root / (std::string(modes[mode]) + std::to_string(run));
      std::ostringstream out, err;
      if (cli::run({"simulate", "--preset", "paper", "--seed", "77", "--mode", modes[mode], "--out", dir.string()},
                   out, err) != cli::exit_ok)
        return {false, "simulate failed: " + err.str()};
      std::ostringstream rep, rerr;
      if (cli::run({"report", "--campaign", dir.string()}, rep, rerr) != cli::exit_ok)
        return {false, "report failed: " + rerr.str()};
      reports[mode][run] = rep.str();
    }
    const auto a = root / (std::string(modes[mode]) + "0");
    const auto b = root / (std::string(modes[mode]) + "1");
    for (const auto& e : fs::directory_iterator(a))
      files_equal = files_equal && fs::exists(b / e.path().filename()) &&
                    read_file(e.path()) == read_file(b / e.path().filename());
  }
  fs::remove_all(root);
  const bool ok = files_equal && reports[0][0] == reports[0][1] && reports[1][0] == reports[1][1];
  return {ok, ok ? "campaign files and reports identical in analytic and Monte Carlo modes"
                 : "outputs differ between runs"};
}

}  // namespace

int main() {
  if (const char* env = std::getenv(cli::preset_dir_env); !env || !*env)
    ::setenv(cli::preset_dir_env, HOMODYNE_SOURCE_PRESETS, 1);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form bandwidth brackets 19.8 GHz", bandwidth_estimate},
      {"circuit solve vs closed form within 25%", mna_vs_formula},
      {"bandwidth fit recovery within 0.5%", bandwidth_recovery},
      {"clearance fit recovery within 5%", clearance_recovery},
      {"shot-noise linearity", linearity},
      {"photocurrent balancing", balancing},
      {"common-mode rejection", cmrr},
      {"shot-noise efficiency", efficiency},
      {"interconnect speedup", interconnect},
      {"Monte Carlo chi-squared oracle", monte_carlo_oracle},
      {"simulate and report determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

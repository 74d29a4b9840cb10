#include "homodyne/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "homodyne/errors.hpp"
#include "homodyne/psd.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// |Z|^2 sampled on `grid`; exact copy when the grids coincide.
std::vector<double> magnitude_squared_on(const ComplexSpectrum& Z, std::span<const double> grid) {
  const auto mag2 = Z.power();
  if (same_grid(Z.freqs, grid, 0.0)) return mag2;
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = interpolate(Z.freqs, mag2, grid[i]);
  return out;
}

std::vector<double> monte_carlo_grid(const MonteCarloOptions& o) {
  const double fs = 2.0 * o.f_max;
  const std::size_t L = o.n_samples / o.n_averages;
  std::vector<double> g;
  for (std::size_t k = 1; k < L / 2; ++k) g.push_back(static_cast<double>(k) * fs / static_cast<double>(L));
  return g;
}

void check_mc_options(const MonteCarloOptions& o) {
  if (!(o.f_max > 0.0)) throw Error(ErrorCode::invalid_argument, "monte carlo f_max must be > 0");
  if (!is_power_of_two(o.n_samples) || o.n_samples < (1u << 12))
    throw Error(ErrorCode::invalid_argument, "monte carlo n_samples must be a power of two >= 4096");
  if (!is_power_of_two(o.n_averages) || o.n_samples / o.n_averages < 8)
    throw Error(ErrorCode::invalid_argument,
                "monte carlo n_averages must be a power of two leaving segments of >= 8 samples");
}

}  // namespace

void check_sweep(const LOSweep& s) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, "sweep: " + m); };
  if (s.n_steps < 1) fail("n_steps must be >= 1");
  if (!std::isfinite(s.power_start_dbm) || !std::isfinite(s.power_stop_dbm)) fail("powers must be finite");
  if (!(s.rbw > 0.0)) fail("rbw must be > 0");
  if (!(s.f_lo >= 0.0) || !(s.f_hi > s.f_lo)) fail("span must satisfy f_hi > f_lo >= 0");
  if (s.n_points < 2) fail("n_points must be >= 2");
  if (s.mode == TraceMode::monte_carlo && (s.mc_averages < 1 || !is_power_of_two(static_cast<std::size_t>(s.mc_averages))))
    fail("mc_averages must be a power of two");
  if (!(s.cable_loss_db_per_ghz >= 0.0)) fail("cable_loss_db_per_ghz must be >= 0");
}

std::vector<double> sweep_powers_dbm(const LOSweep& sweep) {
  check_sweep(sweep);
  if (sweep.n_steps == 1) return {sweep.power_start_dbm};
  return linspace(sweep.power_start_dbm, sweep.power_stop_dbm, static_cast<std::size_t>(sweep.n_steps));
}

double on_chip_power(const OpticalFrontEnd& frontend, double lo_power_offchip) {
  if (!(lo_power_offchip >= 0.0)) throw Error(ErrorCode::invalid_argument, "LO power must be >= 0");
  return lo_power_offchip * std::pow(10.0, -frontend.coupler_loss_db / 10.0);
}

PhotocurrentPair photocurrents(const OpticalFrontEnd& fe, double lo_power_offchip) {
  const double p = on_chip_power(fe, lo_power_offchip);
  return {fe.responsivity_top * fe.top_split() * p,
          fe.responsivity_bottom * fe.qe_scale_bottom * fe.bottom_split() * p};
}

double balance_photocurrents(const OpticalFrontEnd& fe, double lo_power_offchip, double tol) {
  const auto pair = photocurrents(fe, lo_power_offchip);
  if (!(pair.I_top > 0.0 && pair.I_bottom > 0.0))
    throw Error(ErrorCode::invalid_argument, "balance_photocurrents: both photocurrents must be > 0");
  if (std::abs(pair.difference()) <= tol) return fe.qe_scale_bottom;
  const double unscaled_bottom = pair.I_bottom / fe.qe_scale_bottom;
  const double scale = pair.I_top / unscaled_bottom;
  if (scale > 1.0)
    throw Error(ErrorCode::unbalanceable,
                "bottom photodiode needs quantum-efficiency scale " + std::to_string(scale) +
                    " > 1 to match the top one");
  return scale;
}

double rin_excess_psd(const OpticalFrontEnd& frontend, const PhotocurrentPair& pair, double f) {
  if (!(f >= 0.0)) throw Error(ErrorCode::invalid_argument, "frequency must be >= 0");
  if (!frontend.rin_dbc_hz) return 0.0;
  const double d = pair.difference();
  return d * d * std::pow(10.0, *frontend.rin_dbc_hz / 10.0);
}

std::vector<double> device_output_psd(const DetectorModel& model, const AmplifierAnalysis& amp,
                                      const ComplexSpectrum& Z, const PhotocurrentPair& pair,
                                      std::span<const double> grid) {
  if (!(pair.I_top >= 0.0 && pair.I_bottom >= 0.0))
    throw Error(ErrorCode::invalid_argument, "photocurrents must be >= 0");
  const auto z2 = magnitude_squared_on(Z, grid);
  const auto budget = noise_budget(model, amp.bias, amp.hpi);
  const double shot = shot_noise_current_psd(pair.total(), model.constants);
  const double floor = model.constants.kT();
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid[i];
    const double current = shot + budget.total(f) + rin_excess_psd(model.frontend, pair, f);
    out[i] = z2[i] * current / output_power_divisor + floor;
  }
  return out;
}

S21Trace cable_s21(std::span<const double> grid, double loss_db_per_ghz) {
  S21Trace s;
  s.freqs.assign(grid.begin(), grid.end());
  s.s21_db.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s.s21_db[i] = -loss_db_per_ghz * grid[i] / 1e9;
  return s;
}

SpectrumTrace analytic_esa_trace(const DetectorModel& model, const AmplifierAnalysis& amp,
                                 const ComplexSpectrum& Z, const PhotocurrentPair& pair,
                                 std::span<const double> grid, double rbw, const S21Trace* channel) {
  auto psd = device_output_psd(model, amp, Z, pair, grid);
  const double danl = units::dbm_to_watt(model.esa_danl_dbm_hz);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (channel) psd[i] *= units::db_to_ratio(channel->at(grid[i]));
    psd[i] += danl;
  }
  return make_trace(std::vector<double>(grid.begin(), grid.end()), psd, TraceUnit::dbm_per_hz, rbw,
                    TraceStage::raw);
}

SpectrumTrace monte_carlo_trace(const DetectorModel& model, const AmplifierAnalysis& amp,
                                const PhotocurrentPair& pair, const MonteCarloOptions& options,
                                std::uint64_t seed, double cable_loss_db_per_ghz) {
  check_mc_options(options);
  const double fs = 2.0 * options.f_max;
  const std::size_t n_bins = options.n_samples / 2 + 1;
  const auto synth_grid = linspace(0.0, options.f_max, n_bins);
  const auto Z = amp.transimpedance(synth_grid);
  const auto channel = cable_s21(synth_grid, cable_loss_db_per_ghz);
  const auto target = analytic_esa_trace(model, amp, Z, pair, synth_grid, fs / 2.0, &channel).linear();

  const double df = options.f_max / static_cast<double>(n_bins - 1);
  auto samples = synthesize_noise(
      [&](double f) {
        const auto k = static_cast<std::size_t>(std::llround(f / df));
        return target[std::min(k, n_bins - 1)];
      },
      fs, options.n_samples, seed);
  const auto pg = averaged_periodogram(samples, fs, options.n_samples / options.n_averages);
  return make_trace(pg.freqs, pg.psd, TraceUnit::dbm_per_hz, pg.bin_width, TraceStage::raw);
}

std::uint64_t step_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a per-index offset.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CampaignResult run_lo_sweep(const DetectorModel& model, const LOSweep& sweep, std::uint64_t seed) {
  validate(model);
  check_sweep(sweep);
  const auto amp = analyze_amplifier(model);
  const auto powers = sweep_powers_dbm(sweep);

  MonteCarloOptions mc;
  mc.f_max = sweep.f_hi;
  mc.n_averages = static_cast<std::size_t>(sweep.mc_averages);
  const bool monte_carlo = sweep.mode == TraceMode::monte_carlo;
  if (monte_carlo) check_mc_options(mc);

  const auto grid = monte_carlo ? monte_carlo_grid(mc) : linspace(sweep.f_lo, sweep.f_hi, static_cast<std::size_t>(sweep.n_points));
  const double rbw = monte_carlo ? 2.0 * mc.f_max / static_cast<double>(mc.n_samples / mc.n_averages) : sweep.rbw;
  const auto Z = monte_carlo ? ComplexSpectrum{} : amp.transimpedance(grid);

  CampaignResult result;
  result.model = model;
  result.sweep = sweep;
  result.seed = seed;
  result.s21 = cable_s21(grid, sweep.cable_loss_db_per_ghz);

  auto trace_for = [&](const DetectorModel& m, const PhotocurrentPair& pair, std::uint64_t index) {
    if (monte_carlo)
      return monte_carlo_trace(m, amp, pair, mc, step_seed(seed, index), sweep.cable_loss_db_per_ghz);
    return analytic_esa_trace(m, amp, Z, pair, grid, rbw, &result.s21);
  };

  for (std::size_t k = 0; k < powers.size(); ++k) {
    DetectorModel m = model;
    const double p = units::dbm_to_watt(powers[k]);
    if (sweep.balance && p > 0.0 && photocurrents(m.frontend, p).total() > 0.0)
      m.frontend.qe_scale_bottom = balance_photocurrents(m.frontend, p);
    CampaignStep step;
    step.lo_power_dbm = powers[k];
    step.qe_scale_bottom = m.frontend.qe_scale_bottom;
    step.currents = photocurrents(m.frontend, p);
    step.trace = trace_for(m, step.currents, k);
    result.steps.push_back(std::move(step));
  }

  result.dark = trace_for(model, PhotocurrentPair{}, powers.size());
  result.dark.stage = TraceStage::raw;
  const std::vector<double> danl(grid.size(), units::dbm_to_watt(model.esa_danl_dbm_hz));
  result.danl = make_trace(grid, danl, TraceUnit::dbm_per_hz, rbw, TraceStage::raw);
  return result;
}

CmrrResult simulate_cmrr_experiment(const DetectorModel& model, double mod_freq, double mod_depth,
                                    double lo_power_offchip, CmrrReference reference) {
  if (!(mod_depth > 0.0 && mod_depth < 1.0))
    throw Error(ErrorCode::invalid_argument, "mod_depth must be in (0, 1)");
  if (!(mod_freq > 0.0)) throw Error(ErrorCode::invalid_argument, "mod_freq must be > 0");
  const auto amp = analyze_amplifier(model);
  const std::vector<double> f{mod_freq};
  const double z2 = amp.transimpedance(f).power()[0];
  const auto pair = photocurrents(model.frontend, lo_power_offchip);
  if (!(pair.total() > 0.0))
    throw Error(ErrorCode::invalid_argument, "CMRR experiment needs a nonzero photocurrent");

  const double single = reference == CmrrReference::equal_total_photocurrent
                            ? pair.total()
                            : std::max(pair.I_top, pair.I_bottom);
  const double residual = std::abs(pair.difference());
  auto tone_dbm = [&](double current) {
    const double a = mod_depth * current;
    return units::watt_to_dbm(z2 * a * a / 2.0 / output_power_divisor);
  };

  CmrrResult r;
  r.tone_single_dbm = tone_dbm(single);
  const double ratio_db = residual > 0.0 ? 20.0 * std::log10(single / residual) : cmrr_cap_db;
  r.cmrr_db = std::min(ratio_db, cmrr_cap_db);
  r.tone_both_dbm = residual > 0.0 && ratio_db <= cmrr_cap_db ? tone_dbm(residual)
                                                              : r.tone_single_dbm - cmrr_cap_db;
  return r;
}

std::vector<VariancePoint> variance_vs_photocurrent(const CampaignResult& campaign, double f0) {
  const auto danl = campaign.danl.linear();
  const auto dark = campaign.dark.linear();
  const double danl_f0 = interpolate(campaign.danl.freqs, danl, f0);
  const double dark_f0 = interpolate(campaign.dark.freqs, dark, f0);
  std::vector<VariancePoint> out;
  for (const auto& step : campaign.steps) {
    const auto lin = step.trace.linear();
    const double v = interpolate(step.trace.freqs, lin, f0);
    out.push_back({step.currents.total(), v - danl_f0, v - dark_f0});
  }
  return out;
}

}  // namespace homodyne

#include "homodyne/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "homodyne/errors.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

namespace {

bool power_units(TraceUnit u) { return u == TraceUnit::dbm_per_hz || u == TraceUnit::watt_per_hz; }

bool compatible(TraceUnit a, TraceUnit b) { return a == b || (power_units(a) && power_units(b)); }

TraceStage next_stage(TraceStage s) {
  switch (s) {
    case TraceStage::raw: return TraceStage::danl_subtracted;
    case TraceStage::danl_subtracted: return TraceStage::electronics_subtracted;
    default: return s;
  }
}

void require_finite_trace(const SpectrumTrace& t, const char* what) {
  try {
    check_trace(t);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + ": " + e.what());
  }
}

}  // namespace

SubtractionResult subtract_noise_floor(const SpectrumTrace& trace, const SpectrumTrace& floor) {
  if (!same_grid(trace.freqs, floor.freqs, 1e-9))
    throw Error(ErrorCode::grid_mismatch, "trace and floor are on different frequency grids");
  if (!compatible(trace.unit, floor.unit))
    throw Error(ErrorCode::invalid_argument, "trace and floor have incompatible units");
  const auto t = trace.linear();
  const auto f = floor.linear();
  SubtractionResult out;
  out.clipped.assign(t.size(), false);
  std::vector<double> diff(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double clip = floor_clip_fraction * f[i];
    diff[i] = t[i] - f[i];
    if (diff[i] < clip) {
      diff[i] = clip;
      out.clipped[i] = true;
    }
  }
  out.trace = make_trace(trace.freqs, diff, trace.unit, trace.rbw, next_stage(trace.stage));
  return out;
}

SpectrumTrace de_embed(const SpectrumTrace& trace, const S21Trace& s21) {
  if (s21.freqs.empty() || trace.freqs.empty() || trace.freqs.front() < s21.freqs.front() ||
      trace.freqs.back() > s21.freqs.back())
    throw Error(ErrorCode::grid_mismatch, "S21 grid does not cover the trace");
  SpectrumTrace out = trace;
  for (std::size_t i = 0; i < out.freqs.size(); ++i) {
    const double loss = s21.at(out.freqs[i]);
    if (out.unit == TraceUnit::dbm_per_hz) out.values[i] -= loss;
    else out.values[i] *= units::db_to_ratio(-loss);
  }
  out.stage = TraceStage::deembedded;
  return out;
}

S21Trace negated(const S21Trace& s21) {
  S21Trace out = s21;
  for (auto& v : out.s21_db) v = -v;
  return out;
}

double bandwidth_shape(BandwidthShape shape, double f, double dc_gain, double f3db) {
  const double x2 = (f / f3db) * (f / f3db);
  return dc_gain * dc_gain / (1.0 + (shape == BandwidthShape::printed ? x2 : x2 * x2));
}

BandwidthFit fit_bandwidth(const SpectrumTrace& trace, BandwidthShape shape) {
  require_finite_trace(trace, "fit_bandwidth");
  const auto y = trace.linear();
  const auto& f = trace.freqs;
  const std::size_t n = y.size();

  const std::size_t head = std::max<std::size_t>(1, n / 20);
  double a0 = 0.0;
  for (std::size_t i = 0; i < head; ++i) a0 += y[i];
  a0 /= static_cast<double>(head);
  if (!(a0 > 0.0)) throw Error(ErrorCode::non_positive_input, "fit_bandwidth: trace starts at zero power");
  double f3 = f.back();
  for (std::size_t i = 0; i < n; ++i)
    if (y[i] < 0.5 * a0) {
      f3 = f[i];
      break;
    }

  const bool printed = shape == BandwidthShape::printed;
  CurveModel model = [printed](double x, std::span<const double> p) {
    const double r2 = (x / p[1]) * (x / p[1]);
    return p[0] / (1.0 + (printed ? r2 : r2 * r2));
  };
  CurveGradient grad = [printed](double x, std::span<const double> p, std::span<double> g) {
    const double r2 = (x / p[1]) * (x / p[1]);
    const double t = printed ? r2 : r2 * r2;
    const double order = printed ? 2.0 : 4.0;
    const double d = 1.0 + t;
    g[0] = 1.0 / d;
    g[1] = p[0] * order * t / (p[1] * d * d);
  };

  BandwidthFit out;
  out.fit = fit_curve(model, f, y, {{"a0_squared", a0, true, false}, {"f3db_hz", f3, true, false}},
                      Weighting::logarithmic, grad);
  out.f3db = out.fit.value("f3db_hz");
  out.f3db_err = out.fit.error("f3db_hz");
  out.dc_gain = std::sqrt(out.fit.value("a0_squared"));
  out.in_band = out.fit.converged && out.f3db >= f.front() && out.f3db <= f.back();
  return out;
}

double ClearanceFit::crossing(double threshold_db) const {
  for (const auto& [t, freq] : crossings)
    if (std::abs(t - threshold_db) <= 1e-12) return freq;
  throw Error(ErrorCode::invalid_argument,
              "clearance crossing at " + std::to_string(threshold_db) + " dB was not requested");
}

double clearance_crossing(const ClearanceModel& cm, double threshold_db) {
  const double r = units::db_to_ratio(threshold_db);
  if (r <= 1.0) return std::numeric_limits<double>::infinity();
  if (cm.at(0.0) < r) return 0.0;
  if (!(cm.C > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt((cm.A / (r - 1.0) - cm.B) / cm.C);
}

ClearanceFit fit_clearance(const SpectrumTrace& clearance_trace, const ClearanceFitOptions& options) {
  require_finite_trace(clearance_trace, "fit_clearance");
  const auto y = clearance_trace.linear();
  const auto& f = clearance_trace.freqs;
  const std::size_t n = y.size();

  const std::size_t head = std::max<std::size_t>(1, n / 50);
  double a0 = 0.0;
  for (std::size_t i = 0; i < head; ++i) a0 += y[i] - 1.0;
  a0 = std::max(a0 / static_cast<double>(head), 1e-6);
  // 1/(y - 1) = (1 + C f^2) / A is linear in f^2; regress it for a start point.
  const double f_max2 = f.back() * f.back();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 1.0)) continue;
    const double u = f[i] * f[i] / f_max2, z = 1.0 / (y[i] - 1.0);
    s0 += 1.0;
    s1 += u;
    s2 += u * u;
    t0 += z;
    t1 += u * z;
  }
  double c0 = 1e-3 / f_max2;
  const double det = s0 * s2 - s1 * s1;
  if (s0 >= 2.0 && det > 0.0) {
    const double intercept = (s2 * t0 - s1 * t1) / det;
    const double slope = (s0 * t1 - s1 * t0) / det;
    if (intercept > 0.0) {
      a0 = 1.0 / intercept;
      c0 = std::max(slope / intercept, 1e-3) / f_max2;
    }
  }
  if (options.fix_c_zero) c0 = 0.0;

  CurveModel model = [](double x, std::span<const double> p) { return p[0] / (p[1] + p[2] * x * x) + 1.0; };
  CurveGradient grad = [](double x, std::span<const double> p, std::span<double> g) {
    const double d = p[1] + p[2] * x * x;
    g[0] = 1.0 / d;
    g[1] = -p[0] / (d * d);
    g[2] = -p[0] * x * x / (d * d);
  };

  ClearanceFit out;
  out.fit = fit_curve(model, f, y,
                      {{"A", a0, true, false}, {"B", 1.0, false, true}, {"C", c0, true, options.fix_c_zero}},
                      Weighting::logarithmic, grad);
  out.model = {out.fit.value("A"), out.fit.value("B"), out.fit.value("C")};
  for (double t : options.thresholds_db) out.crossings.emplace_back(t, clearance_crossing(out.model, t));
  return out;
}

FitResult fit_loglog_gradient(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw Error(ErrorCode::invalid_argument, "gradient fit needs >= 3 points");
  std::vector<double> x, y;
  for (const auto& [current, variance] : points) {
    if (!(current > 0.0) || !(variance > 0.0) || !std::isfinite(current) || !std::isfinite(variance))
      throw Error(ErrorCode::non_positive_input, "gradient fit needs positive photocurrents and variances");
    x.push_back(std::log10(current));
    y.push_back(std::log10(variance));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());

  CurveModel model = [](double v, std::span<const double> p) { return p[0] * v + p[1]; };
  CurveGradient grad = [](double v, std::span<const double>, std::span<double> g) {
    g[0] = v;
    g[1] = 1.0;
  };
  return fit_curve(model, x, y, {{"gradient", 1.0}, {"intercept", my - mx}}, Weighting::none, grad);
}

double extract_cmrr(double tone_single_dbm, double tone_both_dbm) {
  if (!std::isfinite(tone_single_dbm) || !std::isfinite(tone_both_dbm))
    throw Error(ErrorCode::invalid_argument, "tone powers must be finite");
  return tone_single_dbm - tone_both_dbm;
}

double extract_responsivity(double I_sum, double lo_power_offchip, double coupler_loss_db) {
  if (!(lo_power_offchip > 0.0)) throw Error(ErrorCode::invalid_argument, "LO power must be > 0");
  return I_sum / (lo_power_offchip * std::pow(10.0, -coupler_loss_db / 10.0));
}

double grating_loss_from_loopback(double loopback_loss_db) {
  if (!(loopback_loss_db >= 0.0)) throw Error(ErrorCode::invalid_argument, "loopback loss must be >= 0");
  return loopback_loss_db / 2.0;
}

}  // namespace homodyne

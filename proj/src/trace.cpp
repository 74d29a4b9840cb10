#include "homodyne/trace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "homodyne/errors.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

std::string_view to_string(TraceUnit unit) {
  switch (unit) {
    case TraceUnit::dbm_per_hz: return "dBm/Hz";
    case TraceUnit::watt_per_hz: return "W/Hz";
    case TraceUnit::amp2_per_hz: return "A^2/Hz";
    case TraceUnit::ratio: return "ratio";
  }
  return "?";
}

std::string_view to_string(TraceStage stage) {
  switch (stage) {
    case TraceStage::raw: return "raw";
    case TraceStage::danl_subtracted: return "danl_subtracted";
    case TraceStage::electronics_subtracted: return "electronics_subtracted";
    case TraceStage::deembedded: return "deembedded";
  }
  return "?";
}

TraceUnit parse_trace_unit(std::string_view text) {
  for (auto u : {TraceUnit::dbm_per_hz, TraceUnit::watt_per_hz, TraceUnit::amp2_per_hz, TraceUnit::ratio})
    if (text == to_string(u)) return u;
  throw Error(ErrorCode::parse_error, "unknown trace unit '" + std::string(text) + "'");
}

TraceStage parse_trace_stage(std::string_view text) {
  for (auto s : {TraceStage::raw, TraceStage::danl_subtracted, TraceStage::electronics_subtracted,
                 TraceStage::deembedded})
    if (text == to_string(s)) return s;
  throw Error(ErrorCode::parse_error, "unknown trace stage '" + std::string(text) + "'");
}

std::vector<double> SpectrumTrace::linear() const {
  std::vector<double> out(values.size());
  if (unit == TraceUnit::dbm_per_hz) {
    std::transform(values.begin(), values.end(), out.begin(), units::dbm_to_watt);
  } else {
    std::copy(values.begin(), values.end(), out.begin());
  }
  return out;
}

void check_trace(const SpectrumTrace& t) {
  if (t.freqs.size() != t.values.size() || t.freqs.size() < 2)
    throw Error(ErrorCode::invalid_argument, "trace needs matching freqs/values with >= 2 bins");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t.freqs[i]) || !std::isfinite(t.values[i]))
      throw Error(ErrorCode::invalid_argument, "trace contains non-finite entries");
    if (i > 0 && !(t.freqs[i] > t.freqs[i - 1]))
      throw Error(ErrorCode::invalid_argument, "trace freqs must be strictly increasing");
    if (t.unit != TraceUnit::dbm_per_hz && t.values[i] < 0.0)
      throw Error(ErrorCode::invalid_argument, "linear trace values must be >= 0");
  }
}

SpectrumTrace make_trace(std::vector<double> freqs, std::span<const double> linear, TraceUnit unit,
                         double rbw, TraceStage stage) {
  SpectrumTrace t;
  t.freqs = std::move(freqs);
  t.values.assign(linear.begin(), linear.end());
  if (unit == TraceUnit::dbm_per_hz)
    std::transform(t.values.begin(), t.values.end(), t.values.begin(), units::watt_to_dbm);
  t.unit = unit;
  t.rbw = rbw;
  t.stage = stage;
  return t;
}

std::vector<double> ComplexSpectrum::power() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](auto z) { return std::norm(z); });
  return out;
}

double S21Trace::at(double f) const { return interpolate(freqs, s21_db, f); }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto out = linspace(std::log10(lo), std::log10(hi), n);
  for (auto& v : out) v = std::pow(10.0, v);
  if (n > 0) {
    out.front() = lo;
    out.back() = hi;
  }
  return out;
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (xs.empty() || xs.size() != ys.size())
    throw Error(ErrorCode::invalid_argument, "interpolate: mismatched arrays");
  const double span_tol = 1e-12 * std::max(std::abs(xs.front()), std::abs(xs.back()));
  if (x < xs.front() - span_tol || x > xs.back() + span_tol)
    throw Error(ErrorCode::out_of_grid, "frequency " + std::to_string(x) + " Hz outside grid [" +
                                            std::to_string(xs.front()) + ", " +
                                            std::to_string(xs.back()) + "]");
  if (xs.size() == 1 || x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

bool same_grid(std::span<const double> a, std::span<const double> b, double rel_tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
    if (std::abs(a[i] - b[i]) > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace homodyne

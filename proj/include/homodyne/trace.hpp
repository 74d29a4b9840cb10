#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homodyne {

enum class TraceUnit { dbm_per_hz, watt_per_hz, amp2_per_hz, ratio };

enum class TraceStage { raw, danl_subtracted, electronics_subtracted, deembedded };

std::string_view to_string(TraceUnit unit);
std::string_view to_string(TraceStage stage);
TraceUnit parse_trace_unit(std::string_view text);
TraceStage parse_trace_stage(std::string_view text);

// A power spectral density sampled on a strictly increasing frequency grid.
struct SpectrumTrace {
  std::vector<double> freqs;   // Hz
  std::vector<double> values;  // per `unit`
  TraceUnit unit = TraceUnit::dbm_per_hz;
  double rbw = 0.0;            // Hz, 0 when not applicable
  TraceStage stage = TraceStage::raw;

  std::size_t size() const { return freqs.size(); }

  // Linear power per bin (W/Hz, A^2/Hz or plain ratio).
  std::vector<double> linear() const;

  bool operator==(const SpectrumTrace&) const = default;
};

// Throws invalid_argument unless freqs are strictly increasing, values finite and
// the two arrays have equal length >= 2. Linear units must also be nonnegative.
void check_trace(const SpectrumTrace& trace);

// Builds a trace from linear powers, converting to the requested unit.
SpectrumTrace make_trace(std::vector<double> freqs, std::span<const double> linear,
                         TraceUnit unit, double rbw, TraceStage stage);

// Complex transfer function, typically a transimpedance in Ω.
struct ComplexSpectrum {
  std::vector<double> freqs;
  std::vector<std::complex<double>> values;

  std::size_t size() const { return freqs.size(); }
  std::vector<double> power() const;  // |value|^2
};

struct S21Trace {
  std::vector<double> freqs;
  std::vector<double> s21_db;

  // Linear-in-dB interpolation; throws out_of_grid outside the sampled span.
  double at(double f) const;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);
std::vector<double> logspace(double lo, double hi, std::size_t n);

// Linear interpolation of ys over xs at x; throws out_of_grid outside [xs.front(), xs.back()].
double interpolate(std::span<const double> xs, std::span<const double> ys, double x);

bool same_grid(std::span<const double> a, std::span<const double> b, double rel_tol = 1e-9);

}  // namespace homodyne

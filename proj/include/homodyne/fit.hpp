#pragma once

// Characterization pipeline: floor subtraction, de-embedding and the parameter fits
// behind bandwidth, clearance, linearity, CMRR and responsivity figures.

#include <span>
#include <utility>
#include <vector>

#include "homodyne/least_squares.hpp"
#include "homodyne/noise.hpp"
#include "homodyne/trace.hpp"

namespace homodyne {

struct SubtractionResult {
  SpectrumTrace trace;
  std::vector<bool> clipped;  // bins held at the clip level
};

inline constexpr double floor_clip_fraction = 1e-3;

// Linear-power subtraction, clipped below at 1e-3 of the floor. Output keeps the
// input's unit; the stage advances raw -> danl_subtracted -> electronics_subtracted.
// Throws grid_mismatch.
SubtractionResult subtract_noise_floor(const SpectrumTrace& trace, const SpectrumTrace& floor);

// Adds the insertion loss back: value_dB - s21_dB(f). Throws grid_mismatch when the
// S21 grid does not cover the trace.
SpectrumTrace de_embed(const SpectrumTrace& trace, const S21Trace& s21);
S21Trace negated(const S21Trace& s21);

enum class BandwidthShape {
  printed,       // A0^2 / (1 + (f/f3dB)^2)
  butterworth2,  // A0^2 / (1 + (f/f3dB)^4), power of a true second-order Butterworth
};

double bandwidth_shape(BandwidthShape shape, double f, double dc_gain, double f3db);

struct BandwidthFit {
  FitResult fit;  // params "a0_squared", "f3db_hz"
  double f3db = 0.0;
  double f3db_err = 0.0;
  double dc_gain = 0.0;
  bool in_band = false;  // converged with f3dB inside the trace grid
};

// Relative-weighted fit in linear power.
BandwidthFit fit_bandwidth(const SpectrumTrace& trace, BandwidthShape shape = BandwidthShape::printed);

struct ClearanceFitOptions {
  bool fix_c_zero = false;
  std::vector<double> thresholds_db = {10.0, 3.0, 1.0};
};

struct ClearanceFit {
  FitResult fit;  // params "A", "B" (fixed at 1), "C"
  ClearanceModel model;
  std::vector<std::pair<double, double>> crossings;  // (threshold dB, frequency Hz)

  double crossing(double threshold_db) const;  // throws invalid_argument if not requested
};

// Frequency where clearance falls to threshold_db; +inf if never, 0 if never reached.
double clearance_crossing(const ClearanceModel& cm, double threshold_db);

// Fits A/(B + C f^2) + 1 with A, C >= 0. The model is invariant under a common scale
// of (A, B, C), so B is pinned to 1.
ClearanceFit fit_clearance(const SpectrumTrace& clearance_trace, const ClearanceFitOptions& options = {});

// OLS slope of log10(variance) on log10(I). Params "gradient", "intercept". Throws
// non_positive_input.
FitResult fit_loglog_gradient(std::span<const std::pair<double, double>> points);

double extract_cmrr(double tone_single_dbm, double tone_both_dbm);

double extract_responsivity(double I_sum, double lo_power_offchip, double coupler_loss_db);

double grating_loss_from_loopback(double loopback_loss_db);

}  // namespace homodyne

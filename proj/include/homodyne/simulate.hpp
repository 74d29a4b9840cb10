#pragma once

// Virtual detector on a virtual bench: photocurrents from LO power, bias balancing,
// analyzer traces (closed form and Monte Carlo), LO power sweeps and CMRR runs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homodyne/circuit.hpp"
#include "homodyne/model.hpp"
#include "homodyne/noise.hpp"
#include "homodyne/trace.hpp"

namespace homodyne {

struct PhotocurrentPair {
  double I_top = 0.0;
  double I_bottom = 0.0;

  double total() const { return I_top + I_bottom; }
  double difference() const { return I_top - I_bottom; }
  bool operator==(const PhotocurrentPair&) const = default;
};

enum class TraceMode { analytic, monte_carlo };

struct LOSweep {
  double power_start_dbm = 13.5;  // off-chip LO power
  double power_stop_dbm = -26.5;
  int n_steps = 9;
  double rbw = 100e3;             // Hz, analytic traces
  double f_lo = 10e6;
  double f_hi = 26.5e9;
  int n_points = 2048;
  bool balance = true;
  TraceMode mode = TraceMode::analytic;
  int mc_averages = 64;
  // Linear-in-frequency cable/PCB insertion loss applied to everything the device
  // emits; stored with the campaign as its S21 so reports can de-embed it.
  double cable_loss_db_per_ghz = 0.15;

  bool operator==(const LOSweep&) const = default;
};

// Throws invalid_argument listing the first violated invariant.
void check_sweep(const LOSweep& sweep);

// Off-chip powers of each step in dBm, equally spaced in dB.
std::vector<double> sweep_powers_dbm(const LOSweep& sweep);

// Light reaching the chip after one grating coupler.
double on_chip_power(const OpticalFrontEnd& frontend, double lo_power_offchip);

PhotocurrentPair photocurrents(const OpticalFrontEnd& frontend, double lo_power_offchip);

// Returns the qe_scale_bottom that matches the bottom photocurrent to the top one
// within `tol` (unchanged when already matched). Throws unbalanceable when the bottom
// diode sits on the weaker arm.
double balance_photocurrents(const OpticalFrontEnd& frontend, double lo_power_offchip,
                             double tol = 1e-12);

// i_diff^2 10^(RIN/10); zero without a RIN figure.
double rin_excess_psd(const OpticalFrontEnd& frontend, const PhotocurrentPair& pair, double f);

// Linear PSD (W/Hz) delivered by the detector into 50 Ω: shot + electronic + RIN.
std::vector<double> device_output_psd(const DetectorModel& model, const AmplifierAnalysis& amp,
                                      const ComplexSpectrum& Z, const PhotocurrentPair& pair,
                                      std::span<const double> grid);

S21Trace cable_s21(std::span<const double> grid, double loss_db_per_ghz);

// Device output through the optional cable, plus analyzer DANL, in dBm/Hz.
SpectrumTrace analytic_esa_trace(const DetectorModel& model, const AmplifierAnalysis& amp,
                                 const ComplexSpectrum& Z, const PhotocurrentPair& pair,
                                 std::span<const double> grid, double rbw,
                                 const S21Trace* channel = nullptr);

struct MonteCarloOptions {
  double f_max = 26.5e9;      // sampling at 2 f_max
  std::size_t n_samples = 1u << 16;
  std::size_t n_averages = 64;
};

// Gaussian noise shaped to the analytic trace's linear PSD, read back with an averaged
// periodogram. Grid: periodogram bins, rbw: bin width. Same seed, same trace.
SpectrumTrace monte_carlo_trace(const DetectorModel& model, const AmplifierAnalysis& amp,
                                const PhotocurrentPair& pair, const MonteCarloOptions& options,
                                std::uint64_t seed, double cable_loss_db_per_ghz = 0.0);

struct CampaignStep {
  double lo_power_dbm = 0.0;
  double qe_scale_bottom = 1.0;
  PhotocurrentPair currents;
  SpectrumTrace trace;
};

struct CampaignResult {
  DetectorModel model;
  LOSweep sweep;
  std::uint64_t seed = 0;
  std::string model_hash;
  std::vector<CampaignStep> steps;
  SpectrumTrace danl;  // analyzer alone
  SpectrumTrace dark;  // detector powered, no light
  S21Trace s21;        // cable + PCB insertion loss
};

// Per-step seeds are derived from (seed, step index).
std::uint64_t step_seed(std::uint64_t seed, std::uint64_t index);

CampaignResult run_lo_sweep(const DetectorModel& model, const LOSweep& sweep, std::uint64_t seed);

enum class CmrrReference {
  // Single diode illuminated so it alone carries the same total photocurrent.
  equal_total_photocurrent,
  // Single diode kept at its own share of the same LO power (the stronger arm).
  strong_arm,
};

struct CmrrResult {
  double tone_single_dbm = 0.0;
  double tone_both_dbm = 0.0;
  double cmrr_db = 0.0;
};

inline constexpr double cmrr_cap_db = 80.0;

CmrrResult simulate_cmrr_experiment(const DetectorModel& model, double mod_freq, double mod_depth,
                                    double lo_power_offchip,
                                    CmrrReference reference = CmrrReference::equal_total_photocurrent);

struct VariancePoint {
  double I_total = 0.0;
  double raw = 0.0;                    // trace minus DANL, W/Hz
  double electronics_subtracted = 0.0; // trace minus dark trace, W/Hz
};

// Throws out_of_grid when f0 is outside any trace.
std::vector<VariancePoint> variance_vs_photocurrent(const CampaignResult& campaign, double f0);

}  // namespace homodyne

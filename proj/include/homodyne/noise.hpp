#pragma once

// Noise of the shunt-feedback receiver. All PSDs are single-sided, matching what a
// spectrum analyzer displays. Output-referred powers are delivered into a matched
// 50 Ω load, so a current PSD i^2 through transimpedance Z gives |Z|^2 i^2 / (4 * 50).

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "homodyne/circuit.hpp"
#include "homodyne/model.hpp"

namespace homodyne {

inline constexpr double load_ohms = 50.0;
inline constexpr double output_power_divisor = 4.0 * load_ohms;

struct NoiseBudget {
  double johnson_feedback = 0.0;          // 4kT/R_F, A^2/Hz
  double base_shot = 0.0;                 // 2qI_C/beta, A^2/Hz
  double collector_f2_coeff = 0.0;        // 2qI_C (2 pi C_T)^2 / g_m^2, A^2/Hz/Hz^2
  double base_resistance_f2_coeff = 0.0;  // 4kT R_b (4 pi C_PD)^2, A^2/Hz/Hz^2

  double white() const { return johnson_feedback + base_shot; }
  double quadratic() const { return collector_f2_coeff + base_resistance_f2_coeff; }
  double total(double f) const { return white() + quadratic() * f * f; }
};

NoiseBudget noise_budget(const DetectorModel& model, const BiasPoint& bias,
                         const HybridPiParams& hpi);

// Input-referred amplifier current noise at f.
double input_referred_noise_psd(const DetectorModel& model, const BiasPoint& bias,
                                const HybridPiParams& hpi, double f);

// 2 q I.
double shot_noise_current_psd(double I_total, const PhysicalConstants& constants = {});

struct OutputNoise {
  double shot = 0.0;        // W/Hz
  double electronic = 0.0;  // W/Hz, amplifier noise plus the k_B T termination floor
};

// Throws out_of_grid when f lies outside Z's grid.
OutputNoise output_noise_psd(const DetectorModel& model, const BiasPoint& bias,
                             const HybridPiParams& hpi, const ComplexSpectrum& Z,
                             double I_total, double f);

// SNC(f) = A / (B + C f^2) + 1. Invariant under a common scale of (A, B, C).
struct ClearanceModel {
  double A = 0.0;
  double B = 1.0;
  double C = 0.0;  // Hz^-2 in the same normalization as B

  double at(double f) const { return A / (B + C * f * f) + 1.0; }
  ClearanceModel normalized() const { return {A / B, 1.0, C / B}; }
};

double clearance_spectrum(const ClearanceModel& cm, double f);

// A = 2qI_total, B = white terms, C = quadratic terms, all input-referred, so that
// cm.at(f) equals (shot + amplifier noise) / amplifier noise at the amplifier input.
ClearanceModel clearance_from_budget(const DetectorModel& model, const BiasPoint& bias,
                                     const HybridPiParams& hpi, double I_total);

// 1 - 10^(-clearance_db/10).
double shot_noise_efficiency(double clearance_db);

struct NoiseTermRow {
  double freq_hz;
  std::string term;
  double value;
};
std::vector<NoiseTermRow> noise_budget_table(const NoiseBudget& budget,
                                             std::span<const double> freqs);

}  // namespace homodyne

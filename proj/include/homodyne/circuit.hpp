#pragma once

// DC bias and small-signal model of the common-emitter shunt-feedback stage, and the
// closed-form bandwidth relations used for design.

#include <span>
#include <variant>

#include "homodyne/model.hpp"
#include "homodyne/network.hpp"
#include "homodyne/trace.hpp"

namespace homodyne {

struct BiasPoint {
  double I_C = 0.0;       // A
  double I_B = 0.0;       // A
  double V_BE = 0.0;      // V
  double V_CE = 0.0;      // V
  double V_in_dc = 0.0;   // base (amplifier input), V
  double V_out_dc = 0.0;  // collector (stage output), V
  int iterations = 0;
};

// I_C = I_S exp(V_BE / V_T); I_S chosen so that V_BE(I_C_opt) = hbt.V_BE.
struct ExponentialLaw {
  double I_S;
  double V_T;
};
// I_C = G (V_BE - V_0), used to check the solver against hand-solved networks.
struct LinearLaw {
  double G;
  double V_0;
};
using CollectorLaw = std::variant<ExponentialLaw, LinearLaw>;

CollectorLaw calibrated_law(const HBTParams& hbt, const PhysicalConstants& constants);

struct DcOptions {
  double residual_tol = 1e-9;  // A, max KCL residual
  int max_iterations = 100;
  double max_step = 0.1;       // V per Newton update
  double input_current = 0.0;  // DC current injected at the base, A
};

// Damped Newton solve of the stage-1 network (V_cc1, R_C, R_E, R_F collector-to-base).
// Throws no_convergence or breakdown_exceeded.
BiasPoint dc_operating_point(const TIADesign& tia, const HBTParams& hbt,
                             const PhysicalConstants& constants, const DcOptions& options = {});
BiasPoint dc_operating_point(const TIADesign& tia, const HBTParams& hbt, const CollectorLaw& law,
                             const DcOptions& options = {});

struct HybridPiParams {
  double g_m = 0.0;   // S
  double r_pi = 0.0;  // Ω
  double C_pi = 0.0;  // F
  double C_mu = 0.0;  // F
  double R_b = 0.0;   // Ω

  double C_total() const { return C_pi + C_mu; }
};

HybridPiParams small_signal_params(const HBTParams& hbt, const BiasPoint& bias,
                                   const PhysicalConstants& constants);

// Node names used by build_tia_network.
inline constexpr const char* tia_input_node = "in";
inline constexpr const char* tia_output_node = "out";

// Stage-1 small-signal network. The input node carries the external capacitance
// (photodiodes + interconnect); the amplifier's own input capacitance comes from the
// hybrid-pi elements. Load C_L = (C_pi + C_mu) / C_ratio models the buffer input.
// Zero-valued R_E, R_b and C_mu are elided by merging nodes. The buffer is the
// network's output pole at f_T.
LinearNetwork build_tia_network(const TIADesign& tia, const HBTParams& hbt,
                                const HybridPiParams& hpi, const InputNode& input);

// Bias, small-signal parameters and network for one detector model.
struct AmplifierAnalysis {
  BiasPoint bias;
  HybridPiParams hpi;
  LinearNetwork network;

  ComplexSpectrum transimpedance(std::span<const double> freqs) const {
    return ac_transimpedance(network, freqs);
  }
};
AmplifierAnalysis analyze_amplifier(const DetectorModel& model);

// sqrt(A0fA / (2 pi C_in R_F)).
double f3db_butterworth_estimate(double gain_bandwidth_hz, double C_in, double R_F);

// C_ratio * f_T.
double gain_bandwidth_product(const HBTParams& hbt);

// Frequency where power falls 3.0103 dB below the first-decade plateau, interpolated
// linearly in dB against log-frequency. Throws no_crossing, or invalid_argument when
// the first decade is not flat within 1 dB.
double f3db_from_spectrum(const ComplexSpectrum& spectrum);
double f3db_from_spectrum(const SpectrumTrace& trace);
double f3db_from_power(std::span<const double> freqs, std::span<const double> power);

}  // namespace homodyne

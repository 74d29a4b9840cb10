#pragma once

// Design-space helpers around the bandwidth / gain / input-capacitance trade-off.

#include <span>
#include <string>
#include <vector>

#include "homodyne/circuit.hpp"
#include "homodyne/model.hpp"

namespace homodyne {

struct DesignConstraints {
  double min_clearance_db = 10.0;  // at DC
  double min_bandwidth = 19.8e9;   // Hz
  double A0fA = 200e9;             // Hz
  double C_in = 125e-15;           // F
  double temperature = 300.0;      // K, feedback resistor
  // 50 Ω analyzer termination referred to the input through R_F; 0 Ω disables it.
  double termination_ohm = 0.0;
  double termination_temperature = 300.0;
  double base_shot = 0.0;          // optional 2qI_C/beta, A^2/Hz
};

void check_constraints(const DesignConstraints& c);

struct FeedbackRange {
  bool feasible = false;
  double r_min = 0.0;  // Ω, from clearance
  double r_max = 0.0;  // Ω, from bandwidth
  std::string binding;  // "clearance" when infeasible
};

FeedbackRange select_feedback_resistor(const DesignConstraints& constraints, double I_total_ref);

// DC clearance in dB for a feedback resistor under the same noise terms.
double dc_clearance_db(const DesignConstraints& constraints, double R_F, double I_total_ref);

struct BiasTuning {
  double R_C = 0.0;
  double R_E = 0.0;
  BiasPoint bias;
};

struct BiasSearch {
  double r_c_min = 10.0, r_c_max = 5000.0;
  int r_c_points = 48;
  double r_e_min = 1.0, r_e_max = 500.0;
  int r_e_points = 32;
  double rel_tol = 1e-3;
};

// Log-grid search over (R_C, R_E) refined by bisection on R_C, keeping the pair
// nearest (in log distance) to the starting design. Throws infeasible.
BiasTuning tune_bias_resistors(double target_IC, const TIADesign& tia, const HBTParams& hbt,
                               const PhysicalConstants& constants, const BiasSearch& search = {});

struct InterconnectRow {
  double C_interconnect = 0.0;
  double C_in = 0.0;
  double bandwidth_ratio = 0.0;  // f3dB(alt) / f3dB(base)
  double speedup = 0.0;          // 1 / bandwidth_ratio
};

std::vector<InterconnectRow> interconnect_tradeoff(const InputNode& base,
                                                   std::span<const double> alternatives);

}  // namespace homodyne

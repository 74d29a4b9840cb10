#pragma once

// Domain types shared by every module. All quantities are SI (Hz, A, V, F, W, K, Ω);
// dB and dBm appear only at I/O boundaries, see units.hpp.

#include <optional>
#include <string>
#include <vector>

namespace homodyne {

struct PhysicalConstants {
  static constexpr double q = 1.602176634e-19;    // C
  static constexpr double k_B = 1.380649e-23;     // J/K

  double temperature = 300.0;  // K

  // Always derived from the current temperature.
  double thermal_voltage() const { return k_B * temperature / q; }
  double kT() const { return k_B * temperature; }

  bool operator==(const PhysicalConstants&) const = default;
};

struct HBTParams {
  double f_T = 220e9;          // transition frequency, Hz
  double beta = 200.0;         // DC current gain
  double I_C_opt = 4.5e-3;     // collector current at peak f_T, A
  double V_BE = 0.9;           // base-emitter drop at I_C_opt, V
  double R_b = 10.0;           // base resistance, Ω
  double V_breakdown = 1.7;    // collector-emitter breakdown, V
  double C_ratio = 0.9;        // input-to-load capacitance ratio C_I / C_L
  double C_mu_fraction = 0.15; // C_mu / (C_pi + C_mu)

  bool operator==(const HBTParams&) const = default;
};

struct TIADesign {
  double R_F = 600.0;  // feedback, Ω
  double R_C = 250.0;  // collector load, Ω
  double R_E = 35.0;   // emitter degeneration, Ω (0 = grounded emitter)
  double V_cc1 = 2.2;  // first-stage supply, V
  double V_cc2 = 1.65; // buffer supply, V

  bool operator==(const TIADesign&) const = default;
};

struct InputNode {
  double C_pd_each = 9e-15;       // junction capacitance per photodiode, F
  double C_interconnect = 7e-15;  // trace / bondpad parasitic, F
  double C_amp_in = 100e-15;      // amplifier input capacitance, F

  // Everything hanging on the input node except the amplifier itself.
  double external() const { return 2.0 * C_pd_each + C_interconnect; }
  // Total capacitance at the amplifier input; also used as C_T of the noise budget.
  double total() const { return external() + C_amp_in; }

  bool operator==(const InputNode&) const = default;
};

// Which beamsplitter output illuminates the top photodiode. The bottom diode sees
// the other one.
enum class TopArm { transmission, reflection };

struct OpticalFrontEnd {
  double coupler_loss_db = 4.0;       // per grating coupler
  double split_T = 0.42;
  double split_R = 0.58;
  double responsivity_top = 0.47;     // A/W
  double responsivity_bottom = 0.47;  // A/W
  double qe_scale_bottom = 1.0;       // efficiency scale set by bias balancing
  TopArm top_arm = TopArm::transmission;
  std::optional<double> rin_dbc_hz;   // absent: shot-noise-limited LO

  double top_split() const { return top_arm == TopArm::transmission ? split_T : split_R; }
  double bottom_split() const { return top_arm == TopArm::transmission ? split_R : split_T; }

  bool operator==(const OpticalFrontEnd&) const = default;
};

struct DetectorModel {
  std::string name = "custom";
  std::string notes;
  PhysicalConstants constants;
  HBTParams hbt;
  TIADesign tia;
  InputNode input;
  OpticalFrontEnd frontend;
  double esa_danl_dbm_hz = -165.0;

  bool operator==(const DetectorModel&) const = default;
};

// Lists every violated invariant; empty when the model is valid.
std::vector<std::string> check_model(const DetectorModel& model);

// Returns the model unchanged or throws InvalidModel with all diagnostics.
const DetectorModel& validate(const DetectorModel& model);

// The fabricated device: resistor values, supplies, f_T, bias current, splitter,
// responsivity and coupler loss as reported. Capacitances are representative
// orders of magnitude (9 fF photodiodes, ~100 fF amplifier input, 7 fF monolithic
// trace), and beta, R_b, V_BE, C_ratio, C_mu split and the analyzer DANL are
// assumptions; all are overridable through a config file.
DetectorModel paper_device();

// Names of the presets compiled into the library.
std::vector<std::string> builtin_preset_names();
std::optional<DetectorModel> builtin_preset(const std::string& name);

}  // namespace homodyne

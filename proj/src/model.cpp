#include "homodyne/model.hpp"

#include <cmath>
#include <string>

#include "homodyne/errors.hpp"

namespace homodyne {

namespace {

class Checker {
 public:
  void require(bool ok, std::string message) {
    if (!ok) diagnostics_.push_back(std::move(message));
  }
  void positive(double v, const char* field) {
    require(std::isfinite(v) && v > 0.0, std::string(field) + " must be > 0");
  }
  void nonnegative(double v, const char* field) {
    require(std::isfinite(v) && v >= 0.0, std::string(field) + " must be >= 0");
  }
  std::vector<std::string> take() { return std::move(diagnostics_); }

 private:
  std::vector<std::string> diagnostics_;
};

}  // namespace

std::vector<std::string> check_model(const DetectorModel& m) {
  Checker c;
  c.positive(m.constants.temperature, "constants.temperature");

  c.positive(m.hbt.f_T, "hbt.f_T");
  c.require(std::isfinite(m.hbt.beta) && m.hbt.beta > 1.0, "hbt.beta must be > 1");
  c.positive(m.hbt.I_C_opt, "hbt.I_C_opt");
  c.positive(m.hbt.V_BE, "hbt.V_BE");
  c.nonnegative(m.hbt.R_b, "hbt.R_b");
  c.positive(m.hbt.V_breakdown, "hbt.V_breakdown");
  c.positive(m.hbt.C_ratio, "hbt.C_ratio");
  c.require(std::isfinite(m.hbt.C_mu_fraction) && m.hbt.C_mu_fraction >= 0.0 &&
                m.hbt.C_mu_fraction < 1.0,
            "hbt.C_mu_fraction must be in [0, 1)");

  c.positive(m.tia.R_F, "tia.R_F");
  c.positive(m.tia.R_C, "tia.R_C");
  c.nonnegative(m.tia.R_E, "tia.R_E");
  c.positive(m.tia.V_cc1, "tia.V_cc1");
  c.positive(m.tia.V_cc2, "tia.V_cc2");
  c.require(!(m.tia.V_cc2 > m.hbt.V_breakdown), "tia.V_cc2 must not exceed hbt.V_breakdown");

  c.nonnegative(m.input.C_pd_each, "input.C_pd_each");
  c.nonnegative(m.input.C_interconnect, "input.C_interconnect");
  c.nonnegative(m.input.C_amp_in, "input.C_amp_in");

  const auto& fe = m.frontend;
  c.nonnegative(fe.coupler_loss_db, "frontend.coupler_loss_db");
  c.require(fe.split_T > 0.0 && fe.split_T < 1.0, "frontend.split_T must be in (0, 1)");
  c.require(fe.split_R > 0.0 && fe.split_R < 1.0, "frontend.split_R must be in (0, 1)");
  c.require(std::abs(fe.split_T + fe.split_R - 1.0) <= 1e-12, "split fractions must sum to 1");
  c.nonnegative(fe.responsivity_top, "frontend.responsivity_top");
  c.nonnegative(fe.responsivity_bottom, "frontend.responsivity_bottom");
  c.require(fe.qe_scale_bottom > 0.0 && fe.qe_scale_bottom <= 1.0,
            "frontend.qe_scale_bottom must be in (0, 1]");
  if (fe.rin_dbc_hz) c.require(std::isfinite(*fe.rin_dbc_hz), "frontend.rin_dbc_hz must be finite");

  c.require(std::isfinite(m.esa_danl_dbm_hz), "esa_danl_dbm_hz must be finite");
  return c.take();
}

const DetectorModel& validate(const DetectorModel& model) {
  auto diagnostics = check_model(model);
  if (!diagnostics.empty()) throw InvalidModel(std::move(diagnostics));
  return model;
}

DetectorModel paper_device() {
  DetectorModel m;
  m.name = "paper";
  m.notes =
      "Monolithic homodyne detector: R_F=600, R_C=250, R_E=35 ohm, V_cc1=2.2 V, "
      "V_cc2=1.65 V, f_T=220 GHz, I_C=4.5 mA, 42:58 MMI, 0.47 A/W, 4.0 dB/coupler. "
      "Photodiodes reverse biased at 2 V (top) and -0.3 V (bottom) relative to a 0.9 V "
      "amplifier input. Capacitances are representative (9 fF photodiodes, 100 fF "
      "amplifier input, 7 fF trace; a bondpad would be 105 fF). beta, R_b, V_BE, "
      "C_ratio, C_mu split and DANL are assumed.";
  // Struct defaults already hold the device values; spelled out for the record.
  m.constants.temperature = 300.0;
  m.hbt = HBTParams{};
  m.tia = TIADesign{};
  m.input = InputNode{};
  m.frontend = OpticalFrontEnd{};
  m.esa_danl_dbm_hz = -165.0;
  return m;
}

std::vector<std::string> builtin_preset_names() { return {"paper", "bondpad"}; }

std::optional<DetectorModel> builtin_preset(const std::string& name) {
  if (name == "paper") return paper_device();
  if (name == "bondpad") {
    auto m = paper_device();
    m.name = "bondpad";
    m.notes = "Default device with a single bondpad (105 fF) replacing the 7 fF trace.";
    m.input.C_interconnect = 105e-15;
    return m;
  }
  return std::nullopt;
}

}  // namespace homodyne

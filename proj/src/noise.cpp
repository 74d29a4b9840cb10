#include "homodyne/noise.hpp"

#include <cmath>
#include <numbers>

#include "homodyne/errors.hpp"
#include "homodyne/trace.hpp"

namespace homodyne {

NoiseBudget noise_budget(const DetectorModel& model, const BiasPoint& bias,
                         const HybridPiParams& hpi) {
  const double q = PhysicalConstants::q;
  const double kT = model.constants.kT();
  const double two_pi = 2.0 * std::numbers::pi;
  const double c_t = model.input.total();
  const double c_pd = model.input.C_pd_each;

  NoiseBudget b;
  b.johnson_feedback = 4.0 * kT / model.tia.R_F;
  b.base_shot = 2.0 * q * bias.I_C / model.hbt.beta;
  b.collector_f2_coeff = 2.0 * q * bias.I_C * std::pow(two_pi * c_t, 2) / (hpi.g_m * hpi.g_m);
  b.base_resistance_f2_coeff = 4.0 * kT * hpi.R_b * std::pow(2.0 * two_pi * c_pd, 2);
  return b;
}

double input_referred_noise_psd(const DetectorModel& model, const BiasPoint& bias,
                                const HybridPiParams& hpi, double f) {
  return noise_budget(model, bias, hpi).total(f);
}

double shot_noise_current_psd(double I_total, const PhysicalConstants&) {
  if (I_total < 0.0) throw Error(ErrorCode::invalid_argument, "photocurrent must be >= 0");
  return 2.0 * PhysicalConstants::q * I_total;
}

OutputNoise output_noise_psd(const DetectorModel& model, const BiasPoint& bias,
                             const HybridPiParams& hpi, const ComplexSpectrum& Z,
                             double I_total, double f) {
  std::vector<double> mag2 = Z.power();
  const double z2 = interpolate(Z.freqs, mag2, f);
  OutputNoise out;
  out.shot = z2 * shot_noise_current_psd(I_total, model.constants) / output_power_divisor;
  out.electronic =
      z2 * input_referred_noise_psd(model, bias, hpi, f) / output_power_divisor + model.constants.kT();
  return out;
}

double clearance_spectrum(const ClearanceModel& cm, double f) { return cm.at(f); }

ClearanceModel clearance_from_budget(const DetectorModel& model, const BiasPoint& bias,
                                     const HybridPiParams& hpi, double I_total) {
  const auto b = noise_budget(model, bias, hpi);
  return {shot_noise_current_psd(I_total, model.constants), b.white(), b.quadratic()};
}

double shot_noise_efficiency(double clearance_db) {
  return 1.0 - std::pow(10.0, -clearance_db / 10.0);
}

std::vector<NoiseTermRow> noise_budget_table(const NoiseBudget& budget,
                                             std::span<const double> freqs) {
  std::vector<NoiseTermRow> rows;
  rows.reserve(freqs.size() * 5);
  for (double f : freqs) {
    const double f2 = f * f;
    rows.push_back({f, "johnson_feedback", budget.johnson_feedback});
    rows.push_back({f, "base_shot", budget.base_shot});
    rows.push_back({f, "collector_shot", budget.collector_f2_coeff * f2});
    rows.push_back({f, "base_resistance", budget.base_resistance_f2_coeff * f2});
    rows.push_back({f, "total", budget.total(f)});
  }
  return rows;
}

}  // namespace homodyne

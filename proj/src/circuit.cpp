#include "homodyne/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "homodyne/errors.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

namespace {

struct CollectorCurrent {
  double I_C;
  double dI_dVbe;
};

CollectorCurrent evaluate(const CollectorLaw& law, double v_be) {
  if (const auto* e = std::get_if<ExponentialLaw>(&law)) {
    // Linear continuation far above any realistic bias keeps exp() finite.
    constexpr double max_arg = 80.0;
    const double arg = v_be / e->V_T;
    if (arg > max_arg) {
      const double i0 = e->I_S * std::exp(max_arg);
      return {i0 * (1.0 + (arg - max_arg)), i0 / e->V_T};
    }
    const double i = e->I_S * std::exp(arg);
    return {i, i / e->V_T};
  }
  const auto& l = std::get<LinearLaw>(law);
  return {l.G * (v_be - l.V_0), l.G};
}

double initial_vbe(const CollectorLaw& law) {
  if (const auto* e = std::get_if<ExponentialLaw>(&law)) {
    // About 50 nA: well below any target, Newton climbs from there.
    return e->V_T * std::log(5e-8 / e->I_S);
  }
  return std::get<LinearLaw>(law).V_0 + 0.05;
}

}  // namespace

CollectorLaw calibrated_law(const HBTParams& hbt, const PhysicalConstants& constants) {
  const double vt = constants.thermal_voltage();
  return ExponentialLaw{hbt.I_C_opt * std::exp(-hbt.V_BE / vt), vt};
}

BiasPoint dc_operating_point(const TIADesign& tia, const HBTParams& hbt,
                             const PhysicalConstants& constants, const DcOptions& options) {
  return dc_operating_point(tia, hbt, calibrated_law(hbt, constants), options);
}

BiasPoint dc_operating_point(const TIADesign& tia, const HBTParams& hbt, const CollectorLaw& law,
                             const DcOptions& options) {
  if (!(tia.R_F > 0.0 && tia.R_C > 0.0 && tia.R_E >= 0.0 && tia.V_cc1 > 0.0 && hbt.beta > 0.0))
    throw Error(ErrorCode::invalid_argument, "dc_operating_point: invalid resistor or supply values");

  const bool has_emitter = tia.R_E > 0.0;
  const int n = has_emitter ? 3 : 2;
  // x = [V_B, V_C, V_E]
  Eigen::Vector3d x(initial_vbe(law), tia.V_cc1, 0.0);

  auto residual = [&](const Eigen::Vector3d& v, Eigen::Vector3d& F, Eigen::Matrix3d* J) {
    const double v_be = v(0) - (has_emitter ? v(2) : 0.0);
    const auto ic = evaluate(law, v_be);
    const double ib = ic.I_C / hbt.beta;
    const double dib = ic.dI_dVbe / hbt.beta;
    F.setZero();
    F(0) = (v(0) - v(1)) / tia.R_F + ib - options.input_current;
    F(1) = (v(1) - tia.V_cc1) / tia.R_C + (v(1) - v(0)) / tia.R_F + ic.I_C;
    if (has_emitter) F(2) = v(2) / tia.R_E - ic.I_C - ib;
    if (J) {
      J->setZero();
      (*J)(0, 0) = 1.0 / tia.R_F + dib;
      (*J)(0, 1) = -1.0 / tia.R_F;
      (*J)(1, 0) = -1.0 / tia.R_F + ic.dI_dVbe;
      (*J)(1, 1) = 1.0 / tia.R_C + 1.0 / tia.R_F;
      if (has_emitter) {
        (*J)(0, 2) = -dib;
        (*J)(1, 2) = -ic.dI_dVbe;
        (*J)(2, 0) = -(ic.dI_dVbe + dib);
        (*J)(2, 2) = 1.0 / tia.R_E + ic.dI_dVbe + dib;
      } else {
        (*J)(2, 2) = 1.0;
      }
    }
    return ic;
  };

  Eigen::Vector3d F;
  Eigen::Matrix3d J;
  int iter = 0;
  for (;; ++iter) {
    residual(x, F, &J);
    if (F.head(n).cwiseAbs().maxCoeff() < options.residual_tol) break;
    if (iter >= options.max_iterations)
      throw Error(ErrorCode::no_convergence,
                  "DC operating point: KCL residual " + std::to_string(F.cwiseAbs().maxCoeff()) +
                      " A after " + std::to_string(iter) + " iterations");

    Eigen::Vector3d dx = J.partialPivLu().solve(-F);
    if (!dx.allFinite()) throw Error(ErrorCode::no_convergence, "DC operating point: singular Jacobian");
    const double largest = dx.cwiseAbs().maxCoeff();
    if (largest > options.max_step) dx *= options.max_step / largest;

    // Backtrack until the KCL residual stops growing.
    const double f0 = F.head(n).norm();
    double alpha = 1.0;
    Eigen::Vector3d trial = x + dx, F_trial;
    residual(trial, F_trial, nullptr);
    while (F_trial.head(n).norm() > f0 && alpha > 1.0 / 1024.0) {
      alpha *= 0.5;
      trial = x + alpha * dx;
      residual(trial, F_trial, nullptr);
    }
    x = trial;
  }

  BiasPoint bp;
  const double v_e = has_emitter ? x(2) : 0.0;
  bp.V_in_dc = x(0);
  bp.V_out_dc = x(1);
  bp.V_BE = x(0) - v_e;
  bp.I_C = evaluate(law, bp.V_BE).I_C;
  bp.I_B = bp.I_C / hbt.beta;
  bp.V_CE = x(1) - v_e;
  bp.iterations = iter;

  if (!(bp.I_C > 0.0) || !(bp.V_CE > 0.0))
    throw Error(ErrorCode::no_convergence, "DC operating point is not in forward-active operation");
  if (bp.V_CE >= hbt.V_breakdown)
    throw Error(ErrorCode::breakdown_exceeded, "V_CE = " + std::to_string(bp.V_CE) +
                                                   " V reaches breakdown " +
                                                   std::to_string(hbt.V_breakdown) + " V");
  return bp;
}

HybridPiParams small_signal_params(const HBTParams& hbt, const BiasPoint& bias,
                                   const PhysicalConstants& constants) {
  if (!(bias.I_C > 0.0)) throw Error(ErrorCode::invalid_argument, "small_signal_params: I_C must be > 0");
  HybridPiParams p;
  p.g_m = bias.I_C / constants.thermal_voltage();
  p.r_pi = hbt.beta / p.g_m;
  const double c_total = p.g_m / (2.0 * std::numbers::pi * hbt.f_T);
  p.C_mu = hbt.C_mu_fraction * c_total;
  p.C_pi = c_total - p.C_mu;
  p.R_b = hbt.R_b;
  return p;
}

LinearNetwork build_tia_network(const TIADesign& tia, const HBTParams& hbt, const HybridPiParams& hpi,
                                const InputNode& input) {
  LinearNetwork net;
  const NodeId in = net.add_node(tia_input_node);
  const NodeId base = hpi.R_b > 0.0 ? net.add_node("base") : in;
  const NodeId emitter = tia.R_E > 0.0 ? net.add_node("emitter") : ground_node;
  const NodeId out = net.add_node(tia_output_node);

  net.add("I_pd", CurrentSource{ground_node, in, 1.0});
  if (input.external() > 0.0) net.add("C_in", Capacitor{in, ground_node, input.external()});
  if (hpi.R_b > 0.0) net.add("R_b", Resistor{in, base, hpi.R_b});
  net.add("r_pi", Resistor{base, emitter, hpi.r_pi});
  net.add("C_pi", Capacitor{base, emitter, hpi.C_pi});
  if (hpi.C_mu > 0.0) net.add("C_mu", Capacitor{base, out, hpi.C_mu});
  net.add("g_m", Transconductance{out, emitter, base, emitter, hpi.g_m});
  if (tia.R_E > 0.0) net.add("R_E", Resistor{emitter, ground_node, tia.R_E});
  net.add("R_F", Resistor{in, out, tia.R_F});
  net.add("R_C", Resistor{out, ground_node, tia.R_C});
  net.add("C_L", Capacitor{out, ground_node, hpi.C_total() / hbt.C_ratio});

  net.set_ports(in, out);
  net.set_output_pole(hbt.f_T);
  return net;
}

AmplifierAnalysis analyze_amplifier(const DetectorModel& model) {
  validate(model);
  AmplifierAnalysis a;
  a.bias = dc_operating_point(model.tia, model.hbt, model.constants);
  a.hpi = small_signal_params(model.hbt, a.bias, model.constants);
  a.network = build_tia_network(model.tia, model.hbt, a.hpi, model.input);
  return a;
}

double f3db_butterworth_estimate(double gain_bandwidth_hz, double C_in, double R_F) {
  if (!(gain_bandwidth_hz > 0.0 && C_in > 0.0 && R_F > 0.0))
    throw Error(ErrorCode::invalid_argument, "f3db_butterworth_estimate: arguments must be > 0");
  return std::sqrt(gain_bandwidth_hz / (2.0 * std::numbers::pi * C_in * R_F));
}

double gain_bandwidth_product(const HBTParams& hbt) {
  if (!(hbt.C_ratio > 0.0)) throw Error(ErrorCode::invalid_argument, "C_ratio must be > 0");
  return hbt.C_ratio * hbt.f_T;
}

double f3db_from_power(std::span<const double> freqs, std::span<const double> power) {
  if (freqs.size() != power.size() || freqs.size() < 3)
    throw Error(ErrorCode::invalid_argument, "f3db_from_spectrum: need >= 3 bins");
  std::vector<double> db(power.size());
  for (std::size_t i = 0; i < power.size(); ++i) db[i] = units::ratio_to_db(power[i]);

  const std::size_t first = freqs[0] > 0.0 ? 0 : 1;
  const double decade_end = 10.0 * freqs[first];
  double sum = 0.0, lo = db[0], hi = db[0];
  std::size_t count = 0;
  for (std::size_t i = 0; i < freqs.size() && freqs[i] <= decade_end; ++i) {
    sum += power[i];
    lo = std::min(lo, db[i]);
    hi = std::max(hi, db[i]);
    ++count;
  }
  if (hi - lo > 1.0)
    throw Error(ErrorCode::invalid_argument, "f3db_from_spectrum: first decade is not flat within 1 dB");
  const double threshold = units::ratio_to_db(sum / static_cast<double>(count)) - 3.0103;

  for (std::size_t i = 1; i < freqs.size(); ++i) {
    if (db[i] >= threshold) continue;
    const double x0 = freqs[i - 1] > 0.0 ? std::log10(freqs[i - 1]) : 0.0;
    const double x1 = std::log10(freqs[i]);
    if (freqs[i - 1] <= 0.0) return freqs[i];
    const double t = (db[i - 1] - threshold) / (db[i - 1] - db[i]);
    return std::pow(10.0, x0 + t * (x1 - x0));
  }
  throw Error(ErrorCode::no_crossing, "spectrum never falls 3 dB below its plateau within the grid");
}

double f3db_from_spectrum(const ComplexSpectrum& spectrum) {
  const auto p = spectrum.power();
  return f3db_from_power(spectrum.freqs, p);
}

double f3db_from_spectrum(const SpectrumTrace& trace) {
  const auto p = trace.linear();
  return f3db_from_power(trace.freqs, p);
}

}  // namespace homodyne

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "expect_error.hpp"
#include "generators.hpp"
#include "homodyne/circuit.hpp"
#include "homodyne/noise.hpp"

using namespace homodyne;
using Catch::Approx;

namespace {

constexpr double q = PhysicalConstants::q;
constexpr double kB = PhysicalConstants::k_B;
constexpr double pi = std::numbers::pi;

// Noise formula written out term by term.
double eq2(const DetectorModel& m, double I_C, double g_m, double f) {
  const double T = m.constants.temperature;
  const double C_T = 2.0 * m.input.C_pd_each + m.input.C_interconnect + m.input.C_amp_in;
  return 4.0 * kB * T / m.tia.R_F + 2.0 * q * I_C / m.hbt.beta +
         2.0 * q * I_C * std::pow(2.0 * pi * C_T, 2) * f * f / (g_m * g_m) +
         4.0 * kB * T * m.hbt.R_b * std::pow(4.0 * pi * m.input.C_pd_each, 2) * f * f;
}

struct Operating {
  DetectorModel model;
  BiasPoint bias;
  HybridPiParams hpi;
};

Operating at_current(DetectorModel m, double I_C) {
  Operating o{std::move(m), {}, {}};
  o.bias.I_C = I_C;
  o.hpi = small_signal_params(o.model.hbt, o.bias, o.model.constants);
  return o;
}

}  // namespace

TEST_CASE("Johnson floor of the feedback resistor", "[noise]") {
  auto o = at_current(paper_device(), 1e-15);
  const double v = input_referred_noise_psd(o.model, o.bias, o.hpi, 0.0);
  CHECK(v == Approx(2.761e-23).epsilon(1e-3));
  CHECK(v == Approx(4.0 * kB * 300.0 / 600.0).epsilon(1e-9));
}

TEST_CASE("noise PSD matches the hand-written formula term by term", "[noise]") {
  const auto o = at_current(paper_device(), 4.5e-3);
  for (double f : {0.0, 1e9, 10e9, 26.5e9})
    CHECK(input_referred_noise_psd(o.model, o.bias, o.hpi, f) == Approx(eq2(o.model, 4.5e-3, o.hpi.g_m, f)).epsilon(1e-12));
  const auto b = noise_budget(o.model, o.bias, o.hpi);
  CHECK(input_referred_noise_psd(o.model, o.bias, o.hpi, 0.0) == Approx(b.white()).epsilon(1e-15));
  const double e1 = input_referred_noise_psd(o.model, o.bias, o.hpi, 5e9) - b.white();
  const double e2 = input_referred_noise_psd(o.model, o.bias, o.hpi, 10e9) - b.white();
  CHECK(e2 == Approx(4.0 * e1).epsilon(1e-9));
  CHECK(b.johnson_feedback >= 0.0);
  CHECK(b.base_shot >= 0.0);
  CHECK(b.collector_f2_coeff >= 0.0);
  CHECK(b.base_resistance_f2_coeff >= 0.0);
}

TEST_CASE("shot noise current PSD", "[noise]") {
  CHECK(shot_noise_current_psd(1e-3) == Approx(3.204e-22).epsilon(1e-3));
  CHECK(shot_noise_current_psd(1e-3) == 2.0 * q * 1e-3);
  CHECK(shot_noise_current_psd(0.0) == 0.0);
  CHECK(shot_noise_current_psd(2e-3) == 2.0 * shot_noise_current_psd(1e-3));
  CHECK(testing::thrown_code([] { shot_noise_current_psd(-1.0); }) == "InvalidArgument");
}

TEST_CASE("output-referred noise", "[noise]") {
  const auto m = paper_device();
  const auto a = analyze_amplifier(m);
  const auto grid = linspace(10e6, 26.5e9, 256);
  const auto Z = a.transimpedance(grid);
  const double kT = kB * 300.0;
  for (double f : {10e6, 1e9, 13.3e9, 26.5e9}) {
    const auto dark = output_noise_psd(m, a.bias, a.hpi, Z, 0.0, f);
    CHECK(dark.shot == 0.0);
    CHECK(dark.electronic >= kT);
    const auto one = output_noise_psd(m, a.bias, a.hpi, Z, 1e-3, f);
    const auto two = output_noise_psd(m, a.bias, a.hpi, Z, 2e-3, f);
    CHECK(two.shot / two.electronic == Approx(2.0 * one.shot / one.electronic).epsilon(1e-12));
  }
  CHECK(kT == Approx(4.14e-21).epsilon(1e-3));
  // Exact at a grid point: |Z|^2 2qI / 200.
  const auto at = output_noise_psd(m, a.bias, a.hpi, Z, 1e-3, grid[10]);
  CHECK(at.shot == Approx(std::norm(Z.values[10]) * 2.0 * q * 1e-3 / 200.0).epsilon(1e-12));
  CHECK(testing::thrown_code([&] { output_noise_psd(m, a.bias, a.hpi, Z, 1e-3, 30e9); }) == "OutOfGrid");
}

TEST_CASE("clearance spectrum", "[noise]") {
  const ClearanceModel cm{30.62, 1.0, 3.42e-21};
  CHECK(clearance_spectrum(cm, 0.0) == Approx(31.62));
  const ClearanceModel flat{30.62, 1.0, 0.0};
  for (double f : {0.0, 1e9, 1e12}) CHECK(10.0 * std::log10(clearance_spectrum(flat, f)) == Approx(15.0).margin(1e-3));
  double last = clearance_spectrum(cm, 0.0);
  for (double f = 1e9; f < 1e14; f *= 1.5) {
    const double v = clearance_spectrum(cm, f);
    CHECK(v < last);
    CHECK(v >= 1.0);
    last = v;
  }
  CHECK(clearance_spectrum(cm, 1e16) == Approx(1.0).margin(1e-9));
  const auto n = ClearanceModel{6.0, 2.0, 4.0}.normalized();
  CHECK(n.A == 3.0);
  CHECK(n.B == 1.0);
  CHECK(n.C == 2.0);
}

TEST_CASE("clearance from the noise budget", "[noise]") {
  const auto m = paper_device();
  const auto a = analyze_amplifier(m);
  const auto cm = clearance_from_budget(m, a.bias, a.hpi, 2e-3);
  CHECK(cm.A == Approx(6.41e-22).epsilon(1e-3));
  CHECK(cm.B == Approx(4.0 * kB * 300.0 / 600.0 + 2.0 * q * a.bias.I_C / m.hbt.beta).epsilon(1e-12));
  CHECK(10.0 * std::log10(cm.A / cm.B) > 10.0);

  const auto zero = clearance_from_budget(m, a.bias, a.hpi, 0.0);
  CHECK(zero.A == 0.0);
  CHECK(zero.at(1e9) == 1.0);

  const auto twice = clearance_from_budget(m, a.bias, a.hpi, 4e-3);
  CHECK(twice.A == 2.0 * cm.A);
  CHECK(twice.B == cm.B);
  CHECK(twice.C == cm.C);
}

TEST_CASE("shot-noise efficiency", "[noise]") {
  CHECK(shot_noise_efficiency(15.0) == Approx(0.968).margin(1e-3));
  CHECK(shot_noise_efficiency(10.0) == Approx(0.9).epsilon(1e-12));
  CHECK(shot_noise_efficiency(0.0) == 0.0);
}

TEST_CASE("noise budget table rows", "[noise]") {
  const auto o = at_current(paper_device(), 4.5e-3);
  const auto b = noise_budget(o.model, o.bias, o.hpi);
  const std::vector<double> f{0.0, 1e9};
  const auto rows = noise_budget_table(b, f);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].term == "johnson_feedback");
  CHECK(rows[4].term == "total");
  CHECK(rows[9].value == Approx(b.total(1e9)));
  CHECK(rows[2].value == 0.0);
}

TEST_CASE("property: noise PSD is monotone in f, T, I_C and capacitance", "[noise][property]") {
  testing::Gen gen(41);
  for (int i = 0; i < 500; ++i) {
    const auto base = gen.model();
    const double I_C = gen.log_uniform(1e-4, 1e-2);
    const auto o = at_current(base, I_C);
    const double f = gen.uniform(0.0, 50e9);
    const double v = input_referred_noise_psd(o.model, o.bias, o.hpi, f);
    const double k = gen.uniform(1.01, 2.0);
    INFO("trial " << i);

    CHECK(input_referred_noise_psd(o.model, o.bias, o.hpi, f * k + 1.0) >= v);

    auto hot = o.model;
    hot.constants.temperature *= k;
    CHECK(input_referred_noise_psd(hot, o.bias, o.hpi, f) >= v);

    // Larger I_C at the same g_m raises both shot terms.
    auto more = o.bias;
    more.I_C *= k;
    CHECK(input_referred_noise_psd(o.model, more, o.hpi, f) >= v);

    for (int which = 0; which < 3; ++which) {
      auto c = o.model;
      double& cap = which == 0 ? c.input.C_pd_each : which == 1 ? c.input.C_interconnect : c.input.C_amp_in;
      cap *= k;
      CHECK(input_referred_noise_psd(c, o.bias, o.hpi, f) >= v);
    }
  }
}

TEST_CASE("property: budget clearance equals the direct noise ratio", "[noise][property]") {
  testing::Gen gen(42);
  for (int i = 0; i < 500; ++i) {
    const auto o = at_current(gen.model(), gen.log_uniform(1e-4, 1e-2));
    const double I = gen.log_uniform(1e-6, 1e-2);
    const double f = gen.uniform(0.0, 1e11);
    const double amp = eq2(o.model, o.bias.I_C, o.hpi.g_m, f);
    const double direct = (2.0 * q * I + amp) / amp;
    const auto cm = clearance_from_budget(o.model, o.bias, o.hpi, I);
    CHECK(clearance_spectrum(cm, f) == Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("property: efficiency is monotone and bounded", "[noise][property]") {
  testing::Gen gen(43);
  for (int i = 0; i < 1000; ++i) {
    const double c = gen.uniform(0.0, 60.0);
    const double e = shot_noise_efficiency(c);
    CHECK(e >= 0.0);
    CHECK(e < 1.0);
    CHECK(shot_noise_efficiency(c + gen.uniform(0.01, 5.0)) > e);
  }
}

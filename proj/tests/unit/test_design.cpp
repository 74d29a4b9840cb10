#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "expect_error.hpp"
#include "generators.hpp"
#include "homodyne/design.hpp"
#include "homodyne/units.hpp"

using namespace homodyne;
using Catch::Approx;

TEST_CASE("feedback resistor bandwidth cap", "[design]") {
  DesignConstraints c;
  const auto r = select_feedback_resistor(c, 2e-3);
  CHECK(r.r_max == Approx(650.0).margin(1.0));
  CHECK(r.r_max <= 650.0);
  CHECK(r.feasible);
  CHECK(r.binding.empty());
  CHECK(f3db_butterworth_estimate(c.A0fA, c.C_in, r.r_max) == Approx(c.min_bandwidth).epsilon(1e-3));
  CHECK(dc_clearance_db(c, r.r_min, 2e-3) == Approx(c.min_clearance_db).epsilon(1e-3));
}

TEST_CASE("contradictory constraints are infeasible on clearance", "[design]") {
  DesignConstraints c;
  c.min_clearance_db = 30.0;
  c.min_bandwidth = 40e9;
  const auto r = select_feedback_resistor(c, 1e-4);
  CHECK_FALSE(r.feasible);
  CHECK(r.binding == "clearance");
  CHECK(r.r_min > r.r_max);
}

TEST_CASE("termination and base shot raise the clearance bound", "[design]") {
  DesignConstraints c;
  const double plain = select_feedback_resistor(c, 2e-3).r_min;
  c.termination_ohm = 50.0;
  const auto t = select_feedback_resistor(c, 2e-3);
  CHECK(t.r_min > plain);
  CHECK(dc_clearance_db(c, t.r_min, 2e-3) == Approx(c.min_clearance_db).epsilon(1e-3));
  c.base_shot = 2.0 * PhysicalConstants::q * 4.5e-3 / 200.0;
  const auto b = select_feedback_resistor(c, 2e-3);
  CHECK(b.r_min > t.r_min);
  CHECK(dc_clearance_db(c, b.r_min, 2e-3) == Approx(c.min_clearance_db).epsilon(1e-3));
  c.base_shot = 1.0;
  CHECK(std::isinf(select_feedback_resistor(c, 2e-3).r_min));
}

TEST_CASE("constraint validation", "[design]") {
  DesignConstraints c;
  c.C_in = 0.0;
  CHECK(testing::thrown_code([&] { select_feedback_resistor(c, 1e-3); }) == "InvalidArgument");
  CHECK(testing::thrown_code([] { select_feedback_resistor({}, 0.0); }) == "InvalidArgument");
}

TEST_CASE("property: relaxing the bandwidth widens the interval", "[design][property]") {
  testing::Gen gen(91);
  for (int i = 0; i < 500; ++i) {
    DesignConstraints c;
    c.min_clearance_db = gen.uniform(1.0, 25.0);
    c.min_bandwidth = gen.log_uniform(1e9, 50e9);
    c.A0fA = gen.log_uniform(50e9, 500e9);
    c.C_in = gen.log_uniform(20e-15, 500e-15);
    c.termination_ohm = gen.coin() ? 50.0 : 0.0;
    const double I = gen.log_uniform(1e-5, 1e-2);
    const auto r = select_feedback_resistor(c, I);
    auto relaxed = c;
    relaxed.min_bandwidth *= gen.uniform(0.3, 0.99);
    const auto w = select_feedback_resistor(relaxed, I);
    CHECK(w.r_max > r.r_max);
    CHECK(w.r_min == r.r_min);
    if (r.feasible) CHECK(w.feasible);
    // Endpoints meet their constraints with equality.
    CHECK(f3db_butterworth_estimate(c.A0fA, c.C_in, r.r_max) == Approx(c.min_bandwidth).epsilon(1e-3));
    CHECK(dc_clearance_db(c, r.r_min, I) == Approx(c.min_clearance_db).epsilon(1e-3));
  }
}

TEST_CASE("bias tuning reaches 4.5 mA under the preset supplies", "[design]") {
  const auto m = paper_device();
  const auto t = tune_bias_resistors(4.5e-3, m.tia, m.hbt, m.constants);
  CHECK(t.bias.V_CE < m.hbt.V_breakdown);
  CHECK(t.bias.I_C == Approx(4.5e-3).epsilon(0.01));
  TIADesign re = m.tia;
  re.R_C = t.R_C;
  re.R_E = t.R_E;
  const auto again = dc_operating_point(re, m.hbt, m.constants);
  CHECK(again.I_C == Approx(4.5e-3).epsilon(0.01));
  CHECK(again.V_CE < m.hbt.V_breakdown);
}

TEST_CASE("bias tuning error paths", "[design]") {
  const auto m = paper_device();
  CHECK(testing::thrown_code([&] { tune_bias_resistors(0.0, m.tia, m.hbt, m.constants); }) == "Infeasible");
  CHECK(testing::thrown_code([&] { tune_bias_resistors(1.0, m.tia, m.hbt, m.constants); }) == "Infeasible");
}

TEST_CASE("property: tuned bias respects breakdown", "[design][property]") {
  testing::Gen gen(92);
  BiasSearch coarse;
  coarse.r_c_points = 16;
  coarse.r_e_points = 6;
  for (int i = 0; i < 15; ++i) {
    const auto m = gen.model();
    const double target = gen.log_uniform(1e-3, 6e-3);
    try {
      const auto t = tune_bias_resistors(target, m.tia, m.hbt, m.constants, coarse);
      CHECK(t.bias.V_CE < m.hbt.V_breakdown);
      CHECK(t.bias.I_C == Approx(target).epsilon(0.01));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::infeasible);
    }
  }
}

TEST_CASE("interconnect trade-off", "[design]") {
  const InputNode base = paper_device().input;
  const std::vector<double> alts{7e-15, 105e-15};
  const auto rows = interconnect_tradeoff(base, alts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].bandwidth_ratio == 1.0);
  CHECK(rows[1].C_in == Approx(223e-15).epsilon(1e-12));
  CHECK(rows[1].bandwidth_ratio == Approx(0.749).margin(1e-3));
  CHECK(rows[1].speedup == Approx(1.336).margin(1e-3));
  CHECK(rows[1].speedup == Approx(std::sqrt(223.0 / 125.0)).epsilon(1e-12));

  std::vector<double> sweep;
  for (double c = 0.0; c < 500e-15; c += 10e-15) sweep.push_back(c);
  const auto many = interconnect_tradeoff(base, sweep);
  for (std::size_t i = 1; i < many.size(); ++i) CHECK(many[i].bandwidth_ratio < many[i - 1].bandwidth_ratio);
  const std::vector<double> neg{-1e-15};
  CHECK(testing::thrown_code([&] { interconnect_tradeoff(base, neg); }) == "InvalidArgument");
}

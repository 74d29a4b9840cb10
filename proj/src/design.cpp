#include "homodyne/design.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "homodyne/errors.hpp"
#include "homodyne/trace.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

namespace {

double white_noise(const DesignConstraints& c, double R_F) {
  const double k = PhysicalConstants::k_B;
  return 4.0 * k * c.temperature / R_F +
         4.0 * k * c.termination_temperature * c.termination_ohm / (R_F * R_F) + c.base_shot;
}

}  // namespace

void check_constraints(const DesignConstraints& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::invalid_argument, std::string("design constraint ") + name + " must be > 0");
  };
  positive(c.min_clearance_db, "min_clearance_db");
  positive(c.min_bandwidth, "min_bandwidth");
  positive(c.A0fA, "A0fA");
  positive(c.C_in, "C_in");
  positive(c.temperature, "temperature");
  positive(c.termination_temperature, "termination_temperature");
  if (!(c.termination_ohm >= 0.0)) throw Error(ErrorCode::invalid_argument, "termination_ohm must be >= 0");
  if (!(c.base_shot >= 0.0)) throw Error(ErrorCode::invalid_argument, "base_shot must be >= 0");
}

double dc_clearance_db(const DesignConstraints& c, double R_F, double I_total_ref) {
  if (!(R_F > 0.0)) throw Error(ErrorCode::invalid_argument, "R_F must be > 0");
  return units::ratio_to_db(1.0 + 2.0 * PhysicalConstants::q * I_total_ref / white_noise(c, R_F));
}

FeedbackRange select_feedback_resistor(const DesignConstraints& c, double I_total_ref) {
  check_constraints(c);
  if (!(I_total_ref > 0.0)) throw Error(ErrorCode::invalid_argument, "reference photocurrent must be > 0");
  const double k = PhysicalConstants::k_B;

  // Solve a x^2 + b x = budget for x = 1/R_F.
  const double budget = 2.0 * PhysicalConstants::q * I_total_ref / (units::db_to_ratio(c.min_clearance_db) - 1.0) - c.base_shot;
  const double a = 4.0 * k * c.termination_temperature * c.termination_ohm;
  const double b = 4.0 * k * c.temperature;
  FeedbackRange out;
  out.r_max = c.A0fA / (2.0 * std::numbers::pi * c.C_in * c.min_bandwidth * c.min_bandwidth);
  if (budget <= 0.0) {
    out.r_min = std::numeric_limits<double>::infinity();
  } else {
    const double x = a > 0.0 ? 2.0 * budget / (b + std::sqrt(b * b + 4.0 * a * budget)) : budget / b;
    out.r_min = 1.0 / x;
  }
  out.feasible = out.r_min <= out.r_max;
  if (!out.feasible) out.binding = "clearance";
  return out;
}

BiasTuning tune_bias_resistors(double target_IC, const TIADesign& tia, const HBTParams& hbt,
                               const PhysicalConstants& constants, const BiasSearch& search) {
  if (!(target_IC > 0.0) || !std::isfinite(target_IC))
    throw Error(ErrorCode::infeasible, "target collector current must be > 0");
  if (search.r_c_points < 2 || search.r_e_points < 1 || !(search.r_c_min > 0.0) ||
      !(search.r_c_max > search.r_c_min) || !(search.r_e_min > 0.0) || !(search.r_e_max >= search.r_e_min))
    throw Error(ErrorCode::invalid_argument, "invalid bias search grid");

  const auto law = calibrated_law(hbt, constants);
  auto solve = [&](double r_c, double r_e) -> std::optional<BiasPoint> {
    TIADesign t = tia;
    t.R_C = r_c;
    t.R_E = r_e;
    try {
      return dc_operating_point(t, hbt, law);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  const auto r_cs = logspace(search.r_c_min, search.r_c_max, static_cast<std::size_t>(search.r_c_points));
  const auto r_es = search.r_e_points == 1
                        ? std::vector<double>{search.r_e_min}
                        : logspace(search.r_e_min, search.r_e_max, static_cast<std::size_t>(search.r_e_points));
  const double rc0 = tia.R_C;
  const double re0 = std::max(tia.R_E, search.r_e_min);

  std::optional<BiasTuning> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (double r_e : r_es) {
    std::vector<std::optional<BiasPoint>> column;
    for (double r_c : r_cs) column.push_back(solve(r_c, r_e));
    for (std::size_t i = 0; i + 1 < r_cs.size(); ++i) {
      if (!column[i] || !column[i + 1]) continue;
      // I_C falls as R_C grows; look for the bracketing pair.
      if (!(column[i]->I_C >= target_IC && column[i + 1]->I_C <= target_IC)) continue;
      double lo = std::log(r_cs[i]), hi = std::log(r_cs[i + 1]);
      std::optional<BiasPoint> bp;
      double r_c = 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        r_c = std::exp(mid);
        bp = solve(r_c, r_e);
        if (!bp) break;
        if (std::abs(bp->I_C / target_IC - 1.0) <= search.rel_tol) break;
        (bp->I_C > target_IC ? lo : hi) = mid;
      }
      if (!bp || std::abs(bp->I_C / target_IC - 1.0) > search.rel_tol) continue;
      if (!(bp->V_CE < hbt.V_breakdown)) continue;
      const double d = std::pow(std::log(r_c / rc0), 2) + std::pow(std::log(r_e / re0), 2);
      if (d < best_distance) {
        best_distance = d;
        best = BiasTuning{r_c, r_e, *bp};
      }
    }
  }
  if (!best)
    throw Error(ErrorCode::infeasible, "no (R_C, R_E) on the search grid reaches I_C = " +
                                           std::to_string(target_IC) + " A below breakdown");
  return *best;
}

std::vector<InterconnectRow> interconnect_tradeoff(const InputNode& base,
                                                   std::span<const double> alternatives) {
  if (!(base.C_pd_each >= 0.0 && base.C_interconnect >= 0.0 && base.C_amp_in >= 0.0) || !(base.total() > 0.0))
    throw Error(ErrorCode::invalid_argument, "base input capacitances must be >= 0 with a positive total");
  std::vector<InterconnectRow> rows;
  for (double c : alternatives) {
    if (!(c >= 0.0)) throw Error(ErrorCode::invalid_argument, "interconnect capacitance must be >= 0");
    InputNode alt = base;
    alt.C_interconnect = c;
    InterconnectRow row;
    row.C_interconnect = c;
    row.C_in = alt.total();
    row.bandwidth_ratio = std::sqrt(base.total() / alt.total());
    row.speedup = 1.0 / row.bandwidth_ratio;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace homodyne

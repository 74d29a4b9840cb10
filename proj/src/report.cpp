#include "homodyne/report.hpp"

#include <algorithm>
#include <cmath>

#include "homodyne/errors.hpp"
#include "homodyne/io.hpp"
#include "homodyne/units.hpp"

namespace homodyne {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json fit_result_to_json(const FitResult& fit) {
  json params = json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    params[fit.names[i]] = {{"value", finite_or_null(fit.params[i])},
                            {"std_err", finite_or_null(fit.std_errs[i])},
                            {"fixed", static_cast<bool>(fit.fixed[i])}};
  return {{"params", params},
          {"residual_norm", finite_or_null(fit.residual_norm)},
          {"gradient_norm", finite_or_null(fit.gradient_norm)},
          {"converged", fit.converged},
          {"n_iter", fit.n_iter}};
}

json build_report(const CampaignResult& campaign, const ReportOptions& options) {
  if (campaign.steps.empty()) throw Error(ErrorCode::invalid_argument, "campaign has no steps");
  const auto top = std::max_element(campaign.steps.begin(), campaign.steps.end(), [](const auto& a, const auto& b) {
    return a.currents.total() < b.currents.total();
  });

  const auto signal = subtract_noise_floor(top->trace, campaign.danl);
  const auto electronic = subtract_noise_floor(campaign.dark, campaign.danl);
  const auto shot = subtract_noise_floor(signal.trace, electronic.trace);
  const auto deembedded = de_embed(shot.trace, campaign.s21);

  // Bins clipped at any subtraction carry no information and are left out of both fits.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < shot.clipped.size(); ++i)
    if (!signal.clipped[i] && !electronic.clipped[i] && !shot.clipped[i]) keep.push_back(i);
  if (keep.size() < 3) throw Error(ErrorCode::invalid_argument, "fewer than 3 bins survive noise-floor subtraction");
  const auto subset = [&](const SpectrumTrace& t, const std::vector<double>& lin, TraceUnit unit) {
    std::vector<double> f, v;
    for (std::size_t i : keep) {
      f.push_back(t.freqs[i]);
      v.push_back(lin[i]);
    }
    return make_trace(std::move(f), v, unit, t.rbw, t.stage);
  };
  const auto bw = fit_bandwidth(subset(deembedded, deembedded.linear(), deembedded.unit), options.shape);

  const auto s_lin = signal.trace.linear();
  const auto e_lin = electronic.trace.linear();
  std::vector<double> ratio(s_lin.size());
  for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = s_lin[i] / e_lin[i];
  auto clearance_trace = subset(signal.trace, ratio, TraceUnit::ratio);
  clearance_trace.stage = TraceStage::electronics_subtracted;
  const auto cl = fit_clearance(clearance_trace);
  const double clearance_dc_db = units::ratio_to_db(cl.model.at(0.0));

  std::vector<std::pair<double, double>> points;
  for (const auto& p : variance_vs_photocurrent(campaign, options.variance_frequency))
    if (p.I_total > 0.0 && p.electronics_subtracted > 0.0) points.emplace_back(p.I_total, p.electronics_subtracted);

  json linearity = {{"frequency_hz", options.variance_frequency}, {"n_points", points.size()}};
  if (points.size() >= 3) {
    const auto g = fit_loglog_gradient(points);
    linearity["fit"] = fit_result_to_json(g);
    linearity["gradient"] = g.value("gradient");
    linearity["gradient_err"] = g.error("gradient");
  } else {
    linearity["fit"] = nullptr;
    linearity["gradient"] = nullptr;
    linearity["gradient_err"] = nullptr;
  }

  json crossings = json::object();
  for (const auto& [t, f] : cl.crossings) crossings[format_double(t) + "_db"] = finite_or_null(f);

  json steps = json::array();
  for (const auto& s : campaign.steps)
    steps.push_back({{"lo_power_dbm", s.lo_power_dbm},
                     {"i_total_a", s.currents.total()},
                     {"i_difference_a", s.currents.difference()},
                     {"qe_scale_bottom", s.qe_scale_bottom}});

  const std::size_t clipped = shot.clipped.size() - keep.size();

  return {
      {"model", campaign.model.name},
      {"model_hash", campaign.model_hash},
      {"seed", campaign.seed},
      {"reference_step_lo_power_dbm", top->lo_power_dbm},
      {"bandwidth",
       {{"shape", options.shape == BandwidthShape::printed ? "printed" : "butterworth2"},
        {"f3db_hz", finite_or_null(bw.f3db)},
        {"f3db_err_hz", finite_or_null(bw.f3db_err)},
        {"dc_gain", finite_or_null(bw.dc_gain)},
        {"in_band", bw.in_band},
        {"clipped_bins", clipped},
        {"fit", fit_result_to_json(bw.fit)}}},
      {"clearance",
       {{"dc_db", finite_or_null(clearance_dc_db)},
        {"A", cl.model.A},
        {"B", cl.model.B},
        {"C", cl.model.C},
        {"crossings_hz", crossings},
        {"fit", fit_result_to_json(cl.fit)}}},
      {"linearity", linearity},
      {"shot_noise_efficiency", finite_or_null(shot_noise_efficiency(clearance_dc_db))},
      {"steps", steps},
  };
}

}  // namespace homodyne

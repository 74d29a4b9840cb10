#pragma once

#include <json.hpp>

#include "homodyne/fit.hpp"
#include "homodyne/simulate.hpp"

namespace homodyne {

struct ReportOptions {
  double variance_frequency = 1e9;  // Hz, linearity analysis
  BandwidthShape shape = BandwidthShape::printed;
};

// Subtracts DANL and dark noise, de-embeds the cable, fits bandwidth and clearance on
// the highest-power step, fits the variance-vs-photocurrent gradient and derives the
// shot-noise efficiency. Output is a deterministic function of the campaign.
nlohmann::json build_report(const CampaignResult& campaign, const ReportOptions& options = {});

nlohmann::json fit_result_to_json(const FitResult& fit);

}  // namespace homodyne

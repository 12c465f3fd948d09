#pragma once

#include "cams/inference.hpp"
#include "cams/model.hpp"
#include "cams/reporting.hpp"

#include <string>
#include <vector>

namespace cams {

struct BubbleLine {
    std::string method;
    std::string subgroup;
    double pi = 0.0;
    double median = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Study subgroup estimates and contrasts with 95% CIs, then the pooled
/// parameters of every fit.
std::string forest_csv(const MetaDataset& data, const std::vector<const FitResult*>& fits);

/// One row per observation: study, subgroup, ifrac, estimate, CI and inverse-variance weight.
std::string bubble_csv(const MetaDataset& data);

/// Fitted subgroup effects against the prevalence: CAMS mu_A(pi), mu_B(pi)
/// and the flat BMS subgroup effects when a BMS fit is given.
std::vector<BubbleLine> bubble_lines(const FitResult& cams, const FitResult* bms, int points = 51);
std::string bubble_lines_csv(const std::vector<BubbleLine>& lines);

std::string width_curve_csv(const OptimalIf& opt);

/// Long format: model, tau_gamma, median, 25% and 75% quantiles.
std::string trace_csv(const std::vector<std::pair<std::string, std::vector<TracePoint>>>& traces);

// Minimal static SVG renderings of the same data.
std::string forest_svg(const MetaDataset& data, const std::vector<const FitResult*>& fits);
std::string bubble_svg(const MetaDataset& data, const std::vector<BubbleLine>& lines);
std::string width_curve_svg(const OptimalIf& opt);
std::string trace_svg(const std::vector<std::pair<std::string, std::vector<TracePoint>>>& traces);

} // namespace cams

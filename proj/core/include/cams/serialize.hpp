#pragma once

#include "cams/inference.hpp"
#include "cams/reporting.hpp"
#include "cams/verify.hpp"

#include <optional>
#include <string>

namespace cams {

/// Deterministic JSON text (fixed key order, shortest round-trip numbers,
/// NaN as null). All functions return a complete document ending in '\n'.

std::string fit_to_json(const FitResult& fit, const std::string& scale_label);

struct ReportDocument {
    std::string scale_label;
    std::string prevalence_spec;
    ReportedEffects effects;
    StrategyTable table;
    std::optional<MapPrevalence> map;
    std::optional<OptimalIf> optimal;
};

std::string report_to_json(const ReportDocument& doc);

std::string verification_to_json(const VerificationReport& report);

} // namespace cams

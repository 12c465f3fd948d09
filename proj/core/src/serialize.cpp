#include "cams/serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace cams {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json summary_json(const Summary& s) {
    Json j;
    j["median"] = num(s.median);
    j["lower"] = num(s.lower);
    j["upper"] = num(s.upper);
    j["mean"] = num(s.mean);
    j["sd"] = num(s.sd);
    j["prob_positive"] = num(s.prob_positive);
    j["prob_negative"] = num(s.prob_negative);
    j["identified"] = s.identified;
    return j;
}

Json effect_json(const EffectSummary& e) {
    Json j;
    j["log"] = summary_json(e.log);
    j["exp"] = {{"median", num(e.exp_median)}, {"lower", num(e.exp_lower)}, {"upper", num(e.exp_upper)}};
    return j;
}

Json effects_json(const ReportedEffects& r) {
    Json j;
    j["prevalence"] = {{"label", r.prevalence_label}, {"value", num(r.prevalence)}};
    if (r.prevalence_sd) {
        j["prevalence"]["sd"] = num(*r.prevalence_sd);
    }
    j["mu_a"] = effect_json(r.mu_a);
    j["mu_b"] = effect_json(r.mu_b);
    j["overall"] = effect_json(r.overall);
    j["interaction"] = effect_json(r.interaction);
    j["warnings"] = r.warnings;
    return j;
}

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Json axis_json(const GridAxis& a) {
    Json j;
    j["nodes"] = a.size();
    j["min"] = a.nodes().front();
    j["max"] = a.nodes().back();
    return j;
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

} // namespace

std::string fit_to_json(const FitResult& fit, const std::string& scale_label) {
    Json j;
    j["estimator"] = to_string(fit.estimator());
    j["scale"] = scale_label;
    if (fit.estimator() == Estimator::CAMS) {
        j["parametrization"] = to_string(fit.parametrization());
    }
    Json params = Json::array();
    for (const auto& s : fit.summaries()) {
        Json p;
        p["name"] = s.name;
        p["kind"] = fit.has_scale(s.name) ? "scale" : (s.derived ? "derived" : "location");
        p["summary"] = summary_json(s.summary);
        if (!fit.has_scale(s.name)) {
            p["exp"] = {{"median", num(std::exp(s.summary.median))},
                        {"lower", num(std::exp(s.summary.lower))},
                        {"upper", num(std::exp(s.summary.upper))}};
        }
        params.push_back(p);
    }
    j["parameters"] = params;

    Json flat = Json::array();
    const Eigen::MatrixXd dirs = fit.flat_directions();
    for (Eigen::Index c = 0; c < dirs.cols(); ++c) {
        Json col = Json::array();
        for (Eigen::Index r = 0; r < dirs.rows(); ++r) {
            col.push_back(num(dirs(r, c)));
        }
        flat.push_back(col);
    }
    j["flat_directions"] = flat;
    j["study_information_fractions"] = fit.study_pi();
    j["warnings"] = fit.warnings();

    const auto& pv = fit.provenance();
    Json prov;
    prov["priors"] = {{"tau_half_normal_scale", pv.priors.tau_scale},
                      {"tau_gamma_half_normal_scale", pv.priors.tau_gamma_scale},
                      {"location", pv.priors.default_location.flat
                                       ? Json("flat")
                                       : Json({{"normal_mean", pv.priors.default_location.mean},
                                               {"normal_sd", pv.priors.default_location.sd}})}};
    Json axes;
    for (std::size_t a = 0; a < fit.grid().axes.size(); ++a) {
        axes[fit.grid().axis_names[a]] = axis_json(fit.grid().axes[a]);
    }
    prov["grid"] = {{"axes", axes}, {"quantile_resolution", pv.grid.quantile_resolution}};
    prov["dataset_hash"] = hex(pv.dataset_hash);
    prov["seed"] = pv.seed ? Json(*pv.seed) : Json(nullptr);
    j["provenance"] = prov;
    return dump(j);
}

std::string report_to_json(const ReportDocument& doc) {
    Json j;
    j["scale"] = doc.scale_label;
    j["prevalence_spec"] = doc.prevalence_spec;
    j["effects"] = effects_json(doc.effects);
    Json rows = Json::array();
    for (const auto& r : doc.table.rows) {
        Json row;
        row["method"] = r.method;
        row["effects"] = effects_json(r.effects);
        rows.push_back(row);
    }
    j["strategy_table"] = {{"rows", rows}, {"warnings", doc.table.warnings}};
    if (doc.optimal) {
        Json curve = Json::array();
        for (const auto& p : doc.optimal->curve) {
            curve.push_back({{"pi", p.pi}, {"width_a", p.width_a}, {"width_b", p.width_b}, {"total", p.total()}});
        }
        j["optimal_if"] = {{"pi", doc.optimal->pi},
                           {"flat", doc.optimal->flat},
                           {"range", {doc.optimal->range_lo, doc.optimal->range_hi}},
                           {"warnings", doc.optimal->warnings},
                           {"width_curve", curve}};
    }
    if (doc.map) {
        const auto& m = *doc.map;
        j["map_prevalence"] = {{"beta_a", m.a},
                               {"beta_b", m.b},
                               {"pooled", {{"median", m.pooled_median}, {"lower", m.pooled_lower}, {"upper", m.pooled_upper}}},
                               {"predictive",
                                {{"mean", m.predictive_mean},
                                 {"sd", m.predictive_sd},
                                 {"median", m.predictive_median},
                                 {"lower", m.predictive_lower},
                                 {"upper", m.predictive_upper}}},
                               {"studies_used", m.studies_used},
                               {"warnings", m.warnings}};
    }
    return dump(j);
}

std::string verification_to_json(const VerificationReport& report) {
    Json j;
    j["base_seed"] = report.base_seed;
    j["seeds"] = report.seeds;
    j["status"] = report.all_as_expected() ? "PASS" : "FAIL";
    j["unexpected"] = report.failures();
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        Json o;
        o["name"] = c.name;
        o["tier"] = c.tier;
        o["value"] = num(c.value);
        o["threshold"] = c.threshold;
        o["outcome"] = c.pass ? "PASS" : "FAIL";
        o["expected"] = c.expected_pass ? "PASS" : "FAIL";
        o["as_expected"] = c.as_expected();
        if (!c.detail.empty()) {
            o["detail"] = c.detail;
        }
        checks.push_back(o);
    }
    j["checks"] = checks;
    return dump(j);
}

} // namespace cams

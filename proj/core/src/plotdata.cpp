#include "cams/plotdata.hpp"
#include "cams/format.hpp"

#include <cmath>
#include <sstream>

namespace cams {

namespace {

constexpr double kZ975 = 1.959963984540054;

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return q + "\"";
}

std::string f(double v) {
    return format_double(v);
}

} // namespace

std::string forest_csv(const MetaDataset& data, const std::vector<const FitResult*>& fits) {
    std::ostringstream out;
    out << "section,label,series,estimate,lower,upper,weight\n";
    for (const auto& s : data.studies) {
        auto row = [&](const char* series, double est, double se) {
            out << "study," << quote(s.study_id) << ',' << series << ',' << f(est) << ',' << f(est - kZ975 * se) << ','
                << f(est + kZ975 * se) << ',' << f(1.0 / (se * se)) << '\n';
        };
        row("A", s.obs_a.estimate, s.obs_a.std_error);
        row("B", s.obs_b.estimate, s.obs_b.std_error);
        row("contrast", s.contrast(), std::sqrt(s.contrast_variance()));
    }
    for (const FitResult* fit : fits) {
        if (fit == nullptr) {
            continue;
        }
        for (const auto& p : fit->summaries()) {
            if (fit->has_scale(p.name) || !p.summary.identified) {
                continue;
            }
            out << "pooled," << to_string(fit->estimator()) << ',' << p.name << ',' << f(p.summary.median) << ','
                << f(p.summary.lower) << ',' << f(p.summary.upper) << ",\n";
        }
    }
    return out.str();
}

std::string bubble_csv(const MetaDataset& data) {
    std::ostringstream out;
    out << "study,subgroup,ifrac,estimate,lower,upper,weight\n";
    for (const auto& s : data.studies) {
        for (const auto* o : {&s.obs_a, &s.obs_b}) {
            out << quote(s.study_id) << ',' << (o == &s.obs_a ? "A" : "B") << ',' << f(s.info_fraction) << ','
                << f(o->estimate) << ',' << f(o->estimate - kZ975 * o->std_error) << ','
                << f(o->estimate + kZ975 * o->std_error) << ',' << f(1.0 / o->variance()) << '\n';
        }
    }
    return out.str();
}

std::vector<BubbleLine> bubble_lines(const FitResult& cams, const FitResult* bms, int points) {
    if (points < 2) {
        throw ContractError("bubble_lines: at least two points are required");
    }
    std::vector<BubbleLine> lines;
    for (int i = 0; i < points; ++i) {
        const double pi = static_cast<double>(i) / (points - 1);
        const auto e = effects_at(cams, pi);
        lines.push_back({"CAMS", "A", pi, e.mu_a.log.median, e.mu_a.log.lower, e.mu_a.log.upper});
        lines.push_back({"CAMS", "B", pi, e.mu_b.log.median, e.mu_b.log.lower, e.mu_b.log.upper});
    }
    if (bms != nullptr) {
        for (double sign : {-0.5, 0.5}) {
            const Eigen::VectorXd c = bms->coefficients("alpha") + sign * bms->coefficients("gamma");
            const Summary s = summarize(bms->functional(c));
            for (double pi : {0.0, 1.0}) {
                lines.push_back({"BMS", sign < 0 ? "A" : "B", pi, s.median, s.lower, s.upper});
            }
        }
    }
    return lines;
}

std::string bubble_lines_csv(const std::vector<BubbleLine>& lines) {
    std::ostringstream out;
    out << "method,subgroup,pi,median,lower,upper\n";
    for (const auto& l : lines) {
        out << l.method << ',' << l.subgroup << ',' << f(l.pi) << ',' << f(l.median) << ',' << f(l.lower) << ','
            << f(l.upper) << '\n';
    }
    return out.str();
}

std::string width_curve_csv(const OptimalIf& opt) {
    std::ostringstream out;
    out << "pi,width_a,width_b,total\n";
    for (const auto& p : opt.curve) {
        out << f(p.pi) << ',' << f(p.width_a) << ',' << f(p.width_b) << ',' << f(p.total()) << '\n';
    }
    return out.str();
}

std::string trace_csv(const std::vector<std::pair<std::string, std::vector<TracePoint>>>& traces) {
    std::ostringstream out;
    out << "model,tau_gamma,median,lower,upper\n";
    for (const auto& [model, pts] : traces) {
        for (const auto& p : pts) {
            out << model << ',' << f(p.tau_gamma) << ',' << f(p.median) << ',' << f(p.lower) << ',' << f(p.upper)
                << '\n';
        }
    }
    return out.str();
}

} // namespace cams

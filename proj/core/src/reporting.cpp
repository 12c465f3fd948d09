#include "cams/reporting.hpp"
#include "cams/format.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cams {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kChunk = 4096;
constexpr double kGolden = 0.6180339887498949;

void require_cams(const FitResult& fit) {
    if (fit.estimator() != Estimator::CAMS) {
        throw ContractError("reporting requires a CAMS fit");
    }
}

void require_unit(double pi, const char* what) {
    if (!(pi >= 0.0 && pi <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0, 1]");
    }
}

Summary unidentified_summary() {
    return Summary{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, false};
}

Summary functional_summary(const FitResult& fit, const Eigen::VectorXd& c) {
    return fit.identifies(c) ? summarize(fit.functional(c)) : unidentified_summary();
}

struct EffectCoefficients {
    Eigen::VectorXd mu_a, mu_b, overall;
};

EffectCoefficients effect_coefficients(const FitResult& fit, double pi) {
    const Eigen::VectorXd a = fit.coefficients("alpha");
    const Eigen::VectorXd d = fit.coefficients("delta");
    const Eigen::VectorXd g = fit.coefficients("gamma");
    EffectCoefficients c;
    c.mu_a = a + pi * d;
    c.mu_b = c.mu_a + g;
    c.overall = a + pi * (d + g);
    return c;
}

double width95(const NormalMixture& mix) {
    return mix.quantile(0.975) - mix.quantile(0.025);
}

std::string trim_lower(std::string s) {
    auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

double parse_number(const std::string& text, const std::string& context) {
    bool ok = false;
    const double v = parse_double(text, ok);
    if (!ok) {
        throw ContractError("invalid number '" + text + "' in " + context);
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    return out;
}

// Golden-section minimum of f on [lo, hi] to absolute tolerance tol.
template <class F>
double golden_min(F f, double lo, double hi, double tol) {
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    }
    return out;
}

} // namespace

EffectSummary to_effect_summary(const Summary& s) {
    return {s, std::exp(s.median), std::exp(s.lower), std::exp(s.upper)};
}

ReportedEffects effects_at(const FitResult& fit, double pi) {
    require_cams(fit);
    require_unit(pi, "reporting prevalence");
    const auto c = effect_coefficients(fit, pi);
    ReportedEffects out;
    out.mu_a = to_effect_summary(functional_summary(fit, c.mu_a));
    out.mu_b = to_effect_summary(functional_summary(fit, c.mu_b));
    out.overall = to_effect_summary(functional_summary(fit, c.overall));
    out.interaction = to_effect_summary(functional_summary(fit, fit.coefficients("gamma")));
    out.prevalence_label = "point";
    out.prevalence = pi;
    for (const auto* s : {&out.mu_a, &out.mu_b, &out.overall}) {
        if (!s->log.identified) {
            out.warnings.push_back("some reported effects are not identified by the data");
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Beta helpers and prevalence distributions
// ---------------------------------------------------------------------------

BetaMoments beta_moments(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) {
        throw DomainError("Beta parameters must be positive");
    }
    const double s = a + b;
    BetaMoments m;
    m.mean = a / s;
    m.variance = a * b / (s * s * (s + 1.0));
    m.sd = std::sqrt(m.variance);
    return m;
}

std::pair<double, double> beta_from_moments(double mean, double variance) {
    if (!(mean > 0.0 && mean < 1.0) || !(variance > 0.0 && variance < mean * (1.0 - mean))) {
        throw DomainError("no Beta distribution has these moments");
    }
    const double common = mean * (1.0 - mean) / variance - 1.0;
    return {mean * common, (1.0 - mean) * common};
}

double beta_quantile(double a, double b, double p) {
    if (!(a > 0.0 && b > 0.0)) {
        throw DomainError("Beta parameters must be positive");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("probability must lie in [0, 1]");
    }
    return boost::math::ibeta_inv(a, b, p);
}

PrevalenceDistribution PrevalenceDistribution::point(double value) {
    require_unit(value, "point prevalence");
    PrevalenceDistribution d;
    d.point_ = value;
    return d;
}

PrevalenceDistribution PrevalenceDistribution::beta(double a, double b) {
    return mixture({{1.0, a, b}});
}

PrevalenceDistribution PrevalenceDistribution::mixture(std::vector<BetaComponent> components) {
    if (components.empty()) {
        throw ContractError("Beta mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.a > 0.0 && c.b > 0.0)) {
            throw ContractError("Beta parameters must be positive");
        }
        if (!(c.weight > 0.0)) {
            throw ContractError("mixture weights must be positive");
        }
        total += c.weight;
    }
    for (auto& c : components) {
        c.weight /= total;
    }
    PrevalenceDistribution d;
    d.components_ = std::move(components);
    return d;
}

double PrevalenceDistribution::mean() const {
    if (is_point()) {
        return point_;
    }
    double m = 0.0;
    for (const auto& c : components_) {
        m += c.weight * c.a / (c.a + c.b);
    }
    return m;
}

double PrevalenceDistribution::variance() const {
    if (is_point()) {
        return 0.0;
    }
    double second = 0.0;
    for (const auto& c : components_) {
        const auto m = beta_moments(c.a, c.b);
        second += c.weight * (m.variance + m.mean * m.mean);
    }
    const double mu = mean();
    return std::max(0.0, second - mu * mu);
}

double PrevalenceDistribution::cdf(double x) const {
    if (is_point()) {
        return x >= point_ ? 1.0 : 0.0;
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    double p = 0.0;
    for (const auto& c : components_) {
        p += c.weight * boost::math::ibeta(c.a, c.b, x);
    }
    return p;
}

double PrevalenceDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("probability must lie in [0, 1]");
    }
    if (is_point()) {
        return point_;
    }
    if (components_.size() == 1) {
        return beta_quantile(components_[0].a, components_[0].b, p);
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double PrevalenceDistribution::sample(Rng& rng) const {
    if (is_point()) {
        return point_;
    }
    std::size_t k = 0;
    if (components_.size() > 1) {
        double u = rng.uniform();
        while (k + 1 < components_.size() && u >= components_[k].weight) {
            u -= components_[k].weight;
            ++k;
        }
    }
    return rng.beta(components_[k].a, components_[k].b);
}

std::string PrevalenceDistribution::describe() const {
    if (is_point()) {
        return "point(" + format_double(point_) + ")";
    }
    if (components_.size() == 1) {
        return "beta(" + format_double(components_[0].a) + "," + format_double(components_[0].b) + ")";
    }
    std::string s = "beta-mixture(";
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        s += (i ? ";" : "") + format_double(c.weight) + "," + format_double(c.a) + "," + format_double(c.b);
    }
    return s + ")";
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::OverallIf: return "overall-if";
    case Strategy::OptimalIf: return "optimal-if";
    case Strategy::ClosenessA: return "closeness-a";
    case Strategy::ClosenessB: return "closeness-b";
    case Strategy::Average: return "average";
    case Strategy::TrialWeighted: return "trial-weighted";
    case Strategy::External: return "external";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& text) {
    const std::string t = trim_lower(text);
    for (Strategy s : {Strategy::OverallIf, Strategy::OptimalIf, Strategy::ClosenessA, Strategy::ClosenessB,
                       Strategy::Average, Strategy::TrialWeighted, Strategy::External}) {
        if (t == to_string(s)) {
            return s;
        }
    }
    return std::nullopt;
}

PrevalenceSpec PrevalenceSpec::parse(const std::string& text) {
    const std::string t = trim_lower(text);
    PrevalenceSpec spec;
    if (auto s = parse_strategy(t); s && *s != Strategy::External) {
        spec.kind = Kind::Strategy;
        spec.strategy = *s;
        return spec;
    }
    const auto colon = t.find(':');
    const std::string head = t.substr(0, colon);
    const std::string body = colon == std::string::npos ? std::string() : t.substr(colon + 1);
    if (head == "external" && colon != std::string::npos) {
        spec.kind = Kind::Strategy;
        spec.strategy = Strategy::External;
        spec.value = parse_number(body, "external prevalence");
    } else if (head == "point" && colon != std::string::npos) {
        spec.kind = Kind::Point;
        spec.value = parse_number(body, "point prevalence");
    } else if (head == "beta" && colon != std::string::npos) {
        const auto parts = split(body, ',');
        if (parts.size() != 2) {
            throw ContractError("beta prevalence expects 'beta:a,b'");
        }
        spec.kind = Kind::Distribution;
        spec.distribution =
            PrevalenceDistribution::beta(parse_number(parts[0], "beta prevalence"), parse_number(parts[1], "beta prevalence"));
    } else if (head == "beta-mixture" && colon != std::string::npos) {
        std::vector<BetaComponent> comps;
        for (const auto& item : split(body, ';')) {
            const auto parts = split(item, ',');
            if (parts.size() != 3) {
                throw ContractError("beta-mixture components are 'weight,a,b' separated by ';'");
            }
            comps.push_back({parse_number(parts[0], "beta-mixture"), parse_number(parts[1], "beta-mixture"),
                             parse_number(parts[2], "beta-mixture")});
        }
        spec.kind = Kind::Distribution;
        spec.distribution = PrevalenceDistribution::mixture(std::move(comps));
    } else {
        bool ok = false;
        const double v = parse_double(t, ok);
        if (!ok) {
            throw ContractError("unrecognized prevalence specification: " + text);
        }
        spec.kind = Kind::Point;
        spec.value = v;
    }
    spec.validate();
    return spec;
}

std::string PrevalenceSpec::describe() const {
    switch (kind) {
    case Kind::Point: return "point:" + format_double(value);
    case Kind::Strategy:
        return strategy == Strategy::External ? "external:" + format_double(value) : to_string(strategy);
    case Kind::Distribution: return distribution.describe();
    }
    return "unknown";
}

void PrevalenceSpec::validate() const {
    if ((kind == Kind::Point || (kind == Kind::Strategy && strategy == Strategy::External)) &&
        !(value >= 0.0 && value <= 1.0)) {
        throw ContractError("prevalence values must lie in [0, 1]");
    }
    if (kind == Kind::Distribution && draws < 1000) {
        throw ContractError("distributional reporting needs at least 1000 draws");
    }
}

double overall_if_at(const MetaDataset& data, double tau) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& s : data.studies) {
        const double pi = s.info_fraction;
        const double w =
            1.0 / (tau * tau + (1.0 - pi) * (1.0 - pi) * s.obs_a.variance() + pi * pi * s.obs_b.variance());
        num += w * pi;
        den += w;
    }
    return num / den;
}

OverallIf overall_if(const FitResult& fit, const MetaDataset& data) {
    require_cams(fit);
    data.validate();
    const auto& grid = fit.grid();
    const int axis = grid.axis_index("tau");
    if (axis < 0) {
        throw ContractError("overall_if needs a tau posterior");
    }
    const auto& nodes = grid.axes[static_cast<std::size_t>(axis)].nodes();
    std::vector<double> mass(nodes.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        mass[grid.unflatten(k)[static_cast<std::size_t>(axis)]] += grid.weights[k];
    }
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double v = overall_if_at(data, nodes[i]);
        m1 += mass[i] * v;
        m2 += mass[i] * v * v;
    }
    return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1))};
}

WidthPoint interval_widths(const FitResult& fit, double pi) {
    require_cams(fit);
    require_unit(pi, "prevalence");
    const auto c = effect_coefficients(fit, pi);
    if (!fit.identifies(c.mu_a) || !fit.identifies(c.mu_b)) {
        throw ContractError("subgroup effects are not identified");
    }
    return {pi, width95(fit.functional(c.mu_a)), width95(fit.functional(c.mu_b))};
}

OptimalIf optimal_if(const FitResult& fit, double lo, double hi, int curve_points) {
    require_cams(fit);
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
        throw ContractError("optimal_if: search range must satisfy 0 <= lo < hi <= 1");
    }
    if (curve_points < 3) {
        throw ContractError("optimal_if: at least 3 curve points are required");
    }
    OptimalIf out;
    out.range_lo = lo;
    out.range_hi = hi;
    std::size_t best = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (double pi : linspace(lo, hi, curve_points)) {
        out.curve.push_back(interval_widths(fit, pi));
        top = std::max(top, out.curve.back().total());
        if (out.curve.back().total() < out.curve[best].total()) {
            best = out.curve.size() - 1;
        }
    }
    if (top - out.curve[best].total() <= 1e-9 * std::max(1.0, top)) {
        out.flat = true;
        out.pi = 0.5 * (lo + hi);
        out.warnings.push_back("interval width does not depend on the prevalence; every value in the range is optimal");
        return out;
    }
    const double a = out.curve[best == 0 ? 0 : best - 1].pi;
    const double b = out.curve[std::min(best + 1, out.curve.size() - 1)].pi;
    out.pi = golden_min([&](double p) { return interval_widths(fit, p).total(); }, a, b, 1e-4);

    const auto& pis = fit.study_pi();
    if (!pis.empty()) {
        const auto [mn, mx] = std::minmax_element(pis.begin(), pis.end());
        if (out.pi < *mn || out.pi > *mx) {
            out.warnings.push_back("optimal prevalence " + format_double(out.pi) +
                                   " lies outside the observed study range [" + format_double(*mn) + ", " +
                                   format_double(*mx) + "]; reporting there extrapolates");
        }
    }
    return out;
}

namespace {

double closeness(const FitResult& fit, const StrategyContext& ctx, bool subgroup_b) {
    if (ctx.bms == nullptr || ctx.bms->estimator() != Estimator::BMS) {
        throw ContractError("closeness strategy needs a reference BMS fit");
    }
    Eigen::VectorXd ref = ctx.bms->coefficients("alpha");
    ref += (subgroup_b ? 0.5 : -0.5) * ctx.bms->coefficients("gamma");
    const double target = ctx.bms->functional(ref).quantile(0.5);
    auto diff = [&](double pi) {
        const auto c = effect_coefficients(fit, pi);
        return fit.functional(subgroup_b ? c.mu_b : c.mu_a).quantile(0.5) - target;
    };
    const auto grid = linspace(ctx.search_lo, ctx.search_hi, 101);
    std::vector<double> d;
    for (double p : grid) {
        d.push_back(diff(p));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (std::abs(d[i]) < std::abs(d[best])) {
            best = i;
        }
    }
    // Prefer an exact crossing next to the best scan point.
    for (std::size_t i : {best, best == 0 ? best : best - 1}) {
        if (i + 1 < d.size() && (d[i] == 0.0 || d[i] * d[i + 1] < 0.0)) {
            double a = grid[i];
            double b = grid[i + 1];
            double fa = d[i];
            if (fa == 0.0) {
                return a;
            }
            while (b - a > 1e-8) {
                const double mid = 0.5 * (a + b);
                const double fm = diff(mid);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
    }
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    return golden_min([&](double p) { return std::abs(diff(p)); }, a, b, 1e-6);
}

} // namespace

double strategy_prevalence(const MetaDataset& data, const FitResult& fit, Strategy kind, const StrategyContext& ctx) {
    data.validate();
    switch (kind) {
    case Strategy::OverallIf: return overall_if(fit, data).value;
    case Strategy::OptimalIf: return optimal_if(fit, ctx.search_lo, ctx.search_hi).pi;
    case Strategy::ClosenessA: return closeness(fit, ctx, false);
    case Strategy::ClosenessB: return closeness(fit, ctx, true);
    case Strategy::Average: {
        const auto pis = data.information_fractions();
        return std::accumulate(pis.begin(), pis.end(), 0.0) / static_cast<double>(pis.size());
    }
    case Strategy::TrialWeighted: {
        double num = 0.0;
        double den = 0.0;
        for (const auto& s : data.studies) {
            if (!s.obs_a.count || !s.obs_b.count) {
                throw ContractError("trial-weighted prevalence needs subgroup counts for every study (" +
                                    s.study_id + ")");
            }
            const double na = static_cast<double>(*s.obs_a.count);
            const double nb = static_cast<double>(*s.obs_b.count);
            const double w = (na > 0.0 && nb > 0.0) ? 1.0 / (1.0 / na + 1.0 / nb) : 0.0;
            num += w * s.info_fraction;
            den += w;
        }
        if (!(den > 0.0)) {
            throw ContractError("trial-weighted prevalence: no study has both subgroups");
        }
        return num / den;
    }
    case Strategy::External:
        if (!ctx.external) {
            throw ContractError("external prevalence value is missing");
        }
        require_unit(*ctx.external, "external prevalence");
        return *ctx.external;
    }
    throw ContractError("unknown strategy");
}

// ---------------------------------------------------------------------------
// Monte Carlo reporting
// ---------------------------------------------------------------------------

EffectDraws draw_effects(const FitResult& fit, const PrevalenceDistribution& dist, int draws, std::uint64_t seed) {
    require_cams(fit);
    if (draws < 1) {
        throw ContractError("draws must be positive");
    }
    const Eigen::VectorXd ca = fit.coefficients("alpha");
    const Eigen::VectorXd cd = fit.coefficients("delta");
    const Eigen::VectorXd cg = fit.coefficients("gamma");
    if (!fit.identifies(ca) || !fit.identifies(cd) || !fit.identifies(cg)) {
        throw ContractError("distributional reporting needs identified alpha, delta and gamma");
    }
    const auto& grid = fit.grid();
    std::vector<double> cumulative(grid.size());
    std::partial_sum(grid.weights.begin(), grid.weights.end(), cumulative.begin());
    std::vector<Eigen::MatrixXd> roots(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(grid.cond_cov[k]);
        roots[k] = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    const auto p = static_cast<Eigen::Index>(fit.parameter_names().size());
    const auto n = static_cast<std::size_t>(draws);
    EffectDraws out;
    for (auto* v : {&out.pi, &out.alpha, &out.delta, &out.gamma, &out.mu_a, &out.mu_b, &out.overall}) {
        v->resize(n);
    }
    Eigen::VectorXd z(p);
    for (std::size_t start = 0, chunk = 0; start < n; start += kChunk, ++chunk) {
        Rng rng(derive_seed(seed, chunk));
        const std::size_t stop = std::min(n, start + kChunk);
        for (std::size_t i = start; i < stop; ++i) {
            const double u = rng.uniform() * cumulative.back();
            std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                     cumulative.begin());
            k = std::min(k, grid.size() - 1);
            for (Eigen::Index r = 0; r < p; ++r) {
                z(r) = rng.normal();
            }
            const Eigen::VectorXd theta = grid.cond_mean[k] + roots[k] * z;
            const double pi = dist.sample(rng);
            out.pi[i] = pi;
            out.alpha[i] = ca.dot(theta);
            out.delta[i] = cd.dot(theta);
            out.gamma[i] = cg.dot(theta);
            out.mu_a[i] = out.alpha[i] + out.delta[i] * pi;
            out.mu_b[i] = out.mu_a[i] + out.gamma[i];
            out.overall[i] = out.alpha[i] + (out.delta[i] + out.gamma[i]) * pi;
        }
    }
    return out;
}

Summary empirical_summary(std::vector<double> values, double level) {
    if (values.empty()) {
        throw ContractError("empirical_summary: no values");
    }
    std::sort(values.begin(), values.end());
    const auto q = [&](double p) {
        const double h = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    const double tail = 0.5 * (1.0 - level);
    Summary s;
    s.median = q(0.5);
    s.lower = q(tail);
    s.upper = q(1.0 - tail);
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    std::size_t positive = 0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
        positive += v > 0.0 ? 1 : 0;
    }
    s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.prob_positive = static_cast<double>(positive) / n;
    s.prob_negative = 1.0 - s.prob_positive;
    return s;
}

ReportedEffects marginalize_prevalence(const FitResult& fit, const PrevalenceDistribution& dist, int draws,
                                       std::uint64_t seed) {
    if (draws < 1000) {
        throw ContractError("distributional reporting needs at least 1000 draws");
    }
    const EffectDraws d = draw_effects(fit, dist, draws, seed);
    ReportedEffects out;
    out.mu_a = to_effect_summary(empirical_summary(d.mu_a));
    out.mu_b = to_effect_summary(empirical_summary(d.mu_b));
    out.overall = to_effect_summary(empirical_summary(d.overall));
    out.interaction = to_effect_summary(functional_summary(fit, fit.coefficients("gamma")));
    out.prevalence_label = dist.describe();
    out.prevalence = dist.mean();
    out.prevalence_sd = std::sqrt(dist.variance());
    return out;
}

ReportedEffects report(const MetaDataset& data, const FitResult& fit, const PrevalenceSpec& spec,
                       const StrategyContext& ctx) {
    spec.validate();
    switch (spec.kind) {
    case PrevalenceSpec::Kind::Point: return effects_at(fit, spec.value);
    case PrevalenceSpec::Kind::Distribution: return marginalize_prevalence(fit, spec.distribution, spec.draws, spec.seed);
    case PrevalenceSpec::Kind::Strategy: break;
    }
    ReportedEffects out;
    if (spec.strategy == Strategy::OverallIf) {
        const auto oif = overall_if(fit, data);
        out = effects_at(fit, oif.value);
        out.prevalence_sd = oif.sd;
    } else if (spec.strategy == Strategy::OptimalIf) {
        const auto opt = optimal_if(fit, ctx.search_lo, ctx.search_hi);
        out = effects_at(fit, opt.pi);
        out.warnings.insert(out.warnings.end(), opt.warnings.begin(), opt.warnings.end());
    } else {
        StrategyContext local = ctx;
        if (spec.strategy == Strategy::External) {
            local.external = spec.value;
        }
        out = effects_at(fit, strategy_prevalence(data, fit, spec.strategy, local));
    }
    out.prevalence_label = to_string(spec.strategy);
    return out;
}

StrategyTable strategy_table(const MetaDataset& data, const FitResult& fit, const StrategyTableOptions& options) {
    require_cams(fit);
    StrategyTable table;
    auto add = [&](const std::string& method, const PrevalenceSpec& spec) {
        try {
            table.rows.push_back({method, report(data, fit, spec, options.context)});
        } catch (const ContractError& e) {
            table.warnings.push_back(method + " row skipped: " + e.what());
        }
    };
    auto strategy = [](Strategy s, double value = 0.5) {
        PrevalenceSpec spec;
        spec.kind = PrevalenceSpec::Kind::Strategy;
        spec.strategy = s;
        spec.value = value;
        return spec;
    };
    add("Overall-IF", strategy(Strategy::OverallIf));
    add("Optimal IF", strategy(Strategy::OptimalIf));
    add("Closeness to subgroups", strategy(Strategy::ClosenessA));
    add("Average", strategy(Strategy::Average));
    add("Trial-weighted", strategy(Strategy::TrialWeighted));
    if (options.context.external) {
        add("External", strategy(Strategy::External, *options.context.external));
    } else {
        table.warnings.push_back("External row skipped: no external prevalence configured");
    }
    if (options.map_prevalence) {
        PrevalenceSpec spec;
        spec.kind = PrevalenceSpec::Kind::Distribution;
        spec.distribution = *options.map_prevalence;
        spec.draws = options.draws;
        spec.seed = options.seed;
        add("MAP prevalence", spec);
    } else {
        table.warnings.push_back("MAP prevalence row skipped: no prevalence distribution configured");
    }
    return table;
}

// ---------------------------------------------------------------------------
// Bayes risk
// ---------------------------------------------------------------------------

RiskCurve bayes_risk(const FitResult& fit, const PrevalenceDistribution& pi_dist, Loss loss,
                     const std::vector<double>& pi_grid, int draws, std::uint64_t seed) {
    if (pi_grid.empty()) {
        throw ContractError("bayes_risk: empty prevalence grid");
    }
    for (double p : pi_grid) {
        require_unit(p, "prevalence grid value");
    }
    const EffectDraws d = draw_effects(fit, pi_dist, draws, seed);
    RiskCurve out;
    out.pi = pi_grid;
    out.risk.assign(pi_grid.size(), 0.0);
    std::size_t best = 0;
    for (std::size_t g = 0; g < pi_grid.size(); ++g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d.pi.size(); ++i) {
            const double diff = (d.alpha[i] + d.delta[i] * pi_grid[g]) - d.mu_a[i];
            acc += loss == Loss::Squared ? diff * diff : std::abs(diff);
        }
        out.risk[g] = acc / static_cast<double>(d.pi.size());
        if (out.risk[g] < out.risk[best]) {
            best = g;
        }
    }
    out.argmin = pi_grid[best];
    return out;
}

} // namespace cams

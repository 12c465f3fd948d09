#include "cams/reporting.hpp"
#include "cams/verify.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

using namespace cams;

namespace {

// Beta(a, b) median from Simpson-integrated density and bisection.
double beta_median_oracle(double a, double b) {
    const double logc = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    auto pdf = [&](double x) { return std::exp(logc + (a - 1) * std::log(x) + (b - 1) * std::log1p(-x)); };
    auto cdf = [&](double x) {
        const int n = 4000;
        const double h = x / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = std::max(i * h, 1e-300);
            s += pdf(t) * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
        }
        return s * h / 3;
    };
    double lo = 0, hi = 1;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    return lo;
}

struct Fixture {
    MetaDataset data;
    PriorSpec priors;
    FitResult cams;
    FitResult bms;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        SimScenario sc;
        sc.n_studies = 9;
        sc.delta = -0.6;
        sc.seed = 73;
        MetaDataset d = simulate(sc);
        PriorSpec p;
        const GridSpec g = GridSpec::defaults(p, 41);
        FitResult c = fit_cams(d, p, g);
        FitResult b = fit_bms(d, p, g);
        return Fixture{std::move(d), p, std::move(c), std::move(b)};
    }();
    return f;
}

bool bits_equal(const Summary& a, const Summary& b) {
    return std::memcmp(&a.median, &b.median, sizeof(double)) == 0 &&
           std::memcmp(&a.lower, &b.lower, sizeof(double)) == 0 &&
           std::memcmp(&a.upper, &b.upper, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("Beta moments in closed form") {
    const BetaMoments m = beta_moments(5, 21);
    CHECK(m.mean == doctest::Approx(5.0 / 26.0).epsilon(1e-15));
    CHECK(m.variance == doctest::Approx(105.0 / (26.0 * 26.0 * 27.0)).epsilon(1e-15));
    CHECK(m.sd == doctest::Approx(std::sqrt(m.variance)));
}

TEST_CASE("property: moment matching inverts Beta moments") {
    for (double a : {0.7, 2.0, 5.0, 40.0}) {
        for (double b : {0.9, 3.0, 21.0}) {
            const BetaMoments m = beta_moments(a, b);
            const auto [a2, b2] = beta_from_moments(m.mean, m.variance);
            CHECK(a2 == doctest::Approx(a).epsilon(1e-10));
            CHECK(b2 == doctest::Approx(b).epsilon(1e-10));
        }
    }
    CHECK_THROWS(beta_from_moments(0.5, 0.3));
}

TEST_CASE("Beta quantiles against Simpson integration") {
    for (auto [a, b] : {std::pair{2.0, 2.0}, {5.0, 21.0}, {2.0, 8.0}}) {
        CHECK(beta_quantile(a, b, 0.5) == doctest::Approx(beta_median_oracle(a, b)).epsilon(1e-8));
        CHECK(PrevalenceDistribution::beta(a, b).quantile(0.5) == doctest::Approx(beta_median_oracle(a, b)).epsilon(1e-8));
    }
}

TEST_CASE("Beta mixture moments and quantiles") {
    const auto d = PrevalenceDistribution::mixture({{0.3, 2, 8}, {0.7, 5, 5}});
    CHECK(d.mean() == doctest::Approx(0.3 * 0.2 + 0.7 * 0.5));
    const double q = d.quantile(0.4);
    CHECK(d.cdf(q) == doctest::Approx(0.4).epsilon(1e-8));
    CHECK_THROWS(PrevalenceDistribution::mixture({{-1, 2, 2}}));
}

TEST_CASE("prevalence spec parsing") {
    CHECK(PrevalenceSpec::parse("0.3").kind == PrevalenceSpec::Kind::Point);
    CHECK(PrevalenceSpec::parse("0.3").value == 0.3);
    CHECK(PrevalenceSpec::parse("optimal-if").strategy == Strategy::OptimalIf);
    CHECK(PrevalenceSpec::parse("closeness-b").strategy == Strategy::ClosenessB);
    const auto ext = PrevalenceSpec::parse("external:0.68");
    CHECK(ext.strategy == Strategy::External);
    CHECK(ext.value == 0.68);
    const auto beta = PrevalenceSpec::parse("beta:5,21");
    CHECK(beta.kind == PrevalenceSpec::Kind::Distribution);
    CHECK(beta.distribution.mean() == doctest::Approx(5.0 / 26.0));
    CHECK(PrevalenceSpec::parse("beta-mixture:0.5,2,2;0.5,3,9").distribution.components().size() == 2);
    CHECK_THROWS(PrevalenceSpec::parse("1.5"));
    CHECK_THROWS(PrevalenceSpec::parse("nonsense"));
    CHECK_THROWS(PrevalenceSpec::parse("beta:0,2"));
}

TEST_CASE("strategy names round-trip") {
    for (Strategy s : {Strategy::OverallIf, Strategy::OptimalIf, Strategy::ClosenessA, Strategy::ClosenessB,
                       Strategy::Average, Strategy::TrialWeighted, Strategy::External}) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
}

TEST_CASE("effects on a synthetic single-node posterior") {
    const FitResult fit = synthetic_cams_fit(0.1, -0.8, 0.3, 0.1, 0.3, 0.1);
    const ReportedEffects e = effects_at(fit, 0.25);
    CHECK(e.mu_a.log.median == doctest::Approx(0.1 - 0.8 * 0.25));
    CHECK(e.mu_b.log.median == doctest::Approx(0.1 - 0.8 * 0.25 + 0.3));
    CHECK(e.overall.log.median == doctest::Approx(0.1 + (-0.8 + 0.3) * 0.25));
    CHECK(e.mu_a.log.sd == doctest::Approx(std::hypot(0.1, 0.3 * 0.25)));
    CHECK(e.interaction.log.median == doctest::Approx(0.3));
    CHECK(e.interaction.exp_median == doctest::Approx(std::exp(0.3)));
    CHECK_THROWS(effects_at(fit, 1.2));
}

TEST_CASE("effects require a CAMS fit") {
    const auto& f = fixture();
    CHECK_THROWS_AS(effects_at(f.bms, 0.3), ContractError);
}

TEST_CASE("property: the interaction does not depend on the reporting prevalence") {
    const auto& f = fixture();
    const Summary ref = effects_at(f.cams, 0.5).interaction.log;
    for (double pi = 0.0; pi <= 1.0; pi += 0.1) {
        CHECK(bits_equal(effects_at(f.cams, pi).interaction.log, ref));
    }
}

TEST_CASE("overall IF at tau = 0 with a common UISD is the pooled count prevalence") {
    // w_j = n_j / uisd^2, pi_j = n_Bj / n_j
    const auto& f = fixture();
    double nb = 0, n = 0;
    for (const auto& s : f.data.studies) {
        nb += static_cast<double>(*s.obs_b.count);
        n += static_cast<double>(*s.obs_a.count + *s.obs_b.count);
    }
    CHECK(overall_if_at(f.data, 0.0) == doctest::Approx(nb / n).epsilon(1e-12));
}

TEST_CASE("overall IF lies inside the range of the study IFs") {
    const auto& f = fixture();
    const auto pis = f.data.information_fractions();
    const OverallIf o = overall_if(f.cams, f.data);
    CHECK(o.value >= *std::min_element(pis.begin(), pis.end()));
    CHECK(o.value <= *std::max_element(pis.begin(), pis.end()));
    CHECK(o.sd >= 0.0);
}

TEST_CASE("optimal IF minimizes the summed interval width") {
    const auto& f = fixture();
    const OptimalIf opt = optimal_if(f.cams);
    CHECK_FALSE(opt.flat);
    const double best = interval_widths(f.cams, opt.pi).total();
    for (const auto& p : opt.curve) {
        CHECK(p.total() >= best - 1e-6);
    }
}

TEST_CASE("optimal IF on a flat width curve warns") {
    // delta with zero variance: widths do not depend on pi
    const FitResult fit = synthetic_cams_fit(0.0, 0.5, 0.2, 0.1, 0.0, 0.1);
    const OptimalIf opt = optimal_if(fit);
    CHECK(opt.flat);
    CHECK_FALSE(opt.warnings.empty());
}

TEST_CASE("closeness strategies match the BMS subgroup medians") {
    const auto& f = fixture();
    StrategyContext ctx;
    ctx.bms = &f.bms;
    const double pa = strategy_prevalence(f.data, f.cams, Strategy::ClosenessA, ctx);
    const double target = f.bms.functional(Eigen::Vector2d(1.0, -0.5)).quantile(0.5);
    const double got = effects_at(f.cams, pa).mu_a.log.median;
    CHECK((std::abs(got - target) < 1e-4 || pa == 0.0 || pa == 1.0));
    CHECK_THROWS(strategy_prevalence(f.data, f.cams, Strategy::ClosenessA, {}));
}

TEST_CASE("average and trial-weighted strategies") {
    const auto& f = fixture();
    const auto pis = f.data.information_fractions();
    double mean = 0;
    for (double p : pis) {
        mean += p / static_cast<double>(pis.size());
    }
    CHECK(strategy_prevalence(f.data, f.cams, Strategy::Average) == doctest::Approx(mean));
    double sw = 0, swp = 0;
    for (const auto& s : f.data.studies) {
        const double w = 1.0 / (1.0 / double(*s.obs_a.count) + 1.0 / double(*s.obs_b.count));
        sw += w;
        swp += w * s.info_fraction;
    }
    CHECK(strategy_prevalence(f.data, f.cams, Strategy::TrialWeighted) == doctest::Approx(swp / sw));
    StrategyContext ctx;
    ctx.external = 0.68;
    CHECK(strategy_prevalence(f.data, f.cams, Strategy::External, ctx) == 0.68);
    CHECK_THROWS(strategy_prevalence(f.data, f.cams, Strategy::External, {}));
}

TEST_CASE("type-7 empirical quantiles") {
    const Summary s = empirical_summary({4, 1, 3, 2, 5});
    CHECK(s.median == 3.0);
    CHECK(s.lower == doctest::Approx(1.1));
    CHECK(s.upper == doctest::Approx(4.9));
    CHECK(s.mean == 3.0);
}

TEST_CASE("Monte Carlo draws are reproducible and seed dependent") {
    const auto& f = fixture();
    const auto dist = PrevalenceDistribution::beta(5, 21);
    const EffectDraws a = draw_effects(f.cams, dist, 5000, 42);
    const EffectDraws b = draw_effects(f.cams, dist, 5000, 42);
    const EffectDraws c = draw_effects(f.cams, dist, 5000, 43);
    CHECK(a.mu_a == b.mu_a);
    CHECK(a.mu_a != c.mu_a);
    for (std::size_t i = 0; i < a.mu_a.size(); ++i) {
        REQUIRE(a.mu_b[i] == a.mu_a[i] + a.gamma[i]);
    }
}

TEST_CASE("marginal effects under a point prevalence approach effects_at") {
    const auto& f = fixture();
    const ReportedEffects mc = marginalize_prevalence(f.cams, PrevalenceDistribution::point(0.3), 200000, 9);
    const ReportedEffects ex = effects_at(f.cams, 0.3);
    CHECK(mc.mu_a.log.median == doctest::Approx(ex.mu_a.log.median).epsilon(0.01).scale(1.0));
    CHECK(bits_equal(mc.interaction.log, ex.interaction.log));
    CHECK_THROWS(marginalize_prevalence(f.cams, PrevalenceDistribution::point(0.3), 10, 1));
}

TEST_CASE("distributional report records the prevalence sd") {
    const auto& f = fixture();
    PrevalenceSpec spec = PrevalenceSpec::parse("beta:5,21");
    spec.seed = 5;
    const ReportedEffects r = report(f.data, f.cams, spec);
    REQUIRE(r.prevalence_sd.has_value());
    CHECK(*r.prevalence_sd == doctest::Approx(beta_moments(5, 21).sd));
}

TEST_CASE("strategy table rows share one interaction") {
    const auto& f = fixture();
    StrategyTableOptions opts;
    opts.context.bms = &f.bms;
    opts.context.external = 0.4;
    opts.map_prevalence = PrevalenceDistribution::beta(3, 9);
    opts.seed = 77;
    opts.draws = 4000;
    const StrategyTable t = strategy_table(f.data, f.cams, opts);
    CHECK(t.rows.size() == 7);
    for (const auto& row : t.rows) {
        CHECK(bits_equal(row.effects.interaction.log, t.rows[0].effects.interaction.log));
    }
}

TEST_CASE("strategy table skips rows without inputs") {
    const auto& f = fixture();
    const StrategyTable t = strategy_table(f.data, f.cams, {});
    CHECK(t.rows.size() < 7);
    CHECK_FALSE(t.warnings.empty());
}

TEST_CASE("property: Bayes-risk minimizers") {
    std::uint64_t seed = 900;
    for (auto [a, b] : {std::pair{2.0, 2.0}, {5.0, 21.0}, {2.0, 8.0}}) {
        const auto d = PrevalenceDistribution::beta(a, b);
        const auto sq = check_bayes_optimum(d, Loss::Squared, seed++);
        const auto ab = check_bayes_optimum(d, Loss::Absolute, seed++);
        CHECK(std::abs(sq.argmin - a / (a + b)) < 0.01);
        CHECK(std::abs(ab.argmin - beta_median_oracle(a, b)) < 0.01);
    }
}

TEST_CASE("a concentrated Beta reproduces effects at its mean") {
    const auto& f = fixture();
    const auto d = PrevalenceDistribution::beta(3000, 7000);
    const ReportedEffects mc = marginalize_prevalence(f.cams, d, 100000, 12);
    const ReportedEffects ex = effects_at(f.cams, 0.3);
    const double se = ex.mu_a.log.sd / std::sqrt(100000.0);
    CHECK(std::abs(mc.mu_a.log.median - ex.mu_a.log.median) < 6 * se + 1e-3);
    CHECK(std::abs(mc.overall.log.median - ex.overall.log.median) < 6 * se + 1e-3);
}

TEST_CASE("exponentiated summaries are exp of the log summaries") {
    const auto& f = fixture();
    const ReportedEffects e = effects_at(f.cams, 0.2);
    for (const EffectSummary* s : {&e.mu_a, &e.mu_b, &e.overall, &e.interaction}) {
        CHECK(s->exp_median == std::exp(s->log.median));
        CHECK(s->exp_lower == std::exp(s->log.lower));
        CHECK(s->exp_upper == std::exp(s->log.upper));
    }
}

TEST_CASE("Bayes-risk minimizer approaches the prevalence mean as draws grow") {
    const FitResult fit = synthetic_cams_fit(0.1, -0.8, 0.3, 0.1, 0.3, 0.1);
    const auto d = PrevalenceDistribution::beta(5, 21);
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) {
        grid.push_back(i / 1000.0);
    }
    double err_small = 0, err_large = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        err_small += std::abs(bayes_risk(fit, d, Loss::Squared, grid, 2000, 100 + s).argmin - 5.0 / 26.0);
        err_large += std::abs(bayes_risk(fit, d, Loss::Squared, grid, 50000, 200 + s).argmin - 5.0 / 26.0);
    }
    CHECK(err_large < err_small);
    CHECK(err_large / 5 < 0.005);
}

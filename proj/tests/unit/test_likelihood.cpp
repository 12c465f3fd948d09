#include "cams/likelihood.hpp"
#include "cams/random.hpp"
#include "cams/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cams;

namespace {

CamsPoint random_point(Rng& rng) {
    return {rng.normal(), rng.normal(), rng.normal(), std::abs(rng.normal(0, 0.5)), std::abs(rng.normal(0, 0.5))};
}

} // namespace

TEST_CASE("normal log densities") {
    CHECK(normal_logpdf(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * std::log(2 * M_PI)));
    Eigen::Matrix2d c;
    c << 2.0, 0.0, 0.0, 0.5;
    const Eigen::Vector2d x(1.0, -1.0);
    CHECK(mvn_logpdf(x, Eigen::Vector2d::Zero(), c) ==
          doctest::Approx(normal_logpdf(1.0, 0.0, 2.0) + normal_logpdf(-1.0, 0.0, 0.5)));
}

TEST_CASE("property: joint equals factorized at the information fractions") {
    SimScenario sc;
    sc.n_studies = 10;
    sc.seed = 91;
    const MetaDataset data = simulate(sc);
    const std::vector<double> pi = data.information_fractions();
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const CamsPoint p = random_point(rng);
        const double joint = cams_joint_loglik(data, p, pi);
        REQUIRE(std::abs(joint - cams_factorized_loglik(data, p, pi).total()) < 1e-10);
        CHECK(std::abs(cams_cross_term(data, p, pi)) < 1e-10);
    }
}

TEST_CASE("property: forced pi = 0.5 residual is the analytic cross term") {
    const MetaDataset data = simulate(leverage_scenario(4));
    const std::vector<double> half(data.size(), 0.5);
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const CamsPoint p = random_point(rng);
        const double residual = cams_joint_loglik(data, p, half) - cams_factorized_loglik(data, p, half).total();
        REQUIRE(std::abs(residual - cams_cross_term(data, p, half)) < 1e-8);
    }
}

TEST_CASE("joint likelihood against an explicit bivariate normal") {
    SimScenario sc;
    sc.n_studies = 1;
    sc.seed = 3;
    const MetaDataset data = simulate(sc);
    const auto& s = data.studies[0];
    const CamsPoint p{0.1, -0.2, 0.3, 0.25, 0.15};
    const double pi = s.info_fraction;
    const double mu_a = p.alpha + p.delta * pi;
    const Eigen::Vector2d mean(mu_a, mu_a + p.gamma);
    const double t2 = p.tau * p.tau, g2 = p.tau_gamma * p.tau_gamma;
    Eigen::Matrix2d cov;
    cov << s.obs_a.variance() + t2 + g2 * pi * pi, t2 - g2 * pi * (1 - pi), t2 - g2 * pi * (1 - pi),
        s.obs_b.variance() + t2 + g2 * (1 - pi) * (1 - pi);
    const Eigen::Vector2d y(s.obs_a.estimate, s.obs_b.estimate);
    const std::vector<double> pis{pi};
    CHECK(cams_joint_loglik(data, p, pis) == doctest::Approx(mvn_logpdf(y, mean, cov)).epsilon(1e-12));
}

TEST_CASE("factorization battery check") {
    SimScenario sc;
    sc.n_studies = 7;
    sc.seed = 12;
    const FactorizationReport r = check_factorization(sc, 50);
    CHECK(r.pass);
    CHECK(r.max_residual < 1e-10);
    CHECK(std::abs(r.forced_half_residual - r.forced_half_cross_term) < 1e-8);
}

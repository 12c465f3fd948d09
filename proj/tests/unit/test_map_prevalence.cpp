#include "cams/reporting.hpp"

#include <doctest.h>

#include <cmath>

using namespace cams;

TEST_CASE("Gauss-Hermite integrates polynomials exactly") {
    const auto [x, w] = gauss_hermite(20);
    double m0 = 0, m2 = 0, m4 = 0, m3 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m0 += w[i];
        m2 += w[i] * x[i] * x[i];
        m3 += w[i] * x[i] * x[i] * x[i];
        m4 += w[i] * std::pow(x[i], 4);
    }
    const double rpi = std::sqrt(M_PI);
    CHECK(m0 == doctest::Approx(rpi).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(rpi / 2).epsilon(1e-13));
    CHECK(std::abs(m3) < 1e-12);
    CHECK(m4 == doctest::Approx(3 * rpi / 4).epsilon(1e-12));
}

TEST_CASE("homogeneous large trials pool to the overall proportion") {
    std::vector<StudyCount> c;
    for (int j = 0; j < 8; ++j) {
        c.push_back({2000, 10000});
    }
    const MapPrevalence m = fit_map_prevalence(c);
    CHECK(m.pooled_median == doctest::Approx(0.2).epsilon(0.01));
    CHECK(m.predictive_mean == doctest::Approx(0.2).epsilon(0.05));
    CHECK(m.studies_used == 8);
    CHECK(m.a > 0);
    CHECK(m.b > 0);
    // the fitted Beta reproduces the predictive moments
    const BetaMoments bm = beta_moments(m.a, m.b);
    CHECK(bm.mean == doctest::Approx(m.predictive_mean).epsilon(1e-9));
    CHECK(bm.sd == doctest::Approx(m.predictive_sd).epsilon(1e-9));
}

TEST_CASE("heterogeneous trials widen the predictive") {
    const std::vector<StudyCount> same{{50, 250}, {50, 250}, {50, 250}, {50, 250}};
    const std::vector<StudyCount> spread{{10, 250}, {40, 250}, {70, 250}, {110, 250}};
    const MapPrevalence a = fit_map_prevalence(same);
    const MapPrevalence b = fit_map_prevalence(spread);
    CHECK(b.predictive_sd > a.predictive_sd);
    CHECK(b.predictive_lower < b.predictive_median);
    CHECK(b.predictive_median < b.predictive_upper);
}

TEST_CASE("zero-total trials are skipped with a warning") {
    const MapPrevalence m = fit_map_prevalence({{10, 50}, {0, 0}, {12, 60}});
    CHECK(m.studies_used == 2);
    CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("invalid counts") {
    CHECK_THROWS_AS(fit_map_prevalence({{60, 50}}), InputError);
    CHECK_THROWS_AS(fit_map_prevalence({{-1, 50}}), InputError);
    CHECK_THROWS(fit_map_prevalence({}));
}

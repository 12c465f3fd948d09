#include "cams/errors.hpp"
#include "cams/model.hpp"
#include "cams/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace cams;

TEST_CASE("information fraction of equal SEs is one half") {
    CHECK(compute_if(0.3, 0.3) == doctest::Approx(0.5));
    CHECK(compute_if(2.0, 1.0) == doctest::Approx(0.8));
}

TEST_CASE("information fraction rejects non-positive SEs") {
    CHECK_THROWS_AS(compute_if(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(compute_if(1.0, -1.0), DomainError);
}

TEST_CASE("UISD law: IF matches the count prevalence") {
    // se = uisd / sqrt(n) makes sigma_a^2 / (sigma_a^2 + sigma_b^2) = n_b / n
    for (long na : {10L, 37L, 400L}) {
        for (long nb : {5L, 90L, 1000L}) {
            const double uisd = 2.7;
            const double pi = compute_if(uisd / std::sqrt(double(na)), uisd / std::sqrt(double(nb)));
            CHECK(pi == doctest::Approx(prevalence_from_counts(na, nb)).epsilon(1e-13));
        }
    }
}

TEST_CASE("property: cov(g, m) vanishes at the information fraction") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double sa = std::exp(6.0 * rng.uniform() - 3.0);
        const double sb = std::exp(6.0 * rng.uniform() - 3.0);
        REQUIRE(std::abs(cov_gm(compute_if(sa, sb), sa * sa, sb * sb)) < 1e-12);
    }
}

TEST_CASE("cov(g, m) agrees with a Monte Carlo covariance") {
    const double va = 0.4;
    const double vb = 0.1;
    const double pi = 0.3;
    Rng rng(5);
    const int n = 400000;
    double sg = 0.0, sm = 0.0, sgm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ya = std::sqrt(va) * rng.normal();
        const double yb = std::sqrt(vb) * rng.normal();
        const auto d = decompose(ya, yb, pi);
        sg += d.g;
        sm += d.m;
        sgm += d.g * d.m;
    }
    const double mc = sgm / n - (sg / n) * (sm / n);
    CHECK(mc == doctest::Approx(cov_gm(pi, va, vb)).epsilon(0.02));
}

TEST_CASE("decompose and recompose are inverse") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double ya = rng.normal(), yb = rng.normal(), pi = rng.uniform();
        const auto [a, b] = recompose(decompose(ya, yb, pi), pi);
        CHECK(a == doctest::Approx(ya).epsilon(1e-12));
        CHECK(b == doctest::Approx(yb).epsilon(1e-12));
    }
}

TEST_CASE("within-trial collapsibility m = y_A + pi g") {
    const auto d = decompose(0.2, -0.7, 0.35);
    CHECK(d.m == doctest::Approx(0.2 + 0.35 * d.g));
}

TEST_CASE("marginal covariance of a study") {
    const auto s = StudyRecord::make("s", {"A", 0.1, 0.5, 40L, false}, {"B", 0.3, 0.25, 60L, false});
    const double pi = s.info_fraction;
    const Eigen::Matrix2d m = marginal_covariance(s, CovarianceStructure(0.2, 0.3), pi);
    const double tg2 = 0.09;
    CHECK(m(0, 0) == doctest::Approx(0.25 + 0.04 + tg2 * pi * pi));
    CHECK(m(1, 1) == doctest::Approx(0.0625 + 0.04 + tg2 * (1 - pi) * (1 - pi)));
    CHECK(m(0, 1) == doctest::Approx(0.04 - tg2 * pi * (1 - pi)));
    CHECK(m(0, 1) == m(1, 0));
}

TEST_CASE("interaction heterogeneity annihilates the prevalence direction") {
    // tau_gamma^2 b b' with b = (-pi, 1 - pi): the combination (1 - pi, pi) is orthogonal
    const double pi = 0.27;
    const Eigen::Matrix2d t = interaction_heterogeneity(pi, 0.6);
    const Eigen::Vector2d w(1 - pi, pi);
    CHECK((t * w).norm() < 1e-15);
    CHECK(t.determinant() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("study record derives IF and count proxy") {
    const auto s = StudyRecord::make("s", {"A", 0.0, 0.2, 75L, false}, {"B", 0.0, 0.4, 25L, false});
    CHECK(s.info_fraction == doctest::Approx(0.2));
    REQUIRE(s.prevalence_proxy.has_value());
    CHECK(*s.prevalence_proxy == doctest::Approx(0.25));
    CHECK(s.contrast_variance() == doctest::Approx(0.2));
}

TEST_CASE("missing subgroup sentinel") {
    const auto o = missing_observation("B");
    CHECK(o.missing);
    CHECK(o.std_error == kDefaultMissingSE);
}

TEST_CASE("dataset validation") {
    MetaDataset empty;
    CHECK_THROWS_AS(empty.validate(), ContractError);
    MetaDataset dup;
    const auto s = StudyRecord::make("x", {"A", 0.0, 0.2, {}, false}, {"B", 0.0, 0.2, {}, false});
    dup.studies = {s, s};
    CHECK_THROWS_AS(dup.validate(), ContractError);
}

TEST_CASE("marginal covariance reduces to the within-study diagonal") {
    const auto s = StudyRecord::make("s", {"A", 0.0, 0.3, {}, false}, {"B", 0.0, 0.6, {}, false});
    const Eigen::Matrix2d m = marginal_covariance(s, CovarianceStructure(0.0, 0.0), 0.4);
    CHECK(m(0, 0) == doctest::Approx(0.09));
    CHECK(m(1, 1) == doctest::Approx(0.36));
    CHECK(m(0, 1) == 0.0);
}

TEST_CASE("marginal covariance at pi = 0.5 is the BMS form") {
    const auto s = StudyRecord::make("s", {"A", 0.0, 0.3, {}, false}, {"B", 0.0, 0.6, {}, false});
    const Eigen::Matrix2d m = marginal_covariance(s, CovarianceStructure(0.0, 0.8), 0.5);
    CHECK(m(0, 1) == doctest::Approx(-0.64 / 4));
    CHECK(m(0, 0) == doctest::Approx(0.09 + 0.64 / 4));
    CHECK(m(1, 1) == doctest::Approx(0.36 + 0.64 / 4));
}

TEST_CASE("random-effects covariance against simulated random effects") {
    // alpha_j + gamma_j (x - pi) for x in {0, 1}
    const double pi = 0.3, tau = 1.0, tg = 2.0;
    Rng rng(17);
    const int n = 1000000;
    double saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const double a = tau * rng.normal();
        const double g = tg * rng.normal();
        const double ya = a - g * pi;
        const double yb = a + g * (1 - pi);
        saa += ya * ya;
        sbb += yb * yb;
        sab += ya * yb;
    }
    const auto s = StudyRecord::make("s", {"A", 0.0, 1e-9, {}, false}, {"B", 0.0, 1e-9, {}, false});
    const Eigen::Matrix2d m = marginal_covariance(s, CovarianceStructure(tau, tg), pi);
    CHECK(saa / n == doctest::Approx(m(0, 0)).epsilon(0.01));
    CHECK(sbb / n == doctest::Approx(m(1, 1)).epsilon(0.01));
    CHECK(sab / n == doctest::Approx(m(0, 1)).epsilon(0.02));
}

TEST_CASE("property: marginal covariance is symmetric positive semidefinite") {
    Rng rng(23);
    for (int i = 0; i < 2000; ++i) {
        const auto s = StudyRecord::make("s", {"A", 0.0, 0.05 + rng.uniform(), {}, false},
                                         {"B", 0.0, 0.05 + rng.uniform(), {}, false});
        const Eigen::Matrix2d m =
            marginal_covariance(s, CovarianceStructure(2 * rng.uniform(), 2 * rng.uniform()), rng.uniform());
        REQUIRE(m(0, 1) == m(1, 0));
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("property: cov_gm is affine in pi with its root at the IF") {
    Rng rng(29);
    for (int i = 0; i < 1000; ++i) {
        const double va = std::exp(rng.normal()), vb = std::exp(rng.normal());
        const double c0 = cov_gm(0.0, va, vb), c1 = cov_gm(1.0, va, vb), ch = cov_gm(0.5, va, vb);
        REQUIRE(ch == doctest::Approx(0.5 * (c0 + c1)).epsilon(1e-12));
        const double root = -c0 / (c1 - c0);
        REQUIRE(root == doctest::Approx(compute_if(std::sqrt(va), std::sqrt(vb))).epsilon(1e-12));
    }
}

TEST_CASE("property: decompose round-trip to 1e-14") {
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        const double ya = rng.normal(), yb = rng.normal(), pi = rng.uniform();
        const auto [a, b] = recompose(decompose(ya, yb, pi), pi);
        REQUIRE(std::abs(a - ya) < 1e-14);
        REQUIRE(std::abs(b - yb) < 1e-14);
    }
}

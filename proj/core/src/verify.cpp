#include "cams/verify.hpp"
#include "cams/likelihood.hpp"
#include "cams/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cams {

void SimScenario::validate() const {
    if (n_studies < 1) {
        throw ContractError("scenario needs at least one study");
    }
    if (k_subgroups < 2) {
        throw ContractError("scenario needs at least two subgroups");
    }
    if (!(tau >= 0.0 && tau_gamma >= 0.0)) {
        throw ContractError("heterogeneity SDs must be nonnegative");
    }
    if (!(uisd > 0.0) || n_min < 2 || n_max < n_min) {
        throw ContractError("invalid trial size law");
    }
    if (!(prevalence_lo > 0.0 && prevalence_hi < 1.0 && prevalence_lo <= prevalence_hi)) {
        throw ContractError("prevalence range must lie inside (0, 1)");
    }
    if (leverage_prevalence && (!(*leverage_prevalence > 0.0 && *leverage_prevalence < 1.0) || leverage_size < 2)) {
        throw ContractError("invalid leverage trial");
    }
}

namespace {

std::string study_name(int j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "study%02d", j + 1);
    return buf;
}

long uniform_size(Rng& rng, long lo, long hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return std::min(hi, lo + static_cast<long>(std::floor(rng.uniform() * span)));
}

} // namespace

MetaDataset simulate(const SimScenario& sc) {
    sc.validate();
    Rng rng(derive_seed(sc.seed, 0));
    MetaDataset data;
    const double beta = sc.delta + sc.gamma;
    for (int j = 0; j < sc.n_studies; ++j) {
        long n = uniform_size(rng, sc.n_min, sc.n_max);
        if (sc.balanced && n % 2 == 1) {
            n += n < sc.n_max ? 1 : -1;
        }
        double p = sc.balanced ? 0.5 : sc.prevalence_lo + (sc.prevalence_hi - sc.prevalence_lo) * rng.uniform();
        if (j == 0 && sc.leverage_prevalence) {
            n = sc.leverage_size;
            p = *sc.leverage_prevalence;
        }
        const long nb = std::clamp(std::lround(p * static_cast<double>(n)), 1L, n - 1);
        const long na = n - nb;
        const double se_a = sc.uisd / std::sqrt(static_cast<double>(na));
        const double se_b = sc.uisd / std::sqrt(static_cast<double>(nb));
        const double pi = compute_if(se_a, se_b);

        const double alpha_j = rng.normal(sc.alpha, sc.tau);
        const double gamma_j = rng.normal(sc.gamma, sc.tau_gamma);
        const double y_a = alpha_j + beta * pi - gamma_j * pi + se_a * rng.normal();
        const double y_b = alpha_j + beta * pi + gamma_j * (1.0 - pi) + se_b * rng.normal();

        SubgroupObservation a{"A", y_a, se_a, na, false};
        SubgroupObservation b{"B", y_b, se_b, nb, false};
        data.studies.push_back(StudyRecord::make(study_name(j), a, b));
    }
    return data;
}

MultiStudyDataset simulate_multi(const SimScenario& sc) {
    sc.validate();
    const int k = sc.k_subgroups;
    const ContrastBasis basis = helmert_basis(k);
    Rng rng(derive_seed(sc.seed, 1));
    MultiStudyDataset data;
    for (int j = 0; j < sc.n_studies; ++j) {
        const long n = uniform_size(rng, sc.n_min, sc.n_max);
        Eigen::VectorXd share(k);
        for (int s = 0; s < k; ++s) {
            share(s) = 0.2 + 0.8 * rng.uniform();
        }
        share /= share.sum();
        Eigen::VectorXd var(k);
        for (int s = 0; s < k; ++s) {
            const double ns = std::max(1.0, std::round(share(s) * static_cast<double>(n)));
            var(s) = sc.uisd * sc.uisd / ns;
        }
        const Eigen::VectorXd pi = precision_prevalence(var);
        const Eigen::MatrixXd centred =
            (Eigen::MatrixXd::Identity(k, k) - Eigen::VectorXd::Ones(k) * pi.transpose()) * basis.basis_b();
        Eigen::VectorXd eta(k - 1);
        for (int i = 0; i < k - 1; ++i) {
            eta(i) = rng.normal(sc.gamma, sc.tau_gamma);
        }
        const double mu = rng.normal(sc.alpha, sc.tau);
        Eigen::VectorXd y = Eigen::VectorXd::Constant(k, mu) + centred * eta;
        for (int s = 0; s < k; ++s) {
            y(s) += std::sqrt(var(s)) * rng.normal();
        }
        data.studies.push_back(MultiStudyRecord::make(study_name(j), y, var, pi));
    }
    return data;
}

SimScenario leverage_scenario(std::uint64_t seed) {
    SimScenario sc;
    sc.n_studies = 8;
    sc.alpha = -0.4;
    sc.delta = -2.0;
    sc.gamma = 0.3;
    sc.tau = 0.05;
    sc.tau_gamma = 0.05;
    sc.prevalence_lo = 0.15;
    sc.prevalence_hi = 0.25;
    sc.n_min = 300;
    sc.n_max = 900;
    sc.leverage_prevalence = 0.48;
    sc.leverage_size = 60;
    sc.seed = seed;
    return sc;
}

EquivalenceReport check_equivalence(const SimScenario& scenario, const EquivalenceOptions& options) {
    const MetaDataset data = simulate(scenario);
    const GridSpec grid = GridSpec::defaults(options.priors, options.grid_nodes);
    FitOptions fo;
    if (options.force_half) {
        fo.pi_override = std::vector<double>(data.size(), 0.5);
    }
    const FitResult bim = fit_bim(data, options.priors, grid);
    const FitResult cams = fit_cams(data, options.priors, grid, fo);

    EquivalenceReport r;
    r.gamma_distance = cdf_sup_distance(bim.location("gamma"), cams.location("gamma"), grid.quantile_resolution);
    r.tau_gamma_distance = cdf_sup_distance(bim.scale("tau_gamma"), cams.scale("tau_gamma"));
    for (const auto& s : data.studies) {
        r.max_imbalance = std::max(r.max_imbalance, std::abs(s.obs_a.std_error - s.obs_b.std_error) / s.obs_a.std_error);
    }
    r.pass = r.gamma_distance < options.threshold && r.tau_gamma_distance < options.threshold;
    return r;
}

KSufficiencyReport check_k_sufficiency(int k, std::uint64_t seed, int draws, double perturbation) {
    if (k < 2) {
        throw ContractError("check_k_sufficiency: k must be at least 2");
    }
    const ContrastBasis basis = helmert_basis(k);
    const Eigen::MatrixXd& c = basis.matrix_c();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);
    KSufficiencyReport r;
    r.k = k;
    for (int d = 0; d < draws; ++d) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
        Eigen::VectorXd var(k);
        for (int s = 0; s < k; ++s) {
            var(s) = std::exp(2.0 * rng.uniform() - 1.0);
        }
        const Eigen::VectorXd pi = precision_prevalence(var);
        r.max_orthogonality = std::max(r.max_orthogonality, contrast_mean_cov(basis, var, pi).cwiseAbs().maxCoeff());

        const Eigen::MatrixXd b = (Eigen::MatrixXd::Identity(k, k) - ones * pi.transpose()) * basis.basis_b();
        const double mu = rng.normal();
        Eigen::VectorXd gamma(k - 1);
        for (int i = 0; i < k - 1; ++i) {
            gamma(i) = rng.normal();
        }
        const double tau = std::abs(rng.normal(0.0, 0.5));
        const double tau_gamma = std::abs(rng.normal(0.0, 0.5));
        const Eigen::MatrixXd sigma = Eigen::MatrixXd(var.asDiagonal()) + tau * tau * ones * ones.transpose() +
                                      tau_gamma * tau_gamma * b * b.transpose();
        const Eigen::VectorXd mean = mu * ones + b * gamma;
        Eigen::VectorXd z(k);
        for (int s = 0; s < k; ++s) {
            z(s) = rng.normal();
        }
        const Eigen::VectorXd y = mean + Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL() * z;

        const double lp_y = mvn_logpdf(y, mean, sigma);
        const Eigen::VectorXd g = c * y;
        const Eigen::VectorXd mean_g = c * mean;
        const Eigen::MatrixXd cov_g = c * sigma * c.transpose();
        const double lp_g = mvn_logpdf(g, mean_g, cov_g);

        auto residual = [&](const Eigen::VectorXd& p) {
            const double log_det = std::log(std::abs(transform_matrix(basis, p).determinant));
            const double lp_m = normal_logpdf(p.dot(y), p.dot(mean), p.dot(sigma * p));
            return lp_y - log_det - lp_g - lp_m;
        };
        r.max_residual = std::max(r.max_residual, std::abs(residual(pi)));

        Eigen::VectorXd moved = pi;
        moved(0) += perturbation;
        moved /= moved.sum();
        const double res = residual(moved);
        // log N(m | g) - log N(m) from the conditional law of m given g.
        const Eigen::VectorXd cross = c * sigma * moved;
        const Eigen::LLT<Eigen::MatrixXd> llt_g(cov_g);
        const Eigen::VectorXd k_vec = llt_g.solve(cross);
        const double var_m = moved.dot(sigma * moved);
        const double r_m = moved.dot(y) - moved.dot(mean);
        const double cond_var = var_m - cross.dot(k_vec);
        const double e = r_m - k_vec.dot(g - mean_g);
        const double analytic = -0.5 * std::log(cond_var / var_m) - 0.5 * e * e / cond_var + 0.5 * r_m * r_m / var_m;
        if (d == 0 || std::abs(res) > std::abs(r.perturbed_residual)) {
            r.perturbed_residual = res;
            r.perturbed_cross_term = analytic;
        }
        r.cross_term_error = std::max(r.cross_term_error, std::abs(res - analytic));
    }
    r.pass = r.max_orthogonality < 1e-12 && r.max_residual < 1e-10 && r.cross_term_error < 1e-8 &&
             std::abs(r.perturbed_residual) > 1e-12;
    return r;
}

double check_kronecker(int treatments, int subgroups, std::uint64_t seed) {
    const ContrastBasis ct = helmert_basis(treatments);
    const ContrastBasis ck = helmert_basis(subgroups);
    const Eigen::MatrixXd kc = kronecker_contrast(ct, ck);
    Rng rng(derive_seed(seed, 2));
    const int n = treatments * subgroups;
    Eigen::VectorXd var(n);
    for (int i = 0; i < n; ++i) {
        var(i) = std::exp(2.0 * rng.uniform() - 1.0);
    }
    // Within-arm precision prevalences; arms weighted equally.
    Eigen::VectorXd pi(n);
    for (int t = 0; t < treatments; ++t) {
        pi.segment(t * subgroups, subgroups) =
            precision_prevalence(var.segment(t * subgroups, subgroups)) / static_cast<double>(treatments);
    }
    return (kc * var.cwiseProduct(pi)).cwiseAbs().maxCoeff();
}

FitResult synthetic_cams_fit(double alpha, double delta, double gamma, double sd_alpha, double sd_delta,
                             double sd_gamma) {
    PosteriorGrid g;
    g.axis_names = {"tau", "tau_gamma"};
    g.axes = {GridAxis::fixed(0.0), GridAxis::fixed(0.0)};
    g.log_density = {0.0};
    g.weights = {1.0};
    g.cond_mean = {Eigen::Vector3d(alpha, delta, gamma)};
    g.cond_cov = {Eigen::Vector3d(sd_alpha * sd_alpha, sd_delta * sd_delta, sd_gamma * sd_gamma).asDiagonal()};
    return FitResult::from_grid(Estimator::CAMS, {"alpha", "delta", "gamma"}, std::move(g));
}

BayesOptimumReport check_bayes_optimum(const PrevalenceDistribution& dist, Loss loss, std::uint64_t seed, int draws) {
    const FitResult fit = synthetic_cams_fit(0.1, -0.8, 0.3, 0.1, 0.3, 0.1);
    std::vector<double> grid(1001);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = static_cast<double>(i) / 1000.0;
    }
    const RiskCurve curve = bayes_risk(fit, dist, loss, grid, draws, seed);
    BayesOptimumReport r;
    r.argmin = curve.argmin;
    r.predicted = loss == Loss::Squared ? dist.mean() : dist.quantile(0.5);
    r.pass = std::abs(r.argmin - r.predicted) < 0.01;
    return r;
}

FactorizationReport check_factorization(const SimScenario& scenario, int points) {
    const MetaDataset data = simulate(scenario);
    const std::vector<double> pis = data.information_fractions();
    const std::vector<double> half(data.size(), 0.5);
    Rng rng(derive_seed(scenario.seed, 3));
    FactorizationReport r;
    for (int i = 0; i < points; ++i) {
        CamsPoint p;
        p.alpha = rng.normal();
        p.delta = rng.normal();
        p.gamma = rng.normal();
        p.tau = std::abs(rng.normal(0.0, 0.5));
        p.tau_gamma = std::abs(rng.normal(0.0, 0.5));
        const double joint = cams_joint_loglik(data, p, pis);
        r.max_residual = std::max(r.max_residual, std::abs(joint - cams_factorized_loglik(data, p, pis).total()));

        const double res = cams_joint_loglik(data, p, half) - cams_factorized_loglik(data, p, half).total();
        const double cross = cams_cross_term(data, p, half);
        if (i == 0 || std::abs(res) > std::abs(r.forced_half_residual)) {
            r.forced_half_residual = res;
            r.forced_half_cross_term = cross;
        }
        r.cross_term_error = std::max(r.cross_term_error, std::abs(res - cross));
    }
    r.pass = r.max_residual < 1e-10 && r.cross_term_error < 1e-8;
    return r;
}

bool VerificationReport::all_as_expected() const {
    return failures() == 0;
}

std::size_t VerificationReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.as_expected(); }));
}

VerificationReport run_battery(const BatteryOptions& options) {
    if (options.seeds < 1) {
        throw ContractError("battery needs at least one seed");
    }
    VerificationReport rep;
    rep.base_seed = options.base_seed;
    rep.seeds = options.seeds;
    auto add = [&](std::string name, std::string tier, double value, double threshold, bool expected = true,
                   std::string detail = {}) {
        rep.checks.push_back(
            {std::move(name), std::move(tier), value, threshold, value < threshold, expected, std::move(detail)});
    };
    const int sizes[] = {3, 7, 15};

    EquivalenceOptions eq;
    eq.priors = options.priors;
    eq.grid_nodes = options.grid_nodes;
    for (int s = 0; s < options.seeds; ++s) {
        SimScenario sc;
        sc.n_studies = sizes[s % 3];
        sc.delta = 0.25 * static_cast<double>(s % 5 - 2);
        sc.seed = derive_seed(options.base_seed, static_cast<std::uint64_t>(s));
        const std::string tag = "seed" + std::to_string(s) + "/J" + std::to_string(sc.n_studies);

        eq.force_half = false;
        const auto r = check_equivalence(sc, eq);
        add("equivalence/gamma/" + tag, "grid", r.gamma_distance, eq.threshold);
        add("equivalence/tau_gamma/" + tag, "grid", r.tau_gamma_distance, eq.threshold);

        if (options.negative_controls && r.max_imbalance > 0.5) {
            eq.force_half = true;
            const auto f = check_equivalence(sc, eq);
            add("forced-half/gamma/" + tag, "grid", f.gamma_distance, eq.threshold, false,
                "pi_j replaced by 0.5 on unbalanced data");
        }
    }

    for (int s = 0; s < 3; ++s) {
        SimScenario sc;
        sc.n_studies = sizes[s];
        sc.balanced = true;
        sc.seed = derive_seed(options.base_seed ^ 0xba1a9ce5ULL, static_cast<std::uint64_t>(s));
        eq.force_half = true;
        const auto r = check_equivalence(sc, eq);
        add("balanced-half/gamma/J" + std::to_string(sc.n_studies), "grid", r.gamma_distance, eq.threshold);
    }

    for (int s = 0; s < 3; ++s) {
        SimScenario sc;
        sc.n_studies = sizes[s];
        sc.seed = derive_seed(options.base_seed ^ 0xfac7ULL, static_cast<std::uint64_t>(s));
        const auto r = check_factorization(sc, 100);
        const std::string tag = "J" + std::to_string(sc.n_studies);
        add("factorization/" + tag, "exact", r.max_residual, 1e-10);
        add("factorization/forced-half-cross-term/" + tag, "exact", r.cross_term_error, 1e-8);
        if (options.negative_controls) {
            add("factorization/forced-half-breaks/" + tag, "exact", std::abs(r.forced_half_residual), 1e-10, false,
                "a nonzero cross term is expected");
        }
    }

    for (int k : {2, 3, 5}) {
        const auto r = check_k_sufficiency(k, derive_seed(options.base_seed, 1000 + static_cast<std::uint64_t>(k)));
        const std::string tag = "K" + std::to_string(k);
        add("k-sufficiency/orthogonality/" + tag, "exact", r.max_orthogonality, 1e-12);
        add("k-sufficiency/factorization/" + tag, "exact", r.max_residual, 1e-10);
        add("k-sufficiency/perturbed-cross-term/" + tag, "exact", r.cross_term_error, 1e-8);
    }

    add("kronecker/T2K2", "exact", check_kronecker(2, 2, options.base_seed), 1e-12);
    add("kronecker/T3K3", "exact", check_kronecker(3, 3, options.base_seed), 1e-12);

    struct Case {
        const char* name;
        double a, b;
        Loss loss;
    };
    for (const Case& c : {Case{"beta(2,2)/squared", 2, 2, Loss::Squared}, Case{"beta(5,21)/squared", 5, 21, Loss::Squared},
                          Case{"beta(2,8)/squared", 2, 8, Loss::Squared}, Case{"beta(2,8)/absolute", 2, 8, Loss::Absolute}}) {
        const auto r = check_bayes_optimum(PrevalenceDistribution::beta(c.a, c.b), c.loss,
                                           derive_seed(options.base_seed, 2000));
        add(std::string("bayes-optimum/") + c.name, "mc", std::abs(r.argmin - r.predicted), 0.01);
    }
    return rep;
}

} // namespace cams

#pragma once

#include "cams/contrasts.hpp"
#include "cams/grid.hpp"
#include "cams/inference.hpp"
#include "cams/model.hpp"
#include "cams/reporting.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cams {

/// Generative settings for synthetic portfolios. Subgroup SEs follow the
/// UISD law se = uisd / sqrt(n); trial sizes and prevalences are uniform.
struct SimScenario {
    int n_studies = 7;
    int k_subgroups = 2;
    double alpha = 0.0;
    double delta = 0.0;  // ecological slope (explicit form); beta = delta + gamma
    double gamma = 0.3;
    double tau = 0.2;
    double tau_gamma = 0.1;
    double uisd = 2.0;
    long n_min = 100;
    long n_max = 800;
    double prevalence_lo = 0.1;
    double prevalence_hi = 0.5;
    bool balanced = false;  // every trial splits 50:50
    /// Replaces the first trial by a small one with this outlying prevalence.
    std::optional<double> leverage_prevalence;
    long leverage_size = 60;
    std::uint64_t seed = 1;

    void validate() const;
};

MetaDataset simulate(const SimScenario& scenario);

/// K-subgroup portfolio: y_j = mu_j 1 + B_j (gamma + eta_j) + e_j with
/// Helmert contrasts, B_j = (I - 1 pi_j') C'(CC')^-1 and precision
/// prevalences pi_j. `gamma` is repeated across the K-1 contrasts.
MultiStudyDataset simulate_multi(const SimScenario& scenario);

/// Leverage-point portfolio: one small trial with prevalence near 0.48, the
/// rest near 0.2, and a strong ecological slope.
SimScenario leverage_scenario(std::uint64_t seed);

struct CheckResult {
    std::string name;
    std::string tier;  // "exact", "grid" or "mc"
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool expected_pass = true;  // negative controls are expected to fail
    std::string detail;

    bool as_expected() const { return pass == expected_pass; }
};

struct EquivalenceOptions {
    PriorSpec priors;
    int grid_nodes = GridSpec::kDefaultNodes;
    bool force_half = false;  // replace every pi_j by 0.5 in CAMS
    double threshold = 1e-4;
};

struct EquivalenceReport {
    double gamma_distance = 0.0;
    double tau_gamma_distance = 0.0;
    double max_imbalance = 0.0;  // max_j |sigma_A - sigma_B| / sigma_A
    bool pass = false;
};

/// Fits BIM and CAMS at matched priors and grids and compares the gamma and
/// tau_gamma posterior CDFs in sup norm.
EquivalenceReport check_equivalence(const SimScenario& scenario, const EquivalenceOptions& options = {});

struct KSufficiencyReport {
    int k = 0;
    double max_orthogonality = 0.0;  // max |C S pi|
    double max_residual = 0.0;       // max |log p(y) - log|det T| - log p(g) - log p(m)|
    double perturbed_residual = 0.0; // same with one prevalence entry moved by `perturbation`
    double perturbed_cross_term = 0.0;
    double cross_term_error = 0.0;   // |perturbed_residual - perturbed_cross_term|
    bool pass = false;
};

KSufficiencyReport check_k_sufficiency(int k, std::uint64_t seed, int draws = 100, double perturbation = 0.05);

/// Per-arm precision prevalences annihilate (C_T (x) C_K) S pi. Returns max |entry|.
double check_kronecker(int treatments, int subgroups, std::uint64_t seed);

struct BayesOptimumReport {
    double argmin = 0.0;
    double predicted = 0.0;
    bool pass = false;
};

/// Synthetic CAMS posterior with delta independent of pi; compares the Monte
/// Carlo risk minimizer with E[pi] (squared loss) or the median (absolute loss).
BayesOptimumReport check_bayes_optimum(const PrevalenceDistribution& dist, Loss loss, std::uint64_t seed,
                                       int draws = 20000);

/// A fixed CAMS posterior used by the Bayes-risk checks: one grid node,
/// independent (alpha, delta, gamma).
FitResult synthetic_cams_fit(double alpha, double delta, double gamma, double sd_alpha, double sd_delta,
                             double sd_gamma);

struct FactorizationReport {
    double max_residual = 0.0;           // at the information fractions
    double forced_half_residual = 0.0;   // joint - factorized with pi = 0.5
    double forced_half_cross_term = 0.0;
    double cross_term_error = 0.0;       // max over points of |residual - cross term| with pi = 0.5
    bool pass = false;
};

FactorizationReport check_factorization(const SimScenario& scenario, int points = 100);

struct VerificationReport {
    std::uint64_t base_seed = 0;
    int seeds = 0;
    std::vector<CheckResult> checks;

    bool all_as_expected() const;
    std::size_t failures() const;  // checks whose outcome differs from the expectation
};

struct BatteryOptions {
    int seeds = 50;
    std::uint64_t base_seed = 20240601;
    PriorSpec priors;
    int grid_nodes = GridSpec::kDefaultNodes;
    bool negative_controls = true;
};

VerificationReport run_battery(const BatteryOptions& options);

} // namespace cams

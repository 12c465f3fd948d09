#pragma once

#include "cams/errors.hpp"
#include "cams/inference.hpp"
#include "cams/mixture.hpp"
#include "cams/model.hpp"
#include "cams/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cams {

struct EffectSummary {
    Summary log;  // log scale
    double exp_median = 0.0;
    double exp_lower = 0.0;
    double exp_upper = 0.0;
};

EffectSummary to_effect_summary(const Summary& s);

/// Subgroup, overall and interaction effects at a reporting prevalence.
struct ReportedEffects {
    EffectSummary mu_a;
    EffectSummary mu_b;
    EffectSummary overall;
    EffectSummary interaction;
    std::string prevalence_label;
    double prevalence = 0.0;              // point value, or the distribution mean
    std::optional<double> prevalence_sd;  // distributions and the tau-averaged overall IF
    Warnings warnings;
};

/// mu_A = alpha + delta pi, mu_B = mu_A + gamma, m = alpha + (delta + gamma) pi.
/// The interaction is evaluated from gamma alone, so it does not depend on pi.
ReportedEffects effects_at(const FitResult& fit, double pi);

// ---------------------------------------------------------------------------
// Prevalence distributions
// ---------------------------------------------------------------------------

struct BetaMoments {
    double mean = 0.0;
    double variance = 0.0;
    double sd = 0.0;
};

BetaMoments beta_moments(double a, double b);
/// Moment-matched Beta(a, b); requires 0 < variance < mean (1 - mean).
std::pair<double, double> beta_from_moments(double mean, double variance);
double beta_quantile(double a, double b, double p);

struct BetaComponent {
    double weight = 1.0;
    double a = 1.0;
    double b = 1.0;
};

/// Point mass, single Beta or finite Beta mixture on [0, 1].
class PrevalenceDistribution {
public:
    PrevalenceDistribution() = default;
    static PrevalenceDistribution point(double value);
    static PrevalenceDistribution beta(double a, double b);
    static PrevalenceDistribution mixture(std::vector<BetaComponent> components);

    bool is_point() const { return components_.empty(); }
    double point_value() const { return point_; }
    const std::vector<BetaComponent>& components() const { return components_; }

    double mean() const;
    double variance() const;
    double cdf(double x) const;
    double quantile(double p) const;
    double sample(Rng& rng) const;
    std::string describe() const;

private:
    double point_ = 0.5;
    std::vector<BetaComponent> components_;
};

// ---------------------------------------------------------------------------
// Reporting-prevalence strategies
// ---------------------------------------------------------------------------

enum class Strategy { OverallIf, OptimalIf, ClosenessA, ClosenessB, Average, TrialWeighted, External };

std::string to_string(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& text);

/// Reporting-prevalence policy: a point, a named strategy or a distribution.
struct PrevalenceSpec {
    enum class Kind { Point, Strategy, Distribution };
    Kind kind = Kind::Strategy;
    double value = 0.5;
    Strategy strategy = Strategy::OverallIf;
    PrevalenceDistribution distribution;
    int draws = 20000;
    std::uint64_t seed = 0;

    /// "0.3", "overall-if", "optimal-if", "closeness-a", "closeness-b",
    /// "average", "trial-weighted", "external:0.68", "beta:5,21",
    /// "beta-mixture:w,a,b;w,a,b".
    static PrevalenceSpec parse(const std::string& text);
    std::string describe() const;
    void validate() const;
};

struct OverallIf {
    double value = 0.0;  // posterior mean of pi*(tau)
    double sd = 0.0;
};

/// Weighted mean of study IFs with w_j = 1 / (tau^2 + (1-pi)^2 var_a + pi^2 var_b),
/// averaged over the posterior of tau.
OverallIf overall_if(const FitResult& fit, const MetaDataset& data);

/// Same quantity at a fixed tau.
double overall_if_at(const MetaDataset& data, double tau);

struct WidthPoint {
    double pi = 0.0;
    double width_a = 0.0;
    double width_b = 0.0;
    double total() const { return width_a + width_b; }
};

struct OptimalIf {
    double pi = 0.5;
    bool flat = false;  // width does not depend on pi; pi is then the whole range
    double range_lo = 0.0;
    double range_hi = 1.0;
    std::vector<WidthPoint> curve;
    Warnings warnings;
};

/// Minimizes the summed width of the two subgroup 95% intervals over pi.
OptimalIf optimal_if(const FitResult& fit, double lo = 0.0, double hi = 1.0, int curve_points = 101);

/// Width of the 95% intervals of mu_A and mu_B at pi.
WidthPoint interval_widths(const FitResult& fit, double pi);

struct StrategyContext {
    const FitResult* bms = nullptr;  // reference fit for the closeness strategies
    std::optional<double> external;
    double search_lo = 0.0;
    double search_hi = 1.0;
};

double strategy_prevalence(const MetaDataset& data, const FitResult& fit, Strategy kind,
                           const StrategyContext& ctx = {});

// ---------------------------------------------------------------------------
// Distributional reporting
// ---------------------------------------------------------------------------

struct EffectDraws {
    std::vector<double> pi;
    std::vector<double> alpha;
    std::vector<double> delta;
    std::vector<double> gamma;
    std::vector<double> mu_a;
    std::vector<double> mu_b;
    std::vector<double> overall;
};

/// Joint draws of (alpha, delta, gamma) from the grid mixture and of pi from
/// `dist`. Deterministic in the seed; drawn in fixed-size chunks with derived seeds.
EffectDraws draw_effects(const FitResult& fit, const PrevalenceDistribution& dist, int draws, std::uint64_t seed);

Summary empirical_summary(std::vector<double> values, double level = 0.95);

/// Effects averaged over a prevalence distribution. Subgroup and overall
/// summaries are Monte Carlo; the interaction is the exact gamma posterior.
ReportedEffects marginalize_prevalence(const FitResult& fit, const PrevalenceDistribution& dist, int draws,
                                       std::uint64_t seed);

/// Resolves any PrevalenceSpec against a CAMS fit.
ReportedEffects report(const MetaDataset& data, const FitResult& fit, const PrevalenceSpec& spec,
                       const StrategyContext& ctx = {});

struct StrategyRow {
    std::string method;
    ReportedEffects effects;
};

struct StrategyTableOptions {
    StrategyContext context;
    std::optional<PrevalenceDistribution> map_prevalence;
    int draws = 20000;
    std::uint64_t seed = 0;
};

struct StrategyTable {
    std::vector<StrategyRow> rows;
    Warnings warnings;  // rows that could not be produced
};

/// Overall-IF, optimal IF, closeness, average, trial-weighted, external and
/// MAP-distribution rows.
StrategyTable strategy_table(const MetaDataset& data, const FitResult& fit, const StrategyTableOptions& options);

// ---------------------------------------------------------------------------
// MAP prevalence and Bayes risk
// ---------------------------------------------------------------------------

struct StudyCount {
    long events = 0;  // subjects in subgroup B
    long total = 0;
};

struct MapOptions {
    double tau_scale = 1.0;  // half-normal scale of the between-study SD on the logit scale
    int mu_nodes = 201;
    int tau_nodes = 101;
    int quadrature_order = 24;
};

struct MapPrevalence {
    double a = 1.0;
    double b = 1.0;
    double pooled_median = 0.0;
    double pooled_lower = 0.0;
    double pooled_upper = 0.0;
    double predictive_mean = 0.0;
    double predictive_sd = 0.0;
    double predictive_median = 0.0;
    double predictive_lower = 0.0;
    double predictive_upper = 0.0;
    std::size_t studies_used = 0;
    Warnings warnings;
};

/// Binomial counts with logit-normal random effects, flat prior on the mean
/// logit and half-normal prior on the SD; grid posterior, predictive for a new
/// study, and a moment-matched Beta.
MapPrevalence fit_map_prevalence(const std::vector<StudyCount>& counts, const MapOptions& options = {});

/// Gauss-Hermite nodes and weights for weight function exp(-x^2).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n);

enum class Loss { Squared, Absolute };

struct RiskCurve {
    std::vector<double> pi;
    std::vector<double> risk;
    double argmin = 0.0;
};

/// Monte Carlo risk of reporting subgroup A at pi when the target study has
/// prevalence pi_j ~ pi_dist, independent of the effect parameters. Common
/// random numbers across the pi grid.
RiskCurve bayes_risk(const FitResult& fit, const PrevalenceDistribution& pi_dist, Loss loss,
                     const std::vector<double>& pi_grid, int draws, std::uint64_t seed);

} // namespace cams

#pragma once

#include "cams/contrasts.hpp"
#include "cams/errors.hpp"
#include "cams/grid.hpp"
#include "cams/linear_model.hpp"
#include "cams/mixture.hpp"
#include "cams/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cams {

enum class Estimator { BIM, BMS, CAMS, OVERALL, BIM_K };
enum class Parametrization { Implicit, Explicit };

std::string to_string(Estimator e);
std::string to_string(Parametrization p);

/// Joint posterior over the heterogeneity lattice with the Gaussian
/// conditional of the location parameters at every node. Nodes are stored
/// row-major: the last axis varies fastest.
struct PosteriorGrid {
    std::vector<std::string> axis_names;
    std::vector<GridAxis> axes;
    std::vector<double> log_density;  // log marginal likelihood + log prior
    std::vector<double> weights;      // normalized mixture weights (density x quadrature)
    std::vector<Eigen::VectorXd> cond_mean;
    std::vector<Eigen::MatrixXd> cond_cov;

    std::size_t size() const { return weights.size(); }
    /// Per-axis indices of a flat node index.
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    /// Heterogeneity values at a flat node index.
    std::vector<double> values(std::size_t flat) const;
    /// Marginal posterior of one heterogeneity axis.
    GridDensity marginal(std::size_t axis) const;
    int axis_index(const std::string& name) const;  // -1 if absent
};

struct ParameterSummary {
    std::string name;
    Summary summary;
    bool derived = false;
};

struct Provenance {
    PriorSpec priors;
    GridSpec grid;
    std::uint64_t dataset_hash = 0;
    std::optional<std::uint64_t> seed;
    std::string parametrization;
};

struct FitOptions {
    Parametrization parametrization = Parametrization::Explicit;
    /// Adds tau^2 on the common effect of BMS (a 2-D grid); off by default.
    bool bms_alpha_heterogeneity = false;
    /// Replaces the information fractions in CAMS (e.g. a constant 0.5).
    std::optional<std::vector<double>> pi_override;
};

/// Output of every estimator. Immutable and cheap to share; keeps the model
/// so conditional posteriors can be re-evaluated at off-grid values.
class FitResult {
public:
    FitResult(Estimator estimator, std::shared_ptr<const GaussianLinearModel> model, PosteriorGrid grid,
              Provenance provenance, std::vector<double> study_pi = {}, Warnings warnings = {},
              Parametrization parametrization = Parametrization::Explicit);

    /// Builds a fit directly from a posterior grid (no underlying model); used
    /// for synthetic posteriors.
    static FitResult from_grid(Estimator estimator, std::vector<std::string> parameter_names, PosteriorGrid grid,
                               Parametrization parametrization = Parametrization::Explicit);

    Estimator estimator() const { return estimator_; }
    Parametrization parametrization() const { return parametrization_; }
    const std::vector<std::string>& parameter_names() const { return names_; }
    const PosteriorGrid& grid() const { return grid_; }
    const Provenance& provenance() const { return provenance_; }
    const Warnings& warnings() const { return warnings_; }
    const std::vector<double>& study_pi() const { return study_pi_; }
    const std::shared_ptr<const GaussianLinearModel>& model() const { return model_; }
    /// Unidentified directions in location-parameter space (p x d).
    Eigen::MatrixXd flat_directions() const;

    bool has_location(const std::string& name) const;
    bool has_scale(const std::string& name) const;
    /// Coefficient vector of a location or derived parameter (delta = beta - gamma
    /// in the implicit CAMS parametrization, beta = delta + gamma in the explicit one).
    Eigen::VectorXd coefficients(const std::string& name) const;
    bool identifies(const Eigen::VectorXd& c) const;

    /// Posterior of c' theta as a normal mixture over the grid.
    NormalMixture functional(const Eigen::VectorXd& c) const;
    NormalMixture location(const std::string& name) const;
    GridDensity scale(const std::string& name) const;

    /// Location, derived and scale summaries in a fixed order.
    const std::vector<ParameterSummary>& summaries() const { return summaries_; }
    const ParameterSummary& summary(const std::string& name) const;

private:
    FitResult(Estimator estimator, Parametrization parametrization);
    void build_summaries();

    Estimator estimator_;
    Parametrization parametrization_;
    std::shared_ptr<const GaussianLinearModel> model_;
    std::vector<std::string> names_;
    PosteriorGrid grid_;
    Provenance provenance_;
    std::vector<double> study_pi_;
    Warnings warnings_;
    std::vector<ParameterSummary> summaries_;
};

/// Univariate random-effects meta-analysis of the within-trial contrasts.
FitResult fit_bim(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid);

/// Joint subgroup model with interaction random effects centred at 1/2.
FitResult fit_bms(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid,
                  const FitOptions& options = {});

/// Contribution-adjusted subgroup model: ecological slope on the information
/// fraction and IF-centred interaction random effects; 2-D grid over (tau, tau_gamma).
FitResult fit_cams(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid,
                   const FitOptions& options = {});

/// Random-effects meta-analysis of the prevalence-weighted means m_j.
FitResult fit_overall(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid);

/// K-subgroup interaction model on g_j = C y_j.
FitResult fit_bim_k(const MultiStudyDataset& data, const ContrastBasis& basis, const PriorSpec& priors,
                    const GridSpec& grid);

/// Posterior P(parameter > threshold). Works for location, derived and scale parameters.
double tail_probability(const FitResult& fit, const std::string& parameter, double threshold);

/// max(P(delta > 0), P(delta < 0)) for a CAMS fit.
double ecological_evidence(const FitResult& fit);

struct TracePoint {
    double tau_gamma = 0.0;
    double median = 0.0;
    double lower = 0.0;  // 25%
    double upper = 0.0;  // 75%
};

/// Conditional posterior of gamma given tau_gamma. For models with an extra
/// tau axis, tau is integrated out under its conditional posterior.
std::vector<TracePoint> interaction_trace(const FitResult& fit, const std::vector<double>& tau_gamma_values);

/// Hash of the numeric content of a dataset (FNV-1a over the bit patterns).
std::uint64_t dataset_hash(const MetaDataset& data);
std::uint64_t dataset_hash(const MultiStudyDataset& data);

} // namespace cams

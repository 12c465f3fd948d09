#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cams {

/// Default standard error (log scale) assigned to an unobserved subgroup.
inline constexpr double kDefaultMissingSE = 100.0;

struct SubgroupObservation {
    std::string label;
    double estimate = 0.0;  // log effect scale
    double std_error = 1.0;
    std::optional<long> count;
    bool missing = false;

    double variance() const { return std_error * std_error; }
};

/// Placeholder for an unreported subgroup: estimate 0 and an inflated SE.
SubgroupObservation missing_observation(std::string label, double sentinel_se = kDefaultMissingSE);

/// One two-subgroup trial. Subgroup B is the "x = 1" level, so the
/// within-trial contrast is y_B - y_A.
struct StudyRecord {
    std::string study_id;
    SubgroupObservation obs_a;
    SubgroupObservation obs_b;
    double info_fraction = 0.5;             // share of information carried by B
    std::optional<double> prevalence_proxy; // n_B / (n_A + n_B) when counts exist

    /// Builds a record and derives the information fraction (and the count
    /// proxy when both counts are present). Throws DomainError on SE <= 0.
    static StudyRecord make(std::string id, SubgroupObservation a, SubgroupObservation b);

    double contrast() const { return obs_b.estimate - obs_a.estimate; }
    double contrast_variance() const { return obs_a.variance() + obs_b.variance(); }
};

/// K-subgroup trial with diagonal within-study covariance.
struct MultiStudyRecord {
    std::string study_id;
    Eigen::VectorXd estimates;
    Eigen::VectorXd cov_diag;
    Eigen::VectorXd prevalence;

    static MultiStudyRecord make(std::string id, Eigen::VectorXd estimates, Eigen::VectorXd cov_diag,
                                 Eigen::VectorXd prevalence);
    int k() const { return static_cast<int>(estimates.size()); }
};

struct MetaDataset {
    std::vector<StudyRecord> studies;
    std::string scale_label = "log-RR";
    bool uisd_assumption = true;

    /// At least one study, unique ids.
    void validate() const;
    std::size_t size() const { return studies.size(); }
    std::vector<double> information_fractions() const;
};

struct MultiStudyDataset {
    std::vector<MultiStudyRecord> studies;
    std::string scale_label = "log-RR";

    void validate() const;
    int k() const;
};

/// Between-study standard deviations of the overall effect (tau) and of the
/// treatment-by-subgroup interaction (tau_gamma).
class CovarianceStructure {
public:
    CovarianceStructure(double tau, double tau_gamma);
    double tau() const { return tau_; }
    double tau_gamma() const { return tau_gamma_; }

private:
    double tau_;
    double tau_gamma_;
};

/// sigma_a^2 / (sigma_a^2 + sigma_b^2): the information fraction of subgroup B.
double compute_if(double sigma_a, double sigma_b);

/// n_b / (n_a + n_b).
double prevalence_from_counts(long n_a, long n_b);

struct ContrastMean {
    double g = 0.0;  // y_B - y_A
    double m = 0.0;  // (1 - pi) y_A + pi y_B
};

ContrastMean decompose(double y_a, double y_b, double pi);
ContrastMean decompose(const StudyRecord& study, double pi);

/// Inverse of decompose: returns (y_A, y_B).
std::pair<double, double> recompose(const ContrastMean& gm, double pi);

/// Within-study Cov(g, m) for diagonal S: pi var_b - (1 - pi) var_a.
double cov_gm(double pi, double var_a, double var_b);

/// tau_gamma^2 * [[pi^2, -pi(1-pi)], [-pi(1-pi), (1-pi)^2]].
Eigen::Matrix2d interaction_heterogeneity(double pi, double tau_gamma);

/// diag(var_a, var_b) + tau^2 J + T_gamma(pi): marginal covariance of (y_A, y_B).
Eigen::Matrix2d marginal_covariance(const StudyRecord& study, const CovarianceStructure& het, double pi);

} // namespace cams

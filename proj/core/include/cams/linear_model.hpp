#pragma once

#include "cams/grid.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace cams {

/// Observations of one study: y ~ N(X theta, V), where
/// V = fixed_cov + sum_h sd_h^2 * het_cov[h].
struct StudyBlock {
    Eigen::VectorXd y;
    Eigen::MatrixXd design;
    Eigen::MatrixXd fixed_cov;
    std::vector<Eigen::MatrixXd> het_cov;
};

/// Gaussian conditional of the location parameters at one heterogeneity node.
struct NodeFit {
    double log_marginal = 0.0;  // log p(y | heterogeneity), location parameters integrated out
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Multi-study linear Gaussian model with known within-study covariance and a
/// small number of heterogeneity SDs. Location parameters get flat or normal
/// priors; directions of the parameter space that neither the design nor the
/// prior informs are dropped and reported as flat directions.
class GaussianLinearModel {
public:
    GaussianLinearModel(std::vector<std::string> parameter_names, std::vector<std::string> heterogeneity_names,
                        std::vector<StudyBlock> blocks, const PriorSpec& priors);

    NodeFit evaluate(std::span<const double> heterogeneity_sd) const;

    const std::vector<std::string>& parameter_names() const { return names_; }
    const std::vector<std::string>& heterogeneity_names() const { return het_names_; }
    const std::vector<StudyBlock>& blocks() const { return blocks_; }
    int dimension() const { return static_cast<int>(names_.size()); }
    int rank() const { return static_cast<int>(identified_.cols()); }
    /// Orthonormal basis (p x (p - rank)) of unidentified directions.
    const Eigen::MatrixXd& flat_directions() const { return null_; }
    /// True if c' theta has a proper posterior.
    bool identifies(const Eigen::VectorXd& c) const;
    std::size_t observation_count() const { return n_obs_; }

private:
    std::vector<std::string> names_;
    std::vector<std::string> het_names_;
    std::vector<StudyBlock> blocks_;
    Eigen::VectorXd prior_precision_;  // diagonal
    Eigen::VectorXd prior_mean_;
    double prior_log_det_ = 0.0;
    Eigen::MatrixXd identified_;  // p x r orthonormal
    Eigen::MatrixXd null_;
    std::size_t n_obs_ = 0;
};

} // namespace cams

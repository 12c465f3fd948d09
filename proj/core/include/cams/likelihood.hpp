#pragma once

#include "cams/model.hpp"

#include <Eigen/Dense>

#include <span>

namespace cams {

/// One point of the explicit CAMS parameter space.
struct CamsPoint {
    double alpha = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double tau = 0.0;
    double tau_gamma = 0.0;
};

double normal_logpdf(double x, double mean, double variance);
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Sum over studies of the bivariate marginal log-density of (y_A, y_B),
/// with the study's slope and interaction centring at pi[j].
double cams_joint_loglik(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi);

struct FactorizedLoglik {
    double contrast = 0.0;  // sum log N(g_j | gamma, var_a + var_b + tau_gamma^2)
    double mean = 0.0;      // sum log N(m_j | alpha + (delta + gamma) pi_j, tau^2 + ...)
    double total() const { return contrast + mean; }
};

/// The diagonal (block-independent) form. Equals the joint exactly when every
/// pi[j] is the study's information fraction.
FactorizedLoglik cams_factorized_loglik(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi);

/// joint - factorized, computed from the conditional law of m given g:
/// sum_j log N(m_j | g_j) - log N(m_j). Nonzero iff some Cov(g_j, m_j) != 0.
double cams_cross_term(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi);

} // namespace cams

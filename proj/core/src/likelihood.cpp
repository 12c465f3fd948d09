#include "cams/likelihood.hpp"
#include "cams/errors.hpp"

#include <cmath>

namespace cams {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_pi(const MetaDataset& data, std::span<const double> pi) {
    if (pi.size() != data.size()) {
        throw ContractError("one prevalence value per study is required");
    }
}

struct Moments {
    double g, m;
    double mean_g, mean_m;
    double var_g, var_m, cov;
};

Moments moments(const StudyRecord& s, const CamsPoint& p, double pi) {
    const double va = s.obs_a.variance();
    const double vb = s.obs_b.variance();
    const auto gm = decompose(s, pi);
    return {gm.g,
            gm.m,
            p.gamma,
            p.alpha + (p.delta + p.gamma) * pi,
            va + vb + p.tau_gamma * p.tau_gamma,
            p.tau * p.tau + (1.0 - pi) * (1.0 - pi) * va + pi * pi * vb,
            cov_gm(pi, va, vb)};
}

} // namespace

double normal_logpdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) {
        throw DomainError("normal_logpdf: variance must be positive");
    }
    const double r = x - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size()) {
        throw ContractError("mvn_logpdf: dimension mismatch");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw DomainError("mvn_logpdf: covariance is not positive definite");
    }
    const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + z.squaredNorm());
}

double cams_joint_loglik(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi) {
    check_pi(data, pi);
    const CovarianceStructure het(point.tau, point.tau_gamma);
    double total = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto& s = data.studies[j];
        const double mu_a = point.alpha + point.delta * pi[j];
        const Eigen::Vector2d y(s.obs_a.estimate, s.obs_b.estimate);
        const Eigen::Vector2d mu(mu_a, mu_a + point.gamma);
        total += mvn_logpdf(y, mu, marginal_covariance(s, het, pi[j]));
    }
    return total;
}

FactorizedLoglik cams_factorized_loglik(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi) {
    check_pi(data, pi);
    FactorizedLoglik out;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto mo = moments(data.studies[j], point, pi[j]);
        out.contrast += normal_logpdf(mo.g, mo.mean_g, mo.var_g);
        out.mean += normal_logpdf(mo.m, mo.mean_m, mo.var_m);
    }
    return out;
}

double cams_cross_term(const MetaDataset& data, const CamsPoint& point, std::span<const double> pi) {
    check_pi(data, pi);
    double total = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto mo = moments(data.studies[j], point, pi[j]);
        const double rg = mo.g - mo.mean_g;
        const double rm = mo.m - mo.mean_m;
        const double k = mo.cov / mo.var_g;
        const double s_c = mo.var_m - k * mo.cov;
        const double e = rm - k * rg;
        total += -0.5 * std::log(s_c / mo.var_m) - 0.5 * e * e / s_c + 0.5 * rm * rm / mo.var_m;
    }
    return total;
}

} // namespace cams

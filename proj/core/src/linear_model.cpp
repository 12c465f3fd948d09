#include "cams/linear_model.hpp"
#include "cams/errors.hpp"

#include <cmath>
#include <numbers>

namespace cams {

namespace {

constexpr double kRankTolerance = 1e-9;

} // namespace

GaussianLinearModel::GaussianLinearModel(std::vector<std::string> parameter_names,
                                         std::vector<std::string> heterogeneity_names,
                                         std::vector<StudyBlock> blocks, const PriorSpec& priors)
    : names_(std::move(parameter_names)), het_names_(std::move(heterogeneity_names)), blocks_(std::move(blocks)) {
    if (blocks_.empty()) {
        throw ContractError("model has no studies");
    }
    const auto p = static_cast<Eigen::Index>(names_.size());
    for (const auto& b : blocks_) {
        const auto n = b.y.size();
        if (b.design.rows() != n || b.design.cols() != p || b.fixed_cov.rows() != n || b.fixed_cov.cols() != n ||
            b.het_cov.size() != het_names_.size()) {
            throw ContractError("study block dimensions are inconsistent");
        }
        for (const auto& h : b.het_cov) {
            if (h.rows() != n || h.cols() != n) {
                throw ContractError("heterogeneity matrix dimensions are inconsistent");
            }
        }
        n_obs_ += static_cast<std::size_t>(n);
    }

    prior_precision_ = Eigen::VectorXd::Zero(p);
    prior_mean_ = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto& lp = priors.location_for(names_[static_cast<std::size_t>(i)]);
        if (!lp.flat) {
            prior_precision_(i) = 1.0 / (lp.sd * lp.sd);
            prior_mean_(i) = lp.mean;
            prior_log_det_ += std::log(prior_precision_(i));
        }
    }

    // Identifiable subspace: range of sum X'X + P0. It does not depend on the
    // heterogeneity values, so every node integrates over the same directions.
    Eigen::MatrixXd info = prior_precision_.asDiagonal();
    for (const auto& b : blocks_) {
        info += b.design.transpose() * b.design;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    std::vector<Eigen::Index> drop;
    for (Eigen::Index i = 0; i < p; ++i) {
        (eig.eigenvalues()(i) > kRankTolerance * top ? keep : drop).push_back(i);
    }
    identified_.resize(p, static_cast<Eigen::Index>(keep.size()));
    null_.resize(p, static_cast<Eigen::Index>(drop.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        identified_.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]);
    }
    for (std::size_t j = 0; j < drop.size(); ++j) {
        null_.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(drop[j]);
    }
}

bool GaussianLinearModel::identifies(const Eigen::VectorXd& c) const {
    if (null_.cols() == 0) {
        return true;
    }
    const double norm = std::max(1.0, c.norm());
    return (null_.transpose() * c).cwiseAbs().maxCoeff() <= 1e-8 * norm;
}

NodeFit GaussianLinearModel::evaluate(std::span<const double> heterogeneity_sd) const {
    if (heterogeneity_sd.size() != het_names_.size()) {
        throw ContractError("wrong number of heterogeneity values");
    }
    Eigen::MatrixXd a = prior_precision_.asDiagonal();
    Eigen::VectorXd b = prior_precision_.cwiseProduct(prior_mean_);
    double quad = prior_mean_.dot(b);
    double log_det_v = 0.0;

    Eigen::MatrixXd v;
    for (const auto& blk : blocks_) {
        v = blk.fixed_cov;
        for (std::size_t h = 0; h < blk.het_cov.size(); ++h) {
            const double s = heterogeneity_sd[h];
            if (s != 0.0) {
                v.noalias() += (s * s) * blk.het_cov[h];
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(v);
        if (llt.info() != Eigen::Success) {
            throw DomainError("marginal covariance is not positive definite");
        }
        const Eigen::MatrixXd w_x = llt.solve(blk.design);
        const Eigen::VectorXd w_y = llt.solve(blk.y);
        a.noalias() += blk.design.transpose() * w_x;
        b.noalias() += blk.design.transpose() * w_y;
        quad += blk.y.dot(w_y);
        log_det_v += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }

    const Eigen::MatrixXd a_r = identified_.transpose() * a * identified_;
    Eigen::LLT<Eigen::MatrixXd> llt_a(a_r);
    if (llt_a.info() != Eigen::Success) {
        throw DomainError("posterior precision is not positive definite");
    }
    const Eigen::VectorXd b_r = identified_.transpose() * b;
    const Eigen::VectorXd mean_r = llt_a.solve(b_r);
    const Eigen::MatrixXd cov_r = llt_a.solve(Eigen::MatrixXd::Identity(a_r.rows(), a_r.cols()));

    NodeFit out;
    out.mean = identified_ * mean_r;
    out.cov = identified_ * cov_r * identified_.transpose();
    const double log_det_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
    const double residual = quad - b_r.dot(mean_r);
    const double free_obs = static_cast<double>(n_obs_) - static_cast<double>(identified_.cols()) +
                            static_cast<double>((prior_precision_.array() > 0.0).count());
    out.log_marginal = -0.5 * log_det_v - 0.5 * log_det_a + 0.5 * prior_log_det_ - 0.5 * residual -
                       0.5 * free_obs * std::log(2.0 * std::numbers::pi);
    return out;
}

} // namespace cams

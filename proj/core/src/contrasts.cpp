#include "cams/contrasts.hpp"
#include "cams/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cams {

namespace {

constexpr double kConditionWarning = 1e8;

double scale_of(const Eigen::MatrixXd& m) {
    return std::max(1.0, m.cwiseAbs().maxCoeff());
}

} // namespace

ContrastBasis::ContrastBasis(Eigen::MatrixXd matrix_c, Eigen::MatrixXd basis_b)
    : c_(std::move(matrix_c)), b_(std::move(basis_b)) {
    const auto k = c_.cols();
    if (k < 2 || c_.rows() != k - 1) {
        throw ContractError("contrast matrix must be (K-1) x K with K >= 2");
    }
    if (b_.rows() != k || b_.cols() != k - 1) {
        throw ContractError("contrast basis must be K x (K-1)");
    }
    const double tol = 1e-12 * scale_of(c_) * static_cast<double>(k);
    if ((c_.rowwise().sum()).cwiseAbs().maxCoeff() > tol) {
        throw ContractError("contrast rows must sum to zero");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c_);
    if (lu.rank() != k - 1) {
        throw ContractError("contrast matrix must have full row rank");
    }
    if ((b_.colwise().sum()).cwiseAbs().maxCoeff() > 1e-12 * scale_of(b_) * static_cast<double>(k)) {
        throw ContractError("contrast basis columns must sum to zero");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> cb(c_ * b_);
    if (!cb.isInvertible()) {
        throw ContractError("C B must be nonsingular");
    }
}

ContrastBasis ContrastBasis::from_contrasts(Eigen::MatrixXd matrix_c) {
    const Eigen::MatrixXd cct = matrix_c * matrix_c.transpose();
    Eigen::MatrixXd b = matrix_c.transpose() * cct.ldlt().solve(Eigen::MatrixXd::Identity(cct.rows(), cct.cols()));
    return ContrastBasis(std::move(matrix_c), std::move(b));
}

ContrastBasis ContrastBasis::transformed(const Eigen::MatrixXd& r) const {
    if (r.rows() != c_.rows() || r.cols() != c_.rows()) {
        throw ContractError("row transform must be (K-1) x (K-1)");
    }
    return ContrastBasis(r * c_, b_);
}

ContrastBasis helmert_basis(int k) {
    if (k < 2) {
        throw DomainError("helmert_basis: k must be at least 2, got " + std::to_string(k));
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k - 1, k);
    for (int i = 0; i < k - 1; ++i) {
        c.row(i).head(i + 1).setConstant(-1.0);
        c(i, i + 1) = static_cast<double>(i + 1);
    }
    return ContrastBasis::from_contrasts(std::move(c));
}

Eigen::VectorXd precision_prevalence(const Eigen::VectorXd& cov_diag) {
    if (cov_diag.size() == 0 || (cov_diag.array() <= 0.0).any() || !cov_diag.allFinite()) {
        throw DomainError("precision_prevalence: variances must be positive");
    }
    const Eigen::VectorXd precision = cov_diag.cwiseInverse();
    return precision / precision.sum();
}

Eigen::VectorXd contrast_mean_cov(const ContrastBasis& basis, const Eigen::VectorXd& cov_diag,
                                  const Eigen::VectorXd& pi) {
    if (cov_diag.size() != basis.k() || pi.size() != basis.k()) {
        throw ContractError("contrast_mean_cov: dimension mismatch");
    }
    return basis.matrix_c() * cov_diag.cwiseProduct(pi);
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
    for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
        for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
            out.block(i * rhs.rows(), j * rhs.cols(), rhs.rows(), rhs.cols()) = lhs(i, j) * rhs;
        }
    }
    return out;
}

Eigen::MatrixXd kronecker_contrast(const ContrastBasis& treat_basis, const ContrastBasis& subgroup_basis) {
    return kronecker(treat_basis.matrix_c(), subgroup_basis.matrix_c());
}

TransformMatrix transform_matrix(const ContrastBasis& basis, const Eigen::VectorXd& pi) {
    if (pi.size() != basis.k()) {
        throw ContractError("transform_matrix: prevalence length differs from K");
    }
    TransformMatrix t;
    t.rows.resize(basis.k(), basis.k());
    t.rows.topRows(basis.k() - 1) = basis.matrix_c();
    t.rows.bottomRows(1) = pi.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(t.rows);
    t.determinant = lu.determinant();
    const double rcond = lu.rcond();
    t.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    t.ill_conditioned = t.condition_estimate > kConditionWarning;
    return t;
}

} // namespace cams

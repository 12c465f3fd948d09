#pragma once

#include <Eigen/Dense>

namespace cams {

/// A (K-1) x K contrast matrix C with C 1 = 0 and full row rank, together with
/// a K x (K-1) basis B of the contrast space (1' B = 0, C B nonsingular).
class ContrastBasis {
public:
    /// Validates every invariant; throws ContractError on violation.
    ContrastBasis(Eigen::MatrixXd matrix_c, Eigen::MatrixXd basis_b);

    /// Uses the right pseudo-inverse C'(CC')^-1 as B, so that C B = I.
    static ContrastBasis from_contrasts(Eigen::MatrixXd matrix_c);

    const Eigen::MatrixXd& matrix_c() const { return c_; }
    const Eigen::MatrixXd& basis_b() const { return b_; }
    int k() const { return static_cast<int>(c_.cols()); }

    /// Same basis B, contrasts replaced by R C (R invertible).
    ContrastBasis transformed(const Eigen::MatrixXd& r) const;

private:
    Eigen::MatrixXd c_;
    Eigen::MatrixXd b_;
};

/// Unnormalized Helmert contrasts: row i compares level i+1 with the mean of
/// levels 1..i, scaled to integers, e.g. k = 3 gives (-1, 1, 0), (-1, -1, 2).
ContrastBasis helmert_basis(int k);

/// pi_s proportional to 1 / sigma_s^2, normalized to sum to one.
Eigen::VectorXd precision_prevalence(const Eigen::VectorXd& cov_diag);

/// C S pi: the covariance between g = C y and m = pi' y under S = diag(cov_diag).
Eigen::VectorXd contrast_mean_cov(const ContrastBasis& basis, const Eigen::VectorXd& cov_diag,
                                  const Eigen::VectorXd& pi);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs);

/// C_T (x) C_K for treatment-by-subgroup contrasts; rows annihilate 1_{TK}.
Eigen::MatrixXd kronecker_contrast(const ContrastBasis& treat_basis, const ContrastBasis& subgroup_basis);

/// Stacks C over pi'. Nonsingular whenever pi is a prevalence vector.
struct TransformMatrix {
    Eigen::MatrixXd rows;
    double determinant = 0.0;
    double condition_estimate = 0.0;  // 1 / rcond from the partial-pivot LU
    bool ill_conditioned = false;     // condition_estimate > 1e8
};

TransformMatrix transform_matrix(const ContrastBasis& basis, const Eigen::VectorXd& pi);

} // namespace cams

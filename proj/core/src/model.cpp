#include "cams/model.hpp"
#include "cams/errors.hpp"

#include <cmath>
#include <set>

namespace cams {

namespace {

void require_positive_se(double se, const std::string& what) {
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw DomainError(what + ": standard error must be positive and finite");
    }
}

} // namespace

SubgroupObservation missing_observation(std::string label, double sentinel_se) {
    require_positive_se(sentinel_se, "missing_observation");
    SubgroupObservation obs;
    obs.label = std::move(label);
    obs.estimate = 0.0;
    obs.std_error = sentinel_se;
    obs.missing = true;
    return obs;
}

StudyRecord StudyRecord::make(std::string id, SubgroupObservation a, SubgroupObservation b) {
    require_positive_se(a.std_error, "study " + id + " subgroup A");
    require_positive_se(b.std_error, "study " + id + " subgroup B");
    StudyRecord s;
    s.study_id = std::move(id);
    s.info_fraction = compute_if(a.std_error, b.std_error);
    if (a.count && b.count && (*a.count + *b.count) > 0) {
        s.prevalence_proxy = prevalence_from_counts(*a.count, *b.count);
    }
    s.obs_a = std::move(a);
    s.obs_b = std::move(b);
    return s;
}

MultiStudyRecord MultiStudyRecord::make(std::string id, Eigen::VectorXd estimates, Eigen::VectorXd cov_diag,
                                        Eigen::VectorXd prevalence) {
    const auto k = estimates.size();
    if (k < 2) {
        throw ContractError("study " + id + ": at least two subgroups required");
    }
    if (cov_diag.size() != k || prevalence.size() != k) {
        throw ContractError("study " + id + ": estimates, variances and prevalences differ in length");
    }
    if ((cov_diag.array() <= 0.0).any()) {
        throw DomainError("study " + id + ": variances must be positive");
    }
    if ((prevalence.array() < 0.0).any() || std::abs(prevalence.sum() - 1.0) > 1e-12) {
        throw DomainError("study " + id + ": prevalences must be nonnegative and sum to one");
    }
    return MultiStudyRecord{std::move(id), std::move(estimates), std::move(cov_diag), std::move(prevalence)};
}

void MetaDataset::validate() const {
    if (studies.empty()) {
        throw ContractError("dataset contains no studies");
    }
    std::set<std::string> seen;
    for (const auto& s : studies) {
        if (!seen.insert(s.study_id).second) {
            throw ContractError("duplicate study id: " + s.study_id);
        }
    }
}

std::vector<double> MetaDataset::information_fractions() const {
    std::vector<double> out;
    out.reserve(studies.size());
    for (const auto& s : studies) {
        out.push_back(s.info_fraction);
    }
    return out;
}

void MultiStudyDataset::validate() const {
    if (studies.empty()) {
        throw ContractError("dataset contains no studies");
    }
    const int kk = studies.front().k();
    std::set<std::string> seen;
    for (const auto& s : studies) {
        if (s.k() != kk) {
            throw ContractError("studies disagree on the number of subgroups");
        }
        if (!seen.insert(s.study_id).second) {
            throw ContractError("duplicate study id: " + s.study_id);
        }
    }
}

int MultiStudyDataset::k() const {
    return studies.empty() ? 0 : studies.front().k();
}

CovarianceStructure::CovarianceStructure(double tau, double tau_gamma) : tau_(tau), tau_gamma_(tau_gamma) {
    if (!(tau >= 0.0) || !(tau_gamma >= 0.0)) {
        throw DomainError("heterogeneity standard deviations must be nonnegative");
    }
}

double compute_if(double sigma_a, double sigma_b) {
    if (!(sigma_a > 0.0) || !(sigma_b > 0.0)) {
        throw DomainError("compute_if: standard errors must be positive");
    }
    const double va = sigma_a * sigma_a;
    const double vb = sigma_b * sigma_b;
    return va / (va + vb);
}

double prevalence_from_counts(long n_a, long n_b) {
    if (n_a < 0 || n_b < 0) {
        throw DomainError("prevalence_from_counts: counts must be nonnegative");
    }
    if (n_a + n_b == 0) {
        throw DomainError("prevalence_from_counts: both counts are zero");
    }
    return static_cast<double>(n_b) / static_cast<double>(n_a + n_b);
}

ContrastMean decompose(double y_a, double y_b, double pi) {
    return {y_b - y_a, (1.0 - pi) * y_a + pi * y_b};
}

ContrastMean decompose(const StudyRecord& study, double pi) {
    return decompose(study.obs_a.estimate, study.obs_b.estimate, pi);
}

std::pair<double, double> recompose(const ContrastMean& gm, double pi) {
    const double y_a = gm.m - pi * gm.g;
    return {y_a, gm.m + (1.0 - pi) * gm.g};
}

double cov_gm(double pi, double var_a, double var_b) {
    return pi * var_b - (1.0 - pi) * var_a;
}

Eigen::Matrix2d interaction_heterogeneity(double pi, double tau_gamma) {
    const double t2 = tau_gamma * tau_gamma;
    const double off = -pi * (1.0 - pi) * t2;
    Eigen::Matrix2d m;
    m << pi * pi * t2, off, off, (1.0 - pi) * (1.0 - pi) * t2;
    return m;
}

Eigen::Matrix2d marginal_covariance(const StudyRecord& study, const CovarianceStructure& het, double pi) {
    Eigen::Matrix2d v = Eigen::Matrix2d::Constant(het.tau() * het.tau());
    v(0, 0) += study.obs_a.variance();
    v(1, 1) += study.obs_b.variance();
    return v + interaction_heterogeneity(pi, het.tau_gamma());
}

} // namespace cams

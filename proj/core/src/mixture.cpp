#include "cams/mixture.hpp"
#include "cams/errors.hpp"
#include "cams/grid.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cams {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_quantile: p must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

NormalMixture::NormalMixture(const std::vector<double>& weights, const std::vector<double>& means,
                             const std::vector<double>& sds) {
    if (weights.size() != means.size() || weights.size() != sds.size()) {
        throw ContractError("NormalMixture: component vectors differ in length");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ContractError("NormalMixture: weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw ContractError("NormalMixture: total weight is zero");
    }
    const double cutoff = 1e-16 * total;
    double kept = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > cutoff) {
            weights_.push_back(weights[i]);
            means_.push_back(means[i]);
            sds_.push_back(std::max(0.0, sds[i]));
            kept += weights[i];
        }
    }
    lo_ = std::numeric_limits<double>::infinity();
    hi_ = -lo_;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] /= kept;
        lo_ = std::min(lo_, means_[i] - 12.0 * sds_[i]);
        hi_ = std::max(hi_, means_[i] + 12.0 * sds_[i]);
    }
}

double NormalMixture::cdf(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (sds_[i] > 0.0) {
            acc += weights_[i] * normal_cdf((x - means_[i]) / sds_[i]);
        } else if (x >= means_[i]) {
            acc += weights_[i];
        }
    }
    return std::clamp(acc, 0.0, 1.0);
}

double NormalMixture::upper_tail(double threshold) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (sds_[i] > 0.0) {
            acc += weights_[i] * normal_cdf((means_[i] - threshold) / sds_[i]);
        } else if (means_[i] > threshold) {
            acc += weights_[i];
        }
    }
    return std::clamp(acc, 0.0, 1.0);
}

double NormalMixture::quantile(double p, double tol) const {
    if (empty()) {
        throw ContractError("NormalMixture: quantile of an empty mixture");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("NormalMixture: quantile level must lie in (0, 1)");
    }
    double lo = lo_;
    double hi = hi_;
    if (hi - lo <= tol) {
        return 0.5 * (lo + hi);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double NormalMixture::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i] * means_[i];
    }
    return acc;
}

double NormalMixture::variance() const {
    const double mu = mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double d = means_[i] - mu;
        acc += weights_[i] * (sds_[i] * sds_[i] + d * d);
    }
    return acc;
}

GridDensity::GridDensity(std::vector<double> nodes, std::vector<double> density)
    : nodes_(std::move(nodes)), density_(std::move(density)) {
    if (nodes_.empty() || nodes_.size() != density_.size()) {
        throw ContractError("GridDensity: nodes and density differ in length");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1])) {
            throw ContractError("GridDensity: nodes must be strictly increasing");
        }
    }
    cumulative_.assign(nodes_.size(), 0.0);
    if (nodes_.size() == 1) {
        density_[0] = 1.0;
        cumulative_[0] = 1.0;
        return;
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + interval_integral(nodes_, density_, i - 1, nodes_[i]);
    }
    const double total = cumulative_.back();
    if (!(total > 0.0)) {
        throw ContractError("GridDensity: density integrates to zero");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        density_[i] /= total;
        cumulative_[i] /= total;
    }
    cumulative_.back() = 1.0;
}

double GridDensity::cdf(double x) const {
    if (nodes_.size() == 1) {
        return x >= nodes_[0] ? 1.0 : 0.0;
    }
    if (x <= nodes_.front()) {
        return 0.0;
    }
    if (x >= nodes_.back()) {
        return 1.0;
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double v = cumulative_[i] + interval_integral(nodes_, density_, i, x);
    return std::clamp(v, cumulative_[i], cumulative_[i + 1]);
}

double GridDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("GridDensity: quantile level must lie in (0, 1)");
    }
    if (nodes_.size() == 1) {
        return nodes_[0];
    }
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i == 0) {
        return nodes_.front();
    }
    i -= 1;
    double lo = nodes_[i];
    double hi = nodes_[i + 1];
    for (int it2 = 0; it2 < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it2) {
        const double mid = 0.5 * (lo + hi);
        if (cumulative_[i] + interval_integral(nodes_, density_, i, mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double GridDensity::mean() const {
    if (nodes_.size() == 1) {
        return nodes_[0];
    }
    std::vector<double> xf(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        xf[i] = nodes_[i] * density_[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        acc += interval_integral(nodes_, xf, i, nodes_[i + 1]);
    }
    return acc;
}

Summary summarize(const NormalMixture& mix, double level) {
    const double tail = 0.5 * (1.0 - level);
    Summary s;
    s.median = mix.quantile(0.5);
    s.lower = mix.quantile(tail);
    s.upper = mix.quantile(1.0 - tail);
    s.mean = mix.mean();
    s.sd = std::sqrt(mix.variance());
    s.prob_positive = mix.upper_tail(0.0);
    s.prob_negative = 1.0 - s.prob_positive;
    return s;
}

Summary summarize(const GridDensity& density, double level) {
    const double tail = 0.5 * (1.0 - level);
    Summary s;
    s.median = density.quantile(0.5);
    s.lower = density.quantile(tail);
    s.upper = density.quantile(1.0 - tail);
    s.mean = density.mean();
    double second = 0.0;
    const auto& x = density.nodes();
    const auto& f = density.density();
    if (x.size() == 1) {
        second = x[0] * x[0];
    } else {
        std::vector<double> x2f(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x2f[i] = x[i] * x[i] * f[i];
        }
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            second += interval_integral(x, x2f, i, x[i + 1]);
        }
    }
    s.sd = std::sqrt(std::max(0.0, second - s.mean * s.mean));
    s.prob_positive = 1.0 - density.cdf(0.0);
    s.prob_negative = 0.0;
    return s;
}

double cdf_sup_distance(const NormalMixture& f, const NormalMixture& g, int resolution) {
    const double lo = std::min(f.quantile(1e-6), g.quantile(1e-6));
    const double hi = std::max(f.quantile(1.0 - 1e-6), g.quantile(1.0 - 1e-6));
    double worst = 0.0;
    for (int i = 0; i < resolution; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
        worst = std::max(worst, std::abs(f.cdf(x) - g.cdf(x)));
    }
    return worst;
}

double cdf_sup_distance(const GridDensity& f, const GridDensity& g) {
    double worst = 0.0;
    for (double x : f.nodes()) {
        worst = std::max(worst, std::abs(f.cdf(x) - g.cdf(x)));
    }
    for (double x : g.nodes()) {
        worst = std::max(worst, std::abs(f.cdf(x) - g.cdf(x)));
    }
    return worst;
}

} // namespace cams

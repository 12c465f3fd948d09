#include "cams/grid.hpp"
#include "cams/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cams {

LocationPrior LocationPrior::normal(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
        throw DomainError("normal location prior needs a finite mean and positive sd");
    }
    return LocationPrior{false, mean, sd};
}

const LocationPrior& PriorSpec::location_for(const std::string& name) const {
    const auto it = location.find(name);
    return it == location.end() ? default_location : it->second;
}

void PriorSpec::validate() const {
    if (!(tau_scale > 0.0) || !(tau_gamma_scale > 0.0)) {
        throw DomainError("half-normal prior scales must be positive");
    }
    auto check = [](const LocationPrior& p) {
        if (!p.flat && !(p.sd > 0.0)) {
            throw DomainError("normal location prior needs a positive sd");
        }
    };
    check(default_location);
    for (const auto& [name, prior] : location) {
        check(prior);
    }
}

double half_normal_log_density(double x, double scale) {
    if (x < 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double z = x / scale;
    return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(scale) - 0.5 * z * z;
}

GridAxis::GridAxis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
        throw ContractError("grid axis needs at least one node");
    }
    if (nodes_.size() > 1 && nodes_.front() != 0.0) {
        throw ContractError("grid axis must start at 0");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(nodes_[i] >= 0.0) || !std::isfinite(nodes_[i])) {
            throw ContractError("grid nodes must be finite and nonnegative");
        }
        if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
            throw ContractError("grid nodes must be strictly increasing");
        }
    }
}

GridAxis GridAxis::geometric_with_zero(double upper, int n, double min_ratio) {
    if (n < 3 || !(upper > 0.0) || !(min_ratio > 0.0 && min_ratio < 1.0)) {
        throw ContractError("geometric grid needs n >= 3, upper > 0 and min_ratio in (0, 1)");
    }
    std::vector<double> nodes(static_cast<std::size_t>(n));
    nodes[0] = 0.0;
    const double lo = std::log(upper * min_ratio);
    const double hi = std::log(upper);
    for (int i = 1; i < n; ++i) {
        const double t = static_cast<double>(i - 1) / static_cast<double>(n - 2);
        nodes[static_cast<std::size_t>(i)] = std::exp(lo + t * (hi - lo));
    }
    nodes.back() = upper;
    return GridAxis(std::move(nodes));
}

GridAxis GridAxis::fixed(double value) {
    return GridAxis(std::vector<double>{value});
}

namespace {

constexpr double kJump = 3.0;
constexpr double kGaussX[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGaussW[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

bool similar(double a, double b) {
    return a < kJump * b && b < kJump * a;
}

} // namespace

std::vector<std::size_t> interval_stencil(const std::vector<double>& nodes, std::size_t i) {
    if (i + 1 >= nodes.size()) {
        throw ContractError("interval_stencil: interval out of range");
    }
    const double h = nodes[i + 1] - nodes[i];
    std::vector<std::size_t> st;
    if (i > 0 && similar(nodes[i] - nodes[i - 1], h)) {
        st.push_back(i - 1);
    }
    st.push_back(i);
    st.push_back(i + 1);
    if (i + 2 < nodes.size() && similar(nodes[i + 2] - nodes[i + 1], h)) {
        st.push_back(i + 2);
    }
    return st;
}

double lagrange_basis(const std::vector<double>& nodes, const std::vector<std::size_t>& stencil, std::size_t k,
                      double x) {
    double v = 1.0;
    for (std::size_t m = 0; m < stencil.size(); ++m) {
        if (m != k) {
            v *= (x - nodes[stencil[m]]) / (nodes[stencil[k]] - nodes[stencil[m]]);
        }
    }
    return v;
}

double interval_integral(const std::vector<double>& nodes, const std::vector<double>& values, std::size_t i,
                         double x) {
    const auto st = interval_stencil(nodes, i);
    const double a = nodes[i];
    const double half = 0.5 * (x - a);
    double acc = 0.0;
    for (int g = 0; g < 3; ++g) {
        const double t = a + half * (1.0 + kGaussX[g]);
        double p = 0.0;
        for (std::size_t k = 0; k < st.size(); ++k) {
            p += values[st[k]] * lagrange_basis(nodes, st, k, t);
        }
        acc += kGaussW[g] * p;
    }
    return half * acc;
}

std::vector<double> GridAxis::quadrature_weights() const {
    std::vector<double> w(nodes_.size(), 0.0);
    if (nodes_.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const auto st = interval_stencil(nodes_, i);
        const double half = 0.5 * (nodes_[i + 1] - nodes_[i]);
        for (int g = 0; g < 3; ++g) {
            const double t = nodes_[i] + half * (1.0 + kGaussX[g]);
            for (std::size_t k = 0; k < st.size(); ++k) {
                w[st[k]] += half * kGaussW[g] * lagrange_basis(nodes_, st, k, t);
            }
        }
    }
    return w;
}

GridSpec GridSpec::defaults(const PriorSpec& priors, int nodes) {
    priors.validate();
    GridSpec g;
    g.tau = GridAxis::geometric_with_zero(5.0 * priors.tau_scale, nodes);
    g.tau_gamma = GridAxis::geometric_with_zero(5.0 * priors.tau_gamma_scale, nodes);
    return g;
}

} // namespace cams

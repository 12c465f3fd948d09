#include "cams/grid.hpp"
#include "cams/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cams {

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
    if (n < 1) {
        throw ContractError("gauss_hermite: order must be positive");
    }
    // Golub-Welsch: eigenvalues of the Jacobi matrix of the Hermite recurrence.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        jac(i, i - 1) = jac(i - 1, i) = std::sqrt(0.5 * i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
        const double v = eig.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = std::sqrt(std::numbers::pi) * v * v;
    }
    return {x, w};
}

namespace {

double expit(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double log1pexp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_binom_coef(long n, long k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};

// log of int Bin(x | n, expit(t)) N(t | mu, tau^2) dt by adaptive Gauss-Hermite.
double study_loglik(const StudyCount& c, double mu, double tau, const Quadrature& q) {
    const double x = static_cast<double>(c.events);
    const double n = static_cast<double>(c.total);
    const double lc = log_binom_coef(c.total, c.events);
    if (tau == 0.0) {
        return lc + x * mu - n * log1pexp(mu);
    }
    const double prec = 1.0 / (tau * tau);
    auto f = [&](double t) {
        const double r = t - mu;
        return x * t - n * log1pexp(t) - 0.5 * r * r * prec;
    };
    double t = mu;
    double curv = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double p = expit(t);
        const double grad = x - n * p - (t - mu) * prec;
        curv = n * p * (1.0 - p) + prec;
        const double step = grad / curv;
        t += step;
        if (std::abs(step) < 1e-12 * (1.0 + std::abs(t))) {
            break;
        }
    }
    const double p = expit(t);
    curv = n * p * (1.0 - p) + prec;
    const double s = std::sqrt(2.0 / curv);
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(q.x.size());
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        terms[i] = std::log(q.w[i]) + f(t + s * q.x[i]) + q.x[i] * q.x[i];
        top = std::max(top, terms[i]);
    }
    double acc = 0.0;
    for (double v : terms) {
        acc += std::exp(v - top);
    }
    return lc + top + std::log(acc) + std::log(s) - std::log(tau) - 0.5 * std::log(2.0 * std::numbers::pi);
}

struct Posterior {
    std::vector<double> mu;
    GridAxis tau;
    std::vector<double> log_density;  // mu-major
};

Posterior evaluate(const std::vector<StudyCount>& counts, const std::vector<double>& mu, const GridAxis& tau,
                   double tau_scale, const Quadrature& q) {
    Posterior post{mu, tau, std::vector<double>(mu.size() * tau.size())};
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t k = 0; k < tau.size(); ++k) {
            double lp = half_normal_log_density(tau.nodes()[k], tau_scale);
            for (const auto& c : counts) {
                lp += study_loglik(c, mu[i], tau.nodes()[k], q);
            }
            post.log_density[i * tau.size() + k] = lp;
        }
    }
    return post;
}

std::vector<double> trapezoid(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    if (x.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double h = 0.5 * (x[i] - x[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    return w;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return out;
}

} // namespace

MapPrevalence fit_map_prevalence(const std::vector<StudyCount>& counts, const MapOptions& options) {
    if (!(options.tau_scale > 0.0) || options.mu_nodes < 3 || options.tau_nodes < 1 || options.quadrature_order < 2) {
        throw ContractError("invalid MAP prevalence options");
    }
    MapPrevalence out;
    std::vector<StudyCount> used;
    for (const auto& c : counts) {
        if (c.total < 0 || c.events < 0 || c.events > c.total) {
            throw InputError("prevalence counts must satisfy 0 <= events <= total");
        }
        if (c.total == 0) {
            out.warnings.push_back("study with zero total skipped");
            continue;
        }
        used.push_back(c);
    }
    if (used.empty()) {
        throw ContractError("MAP prevalence needs at least one study with counts");
    }
    out.studies_used = used.size();

    auto [gx, gw] = gauss_hermite(options.quadrature_order);
    const Quadrature q{gx, gw};
    const GridAxis tau = GridAxis::geometric_with_zero(5.0 * options.tau_scale, options.tau_nodes);

    // Initial bounded range from empirical logits, then one refinement to the
    // region carrying non-negligible mass.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : used) {
        const double e = static_cast<double>(c.events) + 0.5;
        const double f = static_cast<double>(c.total - c.events) + 0.5;
        const double l = std::log(e / f);
        const double se = std::sqrt(1.0 / e + 1.0 / f);
        lo = std::min(lo, l - 6.0 * se - 3.0 * options.tau_scale);
        hi = std::max(hi, l + 6.0 * se + 3.0 * options.tau_scale);
    }
    Posterior post = evaluate(used, linspace(lo, hi, options.mu_nodes), tau, options.tau_scale, q);
    {
        const double top = *std::max_element(post.log_density.begin(), post.log_density.end());
        std::size_t first = post.mu.size();
        std::size_t last = 0;
        for (std::size_t i = 0; i < post.mu.size(); ++i) {
            for (std::size_t k = 0; k < tau.size(); ++k) {
                if (post.log_density[i * tau.size() + k] - top > std::log(1e-14)) {
                    first = std::min(first, i);
                    last = std::max(last, i);
                }
            }
        }
        const double nlo = post.mu[first == 0 ? 0 : first - 1];
        const double nhi = post.mu[std::min(last + 1, post.mu.size() - 1)];
        post = evaluate(used, linspace(nlo, nhi, options.mu_nodes), tau, options.tau_scale, q);
    }

    const auto wmu = trapezoid(post.mu);
    const auto wtau = tau.quadrature_weights();
    const double top = *std::max_element(post.log_density.begin(), post.log_density.end());
    std::vector<double> mu_density(post.mu.size(), 0.0);
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sds;
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        for (std::size_t k = 0; k < tau.size(); ++k) {
            const double d = std::exp(post.log_density[i * tau.size() + k] - top);
            mu_density[i] += d * wtau[k];
            weights.push_back(d * wtau[k] * wmu[i]);
            means.push_back(post.mu[i]);
            sds.push_back(tau.nodes()[k]);
        }
    }

    const GridDensity pooled(post.mu, mu_density);
    out.pooled_median = expit(pooled.quantile(0.5));
    out.pooled_lower = expit(pooled.quantile(0.025));
    out.pooled_upper = expit(pooled.quantile(0.975));

    const NormalMixture predictive(weights, means, sds);
    out.predictive_median = expit(predictive.quantile(0.5));
    out.predictive_lower = expit(predictive.quantile(0.025));
    out.predictive_upper = expit(predictive.quantile(0.975));

    double total = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        double e1 = 0.0;
        double e2 = 0.0;
        if (sds[c] == 0.0) {
            e1 = expit(means[c]);
            e2 = e1 * e1;
        } else {
            for (std::size_t i = 0; i < gx.size(); ++i) {
                const double p = expit(means[c] + std::sqrt(2.0) * sds[c] * gx[i]);
                e1 += gw[i] * p;
                e2 += gw[i] * p * p;
            }
            e1 /= std::sqrt(std::numbers::pi);
            e2 /= std::sqrt(std::numbers::pi);
        }
        total += weights[c];
        m1 += weights[c] * e1;
        m2 += weights[c] * e2;
    }
    out.predictive_mean = m1 / total;
    const double var = std::max(0.0, m2 / total - out.predictive_mean * out.predictive_mean);
    out.predictive_sd = std::sqrt(var);
    std::tie(out.a, out.b) = beta_from_moments(out.predictive_mean, var);
    return out;
}

} // namespace cams

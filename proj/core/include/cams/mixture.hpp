#pragma once

#include <cstddef>
#include <vector>

namespace cams {

/// Absolute tolerance used when inverting mixture CDFs.
inline constexpr double kQuantileTolerance = 1e-8;

double normal_cdf(double z);
double normal_quantile(double p);

/// Finite mixture of normals (sd = 0 components are point masses). This is
/// the posterior of any linear functional of the location parameters under
/// the grid approximation.
class NormalMixture {
public:
    NormalMixture() = default;
    /// Weights need not be normalized; components with zero weight are dropped,
    /// as are those below 1e-16 of the total mass.
    NormalMixture(const std::vector<double>& weights, const std::vector<double>& means,
                  const std::vector<double>& sds);

    double cdf(double x) const;
    /// P(X > threshold).
    double upper_tail(double threshold) const;
    /// Bisection on the CDF to absolute tolerance `tol`.
    double quantile(double p, double tol = kQuantileTolerance) const;
    double mean() const;
    double variance() const;
    std::size_t size() const { return weights_.size(); }
    bool empty() const { return weights_.empty(); }

private:
    std::vector<double> weights_;
    std::vector<double> means_;
    std::vector<double> sds_;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// Posterior of a scale parameter on a grid axis, with density linear between
/// nodes. A single-node axis is a point mass.
class GridDensity {
public:
    GridDensity() = default;
    /// `density` holds unnormalized posterior density values at `nodes`.
    GridDensity(std::vector<double> nodes, std::vector<double> density);

    double cdf(double x) const;
    double quantile(double p) const;
    double mean() const;
    const std::vector<double>& nodes() const { return nodes_; }
    /// Normalized density values (integrate to one under the trapezoid rule).
    const std::vector<double>& density() const { return density_; }
    /// CDF evaluated at each node.
    const std::vector<double>& cumulative() const { return cumulative_; }

private:
    std::vector<double> nodes_;
    std::vector<double> density_;
    std::vector<double> cumulative_;
};

struct Summary {
    double median = 0.0;
    double lower = 0.0;  // 2.5%
    double upper = 0.0;  // 97.5%
    double mean = 0.0;
    double sd = 0.0;
    double prob_positive = 0.0;
    double prob_negative = 0.0;
    bool identified = true;
};

Summary summarize(const NormalMixture& mix, double level = 0.95);
Summary summarize(const GridDensity& density, double level = 0.95);

/// Largest |F(x) - G(x)| over a dense evaluation set covering both mixtures.
double cdf_sup_distance(const NormalMixture& f, const NormalMixture& g, int resolution = 2001);
double cdf_sup_distance(const GridDensity& f, const GridDensity& g);

} // namespace cams

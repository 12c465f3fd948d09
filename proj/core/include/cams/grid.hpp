#pragma once

#include <map>
#include <string>
#include <vector>

namespace cams {

/// Location prior for one fixed-effect parameter.
struct LocationPrior {
    bool flat = true;
    double mean = 0.0;
    double sd = 1.0;

    static LocationPrior flat_prior() { return {}; }
    static LocationPrior normal(double mean, double sd);
};

/// Priors shared by all estimators. Heterogeneity SDs get half-normal priors.
struct PriorSpec {
    LocationPrior default_location;               // used for parameters not listed below
    std::map<std::string, LocationPrior> location;
    double tau_scale = 1.0;        // tau ~ HN(1.0)
    double tau_gamma_scale = 0.5;  // tau_gamma ~ HN(0.5)

    const LocationPrior& location_for(const std::string& name) const;
    void validate() const;
};

double half_normal_log_density(double x, double scale);

/// Node values of one heterogeneity axis: starts at 0 and is strictly
/// increasing, or is a single fixed value.
class GridAxis {
public:
    GridAxis() = default;
    explicit GridAxis(std::vector<double> nodes);

    /// 0 followed by n - 1 geometrically spaced nodes on [upper * min_ratio, upper].
    static GridAxis geometric_with_zero(double upper, int n, double min_ratio = kDefaultMinRatio);
    static GridAxis fixed(double value);

    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool is_fixed() const { return nodes_.size() == 1; }
    /// Integrals of the local interpolation basis (1 for a fixed axis).
    std::vector<double> quadrature_weights() const;

    static constexpr double kDefaultMinRatio = 1e-3;

private:
    std::vector<double> nodes_;
};

/// Local interpolation on strictly increasing nodes. Interval i uses nodes
/// i-1..i+2 where present; a neighbour is dropped when its spacing differs from
/// the interval's by more than a factor 3 (the jump after a zero node).
std::vector<std::size_t> interval_stencil(const std::vector<double>& nodes, std::size_t interval);
/// Lagrange basis polynomial of stencil entry k at x.
double lagrange_basis(const std::vector<double>& nodes, const std::vector<std::size_t>& stencil, std::size_t k,
                      double x);
/// Integral of the interval's interpolant of `values` from nodes[interval] to x.
double interval_integral(const std::vector<double>& nodes, const std::vector<double>& values, std::size_t interval,
                         double x);

struct GridSpec {
    GridAxis tau;
    GridAxis tau_gamma;
    int quantile_resolution = 2001;  // evaluation points for CDF curves and distances

    /// 101 nodes per axis spanning [0, 5 * prior scale].
    static GridSpec defaults(const PriorSpec& priors, int nodes = kDefaultNodes);
    static constexpr int kDefaultNodes = 101;
};

} // namespace cams

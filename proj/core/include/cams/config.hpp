#pragma once

#include "cams/grid.hpp"
#include "cams/inference.hpp"
#include "cams/reporting.hpp"
#include "cams/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cams {

/// Everything a CLI run needs. Read from a flat `key = value` file; every key
/// can be overridden on the command line with `--key value`.
struct RunConfig {
    std::string input;
    std::string output_dir = "out";
    std::string output;  // simulate: CSV destination (default <output_dir>/simulated.csv)
    std::string scale_label = "log-RR";
    bool exponentiated_input = false;
    double missing_se = kDefaultMissingSE;

    double tau_prior_scale = 1.0;
    double tau_gamma_prior_scale = 0.5;
    std::string location_prior = "flat";  // flat | normal:mean,sd
    int grid_nodes = GridSpec::kDefaultNodes;
    int quantile_resolution = 2001;

    std::string estimators = "bim,bms,cams,overall";
    std::string parametrization = "explicit";
    bool bms_alpha_heterogeneity = false;

    std::string prevalence = "overall-if";
    std::optional<double> external_prevalence;
    std::string map_prevalence;  // "", "fit" (from counts) or a Beta spec
    double map_tau_scale = 1.0;
    double search_lo = 0.0;
    double search_hi = 1.0;
    int draws = 20000;
    std::optional<std::uint64_t> seed;

    int seeds = 50;  // verify battery size
    bool negative_controls = true;

    int sim_studies = 7;
    double sim_alpha = 0.0;
    double sim_delta = 0.0;
    double sim_gamma = 0.3;
    double sim_tau = 0.2;
    double sim_tau_gamma = 0.1;
    std::optional<double> sim_leverage;

    bool svg = false;
    int trace_points = 41;

    /// Sets one key from text; throws ContractError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Current value of a key as text ("" when unset).
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();
    static std::string describe(const std::string& key);

    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::string& path);
    /// `key = value` lines for every key, in table order.
    std::string to_text() const;
    void validate() const;

    PriorSpec priors() const;
    GridSpec grid(const PriorSpec& priors) const;
    FitOptions fit_options() const;
    PrevalenceSpec prevalence_spec() const;
    SimScenario scenario() const;
    std::uint64_t require_seed(const std::string& purpose) const;
};

} // namespace cams

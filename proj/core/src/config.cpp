#include "cams/config.hpp"
#include "cams/format.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cams {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw ContractError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& v) {
    bool ok = false;
    const double d = parse_double(v, ok);
    if (!ok) {
        bad(key, v, "expected a number");
    }
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        bad(key, v, "expected an integer");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        bad(key, v, "expected a nonnegative integer");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "false" || t == "0" || t == "no" || t == "off") {
        return false;
    }
    bad(key, v, "expected true or false");
}

struct Key {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string show(double v) {
    return format_double(v);
}
std::string show(bool v) {
    return v ? "true" : "false";
}
std::string show(int v) {
    return std::to_string(v);
}
std::string show(const std::string& v) {
    return v;
}
template <class T>
std::string show(const std::optional<T>& v) {
    return v ? show(*v) : std::string();
}
std::string show(const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

#define CAMS_KEY_STR(field, help) \
    Key{#field, help, [](RunConfig& c, const std::string& v) { c.field = trim(v); }, [](const RunConfig& c) { return show(c.field); }}
#define CAMS_KEY_NUM(field, help) \
    Key{#field, help, [](RunConfig& c, const std::string& v) { c.field = to_double(#field, v); }, [](const RunConfig& c) { return show(c.field); }}
#define CAMS_KEY_INT(field, help) \
    Key{#field, help, [](RunConfig& c, const std::string& v) { c.field = to_int(#field, v); }, [](const RunConfig& c) { return show(c.field); }}
#define CAMS_KEY_BOOL(field, help) \
    Key{#field, help, [](RunConfig& c, const std::string& v) { c.field = to_bool(#field, v); }, [](const RunConfig& c) { return show(c.field); }}
#define CAMS_KEY_OPT(field, help)                                                                   \
    Key{#field, help,                                                                               \
        [](RunConfig& c, const std::string& v) {                                                    \
            if (trim(v).empty()) c.field.reset(); else c.field = to_double(#field, v);              \
        },                                                                                          \
        [](const RunConfig& c) { return show(c.field); }}

const std::vector<Key>& table() {
    static const std::vector<Key> keys = {
        CAMS_KEY_STR(input, "input CSV (two rows per study)"),
        CAMS_KEY_STR(output_dir, "directory for JSON and CSV outputs"),
        CAMS_KEY_STR(output, "simulate: destination CSV"),
        CAMS_KEY_STR(scale_label, "label of the effect scale"),
        CAMS_KEY_BOOL(exponentiated_input, "estimates are ratios; take logs on load"),
        CAMS_KEY_NUM(missing_se, "standard error given to an unreported subgroup"),
        CAMS_KEY_NUM(tau_prior_scale, "half-normal scale of tau"),
        CAMS_KEY_NUM(tau_gamma_prior_scale, "half-normal scale of tau_gamma"),
        CAMS_KEY_STR(location_prior, "flat or normal:mean,sd for every location parameter"),
        CAMS_KEY_INT(grid_nodes, "nodes per heterogeneity axis"),
        CAMS_KEY_INT(quantile_resolution, "evaluation points for CDF comparisons"),
        CAMS_KEY_STR(estimators, "comma list from bim,bms,cams,overall"),
        CAMS_KEY_STR(parametrization, "CAMS slope form: explicit or implicit"),
        CAMS_KEY_BOOL(bms_alpha_heterogeneity, "add tau on the BMS common effect"),
        CAMS_KEY_STR(prevalence, "reporting prevalence (number, strategy, external:x, beta:a,b, beta-mixture:...)"),
        CAMS_KEY_OPT(external_prevalence, "external prevalence for the strategy table"),
        CAMS_KEY_STR(map_prevalence, "prevalence distribution for the MAP row: fit or beta:a,b"),
        CAMS_KEY_NUM(map_tau_scale, "half-normal scale of the logit prevalence SD"),
        CAMS_KEY_NUM(search_lo, "lower end of prevalence searches"),
        CAMS_KEY_NUM(search_hi, "upper end of prevalence searches"),
        CAMS_KEY_INT(draws, "Monte Carlo draws"),
        Key{"seed", "random seed (required whenever Monte Carlo is used)",
            [](RunConfig& c, const std::string& v) {
                if (trim(v).empty()) c.seed.reset(); else c.seed = to_u64("seed", v);
            },
            [](const RunConfig& c) { return show(c.seed); }},
        CAMS_KEY_INT(seeds, "verify: number of seeded scenarios"),
        CAMS_KEY_BOOL(negative_controls, "verify: include expected-failure controls"),
        CAMS_KEY_INT(sim_studies, "simulate: number of trials"),
        CAMS_KEY_NUM(sim_alpha, "simulate: alpha"),
        CAMS_KEY_NUM(sim_delta, "simulate: ecological slope delta"),
        CAMS_KEY_NUM(sim_gamma, "simulate: interaction gamma"),
        CAMS_KEY_NUM(sim_tau, "simulate: tau"),
        CAMS_KEY_NUM(sim_tau_gamma, "simulate: tau_gamma"),
        CAMS_KEY_OPT(sim_leverage, "simulate: prevalence of an injected small leverage trial"),
        CAMS_KEY_BOOL(svg, "plotdata: also write SVG renderings"),
        CAMS_KEY_INT(trace_points, "plotdata: tau_gamma values in the trace"),
    };
    return keys;
}

#undef CAMS_KEY_STR
#undef CAMS_KEY_NUM
#undef CAMS_KEY_INT
#undef CAMS_KEY_BOOL
#undef CAMS_KEY_OPT

const Key& find_key(const std::string& name) {
    for (const auto& k : table()) {
        if (k.name == name) {
            return k;
        }
    }
    throw ContractError("unknown config key '" + name + "'");
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    find_key(key).set(*this, value);
}

std::string RunConfig::get(const std::string& key) const {
    return find_key(key).get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& k : table()) {
            out.push_back(k.name);
        }
        return out;
    }();
    return names;
}

std::string RunConfig::describe(const std::string& key) {
    return find_key(key).help;
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ContractError("config line " + std::to_string(n) + ": expected key = value");
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config " + path);
    }
    return parse(in);
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    for (const auto& k : table()) {
        out << k.name << " = " << k.get(*this) << '\n';
    }
    return out.str();
}

void RunConfig::validate() const {
    if (!(tau_prior_scale > 0.0 && tau_gamma_prior_scale > 0.0 && map_tau_scale > 0.0)) {
        throw ContractError("prior scales must be positive");
    }
    if (!(missing_se > 0.0)) {
        throw ContractError("missing_se must be positive");
    }
    if (grid_nodes < 2 || quantile_resolution < 2) {
        throw ContractError("grid_nodes and quantile_resolution must be at least 2");
    }
    if (parametrization != "explicit" && parametrization != "implicit") {
        throw ContractError("parametrization must be explicit or implicit");
    }
    if (!(search_lo >= 0.0 && search_hi <= 1.0 && search_lo < search_hi)) {
        throw ContractError("search range must satisfy 0 <= search_lo < search_hi <= 1");
    }
    if (draws < 1000) {
        throw ContractError("draws must be at least 1000");
    }
    if (seeds < 1 || sim_studies < 1 || trace_points < 2) {
        throw ContractError("seeds, sim_studies and trace_points must be positive");
    }
    if (external_prevalence && !(*external_prevalence >= 0.0 && *external_prevalence <= 1.0)) {
        throw ContractError("external_prevalence must lie in [0, 1]");
    }
    priors().validate();
    prevalence_spec();
}

PriorSpec RunConfig::priors() const {
    PriorSpec p;
    p.tau_scale = tau_prior_scale;
    p.tau_gamma_scale = tau_gamma_prior_scale;
    const std::string lp = trim(location_prior);
    if (lp == "flat") {
        p.default_location = LocationPrior::flat_prior();
    } else if (lp.rfind("normal:", 0) == 0) {
        const std::string body = lp.substr(7);
        const auto comma = body.find(',');
        if (comma == std::string::npos) {
            throw ContractError("location_prior expects normal:mean,sd");
        }
        p.default_location =
            LocationPrior::normal(to_double("location_prior", body.substr(0, comma)),
                                  to_double("location_prior", body.substr(comma + 1)));
    } else {
        throw ContractError("location_prior must be flat or normal:mean,sd");
    }
    return p;
}

GridSpec RunConfig::grid(const PriorSpec& p) const {
    GridSpec g = GridSpec::defaults(p, grid_nodes);
    g.quantile_resolution = quantile_resolution;
    return g;
}

FitOptions RunConfig::fit_options() const {
    FitOptions o;
    o.parametrization = parametrization == "implicit" ? Parametrization::Implicit : Parametrization::Explicit;
    o.bms_alpha_heterogeneity = bms_alpha_heterogeneity;
    return o;
}

PrevalenceSpec RunConfig::prevalence_spec() const {
    PrevalenceSpec s = PrevalenceSpec::parse(prevalence);
    s.draws = draws;
    if (s.kind == PrevalenceSpec::Kind::Distribution) {
        s.seed = require_seed("distributional reporting");
    }
    s.validate();
    return s;
}

SimScenario RunConfig::scenario() const {
    SimScenario sc;
    sc.n_studies = sim_studies;
    sc.alpha = sim_alpha;
    sc.delta = sim_delta;
    sc.gamma = sim_gamma;
    sc.tau = sim_tau;
    sc.tau_gamma = sim_tau_gamma;
    sc.leverage_prevalence = sim_leverage;
    sc.seed = require_seed("simulate");
    sc.validate();
    return sc;
}

std::uint64_t RunConfig::require_seed(const std::string& purpose) const {
    if (!seed) {
        throw ContractError(purpose + " needs a seed (set 'seed')");
    }
    return *seed;
}

} // namespace cams

#include "cams/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

namespace cams {

std::string to_string(Estimator e) {
    switch (e) {
    case Estimator::BIM: return "BIM";
    case Estimator::BMS: return "BMS";
    case Estimator::CAMS: return "CAMS";
    case Estimator::OVERALL: return "OVERALL";
    case Estimator::BIM_K: return "BIM_K";
    }
    return "unknown";
}

std::string to_string(Parametrization p) {
    return p == Parametrization::Implicit ? "implicit" : "explicit";
}

// ---------------------------------------------------------------------------
// PosteriorGrid
// ---------------------------------------------------------------------------

std::vector<std::size_t> PosteriorGrid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t a = axes.size(); a-- > 0;) {
        idx[a] = flat % axes[a].size();
        flat /= axes[a].size();
    }
    return idx;
}

std::vector<double> PosteriorGrid::values(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::vector<double> out(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
        out[a] = axes[a].nodes()[idx[a]];
    }
    return out;
}

int PosteriorGrid::axis_index(const std::string& name) const {
    const auto it = std::find(axis_names.begin(), axis_names.end(), name);
    return it == axis_names.end() ? -1 : static_cast<int>(it - axis_names.begin());
}

GridDensity PosteriorGrid::marginal(std::size_t axis) const {
    if (axis >= axes.size()) {
        throw ContractError("marginal: axis index out of range");
    }
    const double top = *std::max_element(log_density.begin(), log_density.end());
    std::vector<std::vector<double>> quad;
    for (const auto& ax : axes) {
        quad.push_back(ax.quadrature_weights());
    }
    std::vector<double> dens(axes[axis].size(), 0.0);
    for (std::size_t k = 0; k < size(); ++k) {
        const auto idx = unflatten(k);
        double w = std::exp(log_density[k] - top);
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (a != axis) {
                w *= quad[a][idx[a]];
            }
        }
        dens[idx[axis]] += w;
    }
    return GridDensity(axes[axis].nodes(), std::move(dens));
}

// ---------------------------------------------------------------------------
// FitResult
// ---------------------------------------------------------------------------

FitResult::FitResult(Estimator estimator, std::shared_ptr<const GaussianLinearModel> model, PosteriorGrid grid,
                     Provenance provenance, std::vector<double> study_pi, Warnings warnings,
                     Parametrization parametrization)
    : estimator_(estimator), parametrization_(parametrization), model_(std::move(model)), grid_(std::move(grid)),
      provenance_(std::move(provenance)), study_pi_(std::move(study_pi)), warnings_(std::move(warnings)) {
    if (!model_) {
        throw ContractError("FitResult requires a model");
    }
    names_ = model_->parameter_names();
    build_summaries();
}

FitResult FitResult::from_grid(Estimator estimator, std::vector<std::string> parameter_names, PosteriorGrid grid,
                               Parametrization parametrization) {
    if (grid.size() == 0) {
        throw ContractError("posterior grid is empty");
    }
    const auto p = static_cast<Eigen::Index>(parameter_names.size());
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.cond_mean[k].size() != p || grid.cond_cov[k].rows() != p || grid.cond_cov[k].cols() != p) {
            throw ContractError("posterior grid dimensions do not match the parameter list");
        }
        total += grid.weights[k];
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw ContractError("posterior grid weights must sum to one");
    }
    FitResult fit(estimator, parametrization);
    fit.names_ = std::move(parameter_names);
    fit.grid_ = std::move(grid);
    fit.build_summaries();
    return fit;
}

FitResult::FitResult(Estimator estimator, Parametrization parametrization)
    : estimator_(estimator), parametrization_(parametrization) {}

Eigen::MatrixXd FitResult::flat_directions() const {
    if (!model_) {
        return Eigen::MatrixXd(static_cast<Eigen::Index>(names_.size()), 0);
    }
    return model_->flat_directions();
}

bool FitResult::has_location(const std::string& name) const {
    if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
        return true;
    }
    return estimator_ == Estimator::CAMS && (name == "beta" || name == "delta");
}

bool FitResult::has_scale(const std::string& name) const {
    return grid_.axis_index(name) >= 0;
}

Eigen::VectorXd FitResult::coefficients(const std::string& name) const {
    const auto p = static_cast<Eigen::Index>(names_.size());
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
    auto index_of = [&](const std::string& n) -> Eigen::Index {
        const auto it = std::find(names_.begin(), names_.end(), n);
        return it == names_.end() ? -1 : static_cast<Eigen::Index>(it - names_.begin());
    };
    if (const auto i = index_of(name); i >= 0) {
        c(i) = 1.0;
        return c;
    }
    if (estimator_ == Estimator::CAMS) {
        if (name == "beta" && index_of("delta") >= 0) {
            c(index_of("delta")) = 1.0;
            c(index_of("gamma")) = 1.0;
            return c;
        }
        if (name == "delta" && index_of("beta") >= 0) {
            c(index_of("beta")) = 1.0;
            c(index_of("gamma")) = -1.0;
            return c;
        }
    }
    throw ContractError("unknown parameter: " + name);
}

bool FitResult::identifies(const Eigen::VectorXd& c) const {
    return !model_ || model_->identifies(c);
}

NormalMixture FitResult::functional(const Eigen::VectorXd& c) const {
    if (c.size() != static_cast<Eigen::Index>(names_.size())) {
        throw ContractError("functional: coefficient vector has the wrong length");
    }
    std::vector<double> means(grid_.size());
    std::vector<double> sds(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        means[k] = c.dot(grid_.cond_mean[k]);
        sds[k] = std::sqrt(std::max(0.0, c.dot(grid_.cond_cov[k] * c)));
    }
    return NormalMixture(grid_.weights, means, sds);
}

NormalMixture FitResult::location(const std::string& name) const {
    return functional(coefficients(name));
}

GridDensity FitResult::scale(const std::string& name) const {
    const int a = grid_.axis_index(name);
    if (a < 0) {
        throw ContractError("unknown heterogeneity parameter: " + name);
    }
    return grid_.marginal(static_cast<std::size_t>(a));
}

const ParameterSummary& FitResult::summary(const std::string& name) const {
    for (const auto& s : summaries_) {
        if (s.name == name) {
            return s;
        }
    }
    throw ContractError("no summary for parameter: " + name);
}

void FitResult::build_summaries() {
    summaries_.clear();
    auto add_location = [&](const std::string& name, bool derived) {
        const Eigen::VectorXd c = coefficients(name);
        ParameterSummary ps{name, {}, derived};
        if (identifies(c)) {
            ps.summary = summarize(functional(c));
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            ps.summary = Summary{nan, nan, nan, nan, nan, nan, nan, false};
        }
        summaries_.push_back(ps);
    };
    for (const auto& n : names_) {
        add_location(n, false);
    }
    if (estimator_ == Estimator::CAMS) {
        const bool explicit_form = std::find(names_.begin(), names_.end(), "delta") != names_.end();
        add_location(explicit_form ? "beta" : "delta", true);
    }
    for (std::size_t a = 0; a < grid_.axes.size(); ++a) {
        summaries_.push_back({grid_.axis_names[a], summarize(grid_.marginal(a)), false});
    }
}

// ---------------------------------------------------------------------------
// Grid evaluation
// ---------------------------------------------------------------------------

namespace {

double axis_scale(const std::string& axis, const PriorSpec& priors) {
    return axis == "tau" ? priors.tau_scale : priors.tau_gamma_scale;
}

PosteriorGrid evaluate_grid(const GaussianLinearModel& model, const std::vector<GridAxis>& axes,
                            const PriorSpec& priors) {
    PosteriorGrid g;
    g.axis_names = model.heterogeneity_names();
    g.axes = axes;
    std::size_t total = 1;
    for (const auto& ax : axes) {
        total *= ax.size();
    }
    g.log_density.resize(total);
    g.cond_mean.resize(total);
    g.cond_cov.resize(total);
    g.weights.resize(total);

    std::vector<std::vector<double>> quad;
    for (const auto& ax : axes) {
        quad.push_back(ax.quadrature_weights());
    }
    std::vector<double> quad_weight(total, 1.0);
    for (std::size_t k = 0; k < total; ++k) {
        const auto idx = g.unflatten(k);
        const auto vals = g.values(k);
        NodeFit nf = model.evaluate(vals);
        double lp = nf.log_marginal;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (!axes[a].is_fixed()) {
                lp += half_normal_log_density(vals[a], axis_scale(g.axis_names[a], priors));
            }
            quad_weight[k] *= quad[a][idx[a]];
        }
        g.log_density[k] = lp;
        g.cond_mean[k] = std::move(nf.mean);
        g.cond_cov[k] = std::move(nf.cov);
    }

    // Fixed node order keeps the reduction deterministic.
    const double top = *std::max_element(g.log_density.begin(), g.log_density.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        g.weights[k] = std::exp(g.log_density[k] - top) * quad_weight[k];
        sum += g.weights[k];
    }
    for (auto& w : g.weights) {
        w /= sum;
    }
    return g;
}

Warnings rank_warnings(const GaussianLinearModel& model) {
    Warnings out;
    if (model.rank() < model.dimension()) {
        std::string unidentified;
        for (int i = 0; i < model.dimension(); ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(model.dimension());
            e(i) = 1.0;
            if (!model.identifies(e)) {
                unidentified += (unidentified.empty() ? "" : ", ") + model.parameter_names()[static_cast<std::size_t>(i)];
            }
        }
        out.push_back("design is rank deficient (rank " + std::to_string(model.rank()) + " of " +
                      std::to_string(model.dimension()) + "); flat directions involve: " + unidentified);
    }
    return out;
}

Provenance make_provenance(const PriorSpec& priors, const GridSpec& grid, std::uint64_t hash,
                           std::string parametrization = {}) {
    Provenance p;
    p.priors = priors;
    p.grid = grid;
    p.dataset_hash = hash;
    p.parametrization = std::move(parametrization);
    return p;
}

void require_studies(const MetaDataset& data) {
    data.validate();
}

Eigen::MatrixXd mat1(double v) {
    return Eigen::MatrixXd::Constant(1, 1, v);
}

} // namespace

FitResult fit_bim(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid) {
    require_studies(data);
    priors.validate();
    std::vector<StudyBlock> blocks;
    blocks.reserve(data.size());
    for (const auto& s : data.studies) {
        StudyBlock b;
        b.y = Eigen::VectorXd::Constant(1, s.contrast());
        b.design = mat1(1.0);
        b.fixed_cov = mat1(s.contrast_variance());
        b.het_cov = {mat1(1.0)};
        blocks.push_back(std::move(b));
    }
    auto model = std::make_shared<const GaussianLinearModel>(std::vector<std::string>{"gamma"},
                                                             std::vector<std::string>{"tau_gamma"},
                                                             std::move(blocks), priors);
    auto g = evaluate_grid(*model, {grid.tau_gamma}, priors);
    auto warnings = rank_warnings(*model);
    return FitResult(Estimator::BIM, model, std::move(g), make_provenance(priors, grid, dataset_hash(data)),
                     data.information_fractions(), std::move(warnings));
}

FitResult fit_bms(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid,
                  const FitOptions& options) {
    require_studies(data);
    priors.validate();
    Eigen::MatrixXd design(2, 2);
    design << 1.0, -0.5, 1.0, 0.5;
    Eigen::MatrixXd het_gamma(2, 2);
    het_gamma << 0.25, -0.25, -0.25, 0.25;
    std::vector<StudyBlock> blocks;
    for (const auto& s : data.studies) {
        StudyBlock b;
        b.y = Eigen::Vector2d(s.obs_a.estimate, s.obs_b.estimate);
        b.design = design;
        b.fixed_cov = Eigen::Vector2d(s.obs_a.variance(), s.obs_b.variance()).asDiagonal();
        if (options.bms_alpha_heterogeneity) {
            b.het_cov = {Eigen::MatrixXd::Ones(2, 2), het_gamma};
        } else {
            b.het_cov = {het_gamma};
        }
        blocks.push_back(std::move(b));
    }
    std::vector<std::string> het_names = options.bms_alpha_heterogeneity
                                             ? std::vector<std::string>{"tau", "tau_gamma"}
                                             : std::vector<std::string>{"tau_gamma"};
    std::vector<GridAxis> axes = options.bms_alpha_heterogeneity ? std::vector<GridAxis>{grid.tau, grid.tau_gamma}
                                                                 : std::vector<GridAxis>{grid.tau_gamma};
    auto model = std::make_shared<const GaussianLinearModel>(std::vector<std::string>{"alpha", "gamma"},
                                                             std::move(het_names), std::move(blocks), priors);
    auto g = evaluate_grid(*model, axes, priors);
    auto warnings = rank_warnings(*model);
    return FitResult(Estimator::BMS, model, std::move(g), make_provenance(priors, grid, dataset_hash(data)),
                     std::vector<double>(data.size(), 0.5), std::move(warnings));
}

FitResult fit_cams(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid,
                   const FitOptions& options) {
    require_studies(data);
    priors.validate();
    std::vector<double> pis = data.information_fractions();
    if (options.pi_override) {
        if (options.pi_override->size() != data.size()) {
            throw ContractError("pi_override must provide one value per study");
        }
        pis = *options.pi_override;
    }
    for (double p : pis) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("information fractions must lie in [0, 1]");
        }
    }
    const bool explicit_form = options.parametrization == Parametrization::Explicit;
    std::vector<StudyBlock> blocks;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto& s = data.studies[j];
        const double pi = pis[j];
        StudyBlock b;
        b.y = Eigen::Vector2d(s.obs_a.estimate, s.obs_b.estimate);
        b.design.resize(2, 3);
        if (explicit_form) {
            // (alpha, delta, gamma): mu_A = alpha + delta pi, mu_B = mu_A + gamma
            b.design << 1.0, pi, 0.0, 1.0, pi, 1.0;
        } else {
            // (alpha, beta, gamma): mu_A = alpha + (beta - gamma) pi
            b.design << 1.0, pi, -pi, 1.0, pi, 1.0 - pi;
        }
        b.fixed_cov = Eigen::Vector2d(s.obs_a.variance(), s.obs_b.variance()).asDiagonal();
        b.het_cov = {Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd(interaction_heterogeneity(pi, 1.0))};
        blocks.push_back(std::move(b));
    }
    std::vector<std::string> names = explicit_form ? std::vector<std::string>{"alpha", "delta", "gamma"}
                                                   : std::vector<std::string>{"alpha", "beta", "gamma"};
    auto model = std::make_shared<const GaussianLinearModel>(std::move(names),
                                                             std::vector<std::string>{"tau", "tau_gamma"},
                                                             std::move(blocks), priors);
    auto g = evaluate_grid(*model, {grid.tau, grid.tau_gamma}, priors);
    auto warnings = rank_warnings(*model);
    return FitResult(Estimator::CAMS, model, std::move(g),
                     make_provenance(priors, grid, dataset_hash(data), to_string(options.parametrization)),
                     std::move(pis), std::move(warnings), options.parametrization);
}

FitResult fit_overall(const MetaDataset& data, const PriorSpec& priors, const GridSpec& grid) {
    require_studies(data);
    priors.validate();
    std::vector<StudyBlock> blocks;
    for (const auto& s : data.studies) {
        const double pi = s.info_fraction;
        StudyBlock b;
        b.y = Eigen::VectorXd::Constant(1, decompose(s, pi).m);
        b.design = mat1(1.0);
        b.fixed_cov = mat1((1.0 - pi) * (1.0 - pi) * s.obs_a.variance() + pi * pi * s.obs_b.variance());
        b.het_cov = {mat1(1.0)};
        blocks.push_back(std::move(b));
    }
    auto model = std::make_shared<const GaussianLinearModel>(std::vector<std::string>{"mu"},
                                                             std::vector<std::string>{"tau"}, std::move(blocks),
                                                             priors);
    auto g = evaluate_grid(*model, {grid.tau}, priors);
    auto warnings = rank_warnings(*model);
    return FitResult(Estimator::OVERALL, model, std::move(g), make_provenance(priors, grid, dataset_hash(data)),
                     data.information_fractions(), std::move(warnings));
}

FitResult fit_bim_k(const MultiStudyDataset& data, const ContrastBasis& basis, const PriorSpec& priors,
                    const GridSpec& grid) {
    data.validate();
    priors.validate();
    if (data.k() != basis.k()) {
        throw ContractError("fit_bim_k: basis dimension differs from the number of subgroups");
    }
    const Eigen::MatrixXd& c = basis.matrix_c();
    const Eigen::MatrixXd cb = c * basis.basis_b();
    const Eigen::MatrixXd het = cb * cb.transpose();
    std::vector<StudyBlock> blocks;
    for (const auto& s : data.studies) {
        StudyBlock b;
        b.y = c * s.estimates;
        b.design = cb;
        b.fixed_cov = c * s.cov_diag.asDiagonal() * c.transpose();
        b.het_cov = {het};
        blocks.push_back(std::move(b));
    }
    std::vector<std::string> names;
    for (int i = 1; i < basis.k(); ++i) {
        names.push_back(basis.k() == 2 ? std::string("gamma") : "gamma" + std::to_string(i));
    }
    auto model = std::make_shared<const GaussianLinearModel>(std::move(names), std::vector<std::string>{"tau_gamma"},
                                                             std::move(blocks), priors);
    auto g = evaluate_grid(*model, {grid.tau_gamma}, priors);
    auto warnings = rank_warnings(*model);
    return FitResult(Estimator::BIM_K, model, std::move(g), make_provenance(priors, grid, dataset_hash(data)), {},
                     std::move(warnings));
}

double tail_probability(const FitResult& fit, const std::string& parameter, double threshold) {
    if (fit.has_scale(parameter)) {
        return 1.0 - fit.scale(parameter).cdf(threshold);
    }
    if (!fit.has_location(parameter)) {
        throw ContractError("unknown parameter: " + parameter);
    }
    const Eigen::VectorXd c = fit.coefficients(parameter);
    if (!fit.identifies(c)) {
        throw ContractError("parameter is not identified: " + parameter);
    }
    if (threshold == std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    if (threshold == -std::numeric_limits<double>::infinity()) {
        return 1.0;
    }
    return fit.functional(c).upper_tail(threshold);
}

double ecological_evidence(const FitResult& fit) {
    if (fit.estimator() != Estimator::CAMS) {
        throw ContractError("ecological evidence requires a CAMS fit");
    }
    const double up = tail_probability(fit, "delta", 0.0);
    return std::max(up, 1.0 - up);
}

std::vector<TracePoint> interaction_trace(const FitResult& fit, const std::vector<double>& tau_gamma_values) {
    const auto& model = fit.model();
    if (!model) {
        throw ContractError("interaction_trace needs a fit backed by a model");
    }
    if (!fit.has_location("gamma")) {
        throw ContractError("interaction_trace needs a gamma parameter");
    }
    const auto& grid = fit.grid();
    const int tg_axis = grid.axis_index("tau_gamma");
    if (tg_axis < 0) {
        throw ContractError("interaction_trace needs a tau_gamma axis");
    }
    const Eigen::VectorXd c = fit.coefficients("gamma");
    const auto& priors = fit.provenance().priors;

    // Enumerate the nodes of every other axis.
    std::vector<std::vector<double>> other_values{{}};
    std::vector<double> other_quad{1.0};
    std::vector<double> other_logprior{0.0};
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        if (static_cast<int>(a) == tg_axis) {
            continue;
        }
        const auto& ax = grid.axes[a];
        const auto qw = ax.quadrature_weights();
        std::vector<std::vector<double>> nv;
        std::vector<double> nq;
        std::vector<double> nl;
        for (std::size_t i = 0; i < other_values.size(); ++i) {
            for (std::size_t n = 0; n < ax.size(); ++n) {
                auto v = other_values[i];
                v.push_back(ax.nodes()[n]);
                nv.push_back(std::move(v));
                nq.push_back(other_quad[i] * qw[n]);
                nl.push_back(other_logprior[i] +
                             (ax.is_fixed() ? 0.0
                                            : half_normal_log_density(ax.nodes()[n], axis_scale(grid.axis_names[a], priors))));
            }
        }
        other_values = std::move(nv);
        other_quad = std::move(nq);
        other_logprior = std::move(nl);
    }

    std::vector<TracePoint> out;
    out.reserve(tau_gamma_values.size());
    for (double t : tau_gamma_values) {
        if (!(t >= 0.0)) {
            throw DomainError("tau_gamma values must be nonnegative");
        }
        std::vector<double> logw(other_values.size());
        std::vector<double> means(other_values.size());
        std::vector<double> sds(other_values.size());
        for (std::size_t i = 0; i < other_values.size(); ++i) {
            std::vector<double> vals;
            std::size_t o = 0;
            for (std::size_t a = 0; a < grid.axes.size(); ++a) {
                vals.push_back(static_cast<int>(a) == tg_axis ? t : other_values[i][o++]);
            }
            const NodeFit nf = model->evaluate(vals);
            logw[i] = nf.log_marginal + other_logprior[i];
            means[i] = c.dot(nf.mean);
            sds[i] = std::sqrt(std::max(0.0, c.dot(nf.cov * c)));
        }
        const double top = *std::max_element(logw.begin(), logw.end());
        std::vector<double> w(logw.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = std::exp(logw[i] - top) * other_quad[i];
        }
        const NormalMixture mix(w, means, sds);
        out.push_back({t, mix.quantile(0.5), mix.quantile(0.25), mix.quantile(0.75)});
    }
    return out;
}

namespace {

class Fnv1a {
public:
    void add(double v) { add_bits(std::bit_cast<std::uint64_t>(v)); }
    void add(const std::string& s) {
        for (unsigned char ch : s) {
            byte(ch);
        }
        byte(0);
    }
    std::uint64_t value() const { return h_; }

private:
    void add_bits(std::uint64_t bits) {
        for (int i = 0; i < 8; ++i) {
            byte(static_cast<unsigned char>(bits >> (8 * i)));
        }
    }
    void byte(unsigned char b) {
        h_ ^= b;
        h_ *= 0x100000001b3ULL;
    }
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace

std::uint64_t dataset_hash(const MetaDataset& data) {
    Fnv1a h;
    for (const auto& s : data.studies) {
        h.add(s.study_id);
        h.add(s.obs_a.estimate);
        h.add(s.obs_a.std_error);
        h.add(s.obs_b.estimate);
        h.add(s.obs_b.std_error);
    }
    return h.value();
}

std::uint64_t dataset_hash(const MultiStudyDataset& data) {
    Fnv1a h;
    for (const auto& s : data.studies) {
        h.add(s.study_id);
        for (Eigen::Index i = 0; i < s.k(); ++i) {
            h.add(s.estimates(i));
            h.add(s.cov_diag(i));
            h.add(s.prevalence(i));
        }
    }
    return h.value();
}

} // namespace cams

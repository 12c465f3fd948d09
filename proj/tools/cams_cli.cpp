// cams: command-line front end (fit, report, verify, simulate, plotdata).

#include "cams/config.hpp"
#include "cams/csv_io.hpp"
#include "cams/inference.hpp"
#include "cams/plotdata.hpp"
#include "cams/reporting.hpp"
#include "cams/serialize.hpp"
#include "cams/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using namespace cams;

enum Exit : int { kOk = 0, kContract = 1, kInput = 2, kVerifyFail = 3 };

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void emit(const std::string& path, const std::string& content) {
    write_file_atomic(path, content);
    std::cout << "wrote " << path << '\n';
}

void print_warnings(const std::string& where, const Warnings& w) {
    for (const auto& msg : w) {
        std::cerr << "warning (" << where << "): " << msg << '\n';
    }
}

MetaDataset load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) {
        throw ContractError("no input file (set 'input')");
    }
    CsvOptions opts;
    opts.missing_se = cfg.missing_se;
    opts.exponentiated_input = cfg.exponentiated_input;
    opts.scale_label = cfg.scale_label;
    auto res = load_csv(cfg.input, opts);
    print_warnings("input", res.warnings);
    return std::move(res.data);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        if (b != std::string::npos) {
            out.push_back(item.substr(b, item.find_last_not_of(' ') - b + 1));
        }
    }
    return out;
}

std::vector<StudyCount> study_counts(const MetaDataset& data) {
    std::vector<StudyCount> out;
    for (const auto& s : data.studies) {
        if (!s.obs_a.count || !s.obs_b.count) {
            throw ContractError("MAP prevalence needs subgroup counts for study " + s.study_id);
        }
        out.push_back({*s.obs_b.count, *s.obs_a.count + *s.obs_b.count});
    }
    return out;
}

int run_fit(const RunConfig& cfg) {
    const MetaDataset data = load_input(cfg);
    const PriorSpec priors = cfg.priors();
    const GridSpec grid = cfg.grid(priors);
    for (const auto& name : split_list(cfg.estimators)) {
        std::optional<FitResult> fit;
        if (name == "bim") {
            fit = fit_bim(data, priors, grid);
        } else if (name == "bms") {
            fit = fit_bms(data, priors, grid, cfg.fit_options());
        } else if (name == "cams") {
            fit = fit_cams(data, priors, grid, cfg.fit_options());
        } else if (name == "overall") {
            fit = fit_overall(data, priors, grid);
        } else {
            throw ContractError("unknown estimator '" + name + "'");
        }
        print_warnings(name, fit->warnings());
        emit(join_path(cfg.output_dir, "fit_" + name + ".json"), fit_to_json(*fit, data.scale_label));
    }
    return kOk;
}

int run_report(const RunConfig& cfg) {
    const MetaDataset data = load_input(cfg);
    const PriorSpec priors = cfg.priors();
    const GridSpec grid = cfg.grid(priors);
    const FitResult cams = fit_cams(data, priors, grid, cfg.fit_options());
    const FitResult bms = fit_bms(data, priors, grid, cfg.fit_options());
    print_warnings("cams", cams.warnings());

    StrategyContext ctx;
    ctx.bms = &bms;
    ctx.external = cfg.external_prevalence;
    ctx.search_lo = cfg.search_lo;
    ctx.search_hi = cfg.search_hi;

    ReportDocument doc;
    doc.scale_label = data.scale_label;
    const PrevalenceSpec spec = cfg.prevalence_spec();
    doc.prevalence_spec = spec.describe();
    doc.effects = report(data, cams, spec, ctx);

    StrategyTableOptions topts;
    topts.context = ctx;
    topts.draws = cfg.draws;
    if (cfg.map_prevalence == "fit") {
        MapOptions mo;
        mo.tau_scale = cfg.map_tau_scale;
        doc.map = fit_map_prevalence(study_counts(data), mo);
        print_warnings("map prevalence", doc.map->warnings);
        topts.map_prevalence = PrevalenceDistribution::beta(doc.map->a, doc.map->b);
    } else if (!cfg.map_prevalence.empty()) {
        const PrevalenceSpec m = PrevalenceSpec::parse(cfg.map_prevalence);
        if (m.kind != PrevalenceSpec::Kind::Distribution) {
            throw ContractError("map_prevalence must be 'fit' or a Beta specification");
        }
        topts.map_prevalence = m.distribution;
    }
    if (topts.map_prevalence) {
        topts.seed = cfg.require_seed("the MAP prevalence row");
    }
    doc.table = strategy_table(data, cams, topts);
    doc.optimal = optimal_if(cams, cfg.search_lo, cfg.search_hi);
    print_warnings("report", doc.effects.warnings);
    print_warnings("strategy table", doc.table.warnings);
    emit(join_path(cfg.output_dir, "report.json"), report_to_json(doc));
    return kOk;
}

int run_verify(const RunConfig& cfg) {
    BatteryOptions opts;
    opts.seeds = cfg.seeds;
    if (cfg.seed) {
        opts.base_seed = *cfg.seed;
    }
    opts.priors = cfg.priors();
    opts.grid_nodes = cfg.grid_nodes;
    opts.negative_controls = cfg.negative_controls;
    const VerificationReport rep = run_battery(opts);
    emit(join_path(cfg.output_dir, "verification.json"), verification_to_json(rep));
    std::cout << rep.checks.size() - rep.failures() << '/' << rep.checks.size() << " checks as expected\n";
    for (const auto& c : rep.checks) {
        if (!c.as_expected()) {
            std::cout << "UNEXPECTED " << (c.pass ? "PASS" : "FAIL") << ": " << c.name << " value=" << c.value
                      << " threshold=" << c.threshold << '\n';
        }
    }
    return rep.all_as_expected() ? kOk : kVerifyFail;
}

int run_simulate(const RunConfig& cfg) {
    const MetaDataset data = simulate(cfg.scenario());
    const std::string path = cfg.output.empty() ? join_path(cfg.output_dir, "simulated.csv") : cfg.output;
    emit(path, to_csv(data));
    return kOk;
}

int run_plotdata(const RunConfig& cfg) {
    const MetaDataset data = load_input(cfg);
    const PriorSpec priors = cfg.priors();
    const GridSpec grid = cfg.grid(priors);
    const FitResult bim = fit_bim(data, priors, grid);
    const FitResult bms = fit_bms(data, priors, grid, cfg.fit_options());
    const FitResult cams = fit_cams(data, priors, grid, cfg.fit_options());
    const FitResult overall = fit_overall(data, priors, grid);
    const std::vector<const FitResult*> fits{&bim, &bms, &cams, &overall};

    const auto lines = bubble_lines(cams, &bms);
    const OptimalIf opt = optimal_if(cams, cfg.search_lo, cfg.search_hi);
    std::vector<double> tg;
    const double top = grid.tau_gamma.nodes().back();
    for (int i = 0; i < cfg.trace_points; ++i) {
        tg.push_back(top * i / (cfg.trace_points - 1));
    }
    const std::vector<std::pair<std::string, std::vector<TracePoint>>> traces{
        {"BIM", interaction_trace(bim, tg)}, {"CAMS", interaction_trace(cams, tg)}};

    const auto& dir = cfg.output_dir;
    emit(join_path(dir, "forest.csv"), forest_csv(data, fits));
    emit(join_path(dir, "bubble.csv"), bubble_csv(data));
    emit(join_path(dir, "bubble_lines.csv"), bubble_lines_csv(lines));
    emit(join_path(dir, "width_curve.csv"), width_curve_csv(opt));
    emit(join_path(dir, "trace.csv"), trace_csv(traces));
    if (cfg.svg) {
        emit(join_path(dir, "forest.svg"), forest_svg(data, fits));
        emit(join_path(dir, "bubble.svg"), bubble_svg(data, lines));
        emit(join_path(dir, "width_curve.svg"), width_curve_svg(opt));
        emit(join_path(dir, "trace.svg"), trace_svg(traces));
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contribution-adjusted Bayesian meta-analysis of subgroup effects"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> overrides;
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Command commands[] = {
        {"fit", "fit the configured estimators and write one JSON per fit", run_fit},
        {"report", "report subgroup, overall and interaction effects and the strategy table", run_report},
        {"verify", "run the verification battery (exit 3 on unexpected outcomes)", run_verify},
        {"simulate", "write a synthetic dataset as CSV", run_simulate},
        {"plotdata", "write forest, bubble, width-curve and trace data", run_plotdata},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "flat key = value configuration file");
        for (const auto& key : RunConfig::keys()) {
            sub->add_option_function<std::string>(
                "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, RunConfig::describe(key));
        }
        subs[cmd.name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        for (const auto& [key, value] : overrides) {
            cfg.set(key, value);
        }
        for (const auto& cmd : commands) {
            if (subs[cmd.name]->parsed()) {
                if (std::string(cmd.name) != "verify" && std::string(cmd.name) != "simulate") {
                    cfg.validate();
                } else {
                    cfg.priors().validate();
                }
                return cmd.run(cfg);
            }
        }
    } catch (const cams::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kContract;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kContract;
    }
    return kContract;
}

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cams/csv_io.hpp"
#include "cams/inference.hpp"
#include "cams/model.hpp"
#include "cams/reporting.hpp"
#include "cams/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef CAMS_CLI_PATH
#define CAMS_CLI_PATH "cams"
#endif

namespace {

using namespace cams;
using Clock = std::chrono::steady_clock;

int failures = 0;

void line(int id, bool pass, const std::string& what) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << what << std::endl;
    if (!pass) {
        ++failures;
    }
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void orthogonality() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double sa = std::exp(u(gen));
        const double sb = std::exp(u(gen));
        const double pi = compute_if(sa, sb);
        worst = std::max(worst, std::abs(cov_gm(pi, sa * sa, sb * sb)));
    }
    const double t = seconds_since(t0);
    line(1, worst < 1e-12 && t < 1.0,
         "max |cov(g,m)| = " + fmt(worst) + " (< 1e-12), " + fmt(t) + " s (< 1 s)");
}

void equivalence() {
    const auto t0 = Clock::now();
    const int js[] = {3, 7, 15};
    double worst_gamma = 0.0;
    double worst_tg = 0.0;
    for (int s = 0; s < 50; ++s) {
        SimScenario sc;
        sc.n_studies = js[s % 3];
        sc.delta = 0.25 * (s % 5 - 2);
        sc.seed = derive_seed(424242, static_cast<std::uint64_t>(s));
        const EquivalenceReport r = check_equivalence(sc);
        worst_gamma = std::max(worst_gamma, r.gamma_distance);
        worst_tg = std::max(worst_tg, r.tau_gamma_distance);
    }
    const double t = seconds_since(t0);
    line(2, worst_gamma < 1e-4 && worst_tg < 1e-4 && t < 60.0,
         "50 scenarios, sup|F_BIM - F_CAMS| gamma = " + fmt(worst_gamma) + ", tau_gamma = " + fmt(worst_tg) +
             " (< 1e-4), " + fmt(t) + " s (< 60 s)");
}

void factorization() {
    SimScenario sc;
    sc.n_studies = 9;
    sc.seed = 99;
    const FactorizationReport r = check_factorization(sc, 100);
    const double cross_err = r.cross_term_error;
    line(3, r.max_residual < 1e-10 && cross_err < 1e-8 && std::abs(r.forced_half_residual) > 1e-6,
         "max |joint - factorized| = " + fmt(r.max_residual) + " (< 1e-10); forced pi = 0.5 residual " +
             fmt(r.forced_half_residual) + " vs cross term " + fmt(r.forced_half_cross_term) +
             ", max error over 100 points " + fmt(cross_err) + " (< 1e-8)");
}

void coherence() {
    SimScenario sc;
    // no ecological trend in the trial means: beta = delta + gamma = 0
    sc.n_studies = 12;
    sc.gamma = 0.3;
    sc.delta = -0.3;
    sc.seed = 2024;
    const MetaDataset data = simulate(sc);
    const PriorSpec priors;
    const GridSpec grid = GridSpec::defaults(priors);
    const FitResult cams = fit_cams(data, priors, grid);
    const FitResult overall = fit_overall(data, priors, grid);
    const OverallIf star = overall_if(cams, data);
    const ReportedEffects e = effects_at(cams, star.value);
    const double ref = overall.summary("mu").summary.median;
    const double diff = std::abs(e.overall.log.median - ref);
    line(4, diff < 1e-3,
         "pi* = " + fmt(star.value) + ", CAMS overall median " + fmt(e.overall.log.median) + " vs univariate " +
             fmt(ref) + ", |diff| = " + fmt(diff) + " (< 1e-3)");
}

void k_sufficiency() {
    bool ok = true;
    std::string detail;
    for (int k : {2, 3, 5}) {
        const KSufficiencyReport r = check_k_sufficiency(k, 5150 + static_cast<std::uint64_t>(k), 100);
        ok = ok && r.max_orthogonality < 1e-12 && r.max_residual < 1e-10;
        detail += " K=" + std::to_string(k) + ": |CS pi| " + fmt(r.max_orthogonality) + ", residual " +
                  fmt(r.max_residual) + ";";
    }
    line(5, ok, "100 draws each (< 1e-12, < 1e-10);" + detail);
}

void bayes_optimum() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    const std::pair<double, double> betas[] = {{2, 2}, {5, 21}, {2, 8}};
    std::uint64_t seed = 606;
    for (const auto& [a, b] : betas) {
        const auto dist = PrevalenceDistribution::beta(a, b);
        for (Loss loss : {Loss::Squared, Loss::Absolute}) {
            const BayesOptimumReport r = check_bayes_optimum(dist, loss, seed++, 20000);
            const double err = std::abs(r.argmin - r.predicted);
            ok = ok && err < 0.01;
            detail += " Beta(" + fmt(a) + "," + fmt(b) + ") " + (loss == Loss::Squared ? "sq" : "abs") + " " +
                      fmt(r.argmin) + " vs " + fmt(r.predicted) + ";";
        }
    }
    const double t = seconds_since(t0);
    ok = ok && t < 10.0;
    line(6, ok, "argmin within 0.01, " + fmt(t) + " s (< 10 s);" + detail);
}

void beta_moments_check() {
    const BetaMoments m = beta_moments(5.0, 21.0);
    const bool mean_ok = std::abs(m.mean - 0.19231) <= 1e-5;
    const bool sd_ok = std::abs(m.sd - 0.07582) <= 1e-5;
    line(7, mean_ok && sd_ok,
         "Beta(5,21) mean " + fmt(m.mean) + " (0.19231 +- 1e-5: " + (mean_ok ? "ok" : "off") + "), sd " +
             fmt(m.sd) + " (0.07582 +- 1e-5: " + (sd_ok ? "ok" : "off") + ")");
}

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_summary(const EffectSummary& x, const EffectSummary& y) {
    return same_bits(x.log.median, y.log.median) && same_bits(x.log.lower, y.log.lower) &&
           same_bits(x.log.upper, y.log.upper) && same_bits(x.log.mean, y.log.mean) &&
           same_bits(x.log.sd, y.log.sd) && same_bits(x.exp_median, y.exp_median) &&
           same_bits(x.exp_lower, y.exp_lower) && same_bits(x.exp_upper, y.exp_upper);
}

void gamma_invariance() {
    SimScenario sc;
    sc.n_studies = 10;
    sc.delta = -0.5;
    sc.seed = 77;
    const MetaDataset data = simulate(sc);
    const PriorSpec priors;
    const GridSpec grid = GridSpec::defaults(priors);
    const FitResult cams = fit_cams(data, priors, grid);
    const FitResult bms = fit_bms(data, priors, grid);
    StrategyTableOptions opts;
    opts.context.bms = &bms;
    opts.context.external = 0.68;
    opts.map_prevalence = PrevalenceDistribution::beta(5, 21);
    opts.seed = 31;
    const StrategyTable table = strategy_table(data, cams, opts);
    bool ok = table.rows.size() >= 7;
    for (const auto& row : table.rows) {
        ok = ok && same_summary(row.effects.interaction, table.rows.front().effects.interaction);
    }
    line(8, ok,
         std::to_string(table.rows.size()) + " strategy rows, interaction summaries " +
             (ok ? "bit-identical" : "differ or rows missing"));
}

void aggregation_bias() {
    const MetaDataset data = simulate(leverage_scenario(8));
    const PriorSpec priors;
    const GridSpec grid = GridSpec::defaults(priors);
    const double bim = fit_bim(data, priors, grid).summary("gamma").summary.median;
    const double bms = fit_bms(data, priors, grid).summary("gamma").summary.median;
    const double cams = fit_cams(data, priors, grid).summary("gamma").summary.median;
    const double d_bms = std::abs(bms - bim);
    const double d_cams = std::abs(cams - bim);
    line(9, d_bms > 0.01 && d_cams < 1e-4,
         "|BMS - BIM| = " + fmt(d_bms) + " (> 0.01), |CAMS - BIM| = " + fmt(d_cams) + " (< 1e-4)");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) {
    return std::system((cmd + " > /dev/null 2>&1").c_str());
}

void determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "cams_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path input = root / "input.csv";
    const fs::path config = root / "run.cfg";
    {
        std::ofstream cfg(config);
        cfg << "input = " << input.string() << "\nseed = 4711\nseeds = 4\nmap_prevalence = fit\n"
            << "external_prevalence = 0.3\ndraws = 5000\n";
    }
    const std::string cli = CAMS_CLI_PATH;
    bool ok = run(cli + " simulate --config " + config.string() + " --sim_studies 8 --output " + input.string()) == 0;
    const std::vector<std::string> files = {"fit_bim.json", "fit_bms.json", "fit_cams.json",
                                            "fit_overall.json", "report.json", "verification.json"};
    std::string detail;
    for (const char* dir : {"a", "b"}) {
        const std::string out = " --config " + config.string() + " --output_dir " + (root / dir).string();
        ok = ok && run(cli + " fit" + out) == 0 && run(cli + " report" + out) == 0 && run(cli + " verify" + out) == 0;
    }
    int identical = 0;
    for (const auto& f : files) {
        const fs::path a = root / "a" / f;
        const fs::path b = root / "b" / f;
        if (fs::exists(a) && fs::exists(b) && !slurp(a).empty() && slurp(a) == slurp(b)) {
            ++identical;
        }
    }
    ok = ok && identical == static_cast<int>(files.size());
    line(10, ok, std::to_string(identical) + "/" + std::to_string(files.size()) + " outputs byte-identical");
    fs::remove_all(root);
}

} // namespace

int main() {
    const std::vector<std::function<void()>> criteria = {
        orthogonality, equivalence,        factorization,    coherence,        k_sufficiency,
        bayes_optimum, beta_moments_check, gamma_invariance, aggregation_bias, determinism};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            line(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
        }
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}

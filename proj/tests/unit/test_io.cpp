#include "cams/config.hpp"
#include "cams/csv_io.hpp"
#include "cams/format.hpp"
#include "cams/plotdata.hpp"
#include "cams/serialize.hpp"
#include "cams/verify.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace cams;
using nlohmann::json;

namespace {

LoadResult parse(const std::string& text, const CsvOptions& opts = {}) {
    std::istringstream in(text);
    return parse_csv(in, opts);
}

const char* kHeader = "study.name,est,se,subgroup12\n";

} // namespace

TEST_CASE("shortest round-trip number text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(std::nan("")) == "nan");
    bool ok = false;
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.123}) {
        CHECK(parse_double(format_double(v), ok) == v);
        CHECK(ok);
    }
    CHECK(parse_double(" +1.5 ", ok) == 1.5);
    CHECK(ok);
    parse_double("1.5x", ok);
    CHECK_FALSE(ok);
    parse_double("", ok);
    CHECK_FALSE(ok);
}

TEST_CASE("minimal CSV") {
    const auto r = parse(std::string(kHeader) + "s1,0.1,0.2,-0.5\ns1,0.3,0.4,0.5\n");
    REQUIRE(r.data.size() == 1);
    const auto& s = r.data.studies[0];
    CHECK(s.obs_a.estimate == 0.1);
    CHECK(s.obs_b.std_error == 0.4);
    CHECK(s.info_fraction == doctest::Approx(0.04 / 0.2));
}

TEST_CASE("row order within a study does not matter") {
    const auto a = parse(std::string(kHeader) + "s1,0.1,0.2,-0.5\ns1,0.3,0.4,0.5\n");
    const auto b = parse(std::string(kHeader) + "s1,0.3,0.4,0.5\ns1,0.1,0.2,-0.5\n");
    CHECK(to_csv(a.data) == to_csv(b.data));
}

TEST_CASE("CSV aliases, quotes and counts") {
    const auto r = parse("\"study.acronym\",esti,se,subgroup12,n_a,n_b\n"
                         "\"Trial, one\",0.1,0.2,-0.5,40,60\n\"Trial, one\",0.3,0.4,0.5,40,60\n");
    REQUIRE(r.data.size() == 1);
    CHECK(r.data.studies[0].study_id == "Trial, one");
    CHECK(*r.data.studies[0].obs_b.count == 60);
}

TEST_CASE("single-row study gets the missing-subgroup sentinel") {
    const auto r = parse(std::string(kHeader) + "s1,0.1,0.2,-0.5\n");
    REQUIRE(r.data.size() == 1);
    CHECK(r.data.studies[0].obs_b.missing);
    CHECK(r.data.studies[0].obs_b.std_error == kDefaultMissingSE);
}

TEST_CASE("NA standard error becomes the sentinel") {
    CsvOptions o;
    o.missing_se = 50.0;
    const auto r = parse(std::string(kHeader) + "s1,0.1,NA,-0.5\ns1,0.3,0.4,0.5\n", o);
    CHECK(r.data.studies[0].obs_a.missing);
    CHECK(r.data.studies[0].obs_a.std_error == 50.0);
}

TEST_CASE("exponentiated input is logged") {
    CsvOptions o;
    o.exponentiated_input = true;
    const auto r = parse(std::string(kHeader) + "s1,2.0,0.2,-0.5\ns1,0.5,0.4,0.5\n", o);
    CHECK(r.data.studies[0].obs_a.estimate == doctest::Approx(std::log(2.0)));
}

TEST_CASE("malformed CSV input names the row") {
    try {
        parse(std::string(kHeader) + "s1,0.1,0.2,-0.5\ns1,abc,0.4,0.5\n");
        FAIL("expected an InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("study.name,est,se\ns1,0.1,0.2\n"), InputError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "s1,0.1,0.2,0.3\n"), InputError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "s1,0.1,0.2,0.5\ns1,0.1,0.2,0.5\n"), InputError);
    CHECK_THROWS(parse(std::string(kHeader) + "s1,0.1,-0.2,-0.5\ns1,0.1,0.2,0.5\n"));
    CHECK_THROWS_AS(parse(kHeader), InputError);
}

TEST_CASE("inconsistent ifrac column warns") {
    const auto r = parse("study.name,est,se,subgroup12,ifrac\ns1,0.1,0.2,-0.5,0.9\ns1,0.3,0.2,0.5,0.9\n");
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("property: CSV write and parse round-trip exactly") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimScenario sc;
        sc.seed = seed;
        const MetaDataset d = simulate(sc);
        const std::string text = to_csv(d);
        const auto back = parse(text);
        CHECK(to_csv(back.data) == text);
        CHECK(dataset_hash(back.data) == dataset_hash(d));
        CHECK(back.warnings.empty());
    }
}

TEST_CASE("atomic file write creates directories") {
    const auto dir = std::filesystem::temp_directory_path() / "cams_unit_atomic";
    std::filesystem::remove_all(dir);
    const auto path = (dir / "sub" / "x.txt").string();
    write_file_atomic(path, "hello");
    std::ifstream in(path);
    std::string s;
    in >> s;
    CHECK(s == "hello");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("config parse, overrides and text round-trip") {
    std::istringstream in("# comment\ninput = data.csv\nseed = 12\ntau_prior_scale = 0.8\nsvg = true\n");
    RunConfig c = RunConfig::parse(in);
    CHECK(c.input == "data.csv");
    CHECK(c.seed == 12u);
    CHECK(c.priors().tau_scale == 0.8);
    CHECK(c.svg);
    c.set("grid_nodes", "51");
    CHECK(c.grid(c.priors()).tau.size() == 51);
    std::istringstream again(c.to_text());
    CHECK(RunConfig::parse(again).to_text() == c.to_text());
    for (const auto& k : RunConfig::keys()) {
        CHECK_FALSE(RunConfig::describe(k).empty());
    }
}

TEST_CASE("config rejects unknown keys and bad values") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("no_such_key", "1"), ContractError);
    CHECK_THROWS_AS(c.set("grid_nodes", "many"), ContractError);
    CHECK_THROWS_AS(c.set("svg", "perhaps"), ContractError);
    std::istringstream bad("just a line\n");
    CHECK_THROWS(RunConfig::parse(bad));
    c.set("tau_prior_scale", "-1");
    CHECK_THROWS(c.validate());
}

TEST_CASE("Monte Carlo configuration requires a seed") {
    RunConfig c;
    c.prevalence = "beta:5,21";
    CHECK_THROWS_AS(c.prevalence_spec(), ContractError);
    c.seed = 3;
    CHECK(c.prevalence_spec().seed == 3u);
    RunConfig s;
    CHECK_THROWS(s.scenario());
}

TEST_CASE("location prior option") {
    RunConfig c;
    c.location_prior = "normal:0,10";
    CHECK_FALSE(c.priors().default_location.flat);
    CHECK(c.priors().default_location.sd == 10.0);
    c.location_prior = "normal:0";
    CHECK_THROWS(c.priors());
}

TEST_CASE("fit JSON structure") {
    SimScenario sc;
    sc.seed = 6;
    const MetaDataset d = simulate(sc);
    const PriorSpec p;
    const FitResult fit = fit_cams(d, p, GridSpec::defaults(p, 21));
    const std::string text = fit_to_json(fit, "log-RR");
    CHECK(text.back() == '\n');
    const json j = json::parse(text);
    CHECK(j["estimator"] == "CAMS");
    CHECK(j["parameters"].size() >= 5);
    CHECK(j["provenance"]["priors"]["tau_half_normal_scale"] == 1.0);
    CHECK(j["study_information_fractions"].size() == d.size());
    CHECK(fit_to_json(fit, "log-RR") == text);
}

TEST_CASE("unidentified summaries serialize as null") {
    SimScenario sc;
    sc.n_studies = 1;
    sc.seed = 1;
    const MetaDataset d = simulate(sc);
    const PriorSpec p;
    const json j = json::parse(fit_to_json(fit_cams(d, p, GridSpec::defaults(p, 11)), "log-RR"));
    bool saw_null = false;
    for (const auto& prm : j["parameters"]) {
        saw_null = saw_null || prm["summary"]["median"].is_null();
    }
    CHECK(saw_null);
}

TEST_CASE("verification JSON status") {
    VerificationReport r;
    r.checks.push_back({"a", "exact", 0.0, 1.0, true, true, ""});
    CHECK(json::parse(verification_to_json(r))["status"] == "PASS");
    r.checks.push_back({"b", "exact", 2.0, 1.0, false, true, ""});
    CHECK(json::parse(verification_to_json(r))["status"] == "FAIL");
}

TEST_CASE("plot data exports") {
    SimScenario sc;
    sc.seed = 15;
    sc.n_studies = 5;
    const MetaDataset d = simulate(sc);
    const PriorSpec p;
    const GridSpec g = GridSpec::defaults(p, 21);
    const FitResult cams = fit_cams(d, p, g);
    const FitResult bms = fit_bms(d, p, g);
    const std::string forest = forest_csv(d, {&cams, &bms});
    CHECK(forest.rfind("section,label,series,estimate,lower,upper,weight\n", 0) == 0);
    const std::string bubble = bubble_csv(d);
    CHECK(std::count(bubble.begin(), bubble.end(), '\n') == 1 + 2 * 5);
    const auto lines = bubble_lines(cams, &bms);
    CHECK(lines.size() == 2 * 51 + 4);
    const auto trace = interaction_trace(cams, {0.0, 0.1, 0.2});
    const std::string t = trace_csv({{"CAMS", trace}});
    CHECK(std::count(t.begin(), t.end(), '\n') == 4);
    const std::string svg = forest_svg(d, {&cams});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("load example: SEs 1 and 2 give pi = 0.2") {
    const auto r = parse(std::string(kHeader) + "s,0,1,-0.5\ns,0,2,0.5\n");
    CHECK(r.data.studies[0].info_fraction == doctest::Approx(0.2));
}

TEST_CASE("full schema with fourteen rows") {
    std::ostringstream csv;
    csv << "study.name,contrast.esti,contrast.se,est,se,ifrac,subgroup12,ifrac2\n";
    for (int j = 0; j < 7; ++j) {
        const double sa = 0.2 + 0.05 * j, sb = 0.3;
        const double pi = sa * sa / (sa * sa + sb * sb);
        const double ya = 0.1 * j, yb = -0.1;
        csv << "t" << j << ",NA,NA," << ya << ',' << sa << ',' << pi << ",-0.5," << (-0.5 + 0.5 - pi) << '\n';
        csv << "t" << j << ',' << (yb - ya) << ',' << std::hypot(sa, sb) << ',' << yb << ',' << sb << ',' << pi
            << ",0.5," << (0.5 + 0.5 - pi) << '\n';
    }
    const auto r = parse(csv.str());
    CHECK(r.data.size() == 7);
    CHECK(r.warnings.empty());
}

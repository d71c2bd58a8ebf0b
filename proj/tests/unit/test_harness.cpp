#include "shelab/error.hpp"
#include "shelab/harness/config.hpp"
#include "shelab/harness/experiments.hpp"
#include "shelab/harness/results.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace shelab;
using namespace shelab::harness;
using nlohmann::json;

namespace {

json base() {
    return json::parse(R"({
        "b": "0",
        "sigma": "0.5*x",
        "u0": {"kind": "constant", "value": 1},
        "grid": {"R": 2, "dx": 0.1, "dt": 0.005, "T": 0.1},
        "replications": 40,
        "levels": [5],
        "orders": [2],
        "seed": 3,
        "probes": {"times": [0.05, 0.1], "x": [0, 0.5]}
    })");
}

// Top-level keys are replaced; "grid" is merged so single fields can be changed.
json with(json doc, const json& patch) {
    for (const auto& [key, value] : patch.items()) {
        if (key == "grid") {
            doc[key].merge_patch(value);
        } else {
            doc[key] = value;
        }
    }
    return doc;
}

std::string rejection(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("shelab_test_harness_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("config rejection names the field") {
    CHECK(rejection(base()).empty());
    CHECK(rejection(with(base(), {{"colour", 1}})).find("colour") != std::string::npos);
    CHECK(rejection(with(base(), {{"orders", {2, 9}}})).find("orders") != std::string::npos);
    CHECK(rejection(with(base(), {{"orders", {0.5}}})).find("orders") != std::string::npos);
    CHECK(rejection(with(base(), {{"levels", {-1}}})).find("levels") != std::string::npos);
    CHECK(rejection(with(base(), {{"constants", {{"c", 1.0}}}})).find("c") != std::string::npos);
    CHECK(rejection(with(base(), {{"constants", {{"sigma_sup", 1.0}}}})).find("sigma_sup") != std::string::npos);
    CHECK(rejection(with(base(), {{"grid", {{"dt", 0.05}}}})).find("grid") != std::string::npos);
    CHECK(rejection(with(base(), {{"sigma", "x +"}})).find("sigma") != std::string::npos);
    CHECK(rejection(with(base(), {{"sigma", {{"builtin", "cubic"}}}})).find("sigma.builtin") != std::string::npos);
    CHECK(rejection(with(base(), {{"u0", {{"kind", "expression"}, {"source", "x"}}}})).find("u0") !=
          std::string::npos);
    CHECK(rejection(with(base(), {{"replications", -3}})).find("replications") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("config canonical form and hash") {
    const auto a = parse_config(base());
    const auto b = parse_config(base());
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(parse_config(to_json(a)).seed == a.seed);
    CHECK(config_hash(parse_config(to_json(a))) == config_hash(a));
    CHECK(config_hash(parse_config(with(base(), {{"seed", 4}}))) != config_hash(a));
    // Spelling variants of one coefficient normalize to the same config.
    CHECK(config_hash(parse_config(with(base(), {{"sigma", {{"expr", "0.5*x"}}}}))) == config_hash(a));

    const auto ind = parse_config(with(base(), {{"u0", {{"kind", "indicator"}, {"lo", 0}, {"hi", "inf"}}}}));
    CHECK(to_json(ind)["u0"]["hi"] == "inf");
    CHECK(make_initial(to_json(ind)["u0"])(5.0) == 1.0);
}

TEST_CASE("builtins and declared constants") {
    const auto cfg = parse_config(with(base(), {{"sigma", {{"builtin", "affine"}, {"intercept", 1}, {"slope", 2}}},
                                                {"b", {{"expr", "sin(x)"}, {"L", 1.5}}}}));
    const auto p = make_problem(cfg);
    CHECK(p.diffusion(0.0, 3.0) == 7.0);
    const auto rc = resolve_constants(cfg, p);
    CHECK(rc.constants.L_b == 1.5);
    CHECK(rc.constants.L_sigma == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rc.constants.u0_norm == 1.0);
    CHECK_FALSE(rc.notes.empty());

    const auto over = parse_config(with(base(), {{"constants", {{"L_sigma", 4.0}}}}));
    CHECK(resolve_constants(over, make_problem(over)).constants.L_sigma == 4.0);
    const auto bdd = parse_config(
        with(base(), {{"bounded_sigma", true}, {"sigma", "cos(x)"}, {"constants", {{"sigma_sup", 1.0}}}}));
    REQUIRE(resolve_constants(bdd, make_problem(bdd)).constants.sigma_sup);
}

TEST_CASE("empty result set exports a header-only CSV") {
    ResultSet empty;
    std::ostringstream os;
    write_csv(os, empty);
    CHECK(os.str() == std::string(kCsvHeader) + "\n");
}

TEST_CASE("deterministic moment example dominates") {
    const auto cfg = parse_config(json::parse(R"({
        "b": "0", "sigma": "0",
        "u0": {"kind": "constant", "value": 1},
        "grid": {"R": 1, "dx": 0.1, "dt": 0.005, "T": 0.1},
        "replications": 30, "levels": [1], "orders": [2],
        "constants": {"inflate_sigma": true},
        "probes": {"times": [0, 0.1], "x": [0]}
    })"));
    const auto rs = run_moment_verification(cfg);
    REQUIRE(rs.records.size() == 2);
    for (const auto& r : rs.records) {
        CHECK(r.verdict == "dominates");
        CHECK(*r.estimate == 1.0);
        CHECK(r.config_hash == config_hash(cfg));
    }
    CHECK(*rs.records[0].bound_log == doctest::Approx(std::log(64.0)).epsilon(1e-12));
    CHECK(failures(rs).empty());

    // An order the bound does not cover is rejected up front.
    auto low = cfg;
    low.orders = {1.5};
    CHECK_THROWS_AS(run_moment_verification(low), ConfigError);
}

TEST_CASE("moment verification is reproducible and thread independent") {
    const auto cfg = parse_config(base());
    const auto a = run_moment_verification(cfg, {1});
    const auto b = run_moment_verification(cfg, {3});
    CHECK(a == b);
    for (const auto& r : a.records) CHECK_FALSE(r.verdict.empty());
    std::ostringstream x, y;
    write_csv(x, a);
    write_csv(y, b);
    CHECK(x.str() == y.str());
}

TEST_CASE("uniqueness and coupling") {
    const auto cfg = parse_config(with(base(), {{"replications", 4}, {"levels", {0, 5}}}));
    const auto rs = run_uniqueness_coupling(cfg);
    CHECK(failures(rs).empty());
    bool saw_active = false, saw_identical_pair = false;
    for (const auto& r : rs.records) {
        if (r.experiment == "uniqueness/parse-twice") CHECK(r.verdict == "identical");
        if (r.experiment == "uniqueness/level-pair" && *r.N == 0.0) saw_active |= r.verdict == "differs-active-clamp";
        if (r.experiment == "uniqueness/level-pair" && *r.N == 5.0) saw_identical_pair |= r.verdict == "identical";
    }
    CHECK(saw_active);
    CHECK(saw_identical_pair);
}

TEST_CASE("convergence with a single active level") {
    const auto cfg = parse_config(with(base(), {{"replications", 4}, {"levels", {5, 0}}, {"orders", {1, 2}}}));
    const auto rs = run_truncation_convergence(cfg);
    REQUIRE(rs.convergence.size() == 4);
    REQUIRE(rs.fits.size() == 2);
    for (const auto& f : rs.fits) {
        CHECK(f.active_levels == 1);
        CHECK_FALSE(f.slope);
        REQUIRE(f.plateau);
        CHECK(*f.plateau == 5.0);
        CHECK(f.nonincreasing);
    }
    std::ostringstream plot;
    write_plot_csv(plot, rs);
    std::size_t lines = 0;
    for (char ch : plot.str()) lines += ch == '\n';
    CHECK(lines == 1 + rs.convergence.size());
}

TEST_CASE("export and import round trip") {
    const auto cfg = parse_config(with(base(), {{"replications", 4}, {"levels", {0, 1, 5}}}));
    const auto rs = run_truncation_convergence(cfg);
    const auto dir = scratch("roundtrip");
    const auto files = export_results(rs, dir);
    CHECK(files.size() == 3);
    CHECK(std::filesystem::exists(dir / "convergence_plot.csv"));
    const auto back = import_results(dir / "convergence.json");
    CHECK(back == rs);

    std::ifstream csv(dir / "convergence.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == kCsvHeader);

    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK_THROWS_AS(import_results(dir / "missing.json"), IoError);
    CHECK_THROWS_AS(export_results(rs, "/proc/forbidden/dir"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("tail verification keeps not-applicable rows") {
    const auto cfg = parse_config(json::parse(R"({
        "b": "0", "sigma": {"builtin": "affine", "intercept": 1, "slope": 1},
        "u0": {"kind": "constant", "value": 0},
        "grid": {"R": 2, "dx": 0.1, "dt": 0.005, "T": 0.1},
        "replications": 200, "levels": [6],
        "probes": {"times": [0.005, 0.1], "x": [0]}
    })"));
    const auto rs = run_tail_verification(cfg);
    CHECK(rs.details["branch"] == "unbounded-sigma");
    bool na = false, dom = false;
    for (const auto& r : rs.records) {
        na |= r.verdict == "not-applicable";
        dom |= r.verdict == "dominates";
        CHECK(r.verdict != "violated");
    }
    CHECK(na);
    CHECK(dom);

    auto none = cfg;
    none.levels = {1};
    CHECK_THROWS_AS(run_tail_verification(none), ConfigError);
}

TEST_CASE("assumption check report") {
    const auto cfg = parse_config(with(base(), {{"b", "x"}, {"sigma", "x"}, {"check", {{"step", 0.01}}}}));
    const auto a = run_assumption_check(cfg);
    const auto b = run_assumption_check(cfg);
    CHECK(a.details["verdict"] == "pass");
    CHECK(a == b);
    const auto bad = parse_config(with(base(), {{"b", "x^2"}, {"check", {{"step", 0.01}}}}));
    CHECK(run_assumption_check(bad).details["verdict"] == "fail");
}

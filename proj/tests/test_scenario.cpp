#include <catch2/catch_amalgamated.hpp>

#include "jsde/runner.hpp"

#include <filesystem>
#include <fstream>

using namespace jsde;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarioDir = fs::path(JSDE_SOURCE_DIR) / "scenarios";

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("jsde_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("every bundled scenario parses and validates") {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(kScenarioDir)) {
        if (e.path().extension() != ".json") continue;
        ++n;
        INFO(e.path().filename().string());
        const auto sc = load_scenario(e.path().string());
        REQUIRE_FALSE(sc.name.empty());
        REQUIRE_FALSE(sc.exercises.empty());
        REQUIRE_NOTHROW(validate_scenario(sc));
    }
    REQUIRE(n >= 10);
}

TEST_CASE("parse errors carry the offending field") {
    const auto dir = temp_dir("parse");
    const auto file = dir / "bad.json";
    std::ofstream(file) << R"({"name": "x", "model": {"drift": {"type": "wiggly"}},
                               "experiment": {"type": "constant_path"}})";
    REQUIRE_THROWS_WITH(load_scenario(file.string()),
                        Catch::Matchers::ContainsSubstring("wiggly"));

    std::ofstream(file) << "{ not json";
    REQUIRE_THROWS_AS(load_scenario(file.string()), ConfigError);
}

TEST_CASE("validation rejects an out-of-range tilt before any simulation") {
    const auto dir = temp_dir("lambda");
    const auto file = dir / "bad_lambda.json";
    std::ofstream(file) << R"({
      "name": "bad_lambda",
      "model": {
        "dimension": 1,
        "jump": {"type": "additive"},
        "levy": {"type": "uniform_intervals", "intervals": [[0.5, 1.5]], "total_mass": 1.0},
        "lambda": {"type": "exp_linear", "coef": 1.0}
      },
      "experiment": {"type": "constant_path"},
      "execution": {"n_paths": 10, "dt": 0.1, "horizon": 1.0, "seed": 1}
    })";
    const auto sc = load_scenario(file.string());
    REQUIRE_THROWS_AS(validate_scenario(sc), ModelError); // exp(u) > 1 on the region
}

TEST_CASE("tabulated coefficients interpolate linearly") {
    const auto dir = temp_dir("tabulated");
    const auto file = dir / "tab.json";
    std::ofstream(file) << R"({
      "name": "tabulated",
      "model": {
        "dimension": 1,
        "drift": {"type": "tabulated", "points": [[-1.0, -2.0], [0.0, 0.0], [1.0, 4.0]]},
        "diffusion": {"type": "tabulated", "points": [[-1.0, 0.5], [1.0, 1.5]]},
        "initial": {"type": "point", "value": [0.0]}
      },
      "experiment": {"type": "constant_path"},
      "execution": {"n_paths": 1, "dt": 0.1, "horizon": 1.0, "seed": 1}
    })";
    const auto sc = load_scenario(file.string());
    Vec out;
    sc.model.coeffs.drift({-0.5}, out);
    CHECK(out[0] == Catch::Approx(-1.0));
    sc.model.coeffs.drift({0.25}, out);
    CHECK(out[0] == Catch::Approx(1.0));
    Mat sig;
    sc.model.coeffs.diffusion({0.0}, sig);
    CHECK(sig(0, 0) == Catch::Approx(1.0));

    std::ofstream(file) << R"({
      "name": "tabulated_bad",
      "model": {
        "dimension": 1,
        "drift": {"type": "tabulated", "points": [[1.0, 0.0], [0.0, 1.0]]}
      },
      "experiment": {"type": "constant_path"}
    })";
    REQUIRE_THROWS_AS(load_scenario(file.string()), ConfigError);
}

TEST_CASE("validation rejects a drift tilt beyond its declared bound") {
    const auto dir = temp_dir("rho_bound");
    const auto file = dir / "big_rho.json";
    std::ofstream(file) << R"({
      "name": "big_rho",
      "model": {
        "dimension": 1,
        "diffusion": {"type": "constant", "value": 1.0},
        "rho": {"type": "constant", "value": [1e9]},
        "rho_bound": 1000.0
      },
      "experiment": {"type": "constant_path"},
      "execution": {"n_paths": 10, "dt": 0.1, "horizon": 1.0, "seed": 1}
    })";
    const auto sc = load_scenario(file.string());
    REQUIRE_THROWS_AS(validate_scenario(sc), ModelError);
}

TEST_CASE("exit-code contract: a failing verdict fails the run") {
    const auto dir = temp_dir("failing");
    const auto file = dir / "moving_constant.json";
    // a drifting model cannot satisfy the constant-path verdict
    std::ofstream(file) << R"({
      "name": "moving_constant",
      "model": {
        "dimension": 1,
        "drift": {"type": "constant", "value": [1.0]},
        "initial": {"type": "point", "value": [0.0]}
      },
      "experiment": {"type": "constant_path"},
      "execution": {"n_paths": 4, "dt": 0.25, "horizon": 1.0, "seed": 1}
    })";
    const auto report = run_scenario(file.string(), (dir / "out").string());
    REQUIRE_FALSE(report.all_pass());
}

TEST_CASE("trivial scenario runs green and writes its artifacts") {
    const auto dir = temp_dir("trivial");
    const auto report =
        run_scenario((kScenarioDir / "trivial_constant.json").string(), dir.string());
    REQUIRE(report.all_pass());
    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "report_meta.json"));
    const auto text = slurp(dir / "report.json");
    CHECK(text.find("\"all_pass\": true") != std::string::npos);
    CHECK(text.find("wall") == std::string::npos); // timing lives in the meta file only
}

TEST_CASE("determinism: thread width never changes the report or CSV bytes") {
    const auto base = load_scenario((kScenarioDir / "martingale_combined.json").string());

    auto run_with = [&](int threads, const std::string& tag) {
        Scenario sc = base;
        sc.exec.n_paths = 2000;
        sc.exec.threads = threads;
        const auto dir = temp_dir("width" + tag);
        ScenarioRunner runner(std::move(sc), dir.string());
        runner.run();
        return dir;
    };
    const auto d1 = run_with(1, "1");
    const auto d4 = run_with(4, "4");
    CHECK(slurp(d1 / "report.json") == slurp(d4 / "report.json"));
    CHECK(slurp(d1 / "martingale.csv") == slurp(d4 / "martingale.csv"));
}

TEST_CASE("identical seeds reproduce identical outputs; different seeds differ") {
    auto run_seeded = [&](std::uint64_t seed, const std::string& tag) {
        Scenario sc = load_scenario((kScenarioDir / "sample_paths.json").string());
        sc.exec.seed = seed;
        const auto dir = temp_dir("seed" + tag);
        ScenarioRunner runner(std::move(sc), dir.string());
        runner.run();
        return dir;
    };
    const auto a = run_seeded(900, "a");
    const auto b = run_seeded(900, "b");
    const auto c = run_seeded(901, "c");
    CHECK(slurp(a / "path_0.csv") == slurp(b / "path_0.csv"));
    CHECK(slurp(a / "path_0.csv") != slurp(c / "path_0.csv"));
}

TEST_CASE("support scan writes the documented CSV schema") {
    // full declared path count: the exact upper-bound threshold in the
    // verdict needs all 10^4 trials
    Scenario sc = load_scenario((kScenarioDir / "support_scan_upward_only.json").string());
    const auto dir = temp_dir("scan");
    ScenarioRunner runner(std::move(sc), dir.string());
    const auto report = runner.run();
    const auto text = slurp(dir / "support_scan.csv");
    CHECK(text.rfind("center_1,radius,t,hits,trials,cp_lower,cp_upper\n", 0) == 0);
    for (const auto& v : report.verdicts)
        if (v.name == "zero_hits_in_excluded_region") CHECK(v.pass);
}

TEST_CASE("consistency experiment emits a JSON residual report") {
    const auto dir = temp_dir("consistency");
    const auto report =
        run_scenario((kScenarioDir / "pide_consistency_keystone.json").string(), dir.string());
    REQUIRE(report.all_pass());
    const auto text = slurp(dir / "consistency.json");
    CHECK(text.find("e3_residuals") != std::string::npos);
}

TEST_CASE("gap decay scenario verdicts: consistent passes, perturbed stays large") {
    Scenario ok = load_scenario((kScenarioDir / "girsanov_consistent.json").string());
    ok.exec.n_paths = 200;
    ok.experiment["dt_levels"] = std::vector<double>{0.0078125, 0.00390625};
    const auto dir_ok = temp_dir("gap_ok");
    ScenarioRunner r1(std::move(ok), dir_ok.string());
    REQUIRE(r1.run().all_pass());

    Scenario bad = load_scenario((kScenarioDir / "girsanov_perturbed.json").string());
    bad.exec.n_paths = 200;
    bad.experiment["dt_levels"] = std::vector<double>{0.0078125, 0.00390625};
    const auto dir_bad = temp_dir("gap_bad");
    ScenarioRunner r2(std::move(bad), dir_bad.string());
    REQUIRE(r2.run().all_pass()); // its verdict asserts the gap is LARGE
}

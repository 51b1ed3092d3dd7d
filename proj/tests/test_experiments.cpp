#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <set>
#include <string>

#include <json.hpp>

#include "r1/experiments.hpp"
#include "r1/serialize.hpp"

using namespace r1;
using nlohmann::json;

namespace {

ExperimentConfig tiny_phase_config() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::PhaseDiagram;
    cfg.n_grid = {4};
    cfg.r_grid = {1};
    cfg.m_grid = {8, 16};
    cfg.trials = 4;
    cfg.seed = 99;
    cfg.record_walltime = false;
    return cfg;
}

}  // namespace

TEST_CASE("matrix exchange format: pinned schema and round trip") {
    Rng rng(3141);
    HermitianMatrix Z(3);
    for (std::size_t i = 0; i < 3; ++i) {
        Z.set(i, i, rng.normal());
        for (std::size_t j = i + 1; j < 3; ++j) Z.set(i, j, rng.complex_normal());
    }
    auto text = matrix_to_json(Z);
    auto doc = json::parse(text);
    CHECK(doc.size() == 3);  // exactly {"n", "re", "im"}
    CHECK(doc["n"].get<int>() == 3);
    CHECK(doc["re"].size() == 3);
    CHECK(doc["re"][0].size() == 3);
    CHECK(doc["im"].size() == 3);
    CHECK(doc["re"][1][2].get<double>() == Z(1, 2).real());

    auto back = matrix_from_json(text);
    CHECK((back - Z).max_abs() < 1e-15);
    CHECK_THROWS_AS(matrix_from_json("{\"n\": 2, \"re\": [[1, 0], [0, 1]]}"), ParseError);
}

TEST_CASE("full-rank determined system: success rate 1.0") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::PhaseDiagram;
    cfg.n_grid = {4};
    cfg.r_grid = {4};
    cfg.m_grid = {16};  // m = n^2
    cfg.trials = 3;
    cfg.seed = 1212;
    cfg.record_walltime = false;
    auto result = run_phase_diagram(cfg);
    for (const auto& rec : result.records) CHECK(rec.success);
}

TEST_CASE("config round trip and validation") {
    auto cfg = config_from_json(R"({
        "kind": "phase_diagram",
        "n": [8, 12], "r": [1, 2], "m": [48, 96],
        "trials": 5, "eta": [0.0], "seed": 7,
        "measurement": "gaussian", "signal": "psd",
        "success_threshold": 1e-3,
        "solver": {"max_iters": 800, "tol_primal": 1e-6}
    })");
    CHECK(cfg.n_grid == std::vector<int>{8, 12});
    CHECK(cfg.solver.max_iters == 800);
    CHECK(cfg.solver.tol_primal == 1e-6);
    CHECK(cfg.solver.tol_dual == 1e-7);  // default preserved

    auto back = config_from_json(config_to_json(cfg));
    CHECK(back.n_grid == cfg.n_grid);
    CHECK(back.seed == cfg.seed);

    CHECK_THROWS_AS(config_from_json("{\"kind\": \"bogus\"}"), ParseError);
    CHECK_THROWS_AS(config_from_json("{\"n\": [4], \"r\": [5], \"m\": [8]}"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("{\"trials\": 0}"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("{\"measurement\": \"design\"}"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("not json"), ParseError);
}

TEST_CASE("trial seeds are deterministic and well separated") {
    CHECK(trial_seed(1, 8, 1, 48, 0) == trial_seed(1, 8, 1, 48, 0));
    std::set<std::uint64_t> seen;
    for (int n : {4, 8})
        for (int r : {1, 2})
            for (int m : {16, 32})
                for (int trial = 0; trial < 8; ++trial) seen.insert(trial_seed(5, n, r, m, trial));
    CHECK(seen.size() == 2u * 2u * 2u * 8u);
    CHECK(trial_seed(1, 8, 1, 48, 0) != trial_seed(2, 8, 1, 48, 0));
}

TEST_CASE("phase diagram: schema, determinism, determined-regime success") {
    auto cfg = tiny_phase_config();
    auto first = run_phase_diagram(cfg);
    auto second = run_phase_diagram(cfg);

    CHECK(first.csv == second.csv);  // byte identical under a fixed seed
    CHECK(first.csv.rfind("n,r,m,eta,seed,trial,rel_error,success,iterations,wall_ms\n", 0) == 0);
    CHECK(first.records.size() == 8);
    CHECK(first.diagnostics.size() == 8);

    // m = n^2 = 16 is a determined system: recovery succeeds on every trial
    int successes = 0;
    for (const auto& rec : first.records)
        if (rec.m == 16 && rec.success) ++successes;
    CHECK(successes == 4);

    auto summary = json::parse(first.summary_json);
    CHECK(summary["cells"].size() == 2);
    CHECK(summary.contains("monotone_in_m"));

    // walltime recording only changes the final column
    auto timed_cfg = cfg;
    timed_cfg.record_walltime = true;
    auto timed = run_phase_diagram(timed_cfg);
    CHECK(timed.records.size() == first.records.size());
    for (std::size_t i = 0; i < first.records.size(); ++i) {
        CHECK(first.records[i].rel_error == timed.records[i].rel_error);
        CHECK(first.records[i].wall_ms == 0.0);
    }
}

TEST_CASE("noise sweep: row layout, ratios, assertions") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::NoiseSweep;
    cfg.n_grid = {6};
    cfg.r_grid = {1};
    cfg.m_grid = {36};
    cfg.trials = 3;
    cfg.eta_list = {1e-3, 1e-2, 1e-1};
    cfg.seed = 33;
    cfg.record_walltime = false;
    auto result = run_noise_sweep(cfg);

    CHECK(result.records.size() == 9);
    for (const auto& rec : result.records) CHECK(rec.rel_error >= 0.0);

    auto summary = json::parse(result.summary_json);
    CHECK(summary["per_eta"].size() == 3);
    CHECK(summary.contains("median_ratio_span"));
    CHECK(summary["median_monotone_in_eta"].get<bool>());
    CHECK(result.all_pass);
}

TEST_CASE("tomography: renormalized PSD trace-one estimates") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Tomography;
    cfg.n_grid = {4};
    cfg.r_grid = {1};
    cfg.m_grid = {16};  // determined system
    cfg.trials = 3;
    cfg.seed = 21;
    cfg.record_walltime = false;
    auto result = run_tomography(cfg);

    for (const auto& diag : result.diagnostics) {
        CHECK(diag.trace_error <= 1e-9);
        CHECK(diag.min_eigenvalue >= -1e-9);
        CHECK(diag.fidelity <= 1.0 + 1e-9);
        CHECK(diag.fidelity >= 0.99);  // determined regime
    }
    for (const auto& rec : result.records) CHECK(rec.success);

    auto summary = json::parse(result.summary_json);
    CHECK(summary["cells"][0].contains("min_fidelity"));
}

TEST_CASE("design report: orders, hierarchy rows, usable tight frame") {
    Rng rng(4);
    auto d = construct_weighted_design(2, 4, 2000, rng, 1e-8);
    const std::string path = "test_report_design.json";
    save_design(d, path, 4, design_moment_gap(d, 4, std::numeric_limits<double>::infinity()));

    auto report = json::parse(run_design_report(path, 4));
    CHECK(report["orders"].size() == 4);
    for (const auto& row : report["orders"]) {
        CHECK(row["theta_inf"].get<double>() <= 1e-8);
        CHECK(row["ordering_ok"].get<bool>());
    }
    CHECK(report["tight_frame_gap"].get<double>() <= 1.0 / 2.0);
    CHECK(report["tight_frame_usable"].get<bool>());
    CHECK(report["all_pass"].get<bool>());
    std::remove(path.c_str());

    CHECK_THROWS_AS(run_design_report("missing_file.json", 4), std::runtime_error);
}

TEST_CASE("verify suite (quick): report schema and content") {
    VerifyOptions options;
    options.quick = true;
    auto result = run_verify_suite(options);

    auto parsed = json::parse(result.json);
    CHECK(parsed.contains("seed"));
    CHECK(parsed.contains("all_pass"));
    REQUIRE(parsed.contains("checks"));
    std::set<std::string> names;
    for (const auto& check : parsed["checks"]) {
        for (const char* key : {"quantity", "estimate", "stderr", "bound", "bound_source", "pass"})
            CHECK(check.contains(key));
        names.insert(check["quantity"].get<std::string>());
    }
    // the brute-force oracle section is present for both dimensions
    CHECK(names.count("sym_moment_vs_tensor_n2") == 1);
    CHECK(names.count("sym_moment_vs_tensor_n3") == 1);
    CHECK(names.count("descent_cone_nuclear_bound") == 1);
    CHECK(result.all_pass);
}

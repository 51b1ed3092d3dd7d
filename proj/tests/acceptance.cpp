// Acceptance suite: one pass/fail line per criterion, exit code 0 iff all
// pass.  Every tolerance and trial count is pinned here; the master seeds
// are fixed so reruns are bit-reproducible.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "r1/designs.hpp"
#include "r1/experiments.hpp"
#include "r1/serialize.hpp"

using namespace r1;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRecoverySeed = 761823;
constexpr std::uint64_t kVerifySeed = 45085;

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string format(const char* fmt, ...) {
    char buffer[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof(buffer), fmt, args);
    va_end(args);
    return buffer;
}

// minimality + feasibility witnesses over the converged noiseless trials
struct WitnessScan {
    int converged = 0;
    int violations = 0;
    void absorb_diag(const TrialDiagnostics& diag) {
        if (diag.status != SolverStatus::Converged) return;
        ++converged;
        bool minimality = diag.objective <= diag.truth_objective + 1e-6;
        bool feasibility = diag.feasibility_gap <= 1e-7 * (1.0 + diag.b_norm);
        if (!minimality || !feasibility) ++violations;
    }
    void absorb(const ExperimentResult& result) {
        for (const auto& diag : result.diagnostics) absorb_diag(diag);
    }
};

WitnessScan witness;

double cell_rate(const ExperimentResult& result, int m) {
    int total = 0, good = 0;
    for (const auto& rec : result.records) {
        if (rec.m != m) continue;
        ++total;
        if (rec.success) ++good;
    }
    return total ? static_cast<double>(good) / total : 0.0;
}

bool group_pass(const std::vector<CheckReport>& checks, const char* prefix, std::string& detail) {
    bool ok = true;
    int count = 0;
    for (const auto& c : checks) {
        if (c.quantity.rfind(prefix, 0) != 0) continue;
        ++count;
        ok = ok && c.pass;
        if (!c.pass) detail += " " + c.quantity;
    }
    return ok && count > 0;
}

}  // namespace

int main() {
    const auto temp_dir = std::filesystem::temp_directory_path();
    Timer total;

    // ---- criterion 1: exact recovery, Gaussian rank-one, m = 6 r n ------
    {
        Timer t;
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::PhaseDiagram;
        cfg.n_grid = {16};
        cfg.r_grid = {1, 2, 3};
        cfg.m_grid = {96, 192, 288};
        cfg.trials = 50;
        cfg.seed = kRecoverySeed;
        cfg.signal = "psd";
        cfg.record_walltime = false;
        auto result = run_phase_diagram(cfg);

        bool pass = true;
        std::string rates;
        for (int r : {1, 2, 3}) {
            int m = 6 * r * 16;
            int total_cell = 0, good = 0;
            for (std::size_t i = 0; i < result.records.size(); ++i) {
                const auto& rec = result.records[i];
                if (rec.r != r || rec.m != m) continue;
                ++total_cell;
                if (rec.success) ++good;
            }
            double rate = static_cast<double>(good) / total_cell;
            pass = pass && rate >= 0.9;
            rates += format(" r=%d:%.2f", r, rate);
        }
        // the diagonal cells m = 6 r n carry witnesses for criterion 10
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            if (result.records[i].m != 6 * result.records[i].r * 16) continue;
            witness.absorb_diag(result.diagnostics[i]);
        }
        report(1, pass,
               format("Gaussian exact recovery n=16, m=6rn, 50 trials/cell ->%s (%.0fs)",
                      rates.c_str(), t.seconds()));
    }

    // ---- criterion 2: PSD/tomography variant ----------------------------
    {
        Timer t;
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::Tomography;
        cfg.n_grid = {8};
        cfg.r_grid = {1};
        cfg.m_grid = {48};
        cfg.trials = 50;
        cfg.seed = kRecoverySeed + 1;
        cfg.record_walltime = false;
        auto result = run_tomography(cfg);

        double rate = cell_rate(result, 48);
        bool structure_ok = true;
        for (const auto& diag : result.diagnostics)
            structure_ok = structure_ok && diag.min_eigenvalue >= -1e-9 && diag.trace_error <= 1e-9;
        witness.absorb(result);
        report(2, rate >= 0.9 && structure_ok,
               format("pure-state tomography n=8, m=48 -> rate %.2f, PSD/trace-1 %s (%.0fs)", rate,
                      structure_ok ? "ok" : "VIOLATED", t.seconds()));
    }

    // ---- criterion 3: noise robustness ----------------------------------
    {
        Timer t;
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::NoiseSweep;
        cfg.n_grid = {12};
        cfg.r_grid = {2};
        cfg.m_grid = {192};  // 8 r n
        cfg.trials = 25;
        cfg.eta_list = {1e-3, 1e-2, 1e-1};
        cfg.seed = kRecoverySeed + 2;
        cfg.record_walltime = false;
        auto result = run_noise_sweep(cfg);
        report(3, result.all_pass,
               format("noise sweep n=12, r=2, m=192, eta in {1e-3,1e-2,1e-1}: "
                      "median ratio span < 4 and monotone medians -> %s (%.0fs)",
                      result.all_pass ? "ok" : "VIOLATED", t.seconds()));
    }

    // ---- criterion 4: design construction + certification ---------------
    {
        Timer t;
        bool pass = true;
        std::string detail;
        Rng rng2(kRecoverySeed + 3);
        auto design2 = construct_weighted_design(2, 4, 2000, rng2, 1e-8);
        Rng rng3(kRecoverySeed + 4);
        auto design3 = construct_weighted_design(3, 4, 10000, rng3, 1e-8);
        for (const auto* dp : {&design2, &design3}) {
            const auto& d = *dp;
            double tf = certify(d, 1).tight_frame_gap;
            pass = pass && tf <= 1e-10;
            double worst_theta = 0.0;
            bool ordering = true;
            for (int k = 1; k <= 4; ++k) {
                auto cert = certify(d, k);
                worst_theta = std::max(worst_theta, cert.theta_inf);
                double nk = std::pow(static_cast<double>(d.dim), k);
                ordering = ordering && cert.theta_inf <= cert.theta_1 + 1e-9 &&
                           cert.theta_1 <= nk * cert.theta_inf + 1e-9;
            }
            pass = pass && worst_theta <= 1e-8 && ordering;
            detail += format(" n=%zu: theta<=%.1e tf=%.1e N=%zu;", d.dim, worst_theta, tf, d.count());
        }
        report(4, pass, format("weighted 4-designs,%s ordering ok (%.0fs)", detail.c_str(), t.seconds()));
    }

    // ---- criterion 5: recovery from 4-design measurements ---------------
    {
        Timer t;
        Rng rng4(kRecoverySeed + 5);
        auto design4 = construct_weighted_design(4, 4, 4000, rng4, 1e-8);
        const auto design_path = (temp_dir / "r1_acceptance_design_n4.json").string();
        save_design(design4, design_path, kRecoverySeed + 5, design_moment_gap(design4, 4, kInf));

        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::PhaseDiagram;
        cfg.n_grid = {4};
        cfg.r_grid = {1};
        cfg.m_grid = {80};
        cfg.trials = 50;
        cfg.seed = kRecoverySeed + 6;
        cfg.measurement = "design";
        cfg.design_file = design_path;
        cfg.signal = "hermitian";
        cfg.record_walltime = false;
        auto result = run_phase_diagram(cfg);
        witness.absorb(result);
        std::filesystem::remove(design_path);

        double rate = cell_rate(result, 80);
        report(5, rate >= 0.9,
               format("recovery from exact weighted 4-design n=4, m=80 -> rate %.2f (%.0fs)", rate,
                      t.seconds()));
    }

    // ---- criteria 6-9: verification registry at pinned counts -----------
    {
        Timer t;
        std::string detail;
        auto gaussian_checks = verify_gaussian_moments(kVerifySeed, 100000);
        auto oracle_checks = verify_sym_moment_oracle(kVerifySeed, 50);
        auto identity_checks = verify_moment_identities(kVerifySeed, 100000, 20);
        bool pass6 = group_pass(gaussian_checks, "gaussian_moment", detail) &&
                     group_pass(oracle_checks, "sym_moment_vs_tensor", detail);
        bool s2_ok = true;
        for (const auto& c : identity_checks)
            if (c.quantity.rfind("moment_identity_s2", 0) == 0) s2_ok = s2_ok && c.pass;
        pass6 = pass6 && s2_ok;
        report(6, pass6,
               format("moment identities: cycle-index oracle (50 Z), E S^2 = tr(Z)^2+1 (3 sigma), "
                      "E|Z|^{2k} = k!%s (%.0fs)",
                      detail.c_str(), t.seconds()));
    }
    {
        Timer t;
        std::string detail;
        auto checks = verify_small_ball(kVerifySeed, 100000, 20);
        bool pass7 = group_pass(checks, "qbound", detail);
        report(7, pass7,
               format("small-ball bounds: Q >= 1/96 (complex), 1/108 (real), (1-xi^2)^2/24 "
                      "(4-designs)%s (%.0fs)",
                      detail.c_str(), t.seconds()));
    }
    {
        Timer t;
        auto check = verify_descent_cone(kVerifySeed, 100, 100);
        report(8, check.pass,
               format("descent cone ||Y||_1 <= 2 sqrt(r): worst ratio %.6f of the cap, zero "
                      "violations (%.0fs)",
                      check.estimate, t.seconds()));
    }
    {
        Timer t;
        std::string detail;
        auto checks = verify_chernoff_width(kVerifySeed, 200);
        bool pass9 = group_pass(checks, "chernoff", detail) && group_pass(checks, "width", detail);
        report(9, pass9,
               format("matrix Chernoff / width constants: ||sum a a^*|| <= 3.4084 m, "
                      "||H|| <= 3.1049 sqrt(n log 2n)%s (%.0fs)",
                      detail.c_str(), t.seconds()));
    }

    // ---- criterion 10: solver witnesses over criteria 1, 2, 5 -----------
    report(10, witness.violations == 0 && witness.converged > 0,
           format("minimality & feasibility witnesses: %d converged noiseless instances, "
                  "%d violations",
                  witness.converged, witness.violations));

    std::printf("%s: %d criterion(s) failed, total %.0fs\n", failures == 0 ? "ACCEPTED" : "REJECTED",
                failures, total.seconds());
    return failures == 0 ? 0 : 1;
}

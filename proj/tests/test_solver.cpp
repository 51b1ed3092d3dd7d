#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "r1/ensembles.hpp"
#include "r1/solver.hpp"

using namespace r1;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// nuclear norm of a 2x2 Hermitian matrix in closed form
double nuclear_2x2(const HermitianMatrix& Z) {
    double a = Z(0, 0).real(), b = Z(1, 1).real();
    double mid = 0.5 * (a + b);
    double rad = std::sqrt(0.25 * (a - b) * (a - b) + std::norm(Z(0, 1)));
    return std::abs(mid + rad) + std::abs(mid - rad);
}

}  // namespace

TEST_CASE("determined regime: m = n^2 spanning measurements recover exactly") {
    Rng rng(808);
    const std::size_t n = 3;
    auto X = random_low_rank(n, 2, true, rng);
    auto e = sample_gaussian(n, n * n, Field::Complex, rng);
    auto b = apply(e, X.matrix);

    SolverConfig config;
    config.tol_primal = 1e-10;
    config.tol_dual = 1e-10;
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    auto result = solve(problem, config);

    CHECK(result.status == SolverStatus::Converged);
    CHECK((result.X_hat - X.matrix).frobenius_norm() <= 1e-8);
}

TEST_CASE("noiseless rank-one recovery at n=8, m=48") {
    Rng rng(1618);
    auto X = random_low_rank(8, 1, true, rng);
    auto e = sample_gaussian(8, 48, Field::Complex, rng);
    auto b = apply(e, X.matrix);
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    auto result = solve(problem);
    auto report = certify(result, problem, &X.matrix);

    CHECK(result.status == SolverStatus::Converged);
    CHECK(report.relative_error <= 1e-3);
    // minimality witness: the truth is feasible, so the minimizer cannot beat it by much
    CHECK(report.objective <= report.truth_objective + 1e-6);
    CHECK(report.feasibility_gap <= 1e-7 * (1.0 + vector_norm(b)));
}

TEST_CASE("zero data yields the zero matrix") {
    Rng rng(2);
    auto e = sample_gaussian(4, 10, Field::Complex, rng);
    std::vector<double> b(10, 0.0);
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    auto result = solve(problem);
    CHECK(result.status == SolverStatus::Converged);
    CHECK(result.X_hat.max_abs() <= 1e-9);
    CHECK(result.objective <= 1e-9);
}

TEST_CASE("objective matches a brute-force scan of the feasible slice (n=2, m=3)") {
    Rng rng(5870);
    const std::size_t n = 2, m = 3, d = 4;
    auto X = random_low_rank(n, 1, true, rng);
    auto e = sample_gaussian(n, m, Field::Complex, rng);
    auto b = apply(e, X.matrix);

    // real-vectorized measurement rows
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < m; ++j)
        rows.push_back(to_real_vec(HermitianMatrix::outer(e.vectors[j], e.matrix_scale)));

    // orthonormalize the rows, then find the null direction of the span
    std::vector<std::vector<double>> ortho;
    for (auto row : rows) {
        for (const auto& q : ortho) {
            double proj = 0.0;
            for (std::size_t i = 0; i < d; ++i) proj += q[i] * row[i];
            for (std::size_t i = 0; i < d; ++i) row[i] -= proj * q[i];
        }
        double norm = vector_norm(row);
        if (norm > 1e-10) {
            for (auto& v : row) v /= norm;
            ortho.push_back(row);
        }
    }
    REQUIRE(ortho.size() == m);
    std::vector<double> null_dir;
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<double> candidate(d, 0.0);
        candidate[axis] = 1.0;
        for (const auto& q : ortho) {
            double proj = 0.0;
            for (std::size_t i = 0; i < d; ++i) proj += q[i] * candidate[i];
            for (std::size_t i = 0; i < d; ++i) candidate[i] -= proj * q[i];
        }
        double residual_norm = vector_norm(candidate);
        if (residual_norm > 0.3) {
            for (auto& v : candidate) v /= residual_norm;
            null_dir = candidate;
            break;
        }
    }
    REQUIRE(!null_dir.empty());
    HermitianMatrix K = from_real_vec(n, null_dir);

    // brute-force minimum of ||X + t K||_1 along the feasible line
    double best = kInf;
    for (double t = -4.0; t <= 4.0; t += 1e-4)
        best = std::min(best, nuclear_2x2(X.matrix + K * t));

    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    SolverConfig config;
    config.tol_primal = 1e-9;
    config.tol_dual = 1e-9;
    auto result = solve(problem, config);
    CHECK(result.status == SolverStatus::Converged);
    CHECK(result.objective == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("psd trace mode returns a PSD matrix and recovers pure states") {
    Rng rng(305);
    auto X = random_low_rank(6, 1, true, rng);
    auto e = sample_gaussian(6, 36, Field::Complex, rng);
    auto b = apply(e, X.matrix);
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::PsdTrace};
    auto result = solve(problem);
    auto report = certify(result, problem, &X.matrix);

    CHECK(result.status == SolverStatus::Converged);
    CHECK(report.relative_error <= 1e-3);
    auto eig = eigh(result.X_hat);
    CHECK(eig.eigenvalues.back() >= -1e-9);
    CHECK(report.objective <= report.truth_objective + 1e-6);
}

TEST_CASE("contradictory measurements are reported infeasible") {
    Rng rng(17);
    const std::size_t n = 2, m = 8;
    auto e = sample_gaussian(n, m, Field::Complex, rng);
    // m > n^2: a generic b is far outside the range of the operator
    std::vector<double> b(m);
    for (std::size_t j = 0; j < m; ++j) b[j] = (j % 2 == 0) ? 25.0 : -25.0;
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    auto result = solve(problem);
    CHECK(result.status == SolverStatus::Infeasible);
    CHECK(result.feasibility_gap > 1.0);
}

TEST_CASE("noisy recovery: feasibility, reporting, monotone error in eta") {
    Rng rng(906);
    const std::size_t n = 6, m = 36;
    auto X = random_low_rank(n, 1, true, rng);
    auto e = sample_gaussian(n, m, Field::Complex, rng);
    auto b0 = apply(e, X.matrix);

    std::vector<double> direction(m);
    for (auto& v : direction) v = rng.normal();
    double dn = vector_norm(direction);
    for (auto& v : direction) v /= dn;

    double previous_err = -1.0;
    for (double eta : {0.0, 1e-3, 1e-2, 1e-1}) {
        auto b = b0;
        for (std::size_t j = 0; j < m; ++j) b[j] += eta * direction[j];
        RecoveryProblem problem{e, b, eta, RecoveryMode::Nuclear};
        auto result = solve(problem);
        auto report = certify(result, problem, &X.matrix);

        CHECK(result.status == SolverStatus::Converged);
        CHECK(report.feasibility_gap <= 1e-7 * (1.0 + vector_norm(b)));
        if (eta > 0.0) {
            CHECK(report.ratio_valid);
            CHECK(std::isfinite(report.error_ratio));
        } else {
            CHECK(!report.ratio_valid);
        }
        CHECK(report.absolute_error >= previous_err * 0.999);  // monotone along scaled noise
        previous_err = report.absolute_error;
    }
}

TEST_CASE("solver config validation") {
    Rng rng(1);
    auto e = sample_gaussian(2, 4, Field::Complex, rng);
    std::vector<double> b(4, 0.0);
    RecoveryProblem problem{e, b, 0.0, RecoveryMode::Nuclear};
    SolverConfig config;
    config.tol_primal = 0.0;
    CHECK_THROWS_AS(solve(problem, config), std::invalid_argument);

    std::vector<double> wrong(3, 0.0);
    RecoveryProblem bad{e, wrong, 0.0, RecoveryMode::Nuclear};
    CHECK_THROWS_AS(solve(bad), std::invalid_argument);

    RecoveryProblem neg{e, b, -1.0, RecoveryMode::Nuclear};
    CHECK_THROWS_AS(solve(neg), std::invalid_argument);
}

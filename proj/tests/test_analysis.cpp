#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "r1/analysis.hpp"
#include "r1/designs.hpp"
#include "r1/ensembles.hpp"
#include "r1/solver.hpp"
#include "r1/tensor.hpp"

using namespace r1;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HermitianMatrix random_unit_hermitian(std::size_t n, Rng& rng) {
    HermitianMatrix Z(n);
    for (std::size_t i = 0; i < n; ++i) {
        Z.set(i, i, rng.normal());
        for (std::size_t j = i + 1; j < n; ++j) Z.set(i, j, rng.complex_normal());
    }
    Z *= 1.0 / Z.frobenius_norm();
    return Z;
}

const WeightedDesign& exact_design_n2() {
    static WeightedDesign d = [] {
        Rng rng(2718);
        return construct_weighted_design(2, 4, 2000, rng, 1e-8);
    }();
    return d;
}

}  // namespace

TEST_CASE("gaussian_moment_check references k!") {
    Rng rng(100);
    for (int k = 1; k <= 4; ++k) {
        auto [mean, reference] = gaussian_moment_check(k, 50000, rng);
        double expected = 1.0;
        for (int i = 2; i <= k; ++i) expected *= i;
        CHECK(reference == expected);
        // generous envelope; the verify suite asserts the 3-sigma version
        CHECK(std::abs(mean - reference) / reference < 0.2);
    }
    CHECK_THROWS_AS(gaussian_moment_check(5, 10, rng), std::invalid_argument);
}

TEST_CASE("second-moment references: traceless and maximally mixed directions") {
    // tr(Z) = 0 implies reference E S^2 = 1
    HermitianMatrix traceless(2);
    traceless.set(0, 0, 0.5);
    traceless.set(1, 1, -0.5);
    traceless.set(0, 1, complexd(0.5, 0.0));
    traceless *= 1.0 / traceless.frobenius_norm();
    CHECK(reference_second_moment(traceless) == doctest::Approx(1.0).epsilon(1e-12));

    // Z = id/sqrt(n): reference = n + 1
    for (std::size_t n : {std::size_t{2}, std::size_t{3}, std::size_t{5}}) {
        auto Z = HermitianMatrix::identity(n) * (1.0 / std::sqrt(static_cast<double>(n)));
        CHECK(reference_second_moment(Z) ==
              doctest::Approx(static_cast<double>(n) + 1.0).epsilon(1e-12));
    }
}

TEST_CASE("moment_identity_check: design source matches closed forms") {
    const auto& d = exact_design_n2();
    auto sampler = RankOneSampler::design(d);
    Rng rng(41);
    auto Z = random_unit_hermitian(2, rng);
    auto report = moment_identity_check(sampler, Z, 60000, rng);

    CHECK(std::abs(report.s2_mean - report.s2_reference) <= 4.0 * report.s2_stderr);
    CHECK(std::abs(report.s4_mean - report.s4_reference) <= 5.0 * report.s4_stderr);
    CHECK(report.s2_reference == doctest::Approx(sym_moment(Z, 2)).epsilon(1e-12));
    const double n = 2.0;
    CHECK(report.s4_reference ==
          doctest::Approx((n + 1.0) * n / ((n + 3.0) * (n + 2.0)) * sym_moment(Z, 4)).epsilon(1e-12));
}

TEST_CASE("moment_identity_check: gaussian fourth-moment cap") {
    Rng rng(43);
    auto sampler = RankOneSampler::gaussian_complex(4);
    for (int trial = 0; trial < 3; ++trial) {
        auto Z = random_unit_hermitian(4, rng);
        auto report = moment_identity_check(sampler, Z, 40000, rng);
        CHECK(report.fourth_moment_ratio_ok);
        CHECK(report.s4_reference <= 24.0 * report.s2_reference * report.s2_reference * (1.0 + 1e-9));
    }
}

TEST_CASE("empirical_Q honors the paper bounds at pinned seeds") {
    Rng rng(4096);
    {
        auto sampler = RankOneSampler::gaussian_complex(6);
        auto Z = random_unit_hermitian(6, rng);
        auto est = empirical_Q(sampler, Z, 1.0 / std::sqrt(2.0), 20000, rng);
        CHECK(est.q_hat + 3.0 * est.stderr_ >= 1.0 / 96.0);
        CHECK(est.stderr_ == doctest::Approx(std::sqrt(est.q_hat * (1 - est.q_hat) / 20000.0)));
    }
    {
        auto sampler = RankOneSampler::gaussian_real(6);
        HermitianMatrix Z(6);
        Rng rng_r(11);
        for (std::size_t i = 0; i < 6; ++i) {
            Z.set(i, i, rng_r.normal());
            for (std::size_t j = i + 1; j < 6; ++j) Z.set(i, j, complexd(rng_r.normal(), 0.0));
        }
        Z *= 1.0 / Z.frobenius_norm();
        auto est = empirical_Q(sampler, Z, 1.0, 20000, rng);
        CHECK(est.q_hat + 3.0 * est.stderr_ >= 1.0 / 108.0);
    }
    {
        auto sampler = RankOneSampler::design(exact_design_n2());
        auto Z = random_unit_hermitian(2, rng);
        auto est = empirical_Q(sampler, Z, 0.5, 20000, rng);
        CHECK(est.q_hat + 3.0 * est.stderr_ >= (1.0 - 0.25) * (1.0 - 0.25) / 24.0);
    }
    CHECK_THROWS_AS(empirical_Q(RankOneSampler::gaussian_complex(2), HermitianMatrix::identity(2),
                                -0.5, 10, rng),
                    std::invalid_argument);
}

TEST_CASE("rademacher_H: single atom, Hermiticity, triangle bound, sign symmetry") {
    Rng rng(5);
    auto d = exact_design_n2();
    auto e1 = sample_from_design(d, 1, rng);
    auto H1 = rademacher_H(e1, rng);
    // rank one, norm = scale * ||a||^2 = sqrt((n+1)n) exactly
    CHECK(schatten_norm(H1, kInf) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-10));

    auto e = sample_gaussian(4, 12, Field::Complex, rng);
    double cap = 0.0;
    for (const auto& a : e.vectors) {
        double norm2 = 0.0;
        for (const auto& v : a) norm2 += std::norm(v);
        cap += norm2;
    }
    cap /= std::sqrt(12.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto H = rademacher_H(e, rng);
        CHECK(schatten_norm(H, kInf) <= cap * (1.0 + 1e-12));
    }

    // averaging over all 2^m sign patterns gives the zero matrix
    auto es = sample_gaussian(3, 8, Field::Complex, rng);
    HermitianMatrix total(3);
    for (unsigned pattern = 0; pattern < 256u; ++pattern) {
        HermitianMatrix H(3);
        for (std::size_t j = 0; j < 8; ++j) {
            double sign = (pattern >> j) & 1u ? 1.0 : -1.0;
            H.add_outer(es.vectors[j], sign * es.matrix_scale / std::sqrt(8.0));
        }
        total += H;
    }
    total *= 1.0 / 256.0;
    CHECK(total.max_abs() <= 1e-12);
}

TEST_CASE("empirical_W_bound: design assertion and gaussian report") {
    Rng rng(606);
    auto d = exact_design_n2();
    auto wb = empirical_W_bound(2, 1, 4, RankOneSampler::design(d), 100, rng);
    CHECK(wb.bound == doctest::Approx(3.1049 * std::sqrt(2.0 * std::log(4.0))));
    CHECK(wb.bound_asserted);  // m = 4 >= 2n log n = 2.77
    CHECK(wb.pass);
    CHECK(wb.w_m_estimate == doctest::Approx(2.0 * wb.mean_h_norm));

    auto gb = empirical_W_bound(16, 1, 64, RankOneSampler::gaussian_complex(16), 30, rng);
    CHECK(!gb.bound_asserted);
    CHECK(gb.gaussian_constant > 0.0);
    CHECK(gb.pass);
}

TEST_CASE("chernoff_sum_check: constants and exact atom norms") {
    Rng rng(707);
    auto d = exact_design_n2();
    auto report = chernoff_sum_check(d, 6, 300, rng);
    CHECK(report.precondition_met);
    CHECK(report.atom_norm_expected == doctest::Approx(std::sqrt(6.0)));
    CHECK(std::abs(report.atom_norm_max - report.atom_norm_expected) <= 1e-9);
    CHECK(report.mean_sum_norm <= 3.4084 * 6.0 + 3.0 * report.stderr_);
    CHECK(report.frame_gap <= report.frame_gap_3sigma);
    CHECK(report.pass);
}

TEST_CASE("descent directions: witnesses, trivial member, nuclear bound") {
    Rng rng(808);
    for (int r : {1, 2, 3}) {
        auto X = random_low_rank(10, r, false, rng);
        auto sample = sample_descent_directions(X, 40, rng);
        REQUIRE(sample.directions.size() == 40);

        // first direction is -X normalized
        auto neg = X.matrix * (-1.0 / X.matrix.frobenius_norm());
        CHECK((sample.directions[0] - neg).max_abs() < 1e-12);

        const double base = schatten_norm(X.matrix, 1.0);
        const double cap = 2.0 * std::sqrt(static_cast<double>(r));
        for (std::size_t i = 0; i < sample.directions.size(); ++i) {
            const auto& Y = sample.directions[i];
            CHECK(Y.frobenius_norm() == doctest::Approx(1.0).epsilon(1e-9));
            double tau = sample.witness_tau[i];
            CHECK(tau > 0.0);
            CHECK(schatten_norm(X.matrix + Y * tau, 1.0) <= base + 1e-9);
            CHECK(schatten_norm(Y, 1.0) <= cap + 1e-9);
        }
    }
}

TEST_CASE("empirical_min_conic_singular: definition at m=1 and homogeneity") {
    Rng rng(909);
    auto X = random_low_rank(5, 1, true, rng);
    auto sample = sample_descent_directions(X, 20, rng);

    auto e1 = sample_gaussian(5, 1, Field::Complex, rng);
    double value = empirical_min_conic_singular(e1, sample);
    double oracle = kInf;
    for (const auto& Y : sample.directions)
        oracle = std::min(oracle, std::abs(apply(e1, Y)[0]));
    CHECK(value == doctest::Approx(oracle).epsilon(1e-12));

    auto e = sample_gaussian(5, 12, Field::Complex, rng);
    auto doubled = e;
    const double rt2 = std::sqrt(2.0);
    for (auto& a : doubled.vectors)
        for (auto& v : a) v *= rt2;
    CHECK(empirical_min_conic_singular(doubled, sample) ==
          doctest::Approx(2.0 * empirical_min_conic_singular(e, sample)).epsilon(1e-12));
}

TEST_CASE("error-bound consistency on noisy recoveries") {
    // || X - X_hat ||_2 * || A(Y_hat) ||_2 <= 2 eta (1 + tol), Y_hat the unit error direction
    Rng rng(1010);
    for (int trial = 0; trial < 3; ++trial) {
        auto X = random_low_rank(6, 1, true, rng);
        auto e = sample_gaussian(6, 36, Field::Complex, rng);
        auto b0 = apply(e, X.matrix);
        const double eta = 1e-2;
        auto noisy = add_noise(b0, eta, rng);
        RecoveryProblem problem{e, noisy.b, eta, RecoveryMode::Nuclear};
        auto result = solve(problem);
        REQUIRE(result.status == SolverStatus::Converged);

        HermitianMatrix diff = result.X_hat - X.matrix;
        double err = diff.frobenius_norm();
        if (err < 1e-12) continue;
        diff *= 1.0 / err;
        double a_dir = vector_norm(apply(e, diff));
        CHECK(err * a_dir <= 2.0 * eta * (1.0 + 1e-6) + 2.0 * result.feasibility_gap);
    }
}

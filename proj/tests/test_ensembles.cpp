#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "r1/ensembles.hpp"
#include "r1/serialize.hpp"

using namespace r1;

namespace {

WeightedDesign two_atom_design() {
    WeightedDesign d;
    d.dim = 2;
    d.order = 1;
    d.vectors.push_back({complexd(1.0, 0.0), complexd(0.0, 0.0)});
    d.vectors.push_back({complexd(0.0, 0.0), complexd(1.0, 0.0)});
    d.weights = {0.75, 0.25};
    return d;
}

}  // namespace

TEST_CASE("sample_gaussian: moment sanity and determinism") {
    const std::size_t n = 6;
    const std::size_t m = 10000;
    Rng rng(321);
    auto e = sample_gaussian(n, m, Field::Complex, rng);
    CHECK(e.count() == m);
    CHECK(e.matrix_scale == 1.0);

    // E ||a_j||^2 = n within 3 sigma (per-entry variance of |a_i|^2 is 1)
    double mean_norm2 = 0.0;
    for (const auto& a : e.vectors) {
        double s = 0.0;
        for (const auto& v : a) s += std::norm(v);
        mean_norm2 += s;
    }
    mean_norm2 /= static_cast<double>(m);
    double sigma = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    CHECK(std::abs(mean_norm2 - static_cast<double>(n)) <= 3.0 * sigma);

    // E |<u, a>|^2 = 1 for a fixed unit u
    std::vector<complexd> u(n, 0.0);
    u[0] = complexd(0.6, 0.0);
    u[2] = complexd(0.0, 0.8);
    double mean_proj = 0.0;
    for (const auto& a : e.vectors) {
        complexd dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(u[i]) * a[i];
        mean_proj += std::norm(dot);
    }
    mean_proj /= static_cast<double>(m);
    CHECK(std::abs(mean_proj - 1.0) <= 3.0 / std::sqrt(static_cast<double>(m)));

    // equal seeds give identical ensembles
    Rng rng_a(99), rng_b(99);
    auto ea = sample_gaussian(3, 5, Field::Complex, rng_a);
    auto eb = sample_gaussian(3, 5, Field::Complex, rng_b);
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 3; ++i) CHECK(ea.vectors[j][i] == eb.vectors[j][i]);

    // real field: purely real entries, unit variance
    Rng rng_r(17);
    auto er = sample_gaussian(4, 5000, Field::Real, rng_r);
    double var = 0.0;
    for (const auto& a : er.vectors)
        for (const auto& v : a) {
            CHECK(v.imag() == 0.0);
            var += v.real() * v.real();
        }
    var /= 4.0 * 5000.0;
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("sample_from_design: atom frequencies and scale") {
    auto d = two_atom_design();
    Rng rng(777);

    // degenerate design: every draw is e1
    WeightedDesign point;
    point.dim = 2;
    point.order = 1;
    point.vectors.push_back({complexd(1.0, 0.0), complexd(0.0, 0.0)});
    point.weights = {1.0};
    auto ep = sample_from_design(point, 100, rng);
    for (const auto& a : ep.vectors) {
        CHECK(a[0] == complexd(1.0, 0.0));
        CHECK(a[1] == complexd(0.0, 0.0));
    }

    // (3/4, 1/4) frequencies within 3 sigma binomial at 1e5 draws
    auto e = sample_from_design(d, 100000, rng);
    long first = 0;
    for (const auto& a : e.vectors)
        if (std::abs(a[0]) > 0.5) ++first;
    double p_hat = static_cast<double>(first) / 100000.0;
    double sigma = std::sqrt(0.75 * 0.25 / 100000.0);
    CHECK(std::abs(p_hat - 0.75) <= 3.0 * sigma);

    CHECK(e.matrix_scale == doctest::Approx(std::sqrt(6.0)));

    WeightedDesign d3;
    d3.dim = 3;
    d3.order = 1;
    d3.vectors.push_back({complexd(1.0, 0.0), complexd(0.0, 0.0), complexd(0.0, 0.0)});
    d3.weights = {1.0};
    auto e3 = sample_from_design(d3, 3, rng);
    CHECK(e3.matrix_scale == doctest::Approx(std::sqrt(12.0)));  // sqrt(n(n+1)), n=3
}

TEST_CASE("apply: quadratic forms, phase retrieval view, linearity") {
    Rng rng(4242);
    auto e = sample_gaussian(5, 20, Field::Complex, rng);

    auto b_id = apply(e, HermitianMatrix::identity(5));
    for (std::size_t j = 0; j < e.count(); ++j) {
        double norm2 = 0.0;
        for (const auto& v : e.vectors[j]) norm2 += std::norm(v);
        CHECK(b_id[j] == doctest::Approx(norm2).epsilon(1e-12));
    }

    // phase retrieval: Z = x x^* gives b_j = |<a_j, x>|^2
    auto x = random_unit_vector(5, rng);
    auto b_pr = apply(e, HermitianMatrix::outer(x, 1.0));
    for (std::size_t j = 0; j < e.count(); ++j) {
        complexd dot = 0.0;
        for (std::size_t i = 0; i < 5; ++i) dot += std::conj(e.vectors[j][i]) * x[i];
        CHECK(b_pr[j] == doctest::Approx(std::norm(dot)).epsilon(1e-10));
    }

    auto X = random_low_rank(5, 2, false, rng).matrix;
    auto Y = random_low_rank(5, 3, true, rng).matrix;
    auto bx = apply(e, X);
    auto by = apply(e, Y);
    auto bc = apply(e, X * 2.5 + Y * (-0.5));
    for (std::size_t j = 0; j < e.count(); ++j)
        CHECK(bc[j] == doctest::Approx(2.5 * bx[j] - 0.5 * by[j]).epsilon(1e-12));

    CHECK_THROWS_AS(apply(e, HermitianMatrix::identity(4)), std::invalid_argument);
}

TEST_CASE("adjoint: indicator case, adjointness identity, conic positivity") {
    Rng rng(909);
    auto e = sample_gaussian(6, 20, Field::Complex, rng);

    std::vector<double> indicator(20, 0.0);
    indicator[0] = 1.0;
    auto A1 = adjoint(e, indicator);
    auto expected = HermitianMatrix::outer(e.vectors[0], e.matrix_scale);
    CHECK((A1 - expected).max_abs() < 1e-12);

    // <A*(y), Z> = <y, A(Z)> on random pairs
    for (int trial = 0; trial < 100; ++trial) {
        auto Z = random_low_rank(6, 1 + rng.uniform_index(5), rng.bernoulli(0.5), rng).matrix;
        std::vector<double> y(20);
        for (auto& v : y) v = rng.normal();
        double lhs = frobenius_inner(adjoint(e, y), Z);
        auto az = apply(e, Z);
        double rhs = 0.0;
        for (std::size_t j = 0; j < 20; ++j) rhs += y[j] * az[j];
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }

    // A*(A(Z)) is PSD for PSD Z (nonnegative conic combination)
    auto Zpsd = random_low_rank(6, 3, true, rng).matrix;
    auto back = adjoint(e, apply(e, Zpsd));
    auto eig = eigh(back);
    CHECK(eig.eigenvalues.back() >= -1e-10 * eig.eigenvalues.front());

    std::vector<double> wrong_len(19, 0.0);
    CHECK_THROWS_AS(adjoint(e, wrong_len), std::invalid_argument);
}

TEST_CASE("add_noise: exact norm, isotropy, eta=0 passthrough") {
    Rng rng(3133);
    std::vector<double> b(40);
    for (auto& v : b) v = rng.normal();

    auto clean = add_noise(b, 0.0, rng);
    for (std::size_t j = 0; j < b.size(); ++j) CHECK(clean.b[j] == b[j]);
    CHECK(clean.true_noise_norm == 0.0);

    for (double eta : {1e-3, 0.5, 10.0}) {
        auto noisy = add_noise(b, eta, rng);
        double norm = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            double diff = noisy.b[j] - b[j];
            norm += diff * diff;
        }
        CHECK(std::sqrt(norm) == doctest::Approx(eta).epsilon(1e-12));
        CHECK(noisy.true_noise_norm <= noisy.eta);
    }

    // direction isotropy: mean of eps/eta over 1e4 draws is near zero
    std::vector<double> mean(8, 0.0);
    std::vector<double> base(8, 0.0);
    const long draws = 10000;
    for (long t = 0; t < draws; ++t) {
        auto noisy = add_noise(base, 1.0, rng);
        for (std::size_t j = 0; j < 8; ++j) mean[j] += noisy.b[j];
    }
    for (std::size_t j = 0; j < 8; ++j) {
        mean[j] /= static_cast<double>(draws);
        // each coordinate of a random unit vector has variance 1/8
        CHECK(std::abs(mean[j]) <= 3.0 / std::sqrt(8.0 * draws));
    }

    CHECK_THROWS_AS(add_noise(b, -1.0, rng), std::invalid_argument);
}

TEST_CASE("ensemble serialization round trip") {
    Rng rng(5005);
    auto e = sample_gaussian(3, 7, Field::Complex, rng);
    auto text = ensemble_to_json(e);
    auto back = ensemble_from_json(text);
    CHECK(back.dim == e.dim);
    CHECK(back.count() == e.count());
    CHECK(back.matrix_scale == e.matrix_scale);
    CHECK(back.field == e.field);
    for (std::size_t j = 0; j < e.count(); ++j)
        for (std::size_t i = 0; i < e.dim; ++i)
            CHECK(std::abs(back.vectors[j][i] - e.vectors[j][i]) < 1e-15);

    CHECK_THROWS_AS(ensemble_from_json("{\"n\": 2}"), ParseError);
}

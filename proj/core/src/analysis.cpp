#include "r1/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "r1/tensor.hpp"

namespace r1 {

// ------------------------------------------------------------ RankOneSampler

RankOneSampler RankOneSampler::gaussian_complex(std::size_t n) {
    RankOneSampler s;
    s.kind_ = Kind::GaussianComplex;
    s.dim_ = n;
    return s;
}

RankOneSampler RankOneSampler::gaussian_real(std::size_t n) {
    RankOneSampler s;
    s.kind_ = Kind::GaussianReal;
    s.dim_ = n;
    return s;
}

RankOneSampler RankOneSampler::design(WeightedDesign d) {
    d.validate();
    RankOneSampler s;
    s.kind_ = Kind::Design;
    s.dim_ = d.dim;
    const double n = static_cast<double>(d.dim);
    s.atom_scale_ = std::pow((n + 1.0) * n, 0.25);
    s.cumulative_.resize(d.count());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.count(); ++i) {
        acc += d.weights[i];
        s.cumulative_[i] = acc;
    }
    s.cumulative_.back() = 1.0;
    s.design_ = std::move(d);
    return s;
}

std::vector<complexd> RankOneSampler::draw_vector(Rng& rng) const {
    std::vector<complexd> a(dim_);
    switch (kind_) {
        case Kind::GaussianComplex:
            for (auto& e : a) e = rng.complex_normal();
            return a;
        case Kind::GaussianReal:
            for (auto& e : a) e = complexd(rng.normal(), 0.0);
            return a;
        case Kind::Design: {
            double u = rng.uniform();
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            std::size_t pick = static_cast<std::size_t>(it - cumulative_.begin());
            if (pick >= design_.count()) pick = design_.count() - 1;
            a = design_.vectors[pick];
            for (auto& e : a) e *= atom_scale_;
            return a;
        }
    }
    return a;
}

double RankOneSampler::draw_value(const HermitianMatrix& Z, Rng& rng) const {
    return Z.quadratic_form(draw_vector(rng));
}

// -------------------------------------------------------------- moment checks

std::pair<double, double> gaussian_moment_check(int k, long trials, Rng& rng) {
    if (k < 1 || k > 4) throw std::invalid_argument("gaussian_moment_check: supported k is 1..4");
    if (trials < 1) throw std::invalid_argument("gaussian_moment_check: trials must be positive");
    double acc = 0.0;
    for (long t = 0; t < trials; ++t) {
        double mag2 = std::norm(rng.complex_normal());
        double v = 1.0;
        for (int i = 0; i < k; ++i) v *= mag2;
        acc += v;
    }
    double reference = 1.0;
    for (int i = 2; i <= k; ++i) reference *= static_cast<double>(i);
    return {acc / static_cast<double>(trials), reference};
}

double reference_second_moment(const HermitianMatrix& Z) {
    // 2 tr(P_Sym^2 Z^{ox 2}) = tr(Z)^2 + tr(Z^2)
    return sym_moment(Z, 2);
}

double reference_fourth_moment_gaussian(const HermitianMatrix& Z) {
    // E (a a^*)^{ox 4} = 4! P_Sym^4 for standard complex Gaussians (Wick),
    // so E S^4 = 4! tr(P_Sym^4 Z^{ox 4})
    return sym_moment(Z, 4);
}

double reference_fourth_moment_design(const HermitianMatrix& Z) {
    const double n = static_cast<double>(Z.dim());
    return (n + 1.0) * n / ((n + 3.0) * (n + 2.0)) * sym_moment(Z, 4);
}

namespace {

// real standard Gaussian quadratic form: cumulants of S are 2^{r-1}(r-1)! tr(Z^r)
double reference_fourth_moment_real(const HermitianMatrix& Z) {
    auto p = power_traces(Z, 4);
    double p1 = p[1], p2 = p[2], p3 = p[3], p4 = p[4];
    return 48.0 * p4 + 32.0 * p3 * p1 + 12.0 * p2 * p2 + 12.0 * p2 * p1 * p1 + p1 * p1 * p1 * p1;
}

double reference_second_moment_real(const HermitianMatrix& Z) {
    auto p = power_traces(Z, 2);
    return p[1] * p[1] + 2.0 * p[2];
}

}  // namespace

MomentIdentityReport moment_identity_check(const RankOneSampler& sampler,
                                           const HermitianMatrix& Z, long trials, Rng& rng) {
    if (trials < 2) throw std::invalid_argument("moment_identity_check: need at least 2 trials");
    MomentIdentityReport report;

    double s2_sum = 0.0, s2_sq = 0.0, s4_sum = 0.0, s4_sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        double s = sampler.draw_value(Z, rng);
        double s2 = s * s;
        double s4 = s2 * s2;
        s2_sum += s2;
        s2_sq += s2 * s2;
        s4_sum += s4;
        s4_sq += s4 * s4;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    report.s2_mean = s2_sum * inv;
    report.s4_mean = s4_sum * inv;
    report.s2_stderr = std::sqrt(std::max(0.0, s2_sq * inv - report.s2_mean * report.s2_mean) * inv);
    report.s4_stderr = std::sqrt(std::max(0.0, s4_sq * inv - report.s4_mean * report.s4_mean) * inv);

    switch (sampler.kind()) {
        case RankOneSampler::Kind::GaussianComplex:
            report.s2_reference = reference_second_moment(Z);
            report.s4_reference = reference_fourth_moment_gaussian(Z);
            break;
        case RankOneSampler::Kind::GaussianReal:
            report.s2_reference = reference_second_moment_real(Z);
            report.s4_reference = reference_fourth_moment_real(Z);
            break;
        case RankOneSampler::Kind::Design:
            report.s2_reference = reference_second_moment(Z);
            report.s4_reference = reference_fourth_moment_design(Z);
            break;
    }

    if (sampler.kind() != RankOneSampler::Kind::Design) {
        double cap = 24.0 * report.s2_mean * report.s2_mean + 3.0 * report.s4_stderr;
        if (sampler.kind() == RankOneSampler::Kind::GaussianReal)
            cap = 27.0 * report.s2_mean * report.s2_mean + 3.0 * report.s4_stderr;
        report.fourth_moment_ratio_ok = report.s4_mean <= cap;
    }
    return report;
}

SmallBallEstimate empirical_Q(const RankOneSampler& sampler, const HermitianMatrix& Z,
                              double xi, long trials, Rng& rng) {
    if (xi <= 0.0) throw std::invalid_argument("empirical_Q: xi must be positive");
    if (trials < 1) throw std::invalid_argument("empirical_Q: trials must be positive");
    long hits = 0;
    for (long t = 0; t < trials; ++t)
        if (std::abs(sampler.draw_value(Z, rng)) >= xi) ++hits;
    SmallBallEstimate est;
    est.xi = xi;
    est.trials = trials;
    est.q_hat = static_cast<double>(hits) / static_cast<double>(trials);
    est.stderr_ = std::sqrt(est.q_hat * (1.0 - est.q_hat) / static_cast<double>(trials));
    return est;
}

// ------------------------------------------------------------- H and Chernoff

HermitianMatrix rademacher_H(const MeasurementEnsemble& e, Rng& rng) {
    HermitianMatrix H(e.dim);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(e.count()));
    for (std::size_t j = 0; j < e.count(); ++j)
        H.add_outer(e.vectors[j], rng.sign() * e.matrix_scale * inv_sqrt_m);
    return H;
}

WBoundReport empirical_W_bound(std::size_t n, int r, std::size_t m,
                               const RankOneSampler& sampler, long trials, Rng& rng) {
    if (sampler.dim() != n) throw std::invalid_argument("empirical_W_bound: dimension mismatch");
    if (trials < 2) throw std::invalid_argument("empirical_W_bound: need at least 2 trials");

    double sum = 0.0, sum_sq = 0.0;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    for (long t = 0; t < trials; ++t) {
        HermitianMatrix H(n);
        for (std::size_t j = 0; j < m; ++j)
            H.add_outer(sampler.draw_vector(rng), rng.sign() * inv_sqrt_m);
        double norm = schatten_norm(H, std::numeric_limits<double>::infinity());
        sum += norm;
        sum_sq += norm * norm;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    WBoundReport report;
    report.mean_h_norm = sum * inv;
    report.stderr_ = std::sqrt(std::max(0.0, sum_sq * inv - report.mean_h_norm * report.mean_h_norm) * inv);
    report.w_m_estimate = 2.0 * std::sqrt(static_cast<double>(r)) * report.mean_h_norm;

    const double nd = static_cast<double>(n);
    const bool precondition = static_cast<double>(m) >= 2.0 * nd * std::log(nd);
    if (sampler.kind() == RankOneSampler::Kind::Design) {
        report.bound = 3.1049 * std::sqrt(nd * std::log(2.0 * nd));
        report.bound_asserted = precondition;
        report.pass = !precondition || report.mean_h_norm <= report.bound + 3.0 * report.stderr_;
    } else {
        report.gaussian_constant = report.mean_h_norm / std::sqrt(nd);
        report.bound = report.gaussian_constant * std::sqrt(nd);  // measured, reported only
        report.bound_asserted = false;
        report.pass = true;
    }
    return report;
}

ChernoffReport chernoff_sum_check(const WeightedDesign& d, std::size_t m, long trials, Rng& rng) {
    if (trials < 2) throw std::invalid_argument("chernoff_sum_check: need at least 2 trials");
    const std::size_t n = d.dim;
    const double nd = static_cast<double>(n);
    auto sampler = RankOneSampler::design(d);

    ChernoffReport report;
    report.atom_norm_expected = std::sqrt((nd + 1.0) * nd);
    report.bound = 3.4084 * static_cast<double>(m);

    HermitianMatrix frame_tight = design_frame_operator(d);
    frame_tight -= HermitianMatrix::identity(n) * (1.0 / nd);
    const double tight_gap = schatten_norm(frame_tight, std::numeric_limits<double>::infinity());
    report.precondition_met =
        static_cast<double>(m) >= 2.0 * nd * std::log(nd) && tight_gap <= 1e-8;

    double sum = 0.0, sum_sq = 0.0;
    HermitianMatrix mean_matrix(n);
    std::vector<double> entry_sq(n * n, 0.0);
    for (long t = 0; t < trials; ++t) {
        HermitianMatrix M(n);
        for (std::size_t j = 0; j < m; ++j) {
            auto atom = sampler.draw_vector(rng);
            double atom_norm = vector_norm(atom);
            report.atom_norm_max = std::max(report.atom_norm_max, atom_norm * atom_norm);
            M.add_outer(atom, 1.0);
        }
        double norm = schatten_norm(M, std::numeric_limits<double>::infinity());
        sum += norm;
        sum_sq += norm * norm;
        mean_matrix += M;
        const auto& entries = M.entries();
        for (std::size_t i = 0; i < entries.size(); ++i) entry_sq[i] += std::norm(entries[i]);
    }
    const double inv = 1.0 / static_cast<double>(trials);
    report.mean_sum_norm = sum * inv;
    report.stderr_ = std::sqrt(std::max(0.0, sum_sq * inv - report.mean_sum_norm * report.mean_sum_norm) * inv);

    // sample mean of sum_j a_j a_j^* / m against the 1-design closed form
    mean_matrix *= inv / static_cast<double>(m);
    HermitianMatrix target = HermitianMatrix::identity(n) * (report.atom_norm_expected / nd);
    HermitianMatrix gap = mean_matrix - target;
    report.frame_gap = schatten_norm(gap, std::numeric_limits<double>::infinity());
    double var_sum = 0.0;
    const auto& mean_entries = mean_matrix.entries();
    for (std::size_t i = 0; i < mean_entries.size(); ++i) {
        double second = entry_sq[i] * inv / (static_cast<double>(m) * static_cast<double>(m));
        var_sum += std::max(0.0, second - std::norm(mean_entries[i]));
    }
    report.frame_gap_3sigma = 3.0 * std::sqrt(var_sum * inv);

    report.pass = (!report.precondition_met) ||
                  (report.mean_sum_norm <= report.bound + 3.0 * report.stderr_ &&
                   report.frame_gap <= report.frame_gap_3sigma);
    return report;
}

// ------------------------------------------------------------- descent cones

namespace {

HermitianMatrix hermitian_in_basis(const ComplexMatrix& basis, const ComplexMatrix& coeff) {
    ComplexMatrix tmp = basis * coeff;
    ComplexMatrix full = tmp * basis.adjoint();
    const std::size_t n = full.rows();
    std::vector<complexd> entries(full.data(), full.data() + n * n);
    return HermitianMatrix::from_entries(n, entries);
}

ComplexMatrix random_hermitian_block(std::size_t n, Rng& rng) {
    ComplexMatrix B(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        B(i, i) = complexd(rng.normal(), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            complexd v = rng.complex_normal();
            B(i, j) = v;
            B(j, i) = std::conj(v);
        }
    }
    return B;
}

}  // namespace

DescentSample sample_descent_directions(const LowRankSignal& X, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("sample_descent_directions: count must be positive");
    const std::size_t n = X.matrix.dim();
    auto eig = eigh(X.matrix);

    double top = 0.0;
    for (double l : eig.eigenvalues) top = std::max(top, std::abs(l));
    std::vector<std::size_t> support, off_support;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(eig.eigenvalues[i]) > 1e-10 * top)
            support.push_back(i);
        else
            off_support.push_back(i);
    }
    const std::size_t r = support.size();
    if (static_cast<int>(r) != X.rank)
        throw std::invalid_argument("sample_descent_directions: signal does not have its declared exact rank");

    const double base_nuclear = schatten_norm(X.matrix, 1.0);

    auto verify = [&](const HermitianMatrix& Y, double& tau_out) {
        for (int k = 1; k <= 10; ++k) {
            double tau = std::ldexp(1.0, -k);  // 2^-k
            HermitianMatrix probe = X.matrix + Y * tau;
            if (schatten_norm(probe, 1.0) <= base_nuclear + 1e-9) {
                tau_out = tau;
                return true;
            }
        }
        return false;
    };

    DescentSample sample;
    sample.X = X;

    // always include -X / ||X||_2 (tau = ||X||_2 maps it to the zero matrix)
    {
        HermitianMatrix neg = X.matrix * (-1.0 / X.matrix.frobenius_norm());
        double tau = 0.0;
        if (!verify(neg, tau)) throw NumericError("sample_descent_directions: -X failed verification");
        sample.directions.push_back(std::move(neg));
        sample.witness_tau.push_back(tau);
    }

    int attempts = 0;
    const int max_attempts = 200 * count;
    while (static_cast<int>(sample.directions.size()) < count && attempts < max_attempts) {
        ++attempts;
        const bool off_mode = !off_support.empty() && rng.bernoulli(0.5);

        ComplexMatrix coeff(n, n);
        if (!off_mode) {
            // (a) decrease the top-r block along the sign pattern
            ComplexMatrix B = random_hermitian_block(r, rng);
            double trace_sign = 0.0, norm_b = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                trace_sign += B(i, i).real() * (eig.eigenvalues[support[i]] > 0 ? 1.0 : -1.0);
                for (std::size_t j = 0; j < r; ++j) norm_b += std::norm(B(i, j));
            }
            norm_b = std::sqrt(norm_b);
            const double margin = 0.1 * (norm_b + 0.1);
            const double shift = (trace_sign + margin) / static_cast<double>(r);
            for (std::size_t i = 0; i < r; ++i) {
                double sgn = eig.eigenvalues[support[i]] > 0 ? 1.0 : -1.0;
                for (std::size_t j = 0; j < r; ++j) coeff(support[i], support[j]) = B(i, j);
                coeff(support[i], support[i]) -= complexd(shift * sgn, 0.0);
            }
        } else {
            // (b) off-support block balanced by a decrease on the support
            ComplexMatrix C = random_hermitian_block(off_support.size(), rng);
            std::vector<complexd> c_entries(C.data(), C.data() + off_support.size() * off_support.size());
            double c_nuclear = schatten_norm(
                HermitianMatrix::from_entries(off_support.size(), c_entries), 1.0);
            const double margin = 0.1 * (c_nuclear + 0.1);
            const double shift = (c_nuclear + margin) / static_cast<double>(r);
            for (std::size_t i = 0; i < off_support.size(); ++i)
                for (std::size_t j = 0; j < off_support.size(); ++j)
                    coeff(off_support[i], off_support[j]) = C(i, j);
            for (std::size_t i = 0; i < r; ++i) {
                double sgn = eig.eigenvalues[support[i]] > 0 ? 1.0 : -1.0;
                coeff(support[i], support[i]) = complexd(-shift * sgn, 0.0);
            }
            // cross blocks only contribute at second order; they enrich the
            // sampled directions without affecting membership
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < off_support.size(); ++j) {
                    complexd v = 0.5 * rng.complex_normal();
                    coeff(support[i], off_support[j]) = v;
                    coeff(off_support[j], support[i]) = std::conj(v);
                }
            }
        }

        HermitianMatrix Y = hermitian_in_basis(eig.eigenvectors, coeff);
        double norm = Y.frobenius_norm();
        if (norm < 1e-12) continue;
        Y *= 1.0 / norm;
        double tau = 0.0;
        if (verify(Y, tau)) {
            sample.directions.push_back(std::move(Y));
            sample.witness_tau.push_back(tau);
        }
    }
    if (static_cast<int>(sample.directions.size()) < count)
        throw NumericError("sample_descent_directions: too many candidates failed the membership line search");
    return sample;
}

double empirical_min_conic_singular(const MeasurementEnsemble& e, const DescentSample& sample) {
    if (sample.directions.empty())
        throw std::invalid_argument("empirical_min_conic_singular: empty sample");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& Y : sample.directions) {
        double norm = vector_norm(apply(e, Y));
        best = std::min(best, norm);
    }
    return best;
}

}  // namespace r1

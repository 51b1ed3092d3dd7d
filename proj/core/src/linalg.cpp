#include "r1/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace r1 {

// ---------------------------------------------------------------- ComplexMatrix

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& other) const {
    if (cols_ != other.rows_) throw std::invalid_argument("ComplexMatrix: dimension mismatch in product");
    ComplexMatrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            complexd aik = (*this)(i, k);
            if (aik == complexd(0.0, 0.0)) continue;
            const complexd* brow = other.data() + k * other.cols_;
            complexd* orow = out.data() + i * other.cols_;
            for (std::size_t j = 0; j < other.cols_; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in sum");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in difference");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(complexd scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

complexd ComplexMatrix::trace() const {
    complexd t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in comparison");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data_.size(); ++i)
        m = std::max(m, std::abs(a.data_[i] - b.data_[i]));
    return m;
}

// -------------------------------------------------------------- HermitianMatrix

HermitianMatrix HermitianMatrix::from_entries(std::size_t n, const std::vector<complexd>& entries) {
    if (entries.size() != n * n) throw std::invalid_argument("HermitianMatrix: need n*n entries");
    double scale = 0.0, skew = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scale = std::max(scale, std::abs(entries[i * n + j]));
            skew = std::max(skew, std::abs(entries[i * n + j] - std::conj(entries[j * n + i])) / 2.0);
        }
    }
    if (scale > 0.0 && skew > 1e-8 * scale)
        throw std::invalid_argument("HermitianMatrix: anti-Hermitian part exceeds 1e-8 relative tolerance");
    HermitianMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.data_[i * n + i] = complexd(entries[i * n + i].real(), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            complexd v = (entries[i * n + j] + std::conj(entries[j * n + i])) / 2.0;
            out.data_[i * n + j] = v;
            out.data_[j * n + i] = std::conj(v);
        }
    }
    return out;
}

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
    HermitianMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) out.data_[i * n + i] = 1.0;
    return out;
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
    HermitianMatrix out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out.data_[i * d.size() + i] = d[i];
    return out;
}

HermitianMatrix HermitianMatrix::outer(const std::vector<complexd>& v, double scale) {
    HermitianMatrix out(v.size());
    out.add_outer(v, scale);
    return out;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
    if (n_ != other.n_) throw std::invalid_argument("HermitianMatrix: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
    if (n_ != other.n_) throw std::invalid_argument("HermitianMatrix: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

void HermitianMatrix::add_outer(const std::vector<complexd>& v, double scale) {
    if (v.size() != n_) throw std::invalid_argument("HermitianMatrix: outer product dimension mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        data_[i * n_ + i] += complexd(scale * std::norm(v[i]), 0.0);
        for (std::size_t j = i + 1; j < n_; ++j) {
            complexd u = scale * v[i] * std::conj(v[j]);
            data_[i * n_ + j] += u;
            data_[j * n_ + i] += std::conj(u);
        }
    }
}

double HermitianMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i].real();
    return t;
}

double HermitianMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

double HermitianMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<complexd> HermitianMatrix::apply(const std::vector<complexd>& x) const {
    if (x.size() != n_) throw std::invalid_argument("HermitianMatrix: vector dimension mismatch");
    std::vector<complexd> y(n_, complexd(0.0, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
        const complexd* row = data_.data() + i * n_;
        complexd acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

double HermitianMatrix::quadratic_form(const std::vector<complexd>& a) const {
    if (a.size() != n_) throw std::invalid_argument("HermitianMatrix: vector dimension mismatch");
    complexd acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const complexd* row = data_.data() + i * n_;
        complexd partial = 0.0;
        for (std::size_t j = 0; j < n_; ++j) partial += row[j] * a[j];
        acc += std::conj(a[i]) * partial;
    }
    return acc.real();
}

ComplexMatrix HermitianMatrix::to_matrix() const {
    ComplexMatrix out(n_, n_);
    for (std::size_t i = 0; i < n_ * n_; ++i) out.data()[i] = data_[i];
    return out;
}

// ----------------------------------------------------------------------- eigh

HermitianMatrix EigenDecomposition::assemble(const std::vector<double>& mapped) const {
    const std::size_t n = eigenvalues.size();
    if (mapped.size() != n) throw std::invalid_argument("EigenDecomposition: spectrum size mismatch");
    HermitianMatrix out(n);
    std::vector<complexd> column(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (mapped[k] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) column[i] = eigenvectors(i, k);
        out.add_outer(column, mapped[k]);
    }
    return out;
}

namespace {

double off_diagonal_norm(const std::vector<complexd>& a, std::size_t n) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * std::norm(a[p * n + q]);
    return std::sqrt(s);
}

}  // namespace

EigenDecomposition eigh(const HermitianMatrix& Z) {
    const std::size_t n = Z.dim();
    std::vector<complexd> a = Z.entries();
    ComplexMatrix v = ComplexMatrix::identity(n);

    double norm = 0.0;
    for (const auto& e : a) norm += std::norm(e);
    norm = std::sqrt(norm);

    const double off_tol = 1e-13 * norm;
    const int max_sweeps = 100;
    bool converged = (norm == 0.0);

    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        if (off_diagonal_norm(a, n) <= off_tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                complexd apq = a[p * n + q];
                double mag = std::abs(apq);
                if (mag == 0.0) continue;

                // Phase-carrying Jacobi rotation: diag(1, e^{-i phi}) reduces
                // the 2x2 block to real symmetric, then the classic rotation
                // annihilates the off-diagonal entry.
                complexd phase = apq / mag;
                double app = a[p * n + p].real();
                double aqq = a[q * n + q].real();
                double tau = (aqq - app) / (2.0 * mag);
                double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                const complexd upp(c, 0.0);
                const complexd upq(s, 0.0);
                const complexd uqp = -s * std::conj(phase);
                const complexd uqq = c * std::conj(phase);

                // A <- U* A U restricted to rows/cols p,q
                for (std::size_t i = 0; i < n; ++i) {
                    complexd aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = aip * upp + aiq * uqp;
                    a[i * n + q] = aip * upq + aiq * uqq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    complexd apj = a[p * n + j], aqj = a[q * n + j];
                    a[p * n + j] = std::conj(upp) * apj + std::conj(uqp) * aqj;
                    a[q * n + j] = std::conj(upq) * apj + std::conj(uqq) * aqj;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                a[p * n + p] = complexd(a[p * n + p].real(), 0.0);
                a[q * n + q] = complexd(a[q * n + q].real(), 0.0);

                for (std::size_t i = 0; i < n; ++i) {
                    complexd vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * upp + viq * uqp;
                    v(i, q) = vip * upq + viq * uqq;
                }
            }
        }
    }
    if (!converged && off_diagonal_norm(a, n) > off_tol) {
        std::ostringstream msg;
        msg << "eigh: Jacobi sweeps exhausted, off-diagonal residual "
            << off_diagonal_norm(a, n) << " vs tolerance " << off_tol;
        throw NumericError(msg.str());
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a[i * n + i].real() > a[j * n + j].real();
    });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a[order[k] * n + order[k]].real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

// ------------------------------------------------------------- spectral maps

double schatten_norm(const HermitianMatrix& Z, double p) {
    if (p < 1.0) throw std::domain_error("schatten_norm: p must be >= 1");
    auto eig = eigh(Z);
    if (std::isinf(p)) {
        double m = 0.0;
        for (double l : eig.eigenvalues) m = std::max(m, std::abs(l));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double l : eig.eigenvalues) s += std::abs(l);
        return s;
    }
    if (p == 2.0) return Z.frobenius_norm();
    double s = 0.0;
    for (double l : eig.eigenvalues) s += std::pow(std::abs(l), p);
    return std::pow(s, 1.0 / p);
}

double frobenius_inner(const HermitianMatrix& X, const HermitianMatrix& Y) {
    if (X.dim() != Y.dim()) throw std::invalid_argument("frobenius_inner: dimension mismatch");
    // tr(XY) = sum_jk X_jk conj(Y_jk) for Hermitian X, Y
    const auto& x = X.entries();
    const auto& y = Y.entries();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    return acc;
}

HermitianMatrix prox_nuclear(const HermitianMatrix& Z, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_nuclear: tau must be nonnegative");
    if (tau == 0.0) return Z;
    auto eig = eigh(Z);
    std::vector<double> shrunk(eig.eigenvalues.size());
    for (std::size_t i = 0; i < shrunk.size(); ++i) {
        double l = eig.eigenvalues[i];
        double m = std::abs(l) - tau;
        shrunk[i] = (m > 0.0) ? (l > 0.0 ? m : -m) : 0.0;
    }
    return eig.assemble(shrunk);
}

HermitianMatrix prox_psd_trace(const HermitianMatrix& Z, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_psd_trace: tau must be nonnegative");
    auto eig = eigh(Z);
    std::vector<double> shrunk(eig.eigenvalues.size());
    for (std::size_t i = 0; i < shrunk.size(); ++i)
        shrunk[i] = std::max(eig.eigenvalues[i] - tau, 0.0);
    return eig.assemble(shrunk);
}

std::vector<double> power_traces(const HermitianMatrix& Z, int k_max) {
    auto eig = eigh(Z);
    std::vector<double> traces(static_cast<std::size_t>(k_max) + 1, 0.0);
    traces[0] = static_cast<double>(Z.dim());
    for (int k = 1; k <= k_max; ++k) {
        double s = 0.0;
        for (double l : eig.eigenvalues) s += std::pow(l, k);
        traces[static_cast<std::size_t>(k)] = s;
    }
    return traces;
}

int rank_by_threshold(const std::vector<double>& eigenvalues) {
    double top = 0.0;
    for (double l : eigenvalues) top = std::max(top, std::abs(l));
    if (top == 0.0) return 0;
    int r = 0;
    for (double l : eigenvalues)
        if (std::abs(l) > 1e-10 * top) ++r;
    return r;
}

// ---------------------------------------------------------------- generators

std::vector<complexd> random_unit_vector(std::size_t n, Rng& rng) {
    std::vector<complexd> v(n);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& e : v) {
            e = rng.complex_normal();
            norm2 += std::norm(e);
        }
    } while (norm2 < 1e-30);
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : v) e *= inv;
    return v;
}

double vector_norm(const std::vector<complexd>& v) {
    double s = 0.0;
    for (const auto& e : v) s += std::norm(e);
    return std::sqrt(s);
}

double vector_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

complexd vector_dot(const std::vector<complexd>& a, const std::vector<complexd>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector_dot: length mismatch");
    complexd s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

std::vector<double> to_real_vec(const HermitianMatrix& Z) {
    const std::size_t n = Z.dim();
    std::vector<double> v(n * n);
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) v[at++] = Z(i, i).real();
    const double rt2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) v[at++] = rt2 * Z(i, j).real();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) v[at++] = rt2 * Z(i, j).imag();
    return v;
}

HermitianMatrix from_real_vec(std::size_t n, const std::vector<double>& v) {
    if (v.size() != n * n) throw std::invalid_argument("from_real_vec: need n^2 coordinates");
    HermitianMatrix Z(n);
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) Z.set(i, i, v[at++]);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    const std::size_t offs = n + n * (n - 1) / 2;
    std::size_t re_at = n, im_at = offs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            Z.set(i, j, complexd(v[re_at++] * inv_rt2, v[im_at++] * inv_rt2));
    return Z;
}

LowRankSignal random_low_rank(std::size_t n, int r, bool psd, Rng& rng) {
    if (r < 1 || static_cast<std::size_t>(r) > n)
        throw std::invalid_argument("random_low_rank: need 1 <= r <= n");

    for (int attempt = 0; attempt < 64; ++attempt) {
        // Orthonormal frame from Gaussian directions (modified Gram-Schmidt).
        std::vector<std::vector<complexd>> frame;
        frame.reserve(static_cast<std::size_t>(r));
        bool degenerate = false;
        for (int i = 0; i < r; ++i) {
            std::vector<complexd> g(n);
            for (auto& e : g) e = rng.complex_normal();
            for (const auto& f : frame) {
                complexd proj = vector_dot(f, g);
                for (std::size_t k = 0; k < n; ++k) g[k] -= proj * f[k];
            }
            double norm = vector_norm(g);
            if (norm < 1e-8) {
                degenerate = true;
                break;
            }
            for (auto& e : g) e /= norm;
            frame.push_back(std::move(g));
        }
        if (degenerate) continue;

        std::vector<double> lambda(static_cast<std::size_t>(r));
        double top = 0.0;
        for (auto& l : lambda) {
            l = rng.normal();
            if (psd) l = std::abs(l);
            top = std::max(top, std::abs(l));
        }
        bool tiny = (top == 0.0);
        for (double l : lambda)
            if (std::abs(l) <= 1e-8 * top) tiny = true;
        if (tiny) continue;  // would break the exact-rank invariant

        double norm2 = 0.0;
        for (double l : lambda) norm2 += l * l;
        double inv = 1.0 / std::sqrt(norm2);

        HermitianMatrix X(n);
        for (int i = 0; i < r; ++i) X.add_outer(frame[static_cast<std::size_t>(i)], lambda[static_cast<std::size_t>(i)] * inv);
        return LowRankSignal{std::move(X), r, psd};
    }
    throw NumericError("random_low_rank: failed to draw a well-conditioned signal");
}

}  // namespace r1

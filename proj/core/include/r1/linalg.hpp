#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "r1/rng.hpp"

namespace r1 {

using complexd = std::complex<double>;

/// Thrown when an iterative numeric kernel fails to converge.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major complex matrix.  Deliberately minimal: it backs
/// eigenvector bundles, tensor operators and test oracles at desk scale
/// (n <= 64 on the base space, n^t <= 4096 on tensor powers).
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, complexd(0.0, 0.0)) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    complexd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const complexd& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    complexd* data() { return data_.data(); }
    const complexd* data() const { return data_.data(); }

    ComplexMatrix adjoint() const;
    ComplexMatrix operator*(const ComplexMatrix& other) const;
    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(complexd scale);

    complexd trace() const;
    double frobenius_norm() const;

    /// max_ij |a_ij - b_ij|
    static double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<complexd> data_;
};

/// n x n complex Hermitian matrix.  The constructor symmetrizes (Z + Z*)/2
/// and rejects inputs whose anti-Hermitian part exceeds 1e-8 relative, so a
/// value of this type is Hermitian by construction everywhere downstream.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(std::size_t n)
        : n_(n), data_(n * n, complexd(0.0, 0.0)) {}

    /// Symmetrize and validate arbitrary square data (row-major, n*n).
    static HermitianMatrix from_entries(std::size_t n, const std::vector<complexd>& entries);

    static HermitianMatrix zero(std::size_t n) { return HermitianMatrix(n); }
    static HermitianMatrix identity(std::size_t n);
    static HermitianMatrix diagonal(const std::vector<double>& d);
    /// scale * v v^*
    static HermitianMatrix outer(const std::vector<complexd>& v, double scale = 1.0);

    std::size_t dim() const { return n_; }

    const complexd& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    /// Mutation keeps the (j,i) mirror in sync.
    void set(std::size_t i, std::size_t j, complexd value) {
        data_[i * n_ + j] = value;
        data_[j * n_ + i] = std::conj(value);
        if (i == j) data_[i * n_ + i] = complexd(value.real(), 0.0);
    }

    HermitianMatrix& operator+=(const HermitianMatrix& other);
    HermitianMatrix& operator-=(const HermitianMatrix& other);
    HermitianMatrix& operator*=(double scale);
    friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
    friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
    friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
    friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

    /// rank-one update: *this += scale * v v^*
    void add_outer(const std::vector<complexd>& v, double scale);

    double trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    /// y = Z x
    std::vector<complexd> apply(const std::vector<complexd>& x) const;
    /// <a, Z a>, real by Hermiticity
    double quadratic_form(const std::vector<complexd>& a) const;

    const std::vector<complexd>& entries() const { return data_; }
    ComplexMatrix to_matrix() const;

  private:
    std::size_t n_ = 0;
    std::vector<complexd> data_;
};

/// Spectral data of a Hermitian matrix: real eigenvalues in descending
/// order, orthonormal eigenvector columns.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    ComplexMatrix eigenvectors;

    /// V diag(f(lambda)) V* for a remapped spectrum.
    HermitianMatrix assemble(const std::vector<double>& mapped) const;
    HermitianMatrix reconstruct() const { return assemble(eigenvalues); }
};

/// Random test signal of known rank (see random_low_rank).
struct LowRankSignal {
    HermitianMatrix matrix;
    int rank = 0;
    bool psd = false;
};

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
/// Off-diagonal Frobenius threshold 1e-13 (relative), sweep cap 100.
/// Throws NumericError with the remaining residual if the cap is hit.
EigenDecomposition eigh(const HermitianMatrix& Z);

/// (sum_i |lambda_i|^p)^(1/p); p = infinity gives max |lambda_i|.
/// Requires p >= 1 (std::domain_error otherwise).
double schatten_norm(const HermitianMatrix& Z, double p);

/// tr(XY), real because both arguments are Hermitian.
double frobenius_inner(const HermitianMatrix& X, const HermitianMatrix& Y);

/// V shrink(Lambda, tau) V* with shrink(l, t) = sign(l) max(|l| - t, 0).
HermitianMatrix prox_nuclear(const HermitianMatrix& Z, double tau);

/// V max(Lambda - tau, 0) V*; output positive semidefinite.
HermitianMatrix prox_psd_trace(const HermitianMatrix& Z, double tau);

/// tr(Z^k) for k = 1..k_max from one eigendecomposition.
std::vector<double> power_traces(const HermitianMatrix& Z, int k_max);

/// Eigenvalues with |lambda| > 1e-10 * max|lambda|; the rank convention
/// shared by every module.
int rank_by_threshold(const std::vector<double>& eigenvalues);

/// X = sum_{i<=r} lambda_i g_i g_i^* with orthonormalized complex Gaussian
/// directions, normalized to ||X||_2 = 1.  lambda_i ~ |N(0,1)| when psd.
LowRankSignal random_low_rank(std::size_t n, int r, bool psd, Rng& rng);

/// Unit vector of i.i.d. complex Gaussian entries (Haar direction).
std::vector<complexd> random_unit_vector(std::size_t n, Rng& rng);

double vector_norm(const std::vector<complexd>& v);
double vector_norm(const std::vector<double>& v);
complexd vector_dot(const std::vector<complexd>& a, const std::vector<complexd>& b);

/// Isometry H_n -> R^{n^2}: [diag; sqrt(2) Re upper; sqrt(2) Im upper],
/// upper triangle in row-major order.  Preserves the Frobenius inner product.
std::vector<double> to_real_vec(const HermitianMatrix& Z);
HermitianMatrix from_real_vec(std::size_t n, const std::vector<double>& v);

}  // namespace r1

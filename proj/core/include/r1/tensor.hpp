#pragma once

#include <cstdint>
#include <vector>

#include "r1/linalg.hpp"

namespace r1 {

/// Explicit operator on the t-fold tensor power of C^n.  Guarded to
/// n^t <= 4096: dense tensors exist only for certification and test
/// oracles, larger orders go through the Sym-basis representation.
struct TensorOperator {
    std::size_t base_dim = 0;
    int order = 0;
    ComplexMatrix entries;  // n^t x n^t

    std::size_t dim() const { return entries.rows(); }
};

/// dim Sym^k = binom(n + k - 1, k), exact integer arithmetic.
std::uint64_t sym_dim(std::uint64_t n, std::uint64_t k);

/// binom(a, b) in exact integer arithmetic (overflow-checked).
std::uint64_t binomial(std::uint64_t a, std::uint64_t b);

/// n^t with the 4096 resource guard applied (std::invalid_argument beyond).
std::size_t tensor_dim_guarded(std::size_t n, int t);

/// Projector onto the totally symmetric subspace: the permutation average
/// (1/t!) sum_pi U_pi in the lexicographic tensor basis.
TensorOperator sym_projector(std::size_t n, int t);

/// (w w^*)^{otimes t} for a unit vector w.
TensorOperator rank_one_tensor_power(const std::vector<complexd>& w, int t);

/// w^{otimes t} as an n^t vector in the lexicographic basis.
std::vector<complexd> tensor_power_vector(const std::vector<complexd>& w, int t);

/// Kronecker product; factor order matches index significance (first factor
/// owns the most significant digit of the lexicographic multi-index).
TensorOperator tensor_product(const TensorOperator& a, const TensorOperator& b);

TensorOperator tensor_from_matrix(const HermitianMatrix& Z);

/// Contract the tensor factors listed in `subsystems` (0-based positions).
TensorOperator partial_trace(const TensorOperator& T, const std::vector<int>& subsystems);

/// m! tr(P_Sym^m Z^{otimes m}) evaluated through the cycle-index formula:
/// sum over multiplicity vectors (j_1..j_m) with sum k j_k = m of
/// m!/(prod j_k! k^{j_k}) prod tr(Z^k)^{j_k}.  No tensors are built;
/// supported for 1 <= m <= 8.
double sym_moment(const HermitianMatrix& Z, int m);

/// Same contraction given precomputed power traces tr(Z^k), k = 0..m.
double sym_moment_from_traces(const std::vector<double>& traces, int m);

// --- Sym-basis representation -------------------------------------------
// Orthonormal basis of Sym^t from symmetrized standard tensors with
// multinomial normalization; reduces design certification memory from
// n^{2t} to D^2 with D = sym_dim(n, t).

/// All occupation vectors (m_1..m_n) with sum m_i = t, lexicographic.
std::vector<std::vector<int>> sym_occupations(std::size_t n, int t);

/// Coefficients <e_alpha, w^{otimes t}> over that basis:
/// sqrt(t!/prod m_i!) prod w_i^{m_i}.  Unit norm for unit w.
std::vector<complexd> sym_basis_coefficients(const std::vector<complexd>& w, int t);

/// Dense n^t x D matrix whose columns are the orthonormal symmetrized basis
/// vectors (test oracle for the compressed representation).
ComplexMatrix sym_basis_matrix(std::size_t n, int t);

}  // namespace r1

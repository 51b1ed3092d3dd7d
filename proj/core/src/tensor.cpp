#include "r1/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace r1 {

std::uint64_t binomial(std::uint64_t a, std::uint64_t b) {
    if (b > a) return 0;
    b = std::min(b, a - b);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= b; ++i) {
        std::uint64_t num = a - b + i;
        if (result > UINT64_MAX / num) throw std::overflow_error("binomial: overflow");
        result = result * num / i;  // division is exact at every step
    }
    return result;
}

std::uint64_t sym_dim(std::uint64_t n, std::uint64_t k) {
    if (n < 1) throw std::invalid_argument("sym_dim: n must be >= 1");
    return binomial(n + k - 1, k);
}

std::size_t tensor_dim_guarded(std::size_t n, int t) {
    if (t < 0) throw std::invalid_argument("tensor power: negative order");
    std::size_t dim = 1;
    for (int i = 0; i < t; ++i) {
        if (dim > 4096 / n) throw std::invalid_argument("tensor power: n^t exceeds the 4096 resource guard");
        dim *= n;
    }
    if (dim > 4096) throw std::invalid_argument("tensor power: n^t exceeds the 4096 resource guard");
    return dim;
}

namespace {

// digits[0] is the most significant position (first tensor factor)
void index_to_digits(std::size_t index, std::size_t n, int t, std::vector<std::size_t>& digits) {
    digits.resize(static_cast<std::size_t>(t));
    for (int f = t - 1; f >= 0; --f) {
        digits[static_cast<std::size_t>(f)] = index % n;
        index /= n;
    }
}

std::size_t digits_to_index(const std::vector<std::size_t>& digits, std::size_t n) {
    std::size_t index = 0;
    for (std::size_t d : digits) index = index * n + d;
    return index;
}

std::uint64_t factorial(int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

}  // namespace

TensorOperator sym_projector(std::size_t n, int t) {
    if (t < 1) throw std::invalid_argument("sym_projector: order must be >= 1");
    std::size_t dim = tensor_dim_guarded(n, t);
    TensorOperator P{n, t, ComplexMatrix(dim, dim)};

    // P[I,J] = (#permutations mapping digits(J) to digits(I)) / t!
    //        = prod_i mult_i(I)! / t!  when I and J share a multiset, else 0.
    const double inv_fact = 1.0 / static_cast<double>(factorial(t));
    std::vector<std::size_t> di, dj;
    std::vector<int> multiplicity(n);
    for (std::size_t i = 0; i < dim; ++i) {
        index_to_digits(i, n, t, di);
        std::fill(multiplicity.begin(), multiplicity.end(), 0);
        for (std::size_t d : di) ++multiplicity[d];
        double weight = inv_fact;
        for (int m : multiplicity) weight *= static_cast<double>(factorial(m));
        std::vector<std::size_t> sorted_i = di;
        std::sort(sorted_i.begin(), sorted_i.end());
        for (std::size_t j = 0; j < dim; ++j) {
            index_to_digits(j, n, t, dj);
            std::sort(dj.begin(), dj.end());
            if (dj == sorted_i) P.entries(i, j) = weight;
        }
    }
    return P;
}

std::vector<complexd> tensor_power_vector(const std::vector<complexd>& w, int t) {
    const std::size_t n = w.size();
    std::size_t dim = tensor_dim_guarded(n, t);
    std::vector<complexd> tensor(dim);
    std::vector<std::size_t> digits;
    for (std::size_t i = 0; i < dim; ++i) {
        index_to_digits(i, n, t, digits);
        complexd v = 1.0;
        for (std::size_t d : digits) v *= w[d];
        tensor[i] = v;
    }
    return tensor;
}

TensorOperator rank_one_tensor_power(const std::vector<complexd>& w, int t) {
    const std::size_t n = w.size();
    double norm = vector_norm(w);
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("rank_one_tensor_power: vector must be normalized");
    auto tensor = tensor_power_vector(w, t);
    const std::size_t dim = tensor.size();
    TensorOperator T{n, t, ComplexMatrix(dim, dim)};
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) T.entries(i, j) = tensor[i] * std::conj(tensor[j]);
    return T;
}

TensorOperator tensor_product(const TensorOperator& a, const TensorOperator& b) {
    if (a.base_dim != b.base_dim)
        throw std::invalid_argument("tensor_product: base dimensions differ");
    std::size_t da = a.dim(), db = b.dim();
    tensor_dim_guarded(a.base_dim, a.order + b.order);
    TensorOperator out{a.base_dim, a.order + b.order, ComplexMatrix(da * db, da * db)};
    for (std::size_t i1 = 0; i1 < da; ++i1)
        for (std::size_t j1 = 0; j1 < da; ++j1)
            for (std::size_t i2 = 0; i2 < db; ++i2)
                for (std::size_t j2 = 0; j2 < db; ++j2)
                    out.entries(i1 * db + i2, j1 * db + j2) = a.entries(i1, j1) * b.entries(i2, j2);
    return out;
}

TensorOperator tensor_from_matrix(const HermitianMatrix& Z) {
    TensorOperator T{Z.dim(), 1, Z.to_matrix()};
    return T;
}

TensorOperator partial_trace(const TensorOperator& T, const std::vector<int>& subsystems) {
    const std::size_t n = T.base_dim;
    const int t = T.order;
    std::vector<bool> traced(static_cast<std::size_t>(t), false);
    for (int s : subsystems) {
        if (s < 0 || s >= t) throw std::invalid_argument("partial_trace: subsystem index out of range");
        if (traced[static_cast<std::size_t>(s)]) throw std::invalid_argument("partial_trace: repeated subsystem index");
        traced[static_cast<std::size_t>(s)] = true;
    }
    const int k = t - static_cast<int>(subsystems.size());
    std::size_t out_dim = 1;
    for (int i = 0; i < k; ++i) out_dim *= n;
    std::size_t traced_dim = 1;
    for (std::size_t i = 0; i < subsystems.size(); ++i) traced_dim *= n;

    TensorOperator out{n, k, ComplexMatrix(out_dim, out_dim)};
    std::vector<std::size_t> kept_rows, traced_pos;
    for (int f = 0; f < t; ++f)
        (traced[static_cast<std::size_t>(f)] ? traced_pos : kept_rows).push_back(static_cast<std::size_t>(f));

    std::vector<std::size_t> row_digits(static_cast<std::size_t>(t)), col_digits(static_cast<std::size_t>(t));
    std::vector<std::size_t> out_row, out_col, trace_digits;
    for (std::size_t i = 0; i < out_dim; ++i) {
        index_to_digits(i, n, k, out_row);
        for (std::size_t j = 0; j < out_dim; ++j) {
            index_to_digits(j, n, k, out_col);
            complexd acc = 0.0;
            for (std::size_t s = 0; s < traced_dim; ++s) {
                index_to_digits(s, n, static_cast<int>(subsystems.size()), trace_digits);
                for (std::size_t f = 0; f < kept_rows.size(); ++f) {
                    row_digits[kept_rows[f]] = out_row[f];
                    col_digits[kept_rows[f]] = out_col[f];
                }
                for (std::size_t f = 0; f < traced_pos.size(); ++f) {
                    row_digits[traced_pos[f]] = trace_digits[f];
                    col_digits[traced_pos[f]] = trace_digits[f];
                }
                acc += T.entries(digits_to_index(row_digits, n), digits_to_index(col_digits, n));
            }
            out.entries(i, j) = acc;
        }
    }
    return out;
}

double sym_moment_from_traces(const std::vector<double>& traces, int m) {
    if (m < 1 || m > 8) throw std::invalid_argument("sym_moment: supported orders are 1..8");
    if (traces.size() < static_cast<std::size_t>(m) + 1)
        throw std::invalid_argument("sym_moment: need power traces up to order m");

    // enumerate multiplicity vectors (j_1..j_m), sum k j_k = m
    double total = 0.0;
    std::vector<int> j(static_cast<std::size_t>(m) + 1, 0);
    const std::uint64_t m_fact = factorial(m);

    auto recurse = [&](auto&& self, int k, int remaining) -> void {
        if (k > m) {
            if (remaining != 0) return;
            // coefficient m! / prod_k (j_k! k^{j_k}), exact in 64-bit for m <= 8
            std::uint64_t denom = 1;
            for (int kk = 1; kk <= m; ++kk) {
                denom *= factorial(j[static_cast<std::size_t>(kk)]);
                for (int rep = 0; rep < j[static_cast<std::size_t>(kk)]; ++rep)
                    denom *= static_cast<std::uint64_t>(kk);
            }
            double term = static_cast<double>(m_fact / denom);
            for (int kk = 1; kk <= m; ++kk)
                for (int rep = 0; rep < j[static_cast<std::size_t>(kk)]; ++rep)
                    term *= traces[static_cast<std::size_t>(kk)];
            total += term;
            return;
        }
        for (int count = 0; count * k <= remaining; ++count) {
            j[static_cast<std::size_t>(k)] = count;
            self(self, k + 1, remaining - count * k);
        }
        j[static_cast<std::size_t>(k)] = 0;
    };
    recurse(recurse, 1, m);
    return total;
}

double sym_moment(const HermitianMatrix& Z, int m) {
    return sym_moment_from_traces(power_traces(Z, m), m);
}

std::vector<std::vector<int>> sym_occupations(std::size_t n, int t) {
    std::vector<std::vector<int>> all;
    std::vector<int> current(n, 0);
    auto recurse = [&](auto&& self, std::size_t slot, int remaining) -> void {
        if (slot + 1 == n) {
            current[slot] = remaining;
            all.push_back(current);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            current[slot] = v;
            self(self, slot + 1, remaining - v);
        }
    };
    recurse(recurse, 0, t);
    return all;
}

std::vector<complexd> sym_basis_coefficients(const std::vector<complexd>& w, int t) {
    const std::size_t n = w.size();
    auto occupations = sym_occupations(n, t);
    std::vector<complexd> coeffs(occupations.size());
    const double t_fact = static_cast<double>(factorial(t));
    for (std::size_t a = 0; a < occupations.size(); ++a) {
        double denom = 1.0;
        complexd monomial = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            int m = occupations[a][i];
            denom *= static_cast<double>(factorial(m));
            for (int rep = 0; rep < m; ++rep) monomial *= w[i];
        }
        coeffs[a] = std::sqrt(t_fact / denom) * monomial;
    }
    return coeffs;
}

ComplexMatrix sym_basis_matrix(std::size_t n, int t) {
    std::size_t dim = tensor_dim_guarded(n, t);
    auto occupations = sym_occupations(n, t);
    ComplexMatrix B(dim, occupations.size());

    std::vector<std::size_t> digits;
    std::vector<int> multiplicity(n);
    const double t_fact = static_cast<double>(factorial(t));
    for (std::size_t i = 0; i < dim; ++i) {
        index_to_digits(i, n, t, digits);
        std::fill(multiplicity.begin(), multiplicity.end(), 0);
        for (std::size_t d : digits) ++multiplicity[d];
        // which occupation column does this multi-index belong to?
        for (std::size_t a = 0; a < occupations.size(); ++a) {
            bool match = true;
            for (std::size_t s = 0; s < n; ++s)
                if (occupations[a][s] != multiplicity[s]) { match = false; break; }
            if (match) {
                double denom = 1.0;
                for (int m : multiplicity) denom *= static_cast<double>(factorial(m));
                B(i, a) = std::sqrt(denom / t_fact);
                break;
            }
        }
    }
    return B;
}

}  // namespace r1

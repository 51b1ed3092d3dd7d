#include "r1/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "r1/tensor.hpp"

namespace r1 {

void WeightedDesign::validate() const {
    if (vectors.size() != weights.size())
        throw std::invalid_argument("WeightedDesign: vector/weight count mismatch");
    if (vectors.empty()) throw std::invalid_argument("WeightedDesign: empty design");
    double total = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim) throw std::invalid_argument("WeightedDesign: vector dimension mismatch");
        if (std::abs(vector_norm(vectors[i]) - 1.0) > 1e-10)
            throw std::invalid_argument("WeightedDesign: vectors must be normalized");
        if (weights[i] < 0.0) throw std::invalid_argument("WeightedDesign: weights must be nonnegative");
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("WeightedDesign: weights must sum to one");
}

HermitianMatrix design_frame_operator(const WeightedDesign& d) {
    HermitianMatrix frame(d.dim);
    for (std::size_t i = 0; i < d.count(); ++i) frame.add_outer(d.vectors[i], d.weights[i]);
    return frame;
}

HermitianMatrix design_sym_moment_operator(const WeightedDesign& d, int k) {
    const std::size_t D = sym_dim(d.dim, static_cast<std::uint64_t>(k));
    HermitianMatrix M(D);
    for (std::size_t i = 0; i < d.count(); ++i) {
        auto coeffs = sym_basis_coefficients(d.vectors[i], k);
        M.add_outer(coeffs, d.weights[i]);
    }
    return M;
}

double design_moment_gap(const WeightedDesign& d, int k, double p) {
    if (k < 1 || k > d.order) throw std::invalid_argument("design_moment_gap: need 1 <= k <= t");
    const double binom = static_cast<double>(sym_dim(d.dim, static_cast<std::uint64_t>(k)));
    HermitianMatrix gap = design_sym_moment_operator(d, k);
    gap -= HermitianMatrix::identity(gap.dim()) * (1.0 / binom);
    return binom * schatten_norm(gap, p);
}

double design_moment_gap_dense(const WeightedDesign& d, int k, double p) {
    if (k < 1 || k > d.order) throw std::invalid_argument("design_moment_gap: need 1 <= k <= t");
    const std::size_t dim = tensor_dim_guarded(d.dim, k);
    const double binom = static_cast<double>(sym_dim(d.dim, static_cast<std::uint64_t>(k)));

    HermitianMatrix gap(dim);
    for (std::size_t i = 0; i < d.count(); ++i)
        gap.add_outer(tensor_power_vector(d.vectors[i], k), d.weights[i]);
    auto P = sym_projector(d.dim, k);
    std::vector<complexd> proj_entries(P.entries.data(), P.entries.data() + dim * dim);
    gap -= HermitianMatrix::from_entries(dim, proj_entries) * (1.0 / binom);
    return binom * schatten_norm(gap, p);
}

std::vector<std::vector<complexd>> supernormalize(const WeightedDesign& d) {
    const double n = static_cast<double>(d.dim);
    const double scale = std::pow((n + 1.0) * n, 0.25);
    auto out = d.vectors;
    for (auto& v : out)
        for (auto& e : v) e *= scale;
    return out;
}

DesignCertificate certify(const WeightedDesign& d, int k) {
    DesignCertificate cert;
    cert.order_checked = k;
    cert.theta_inf = design_moment_gap(d, k, std::numeric_limits<double>::infinity());
    cert.theta_1 = design_moment_gap(d, k, 1.0);
    HermitianMatrix frame = design_frame_operator(d);
    frame -= HermitianMatrix::identity(d.dim) * (1.0 / static_cast<double>(d.dim));
    cert.tight_frame_gap = schatten_norm(frame, std::numeric_limits<double>::infinity());
    return cert;
}

WeightedDesign perturb_design(const WeightedDesign& d, double eps, Rng& rng) {
    if (eps < 0.0 || eps > 0.1) throw std::invalid_argument("perturb_design: eps must be in [0, 0.1]");
    if (eps == 0.0) return d;
    WeightedDesign out = d;
    for (auto& w : out.vectors) {
        // random tangent direction at w
        std::vector<complexd> u;
        double norm = 0.0;
        do {
            u.resize(w.size());
            for (auto& e : u) e = rng.complex_normal();
            complexd overlap = vector_dot(w, u);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] -= overlap * w[i];
            norm = vector_norm(u);
        } while (norm < 1e-12);
        for (auto& e : u) e /= norm;

        const double s = eps * rng.uniform();
        const double c = std::cos(s), si = std::sin(s);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = c * w[i] + si * u[i];
        double wn = vector_norm(w);
        for (auto& e : w) e /= wn;
    }
    return out;
}

// ---------------------------------------------------------------- construction
//
// Columns are the isometric real vectorizations of the rank-one Sym-basis
// moments v_i v_i^*; the fit is min || G p - target ||_2 over p >= 0.  The
// simplex constraint sum p = 1 rides along for free: every column has unit
// trace and so does the target, so the trace component of the residual is
// exactly (sum p - 1).

namespace {

struct RealColumns {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // column-major

    double* col(std::size_t j) { return data.data() + j * rows; }
    const double* col(std::size_t j) const { return data.data() + j * rows; }
};

// diag; sqrt(2) Re upper; sqrt(2) Im upper  (an isometry H_D -> R^{D^2})
std::vector<double> vectorize_hermitian_outer(const std::vector<complexd>& v) {
    const std::size_t D = v.size();
    std::vector<double> out(D * D);
    std::size_t at = 0;
    for (std::size_t i = 0; i < D; ++i) out[at++] = std::norm(v[i]);
    const double rt2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = i + 1; j < D; ++j) out[at++] = rt2 * (v[i] * std::conj(v[j])).real();
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = i + 1; j < D; ++j) out[at++] = rt2 * (v[i] * std::conj(v[j])).imag();
    return out;
}

void matvec(const RealColumns& G, const std::vector<double>& p, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < G.cols; ++j) {
        double pj = p[j];
        if (pj == 0.0) continue;
        const double* c = G.col(j);
        for (std::size_t i = 0; i < G.rows; ++i) out[i] += pj * c[i];
    }
}

void matvec_transpose(const RealColumns& G, const std::vector<double>& r, std::vector<double>& out) {
    for (std::size_t j = 0; j < G.cols; ++j) {
        const double* c = G.col(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < G.rows; ++i) acc += c[i] * r[i];
        out[j] = acc;
    }
}

void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0, threshold = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        double candidate = (1.0 - cumulative) / static_cast<double>(j + 1);
        if (u[j] + candidate > 0.0) {
            support = j + 1;
            threshold = candidate;
        }
    }
    (void)support;
    for (auto& x : v) x = std::max(x + threshold, 0.0);
}

double residual_norm(const RealColumns& G, const std::vector<double>& p,
                     const std::vector<double>& target, std::vector<double>& work) {
    matvec(G, p, work);
    double s = 0.0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        double r = work[i] - target[i];
        s += r * r;
    }
    return std::sqrt(s);
}

// Accelerated projected gradient on the probability simplex with adaptive
// restart; identifies the support, the active-set pass finishes the job.
void fista_simplex(const RealColumns& G, const std::vector<double>& target,
                   std::vector<double>& p, int iters) {
    const std::size_t N = G.cols;

    // Lipschitz constant via power iteration on G^T G
    std::vector<double> z(N, 1.0 / std::sqrt(static_cast<double>(N)));
    std::vector<double> gz(G.rows), gtz(N);
    double L = 1.0;
    for (int it = 0; it < 12; ++it) {
        matvec(G, z, gz);
        matvec_transpose(G, gz, gtz);
        double norm = vector_norm(gtz);
        if (norm == 0.0) break;
        L = norm;
        for (std::size_t i = 0; i < N; ++i) z[i] = gtz[i] / norm;
    }
    L = std::max(L * 1.01, 1e-12);

    std::vector<double> y = p, prev = p, grad(N), residual(G.rows);
    double theta = 1.0;
    double last_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
        matvec(G, y, residual);
        double obj = 0.0;
        for (std::size_t i = 0; i < residual.size(); ++i) {
            residual[i] -= target[i];
            obj += residual[i] * residual[i];
        }
        if (obj > last_obj) {  // restart momentum when the objective backslides
            theta = 1.0;
            y = p;
            matvec(G, y, residual);
            obj = 0.0;
            for (std::size_t i = 0; i < residual.size(); ++i) {
                residual[i] -= target[i];
                obj += residual[i] * residual[i];
            }
        }
        last_obj = obj;
        matvec_transpose(G, residual, grad);

        prev = p;
        for (std::size_t i = 0; i < N; ++i) p[i] = y[i] - grad[i] / L;
        project_simplex(p);

        double theta_next = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
        double momentum = (theta - 1.0) / theta_next;
        for (std::size_t i = 0; i < N; ++i) y[i] = p[i] + momentum * (p[i] - prev[i]);
        theta = theta_next;
    }
}

// Active-set refinement with an incrementally maintained Cholesky factor of
// the passive-set Gram: appending a column extends the factor in O(k^2), and
// removing one deletes its row and rank-1-updates the trailing block with
// Givens-style rotations (LINPACK dchud).  The support can grow to sym_dim^2
// atoms without ever refactorizing from scratch.
class ActiveSetSolver {
  public:
    ActiveSetSolver(const RealColumns& G, const std::vector<double>& target)
        : G_(G), target_(target) {
        capacity_ = std::min(G.cols, G.rows + 64);
        chol_.assign(capacity_ * capacity_, 0.0);
        rhs_.reserve(capacity_);
    }

    const std::vector<std::size_t>& passive() const { return passive_; }
    std::size_t size() const { return passive_.size(); }

    // Returns false when the column is (numerically) dependent on the
    // current passive set or capacity is exhausted.
    bool add_column(std::size_t j) {
        const std::size_t k = passive_.size();
        if (k >= capacity_) return false;
        const double* cj = G_.col(j);

        std::vector<double> cross(k);
        for (std::size_t a = 0; a < k; ++a) {
            const double* ca = G_.col(passive_[a]);
            double acc = 0.0;
            for (std::size_t i = 0; i < G_.rows; ++i) acc += ca[i] * cj[i];
            cross[a] = acc;
        }
        double diag = 0.0, proj = 0.0;
        for (std::size_t i = 0; i < G_.rows; ++i) {
            diag += cj[i] * cj[i];
            proj += cj[i] * target_[i];
        }

        // forward-substitute the new factor row: L l = cross
        double* row = chol_.data() + k * capacity_;
        for (std::size_t a = 0; a < k; ++a) {
            double acc = cross[a];
            const double* la = chol_.data() + a * capacity_;
            for (std::size_t c = 0; c < a; ++c) acc -= row[c] * la[c];
            row[a] = acc / la[a];
        }
        double pivot = diag;
        for (std::size_t c = 0; c < k; ++c) pivot -= row[c] * row[c];
        if (pivot <= 1e-13 * std::max(diag, 1e-300)) {
            std::fill(row, row + k, 0.0);
            return false;
        }
        row[k] = std::sqrt(pivot);
        rhs_.push_back(proj);
        passive_.push_back(j);
        return true;
    }

    void remove_positions(const std::vector<std::size_t>& positions_sorted_desc) {
        for (std::size_t pos : positions_sorted_desc) {
            const std::size_t k = passive_.size();
            const std::size_t tail = k - pos - 1;

            // spike column: entries of the removed variable in the rows below
            std::vector<double> spike(tail);
            for (std::size_t i = 0; i < tail; ++i)
                spike[i] = chol_[(pos + 1 + i) * capacity_ + pos];

            // delete row `pos`, shift later rows up with column `pos` removed
            for (std::size_t i = pos; i + 1 < k; ++i) {
                double* dst = chol_.data() + i * capacity_;
                const double* src = chol_.data() + (i + 1) * capacity_;
                for (std::size_t c = 0; c < pos; ++c) dst[c] = src[c];
                for (std::size_t c = pos; c <= i; ++c) dst[c] = src[c + 1];
                for (std::size_t c = i + 1; c < k; ++c) dst[c] = 0.0;
            }
            for (std::size_t c = 0; c < k; ++c) chol_[(k - 1) * capacity_ + c] = 0.0;

            // trailing Gram lost spike spike^T: restore with a rank-1 update
            // of the trailing factor block (rows/cols pos..k-2)
            for (std::size_t jcol = 0; jcol < tail; ++jcol) {
                double* diag_entry = chol_.data() + (pos + jcol) * capacity_ + (pos + jcol);
                double r = std::hypot(*diag_entry, spike[jcol]);
                double c = r / *diag_entry;
                double s = spike[jcol] / *diag_entry;
                *diag_entry = r;
                for (std::size_t i = jcol + 1; i < tail; ++i) {
                    double* lij = chol_.data() + (pos + i) * capacity_ + (pos + jcol);
                    *lij = (*lij + s * spike[i]) / c;
                    spike[i] = c * spike[i] - s * (*lij);
                }
            }

            rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(pos));
            passive_.erase(passive_.begin() + static_cast<std::ptrdiff_t>(pos));
        }
    }

    // Least squares on the passive set via the maintained factor plus two
    // iterative-refinement passes against the raw columns (which also mop up
    // any drift the incremental updates accumulate).
    void solve(std::vector<double>& q) {
        const std::size_t k = passive_.size();
        if (k == 0) {
            q.clear();
            return;
        }
        cholesky_solve(rhs_, q);

        std::vector<double> residual(G_.rows), correction(k), delta(k);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < G_.rows; ++i) residual[i] = target_[i];
            for (std::size_t a = 0; a < k; ++a) {
                const double* ca = G_.col(passive_[a]);
                const double qa = q[a];
                if (qa == 0.0) continue;
                for (std::size_t i = 0; i < G_.rows; ++i) residual[i] -= qa * ca[i];
            }
            for (std::size_t a = 0; a < k; ++a) {
                const double* ca = G_.col(passive_[a]);
                double acc = 0.0;
                for (std::size_t i = 0; i < G_.rows; ++i) acc += ca[i] * residual[i];
                correction[a] = acc;
            }
            cholesky_solve(correction, delta);
            for (std::size_t a = 0; a < k; ++a) q[a] += delta[a];
        }
    }

  private:
    void cholesky_solve(const std::vector<double>& b, std::vector<double>& out) const {
        const std::size_t k = passive_.size();
        out.assign(k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            double acc = b[a];
            const double* la = chol_.data() + a * capacity_;
            for (std::size_t c = 0; c < a; ++c) acc -= la[c] * out[c];
            out[a] = acc / la[a];
        }
        for (std::size_t a = k; a-- > 0;) {
            double acc = out[a];
            for (std::size_t c = a + 1; c < k; ++c) acc -= chol_[c * capacity_ + a] * out[c];
            out[a] = acc / chol_[a * capacity_ + a];
        }
    }

    const RealColumns& G_;
    const std::vector<double>& target_;
    std::size_t capacity_ = 0;
    std::vector<std::size_t> passive_;
    std::vector<double> chol_;  // capacity-strided lower-triangular factor
    std::vector<double> rhs_;
};

void active_set_polish(const RealColumns& G, const std::vector<double>& target,
                       std::vector<double>& p, double resid_target) {
    const std::size_t N = G.cols;
    const std::size_t d = G.rows;

    ActiveSetSolver solver(G, target);
    std::vector<char> in_passive(N, 0);
    {
        // seed with the largest warm-start weights, capped at d columns
        std::vector<std::size_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
        for (std::size_t i = 0; i < N && solver.size() < d; ++i) {
            if (p[order[i]] > 1e-10 && solver.add_column(order[i])) in_passive[order[i]] = 1;
        }
    }
    std::vector<double> x(N, 0.0);
    for (std::size_t idx : solver.passive()) x[idx] = p[idx];

    std::vector<double> q, w(N), work(d);

    // interpolation toward the LS point, clipping the zero-crossers in batch
    auto restore_feasible = [&]() {
        for (int guard = 0; guard < 4 * static_cast<int>(d) + 64; ++guard) {
            solver.solve(q);
            const auto& passive = solver.passive();
            bool all_positive = true;
            for (double v : q)
                if (v <= 0.0) { all_positive = false; break; }
            if (all_positive) {
                for (std::size_t a = 0; a < passive.size(); ++a) x[passive[a]] = q[a];
                return true;
            }
            double alpha = 1.0;
            for (std::size_t a = 0; a < passive.size(); ++a) {
                if (q[a] <= 0.0) {
                    double xa = x[passive[a]];
                    if (xa - q[a] > 0.0) alpha = std::min(alpha, xa / (xa - q[a]));
                }
            }
            std::vector<std::size_t> clipped;
            for (std::size_t a = 0; a < passive.size(); ++a) {
                double moved = x[passive[a]] + alpha * (q[a] - x[passive[a]]);
                if (q[a] <= 0.0 && moved <= 1e-14) {
                    x[passive[a]] = 0.0;
                    in_passive[passive[a]] = 0;
                    clipped.push_back(a);
                } else {
                    x[passive[a]] = std::max(moved, 0.0);
                }
            }
            if (clipped.empty()) {
                // numerical stalemate: drop the smallest coordinate
                std::size_t smallest = 0;
                for (std::size_t a = 1; a < passive.size(); ++a)
                    if (x[passive[a]] < x[passive[smallest]]) smallest = a;
                x[passive[smallest]] = 0.0;
                in_passive[passive[smallest]] = 0;
                clipped.push_back(smallest);
            }
            std::sort(clipped.rbegin(), clipped.rend());
            solver.remove_positions(clipped);
        }
        return false;
    };

    if (solver.size() > 0 && !restore_feasible()) {
        p = x;
        return;
    }

    const double target_norm = vector_norm(target);
    const int max_rounds = 64 + static_cast<int>(d / 8);
    const std::size_t batch = std::max<std::size_t>(8, d / 16);
    std::vector<std::size_t> candidates;
    std::vector<char> banned(N, 0);
    for (int round = 0; round < max_rounds; ++round) {
        double resid = residual_norm(G, x, target, work);
        if (resid <= resid_target) break;

        // gain gradient w = G^T (target - G x); add the best batch of atoms
        for (std::size_t i = 0; i < d; ++i) work[i] = target[i] - work[i];
        matvec_transpose(G, work, w);

        candidates.clear();
        const double floor = 1e-12 * std::max(1.0, target_norm);
        for (std::size_t j = 0; j < N; ++j)
            if (!in_passive[j] && !banned[j] && w[j] > floor) candidates.push_back(j);
        if (candidates.empty()) break;  // KKT-optimal over the candidate set
        std::sort(candidates.begin(), candidates.end(),
                  [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        if (candidates.size() > batch) candidates.resize(batch);
        bool added = false;
        for (std::size_t j : candidates) {
            if (solver.add_column(j)) {
                in_passive[j] = 1;
                added = true;
            } else {
                banned[j] = 1;  // numerically dependent on the current support
            }
        }
        if (!added || !restore_feasible()) break;
    }
    p = x;
}

}  // namespace

WeightedDesign construct_weighted_design(std::size_t n, int t, std::size_t candidates,
                                         Rng& rng, double tol) {
    const std::uint64_t D64 = sym_dim(n, static_cast<std::uint64_t>(t));
    const std::size_t D = static_cast<std::size_t>(D64);
    const std::size_t caratheodory = D * D + 1;
    if (candidates < caratheodory)
        throw std::invalid_argument("construct_weighted_design: need at least sym_dim(n,t)^2 + 1 candidates");

    std::vector<std::vector<complexd>> pool(candidates);
    RealColumns G;
    G.rows = D * D;
    G.cols = candidates;
    G.data.resize(G.rows * G.cols);
    for (std::size_t i = 0; i < candidates; ++i) {
        pool[i] = random_unit_vector(n, rng);
        auto coeffs = sym_basis_coefficients(pool[i], t);
        auto column = vectorize_hermitian_outer(coeffs);
        std::copy(column.begin(), column.end(), G.col(i));
    }

    std::vector<double> target(G.rows, 0.0);
    for (std::size_t i = 0; i < D; ++i) target[i] = 1.0 / static_cast<double>(D);

    std::vector<double> p(candidates, 1.0 / static_cast<double>(candidates));
    fista_simplex(G, target, p, 200);

    const double binom = static_cast<double>(D64);
    const double resid_target = std::max(1e-14, tol / (10.0 * binom));
    active_set_polish(G, target, p, resid_target);

    // prune, renormalize, assemble
    WeightedDesign design;
    design.dim = n;
    design.order = t;
    double total = 0.0;
    for (std::size_t i = 0; i < candidates; ++i)
        if (p[i] >= 1e-12) total += p[i];
    if (total <= 0.0) throw DesignConstructionError("construct_weighted_design: optimizer returned the zero vector", 1.0);
    for (std::size_t i = 0; i < candidates; ++i) {
        if (p[i] >= 1e-12) {
            design.vectors.push_back(pool[i]);
            design.weights.push_back(p[i] / total);
        }
    }
    design.validate();

    const double theta = design_moment_gap(design, t, std::numeric_limits<double>::infinity());
    if (theta > tol) {
        std::ostringstream msg;
        msg << "construct_weighted_design: reached theta_inf " << theta << " > tol " << tol;
        throw DesignConstructionError(msg.str(), theta);
    }
    return design;
}

}  // namespace r1

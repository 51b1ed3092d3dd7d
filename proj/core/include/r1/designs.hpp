#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "r1/linalg.hpp"
#include "r1/rng.hpp"

namespace r1 {

/// Normalized vectors {w_i} with convex weights {p_i} and declared order t.
struct WeightedDesign {
    std::size_t dim = 0;
    int order = 0;
    std::vector<std::vector<complexd>> vectors;
    std::vector<double> weights;

    std::size_t count() const { return vectors.size(); }
    /// Enforce the type invariants (unit vectors, convex weights).
    void validate() const;
};

struct DesignCertificate {
    int order_checked = 0;
    double theta_inf = 0.0;
    double theta_1 = 0.0;
    double tight_frame_gap = 0.0;
};

/// Thrown when the moment-matching optimizer misses the requested tolerance.
class DesignConstructionError : public std::runtime_error {
  public:
    DesignConstructionError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual(best_residual) {}
    double best_residual;
};

/// p-norm accuracy of d as an approximate k-design:
/// theta_p = binom(n+k-1,k) * || sum_i p_i (w_i w_i^*)^{ox k} - binom^{-1} P_Sym^k ||_p.
/// Computed in the Sym^k basis (D x D with D = sym_dim(n,k)); the gap
/// operator is supported on Sym^k, so the compression is exact.
double design_moment_gap(const WeightedDesign& d, int k, double p);

/// Same quantity through the explicit n^k x n^k tensors (resource-guarded);
/// test oracle for the compressed route.
double design_moment_gap_dense(const WeightedDesign& d, int k, double p);

/// Moment-match a weighted t-design from `candidates` Haar-random vectors:
/// nonnegative least-squares fit of binom^{-1} id on Sym^t with the simplex
/// constraint, accelerated projected gradient followed by active-set
/// refinement.  Weights below 1e-12 are pruned; the support never exceeds
/// sym_dim(n,t)^2 + 1.  Throws DesignConstructionError if the fit misses
/// `tol` in theta_inf.
WeightedDesign construct_weighted_design(std::size_t n, int t, std::size_t candidates,
                                         Rng& rng, double tol);

/// Scale every vector by ((n+1)n)^{1/4} so that (a a^*)^2 = ||a||^2 a a^*
/// matches the Gaussian Frobenius normalization.
std::vector<std::vector<complexd>> supernormalize(const WeightedDesign& d);

/// theta_inf(k), theta_1(k) and the tight-frame gap || sum p w w^* - id/n ||_inf.
DesignCertificate certify(const WeightedDesign& d, int k);

/// Rotate each vector along a random geodesic of length <= eps (weights
/// untouched).  The output accuracy is measured, never assumed.
WeightedDesign perturb_design(const WeightedDesign& d, double eps, Rng& rng);

/// sum_i p_i w_i w_i^* on the base space.
HermitianMatrix design_frame_operator(const WeightedDesign& d);

/// Hermitian matrix of the compressed k-th moment operator in the Sym^k
/// basis (shared by gap computation and tests).
HermitianMatrix design_sym_moment_operator(const WeightedDesign& d, int k);

}  // namespace r1

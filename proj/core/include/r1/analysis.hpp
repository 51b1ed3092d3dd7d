#pragma once

#include <string>
#include <utility>
#include <vector>

#include "r1/designs.hpp"
#include "r1/ensembles.hpp"
#include "r1/linalg.hpp"
#include "r1/rng.hpp"

namespace r1 {

/// Monte Carlo estimate of the small-ball probability
/// Q_xi = P(|tr(a a^* Z)| >= xi).
struct SmallBallEstimate {
    double xi = 0.0;
    double q_hat = 0.0;
    long trials = 0;
    double stderr_ = 0.0;  // sqrt(q(1-q)/trials)
};

/// Unit-Frobenius directions verified to lie in the nuclear-norm descent
/// cone at X, each with the tau > 0 witnessing membership.
struct DescentSample {
    LowRankSignal X;
    std::vector<HermitianMatrix> directions;
    std::vector<double> witness_tau;
};

/// One line of the verification report.
struct CheckReport {
    std::string quantity;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
    std::string bound_source;
    bool pass = false;
};

/// Draws single rank-one measurement values tr(a a^* Z): complex/real
/// standard Gaussian vectors, or super-normalized design atoms (so the
/// design value is matrix_scale * tr(w w^* Z), matching the papers'
/// normalization of A_j).
class RankOneSampler {
  public:
    enum class Kind { GaussianComplex, GaussianReal, Design };

    static RankOneSampler gaussian_complex(std::size_t n);
    static RankOneSampler gaussian_real(std::size_t n);
    static RankOneSampler design(WeightedDesign d);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }

    /// One sample of tr(a a^* Z).
    double draw_value(const HermitianMatrix& Z, Rng& rng) const;
    /// The measurement vector itself (super-normalized for designs).
    std::vector<complexd> draw_vector(Rng& rng) const;

  private:
    Kind kind_ = Kind::GaussianComplex;
    std::size_t dim_ = 0;
    WeightedDesign design_;
    std::vector<double> cumulative_;
    double atom_scale_ = 1.0;  // ((n+1)n)^{1/4}
};

/// Sample mean of |Z|^{2k} for standard complex Gaussian Z vs the exact
/// moment k!.  Returns (sample mean, reference).
std::pair<double, double> gaussian_moment_check(int k, long trials, Rng& rng);

/// Sampled second and fourth moments of S = tr(a a^* Z) against the
/// closed forms obtained from the symmetric moment formula.
struct MomentIdentityReport {
    double s2_mean = 0.0, s2_stderr = 0.0, s2_reference = 0.0;
    double s4_mean = 0.0, s4_stderr = 0.0, s4_reference = 0.0;
    bool fourth_moment_ratio_ok = true;  // E S^4 <= 24 (E S^2)^2, Gaussian sources
};
MomentIdentityReport moment_identity_check(const RankOneSampler& sampler,
                                           const HermitianMatrix& Z, long trials, Rng& rng);

SmallBallEstimate empirical_Q(const RankOneSampler& sampler, const HermitianMatrix& Z,
                              double xi, long trials, Rng& rng);

/// H = (1/sqrt(m)) sum_j eps_j A_j with Rademacher signs; A_j are the
/// ensemble's scaled rank-one matrices.
HermitianMatrix rademacher_H(const MeasurementEnsemble& e, Rng& rng);

struct WBoundReport {
    double mean_h_norm = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;          // 3.1049 sqrt(n log 2n) for designs, c * sqrt(n) reported for Gaussian
    bool bound_asserted = false; // only under the m >= 2n log n precondition and design source
    bool pass = true;
    double w_m_estimate = 0.0;   // 2 sqrt(r) * mean ||H||_inf
    double gaussian_constant = 0.0;  // mean ||H||_inf / sqrt(n), Gaussian sources
};
WBoundReport empirical_W_bound(std::size_t n, int r, std::size_t m,
                               const RankOneSampler& sampler, long trials, Rng& rng);

struct ChernoffReport {
    double mean_sum_norm = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;           // 3.4084 * m
    bool precondition_met = false;
    bool pass = true;
    double atom_norm_max = 0.0;       // max_j ||a_j||^2 observed
    double atom_norm_expected = 0.0;  // sqrt((n+1)n)
    double frame_gap = 0.0;           // || mean sum / m - sqrt((n+1)n)/n id ||_inf
    double frame_gap_3sigma = 0.0;
};
/// Matrix Chernoff constants for sums of super-normalized design atoms.
ChernoffReport chernoff_sum_check(const WeightedDesign& d, std::size_t m, long trials, Rng& rng);

/// Mix of support-decreasing and balanced off-support directions, each
/// verified by a dyadic line search tau in {2^-10, ..., 2^-1}: accepted
/// only when ||X + tau Y||_1 <= ||X||_1 + 1e-9 for some recorded tau.
DescentSample sample_descent_directions(const LowRankSignal& X, int count, Rng& rng);

/// min_j || A(Y_j) ||_2 over the sampled directions: an upper estimate of
/// the minimum conic singular value restricted to the sample (not a
/// certified lower bound).
double empirical_min_conic_singular(const MeasurementEnsemble& e, const DescentSample& sample);

/// Closed-form E S^2 = tr(Z)^2 + tr(Z^2) shared by complex Gaussian vectors
/// and (super-normalized) exact 4-designs.
double reference_second_moment(const HermitianMatrix& Z);

/// Exact fourth moments per source (Gaussian expansion / design contraction).
double reference_fourth_moment_gaussian(const HermitianMatrix& Z);
double reference_fourth_moment_design(const HermitianMatrix& Z);

}  // namespace r1

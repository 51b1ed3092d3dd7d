#pragma once

#include <vector>

#include "r1/designs.hpp"
#include "r1/linalg.hpp"
#include "r1/rng.hpp"

namespace r1 {

enum class Field { Complex, Real };

/// m rank-one measurement vectors plus a global scale: the measurement
/// matrices are A_j = matrix_scale * a_j a_j^* (scale 1 for Gaussian,
/// sqrt(n(n+1)) for design-sampled normalized vectors).  Vectors are stored
/// instead of dense matrices: A_j is always rank one, so applying the
/// operator costs O(m n^2) quadratic forms.
struct MeasurementEnsemble {
    std::size_t dim = 0;
    std::vector<std::vector<complexd>> vectors;
    double matrix_scale = 1.0;
    Field field = Field::Complex;

    std::size_t count() const { return vectors.size(); }
};

struct NoisyMeasurement {
    std::vector<double> b;
    double eta = 0.0;
    double true_noise_norm = 0.0;
};

/// Complex case: entries with independent real/imaginary parts of variance
/// 1/2 (E|entry|^2 = 1).  Real case: unit-variance real entries.
MeasurementEnsemble sample_gaussian(std::size_t n, std::size_t m, Field field, Rng& rng);

/// Each a_j independently equals w_i with probability p_i;
/// matrix_scale = sqrt(n(n+1)).
MeasurementEnsemble sample_from_design(const WeightedDesign& d, std::size_t m, Rng& rng);

/// A(Z)_j = matrix_scale * <a_j, Z a_j>, real by Hermiticity.
std::vector<double> apply(const MeasurementEnsemble& e, const HermitianMatrix& Z);

/// A^*(y) = matrix_scale * sum_j y_j a_j a_j^*.
HermitianMatrix adjoint(const MeasurementEnsemble& e, const std::vector<double>& y);

/// b + eps with eps Gaussian rescaled to || eps ||_2 = eta exactly.
NoisyMeasurement add_noise(const std::vector<double>& b, double eta, Rng& rng);

}  // namespace r1

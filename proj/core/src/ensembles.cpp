#include "r1/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace r1 {

MeasurementEnsemble sample_gaussian(std::size_t n, std::size_t m, Field field, Rng& rng) {
    if (n < 1 || m < 1) throw std::invalid_argument("sample_gaussian: n, m must be >= 1");
    MeasurementEnsemble e;
    e.dim = n;
    e.matrix_scale = 1.0;
    e.field = field;
    e.vectors.resize(m);
    for (auto& a : e.vectors) {
        a.resize(n);
        if (field == Field::Complex) {
            for (auto& entry : a) entry = rng.complex_normal();
        } else {
            for (auto& entry : a) entry = complexd(rng.normal(), 0.0);
        }
    }
    return e;
}

MeasurementEnsemble sample_from_design(const WeightedDesign& d, std::size_t m, Rng& rng) {
    d.validate();
    MeasurementEnsemble e;
    e.dim = d.dim;
    const double n = static_cast<double>(d.dim);
    e.matrix_scale = std::sqrt(n * (n + 1.0));
    e.field = Field::Complex;

    std::vector<double> cumulative(d.count());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.count(); ++i) {
        acc += d.weights[i];
        cumulative[i] = acc;
    }
    cumulative.back() = 1.0;

    e.vectors.resize(m);
    for (auto& a : e.vectors) {
        double u = rng.uniform();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t pick = static_cast<std::size_t>(it - cumulative.begin());
        if (pick >= d.count()) pick = d.count() - 1;
        a = d.vectors[pick];
    }
    return e;
}

std::vector<double> apply(const MeasurementEnsemble& e, const HermitianMatrix& Z) {
    if (Z.dim() != e.dim) throw std::invalid_argument("apply: dimension mismatch");
    std::vector<double> b(e.count());
    for (std::size_t j = 0; j < e.count(); ++j)
        b[j] = e.matrix_scale * Z.quadratic_form(e.vectors[j]);
    return b;
}

HermitianMatrix adjoint(const MeasurementEnsemble& e, const std::vector<double>& y) {
    if (y.size() != e.count()) throw std::invalid_argument("adjoint: length mismatch");
    HermitianMatrix out(e.dim);
    for (std::size_t j = 0; j < e.count(); ++j)
        out.add_outer(e.vectors[j], e.matrix_scale * y[j]);
    return out;
}

NoisyMeasurement add_noise(const std::vector<double>& b, double eta, Rng& rng) {
    if (eta < 0.0) throw std::invalid_argument("add_noise: eta must be nonnegative");
    NoisyMeasurement out;
    out.b = b;
    out.eta = eta;
    out.true_noise_norm = 0.0;
    if (eta == 0.0) return out;

    std::vector<double> eps(b.size());
    double norm = 0.0;
    do {
        for (auto& x : eps) x = rng.normal();
        norm = vector_norm(eps);
    } while (norm < 1e-12);
    const double scale = eta / norm;
    for (std::size_t j = 0; j < b.size(); ++j) out.b[j] += scale * eps[j];
    out.true_noise_norm = eta;
    return out;
}

}  // namespace r1

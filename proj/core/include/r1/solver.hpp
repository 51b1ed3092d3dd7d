#pragma once

#include <vector>

#include "r1/ensembles.hpp"
#include "r1/linalg.hpp"

namespace r1 {

enum class RecoveryMode { Nuclear, PsdTrace };

/// Constrained recovery instance:
///   minimize ||Z||_1      subject to || A(Z) - b ||_2 <= eta   (Nuclear)
///   minimize tr(Z), Z>=0  subject to || A(Z) - b ||_2 <= eta   (PsdTrace)
struct RecoveryProblem {
    MeasurementEnsemble ensemble;
    std::vector<double> b;
    double eta = 0.0;
    RecoveryMode mode = RecoveryMode::Nuclear;
};

enum class SolverStatus { Converged, MaxIters, Infeasible };

struct SolverConfig {
    int max_iters = 5000;
    double tol_primal = 1e-7;
    double tol_dual = 1e-7;
    double penalty = 1.0;       // initial ADMM penalty, residual-balanced when adapt_penalty
    bool adapt_penalty = true;
    int cg_max_iters = 50;
    double cg_tol = 1e-10;
};

struct SolverResult {
    HermitianMatrix X_hat;
    SolverStatus status = SolverStatus::MaxIters;
    int iterations = 0;
    double feasibility_gap = 0.0;  // max(0, ||A(X_hat) - b||_2 - eta), original units
    double objective = 0.0;        // nuclear norm or trace, per mode
};

/// Operator-splitting (ADMM) solver.  Internally the measurements are
/// rescaled by 1/sqrt(m) for conditioning; all reported quantities are in
/// the original scale.  Splitting: variables (Z, y = A(Z), W = Z) with the
/// Z-update a regularized least-squares solved by conjugate gradients, the
/// y-update a projection onto the l2 ball of radius eta around b, and the
/// W-update the spectral proximal step of the mode's objective.
SolverResult solve(const RecoveryProblem& problem, const SolverConfig& config = {});

struct CertifyReport {
    double feasibility_gap = 0.0;
    double objective = 0.0;
    bool has_truth = false;
    double truth_objective = 0.0;
    double relative_error = 0.0;   // ||X - X_hat||_2 / ||X||_2
    double absolute_error = 0.0;   // ||X - X_hat||_2
    bool ratio_valid = false;
    double error_ratio = 0.0;      // ||X - X_hat||_2 / (eta / sqrt(m)), eta > 0
};

/// Feasibility and objective bookkeeping; with a ground truth, also the
/// relative Frobenius error and the error/(eta/sqrt(m)) ratio the error
/// bounds are stated in.
CertifyReport certify(const SolverResult& result, const RecoveryProblem& problem,
                      const HermitianMatrix* truth = nullptr);

}  // namespace r1

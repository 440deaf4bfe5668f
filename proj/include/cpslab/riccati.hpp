#pragma once

#include "cpslab/statespace.hpp"

namespace cpslab {

// Process/measurement noise covariances.
struct NoiseSpec {
    MatrixXd Sigma_w;   // n x n, symmetric PSD
    MatrixXd Sigma_nu;  // p x p, symmetric PD
};

// Result of a Riccati-based gain design.
struct GainReport {
    MatrixXd gain;             // L (observer) or F (state feedback)
    MatrixXd P;                // stabilizing Riccati solution
    MatrixXd innovation_cov;   // Sigma_ry = C P C^T + Sigma_nu (Kalman case only)
    double closed_radius = 0;  // spectral radius of A - L C resp. A + B F
};

// Filter-orientation DARE with optional state/output noise cross term S (n x p):
//   P = A P A^T + Sigma_w - (A P C^T + S)(C P C^T + Sigma_nu)^{-1}(A P C^T + S)^T
// Solved by fixed-point iteration; throws on non-convergence.
MatrixXd solve_filter_dare(const MatrixXd& A, const MatrixXd& C, const MatrixXd& Sigma_w,
                           const MatrixXd& Sigma_nu, const MatrixXd& S, double tol = 1e-12,
                           int max_iter = 10000);

// Control-orientation DARE:
//   P = A^T P A + Qx - A^T P B (Ru + B^T P B)^{-1} B^T P A
MatrixXd solve_control_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Qx,
                            const MatrixXd& Ru, double tol = 1e-12, int max_iter = 10000);

// Steady-state Kalman gain L = (A P C^T + S) Sigma_ry^{-1}, Sigma_ry = C P C^T + Sigma_nu.
GainReport kalman_gain(const StateSpace& model, const NoiseSpec& noise,
                       const MatrixXd& cross = MatrixXd());

// LQ feedback F = -(Ru + B^T P B)^{-1} B^T P A, A + B F Schur.
GainReport lq_gain(const StateSpace& model, const MatrixXd& Qx, const MatrixXd& Ru);

}  // namespace cpslab

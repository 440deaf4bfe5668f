#pragma once

#include <vector>

#include "cpslab/statespace.hpp"

namespace cpslab {

// Time series of fixed-dimension vectors at the loop sample rate.
using Signal = std::vector<VectorXd>;

// Stabilizing gain set generating a doubly-coprime factor family.
struct FactorGains {
    MatrixXd F;  // m x n state feedback, A + B F Schur
    MatrixXd L;  // n x p observer gain, A - L C Schur
    MatrixXd W;  // p x p invertible output weighting
    MatrixXd V;  // m x m invertible input weighting
};

// The eight stable transfer systems of the doubly-coprime factorization
// G = N M^{-1} = Mhat^{-1} Nhat tied together by the 2x2 Bezout identity.
struct BezoutFactors {
    StateSpace M, N, Mhat, Nhat, X, Y, Xhat, Yhat;
    StateSpace plant;
    FactorGains gains;
};

// Stable Youla parameter.
struct YoulaParam {
    StateSpace Q;  // m x p, stable
};

// Compensators re-expressing a gain-mode (F_i, L_i) loop in the base frame.
struct ModeCompensators {
    StateSpace V_i0, V_0i;    // input-residual change of frame and its inverse
    StateSpace R_i0, R_0i;    // output-residual change of frame and its inverse
    StateSpace Vbar_i0;       // [X Y] [-Yhat_i; Xhat_i]
    StateSpace Rbar_i0;       // [X_i Y_i] [-Yhat; Xhat]
    StateSpace Q_i;           // Rbar_i0 * R_0i
    StateSpace Q_u;           // = V_i0
    StateSpace Q_e;           // = Vbar_i0 + Q_i
};

BezoutFactors build_bezout_factors(const StateSpace& model, const FactorGains& gains);

// Default gains with W = V = I.
FactorGains make_gains(const MatrixXd& F, const MatrixXd& L);

// Max over a log frequency grid of || [X Y; -Nhat Mhat][M -Yhat; N Xhat] - I ||_F.
double verify_bezout(const BezoutFactors& f, int grid_size = 512);

// K = -(X + Q Nhat)^{-1} (Y - Q Mhat); stable Q yields an internally
// stabilizing controller u = K y.
StateSpace youla_controller(const BezoutFactors& f, const YoulaParam& q);

// A-matrix of the closed loop formed by plant G with controller u = K y.
MatrixXd closed_loop_matrix(const StateSpace& plant, const StateSpace& controller);

ModeCompensators reparameterize_mode(const BezoutFactors& base, const MatrixXd& F_i,
                                     const MatrixXd& L_i);

// r_y = -Nhat u + Mhat y ; r_u = (X + Q Nhat) u + (Y - Q Mhat) y.
std::pair<Signal, Signal> residuals_from_io(const BezoutFactors& f, const YoulaParam& q,
                                            const Signal& u, const Signal& y);

// Inverse map: u = M r_u + (M Q - Yhat) r_y ; y = N r_u + (Xhat + N Q) r_y.
std::pair<Signal, Signal> io_from_residuals(const BezoutFactors& f, const YoulaParam& q,
                                            const Signal& r_u, const Signal& r_y);

// Run a signal through a filter started from zero state.
Signal filter_signal(const StateSpace& sys, const Signal& input);

}  // namespace cpslab

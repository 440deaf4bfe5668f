#pragma once

#include <Eigen/Dense>

#include "cpslab/random.hpp"
#include "cpslab/statespace.hpp"

namespace testutil {

using cpslab::MatrixXd;
using cpslab::StateSpace;

// Three-wheel omnidirectional robot follower model, 10 Hz.
inline StateSpace robot_plant() {
    MatrixXd A(3, 3), B(3, 3);
    A << 0.428, 0.020, 0.0001,
         0.026, 0.419, 0.0037,
         0.284, -0.09, 0.2922;
    B << -0.685, 0.025, 0.655,
          0.406, -0.803, 0.344,
          4.012, 3.494, 3.346;
    B *= 1e-4;
    return StateSpace(A, B, MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3), 0.1);
}

// Random stable system with n states, m inputs, p outputs.
inline StateSpace random_stable(std::uint64_t seed, int n, int m, int p, double Ts = 0.1,
                                bool with_feedthrough = true) {
    cpslab::GaussianSampler g(seed);
    MatrixXd A(n, n), B(n, m), C(p, n), D(p, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = g.next();
    // Scale A to a comfortable spectral radius.
    const double rho = cpslab::spectral_radius(A);
    if (rho > 0) A *= 0.7 / rho;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) B(i, j) = g.next();
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = g.next();
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < m; ++j) D(i, j) = with_feedthrough ? g.next() : 0.0;
    return StateSpace(A, B, C, D, Ts);
}

inline double response_gap(const StateSpace& a, const StateSpace& b, int grid = 64) {
    double worst = 0.0;
    for (double w : cpslab::freq_grid(a.Ts, grid))
        worst = std::max(worst, (a.freq_response(w) - b.freq_response(w)).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace testutil

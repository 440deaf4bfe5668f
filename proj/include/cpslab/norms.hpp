#pragma once

#include "cpslab/statespace.hpp"

namespace cpslab {

// H-infinity norm of a stable discrete-time system, relative accuracy ~1e-6.
// Bracket from a frequency-grid lower bound, refined by bisection on the
// bounded-real eigenvalue test (after a norm-preserving bilinear transform).
double hinf_norm(const StateSpace& g, double rel_tol = 1e-7, int grid_points = 512);

// Discrete-time H2 norm sqrt(trace(C P C^T + D^T D)), P the controllability
// Gramian (direct term included).
double h2_norm(const StateSpace& g);

}  // namespace cpslab

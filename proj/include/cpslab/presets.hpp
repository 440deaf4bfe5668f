#pragma once

#include "cpslab/riccati.hpp"
#include "cpslab/statespace.hpp"

namespace cpslab::presets {

inline constexpr double kTs = 0.1;

// Identified three-wheel omnidirectional robot model (sampled at 10 Hz).
inline StateSpace robot_model() {
    MatrixXd A(3, 3), B(3, 3);
    A << 0.428, 0.020, 0.0001, 0.026, 0.419, 0.0037, 0.284, -0.09, 0.2922;
    B << -0.685, 0.025, 0.655, 0.406, -0.803, 0.344, 4.012, 3.494, 3.346;
    B *= 1e-4;
    return StateSpace(A, B, MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3), kTs);
}

// SISO first-order filter gain*(z - zero)/(z - pole) as a state-space cell.
inline StateSpace first_order(double gain, double zero, double pole, double ts = kTs) {
    MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << pole;
    B << 1.0;
    C << gain * (pole - zero);
    D << gain;
    return StateSpace(A, B, C, D, ts);
}

// Residual fusion filter on r_y: diag{ 1/(z-0.1) }.
inline StateSpace q_r1(double ts = kTs) {
    StateSpace cell = first_order(0.0, 0.0, 0.1, ts);
    cell.C << 1.0;
    cell.D << 0.0;
    return diagcat(diagcat(cell, cell), cell);
}

// Residual fusion filter on r_u: c/(z+0.1) * diag{ z+0.4, z+0.3, z+0.2 }.
inline StateSpace q_r2(double c, double ts = kTs) {
    StateSpace g = diagcat(diagcat(first_order(c, -0.4, -0.1, ts),
                                   first_order(c, -0.3, -0.1, ts)),
                           first_order(c, -0.2, -0.1, ts));
    return g;
}

// Station control filter: diag{ 10(z+0.1)/(z+0.4), 10(z+0.1)/(z+0.3), 10(z+0.1)/(z+0.2) }.
inline StateSpace q_umc(double ts = kTs) {
    return diagcat(diagcat(first_order(10.0, -0.1, -0.4, ts),
                           first_order(10.0, -0.1, -0.3, ts)),
                   first_order(10.0, -0.1, -0.2, ts));
}

// Reference shaping gain mapping the commanded output to the loop reference.
inline MatrixXd reference_shaping() {
    MatrixXd T(3, 3);
    T << -4257.4943, 2463.2315, 662.2074, 10.9463, -4940.2157, 664.6608, 4284.4037,
        2462.1782, 663.4313;
    return T;
}

// Default embedded gains: LQ state feedback and steady-state Kalman observer
// with unit weights and 1e-6 noise covariances.
struct RobotDesign {
    StateSpace plant;
    NoiseSpec noise;
    MatrixXd F, L;
    MatrixXd Sigma_ry;
};

inline RobotDesign robot_design(double noise_scale = 1e-6) {
    RobotDesign d;
    d.plant = robot_model();
    d.noise = NoiseSpec{noise_scale * MatrixXd::Identity(3, 3),
                        noise_scale * MatrixXd::Identity(3, 3)};
    auto kal = kalman_gain(d.plant, d.noise);
    auto lq = lq_gain(d.plant, MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3));
    d.F = lq.gain;
    d.L = kal.gain;
    d.Sigma_ry = kal.innovation_cov;
    return d;
}

}  // namespace cpslab::presets

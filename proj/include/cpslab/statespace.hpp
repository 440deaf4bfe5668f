#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cpslab {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;

// Discrete-time LTI quadruple (A,B,C,D) with sample period Ts.
// The universal carrier for plants, factors and filters.
struct StateSpace {
    MatrixXd A, B, C, D;
    double Ts = 1.0;

    StateSpace() = default;
    StateSpace(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d, double ts);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }

    // Static (memoryless) system y = K u.
    static StateSpace static_gain(const MatrixXd& K, double ts);
    static StateSpace identity(int dim, double ts);

    // One recursion step: returns (next_state, output).
    std::pair<VectorXd, VectorXd> step(const VectorXd& state, const VectorXd& input) const;

    // C (zI - A)^{-1} B + D at z = exp(i*omega*Ts).
    MatrixXcd freq_response(double omega) const;
};

// Second after first: u -> first -> second -> y.
StateSpace series(const StateSpace& first, const StateSpace& second);
// y = g1(u) + g2(u); same input and output dimensions.
StateSpace parallel_add(const StateSpace& g1, const StateSpace& g2);
// Outputs stacked: y = [g1(u); g2(u)], shared input.
StateSpace vertcat(const StateSpace& g1, const StateSpace& g2);
// Inputs stacked: y = g1(u1) + g2(u2), u = [u1; u2].
StateSpace horzcat(const StateSpace& g1, const StateSpace& g2);
// Block-diagonal composition: u = [u1; u2] -> y = [g1(u1); g2(u2)].
StateSpace diagcat(const StateSpace& g1, const StateSpace& g2);
// I/O inversion, requires square invertible D.
StateSpace invert_io(const StateSpace& g);

bool is_schur(const MatrixXd& A);
double spectral_radius(const MatrixXd& A);

// Logarithmically spaced frequency grid in (0, pi/Ts].
std::vector<double> freq_grid(double Ts, int count);

// Stateful runner for a StateSpace used as a filter inside the loop.
class Filter {
public:
    Filter() = default;
    explicit Filter(StateSpace sys);

    // Output at the current step without advancing the state.
    VectorXd peek(const VectorXd& u) const;
    // Output at the current step, then advance the state.
    VectorXd step(const VectorXd& u);
    void reset();

    const StateSpace& sys() const { return sys_; }
    const VectorXd& state() const { return x_; }
    void set_state(const VectorXd& x) { x_ = x; }
    // Swap the realization in place; the state carries over when the state
    // dimension is unchanged, otherwise it is reset to zero.
    void replace_system(StateSpace sys);

private:
    StateSpace sys_;
    VectorXd x_;
};

}  // namespace cpslab

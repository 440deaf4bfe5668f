#include "cpslab/statespace.hpp"

#include <cmath>
#include <stdexcept>

namespace cpslab {

StateSpace::StateSpace(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d, double ts)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)), Ts(ts) {
    if (Ts <= 0.0) throw std::invalid_argument("StateSpace: Ts must be positive");
    if (A.rows() != A.cols()) throw std::invalid_argument("StateSpace: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("StateSpace: B row count mismatch");
    if (C.cols() != A.cols()) throw std::invalid_argument("StateSpace: C column count mismatch");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw std::invalid_argument("StateSpace: D dimension mismatch");
}

StateSpace StateSpace::static_gain(const MatrixXd& K, double ts) {
    const auto p = K.rows();
    const auto m = K.cols();
    return StateSpace(MatrixXd::Zero(0, 0), MatrixXd::Zero(0, m), MatrixXd::Zero(p, 0), K, ts);
}

StateSpace StateSpace::identity(int dim, double ts) {
    return static_gain(MatrixXd::Identity(dim, dim), ts);
}

std::pair<VectorXd, VectorXd> StateSpace::step(const VectorXd& state, const VectorXd& input) const {
    if (state.size() != n() || input.size() != m())
        throw std::invalid_argument("StateSpace::step: dimension mismatch");
    VectorXd next = A * state + B * input;
    VectorXd out = C * state + D * input;
    return {std::move(next), std::move(out)};
}

MatrixXcd StateSpace::freq_response(double omega) const {
    const std::complex<double> z = std::polar(1.0, omega * Ts);
    if (n() == 0) return D.cast<std::complex<double>>();
    MatrixXcd zIA = z * MatrixXcd::Identity(n(), n()) - A.cast<std::complex<double>>();
    Eigen::FullPivLU<MatrixXcd> lu(zIA);
    if (!lu.isInvertible())
        throw std::runtime_error("StateSpace::freq_response: resolvent singular at given frequency");
    return C.cast<std::complex<double>>() * lu.solve(B.cast<std::complex<double>>()) +
           D.cast<std::complex<double>>();
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
    if (g2.m() != g1.p()) throw std::invalid_argument("series: dimension mismatch");
    const int n1 = g1.n(), n2 = g2.n();
    MatrixXd A(n1 + n2, n1 + n2), B(n1 + n2, g1.m()), C(g2.p(), n1 + n2);
    A.setZero();
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
    A.bottomRightCorner(n2, n2) = g2.A;
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B * g1.D;
    C.leftCols(n1) = g2.D * g1.C;
    C.rightCols(n2) = g2.C;
    return StateSpace(A, B, C, g2.D * g1.D, g1.Ts);
}

StateSpace parallel_add(const StateSpace& g1, const StateSpace& g2) {
    if (g1.m() != g2.m() || g1.p() != g2.p())
        throw std::invalid_argument("parallel_add: dimension mismatch");
    const int n1 = g1.n(), n2 = g2.n();
    MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    MatrixXd B(n1 + n2, g1.m());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B;
    MatrixXd C(g1.p(), n1 + n2);
    C.leftCols(n1) = g1.C;
    C.rightCols(n2) = g2.C;
    return StateSpace(A, B, C, g1.D + g2.D, g1.Ts);
}

StateSpace vertcat(const StateSpace& g1, const StateSpace& g2) {
    if (g1.m() != g2.m()) throw std::invalid_argument("vertcat: input dimension mismatch");
    const int n1 = g1.n(), n2 = g2.n();
    MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    MatrixXd B(n1 + n2, g1.m());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B;
    MatrixXd C = MatrixXd::Zero(g1.p() + g2.p(), n1 + n2);
    C.topLeftCorner(g1.p(), n1) = g1.C;
    C.bottomRightCorner(g2.p(), n2) = g2.C;
    MatrixXd D(g1.p() + g2.p(), g1.m());
    D.topRows(g1.p()) = g1.D;
    D.bottomRows(g2.p()) = g2.D;
    return StateSpace(A, B, C, D, g1.Ts);
}

StateSpace horzcat(const StateSpace& g1, const StateSpace& g2) {
    if (g1.p() != g2.p()) throw std::invalid_argument("horzcat: output dimension mismatch");
    const int n1 = g1.n(), n2 = g2.n();
    MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    MatrixXd B = MatrixXd::Zero(n1 + n2, g1.m() + g2.m());
    B.topLeftCorner(n1, g1.m()) = g1.B;
    B.bottomRightCorner(n2, g2.m()) = g2.B;
    MatrixXd C(g1.p(), n1 + n2);
    C.leftCols(n1) = g1.C;
    C.rightCols(n2) = g2.C;
    MatrixXd D(g1.p(), g1.m() + g2.m());
    D.leftCols(g1.m()) = g1.D;
    D.rightCols(g2.m()) = g2.D;
    return StateSpace(A, B, C, D, g1.Ts);
}

StateSpace diagcat(const StateSpace& g1, const StateSpace& g2) {
    const int n1 = g1.n(), n2 = g2.n();
    MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    MatrixXd B = MatrixXd::Zero(n1 + n2, g1.m() + g2.m());
    B.topLeftCorner(n1, g1.m()) = g1.B;
    B.bottomRightCorner(n2, g2.m()) = g2.B;
    MatrixXd C = MatrixXd::Zero(g1.p() + g2.p(), n1 + n2);
    C.topLeftCorner(g1.p(), n1) = g1.C;
    C.bottomRightCorner(g2.p(), n2) = g2.C;
    MatrixXd D = MatrixXd::Zero(g1.p() + g2.p(), g1.m() + g2.m());
    D.topLeftCorner(g1.p(), g1.m()) = g1.D;
    D.bottomRightCorner(g2.p(), g2.m()) = g2.D;
    return StateSpace(A, B, C, D, g1.Ts);
}

StateSpace invert_io(const StateSpace& g) {
    if (g.D.rows() != g.D.cols())
        throw std::invalid_argument("invert_io: D must be square");
    Eigen::JacobiSVD<MatrixXd> svd(g.D, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-12 * std::max(1.0, smax))
        throw std::invalid_argument("invert_io: D singular, smallest singular value " +
                                    std::to_string(smin));
    MatrixXd Dinv = g.D.inverse();
    return StateSpace(g.A - g.B * Dinv * g.C, g.B * Dinv, -Dinv * g.C, Dinv, g.Ts);
}

double spectral_radius(const MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur(const MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("is_schur: matrix must be square");
    return spectral_radius(A) < 1.0 - 1e-12;
}

std::vector<double> freq_grid(double Ts, int count) {
    // Log-spaced in (0, pi/Ts]; low end fixed at 1e-4 * pi/Ts.
    std::vector<double> grid(count);
    const double hi = M_PI / Ts;
    const double lo = 1e-4 * hi;
    for (int i = 0; i < count; ++i) {
        const double t = (count == 1) ? 1.0 : static_cast<double>(i) / (count - 1);
        grid[i] = lo * std::pow(hi / lo, t);
    }
    return grid;
}

Filter::Filter(StateSpace sys) : sys_(std::move(sys)), x_(VectorXd::Zero(sys_.n())) {}

VectorXd Filter::peek(const VectorXd& u) const {
    return sys_.C * x_ + sys_.D * u;
}

VectorXd Filter::step(const VectorXd& u) {
    VectorXd y = sys_.C * x_ + sys_.D * u;
    x_ = sys_.A * x_ + sys_.B * u;
    return y;
}

void Filter::reset() { x_.setZero(); }

void Filter::replace_system(StateSpace sys) {
    const bool keep = sys.n() == sys_.n();
    sys_ = std::move(sys);
    if (!keep) x_ = VectorXd::Zero(sys_.n());
}

}  // namespace cpslab

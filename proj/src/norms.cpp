#include "cpslab/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace cpslab {

namespace {

double max_singular_value(const MatrixXcd& M) {
    return Eigen::JacobiSVD<MatrixXcd>(M).singularValues().maxCoeff();
}

struct Continuous {
    MatrixXd A, B, C, D;
};

// Tustin map z = (1+s)/(1-s); preserves the H-infinity norm.
Continuous to_continuous(const StateSpace& g) {
    const int n = g.n();
    MatrixXd ApI = g.A + MatrixXd::Identity(n, n);
    Eigen::FullPivLU<MatrixXd> lu(ApI);
    if (!lu.isInvertible())
        throw std::runtime_error("hinf_norm: A has eigenvalue -1, bilinear transform singular");
    MatrixXd inv = lu.inverse();
    Continuous c;
    c.A = inv * (g.A - MatrixXd::Identity(n, n));
    c.B = std::sqrt(2.0) * inv * g.B;
    c.C = std::sqrt(2.0) * g.C * inv;
    c.D = g.D - g.C * inv * g.B;
    return c;
}

// True iff the bounded-real Hamiltonian for level gamma has an eigenvalue on
// the imaginary axis, i.e. gamma is below the H-infinity norm.
bool gamma_below_norm(const Continuous& c, double gamma) {
    const int n = static_cast<int>(c.A.rows());
    const int m = static_cast<int>(c.B.cols());
    MatrixXd R = gamma * gamma * MatrixXd::Identity(m, m) - c.D.transpose() * c.D;
    Eigen::LDLT<MatrixXd> Rf(R);
    MatrixXd RinvDtC = Rf.solve(c.D.transpose() * c.C);
    MatrixXd RinvBt = Rf.solve(c.B.transpose());
    MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = c.A + c.B * RinvDtC;
    H.topRightCorner(n, n) = c.B * RinvBt;
    H.bottomLeftCorner(n, n) = -c.C.transpose() * (MatrixXd::Identity(c.D.rows(), c.D.rows()) +
                                                   c.D * Rf.solve(c.D.transpose())) * c.C;
    H.bottomRightCorner(n, n) = -H.topLeftCorner(n, n).transpose();
    Eigen::EigenSolver<MatrixXd> es(H, /*computeEigenvectors=*/false);
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const auto ev = es.eigenvalues()(i);
        if (std::abs(ev.real()) < 1e-8 * scale) return true;
    }
    return false;
}

}  // namespace

double hinf_norm(const StateSpace& g, double rel_tol, int grid_points) {
    if (g.n() > 0 && !is_schur(g.A))
        throw std::invalid_argument("hinf_norm: system is not stable");
    // Grid lower bound (also the exact answer for static systems).
    double lo = max_singular_value(g.D.cast<std::complex<double>>());
    if (g.n() == 0) return lo;
    for (double w : freq_grid(g.Ts, grid_points))
        lo = std::max(lo, max_singular_value(g.freq_response(w)));
    lo = std::max(lo, max_singular_value(g.freq_response(0.0)));
    if (lo == 0.0) return 0.0;

    const Continuous c = to_continuous(g);
    double hi = 10.0 * lo;
    int expand = 0;
    while (gamma_below_norm(c, hi)) {
        hi *= 10.0;
        if (++expand > 6) throw std::runtime_error("hinf_norm: upper bracket search failed");
    }
    double lo_b = lo * (1.0 - 1e-9);
    while (hi - lo_b > rel_tol * lo_b) {
        const double mid = 0.5 * (lo_b + hi);
        if (gamma_below_norm(c, mid))
            lo_b = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo_b + hi);
}

double h2_norm(const StateSpace& g) {
    if (g.n() > 0 && !is_schur(g.A))
        throw std::invalid_argument("h2_norm: system is not stable");
    double acc = g.D.squaredNorm();
    if (g.n() > 0) {
        // Controllability Gramian by doubling: P = sum_k A^k B B^T (A^k)^T.
        MatrixXd P = g.B * g.B.transpose();
        MatrixXd Ak = g.A;
        for (int it = 0; it < 200 && Ak.cwiseAbs().maxCoeff() > 1e-150; ++it) {
            P = P + Ak * P * Ak.transpose();
            Ak = Ak * Ak;
        }
        acc += (g.C * P * g.C.transpose()).trace();
    }
    return std::sqrt(acc);
}

}  // namespace cpslab

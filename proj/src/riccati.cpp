#include "cpslab/riccati.hpp"

#include <stdexcept>

namespace cpslab {

namespace {

void check_symmetric_psd(const MatrixXd& M, const char* name, bool strict) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(std::string(name) + ": not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    const double lo = es.eigenvalues().minCoeff();
    if (strict ? lo <= 0.0 : lo < -1e-10)
        throw std::invalid_argument(std::string(name) + ": indefinite");
}

}  // namespace

MatrixXd solve_filter_dare(const MatrixXd& A, const MatrixXd& C, const MatrixXd& Sigma_w,
                           const MatrixXd& Sigma_nu, const MatrixXd& S, double tol, int max_iter) {
    check_symmetric_psd(Sigma_w, "Sigma_w", false);
    // PSD suffices here: the innovation covariance C P C^T + Sigma_nu only
    // needs to stay invertible along the iteration.
    check_symmetric_psd(Sigma_nu, "Sigma_nu", false);
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C.rows());
    const MatrixXd S0 = (S.size() == 0) ? MatrixXd::Zero(n, p) : S;
    MatrixXd P = Sigma_w;
    for (int it = 0; it < max_iter; ++it) {
        MatrixXd K = A * P * C.transpose() + S0;
        MatrixXd R = C * P * C.transpose() + Sigma_nu;
        MatrixXd Pn = A * P * A.transpose() + Sigma_w - K * R.ldlt().solve(K.transpose());
        Pn = 0.5 * (Pn + Pn.transpose());
        const double delta = (Pn - P).cwiseAbs().maxCoeff();
        P = Pn;
        if (delta < tol * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
    }
    throw std::runtime_error("solve_filter_dare: no convergence (detectability failure?)");
}

MatrixXd solve_control_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Qx,
                            const MatrixXd& Ru, double tol, int max_iter) {
    check_symmetric_psd(Qx, "Qx", false);
    check_symmetric_psd(Ru, "Ru", true);
    MatrixXd P = Qx;
    for (int it = 0; it < max_iter; ++it) {
        MatrixXd BtP = B.transpose() * P;
        MatrixXd G = Ru + BtP * B;
        MatrixXd Pn = A.transpose() * P * A + Qx -
                      (BtP * A).transpose() * G.ldlt().solve(BtP * A);
        Pn = 0.5 * (Pn + Pn.transpose());
        const double delta = (Pn - P).cwiseAbs().maxCoeff();
        P = Pn;
        if (delta < tol * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
    }
    throw std::runtime_error("solve_control_dare: no convergence (stabilizability failure?)");
}

GainReport kalman_gain(const StateSpace& model, const NoiseSpec& noise, const MatrixXd& cross) {
    GainReport r;
    r.P = solve_filter_dare(model.A, model.C, noise.Sigma_w, noise.Sigma_nu, cross);
    const MatrixXd S0 = (cross.size() == 0) ? MatrixXd::Zero(model.n(), model.p()) : cross;
    r.innovation_cov = model.C * r.P * model.C.transpose() + noise.Sigma_nu;
    r.gain = (model.A * r.P * model.C.transpose() + S0) * r.innovation_cov.inverse();
    r.closed_radius = spectral_radius(model.A - r.gain * model.C);
    if (r.closed_radius >= 1.0)
        throw std::runtime_error("kalman_gain: A - L C not Schur");
    return r;
}

GainReport lq_gain(const StateSpace& model, const MatrixXd& Qx, const MatrixXd& Ru) {
    GainReport r;
    r.P = solve_control_dare(model.A, model.B, Qx, Ru);
    MatrixXd G = Ru + model.B.transpose() * r.P * model.B;
    r.gain = -G.ldlt().solve(model.B.transpose() * r.P * model.A);
    r.closed_radius = spectral_radius(model.A + model.B * r.gain);
    if (r.closed_radius >= 1.0)
        throw std::runtime_error("lq_gain: A + B F not Schur");
    return r;
}

}  // namespace cpslab

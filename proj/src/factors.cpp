#include "cpslab/factors.hpp"

#include <stdexcept>

namespace cpslab {

FactorGains make_gains(const MatrixXd& F, const MatrixXd& L) {
    FactorGains g;
    g.F = F;
    g.L = L;
    g.W = MatrixXd::Identity(L.cols(), L.cols());
    g.V = MatrixXd::Identity(F.rows(), F.rows());
    return g;
}

BezoutFactors build_bezout_factors(const StateSpace& model, const FactorGains& gains) {
    const MatrixXd& A = model.A;
    const MatrixXd& B = model.B;
    const MatrixXd& C = model.C;
    const MatrixXd& D = model.D;
    const MatrixXd& F = gains.F;
    const MatrixXd& L = gains.L;
    const MatrixXd& W = gains.W;
    const MatrixXd& V = gains.V;
    const double Ts = model.Ts;
    const int m = model.m(), p = model.p();

    MatrixXd AF = A + B * F;
    MatrixXd AL = A - L * C;
    if (!is_schur(AF)) throw std::invalid_argument("build_bezout_factors: A + B F not Schur");
    if (!is_schur(AL)) throw std::invalid_argument("build_bezout_factors: A - L C not Schur");
    MatrixXd Winv = W.inverse();

    BezoutFactors f;
    f.plant = model;
    f.gains = gains;
    f.Mhat = StateSpace(AL, -L, W * C, W, Ts);
    f.Nhat = StateSpace(AL, B - L * D, W * C, W * D, Ts);
    f.M = StateSpace(AF, B * V, F, V, Ts);
    f.N = StateSpace(AF, B * V, C + D * F, D * V, Ts);
    f.Xhat = StateSpace(AF, L, C + D * F, Winv, Ts);
    f.Yhat = StateSpace(AF, -L * Winv, F, MatrixXd::Zero(m, p), Ts);
    f.X = StateSpace(AL, -(B - L * D), V.inverse() * F, V.inverse(), Ts);
    f.Y = StateSpace(AL, -L, V.inverse() * F, MatrixXd::Zero(m, p), Ts);
    return f;
}

double verify_bezout(const BezoutFactors& f, int grid_size) {
    const int m = f.plant.m(), p = f.plant.p();
    double worst = 0.0;
    for (double w : freq_grid(f.plant.Ts, grid_size)) {
        MatrixXcd left(m + p, m + p), right(m + p, m + p);
        left.topLeftCorner(m, m) = f.X.freq_response(w);
        left.topRightCorner(m, p) = f.Y.freq_response(w);
        left.bottomLeftCorner(p, m) = -f.Nhat.freq_response(w);
        left.bottomRightCorner(p, p) = f.Mhat.freq_response(w);
        right.topLeftCorner(m, m) = f.M.freq_response(w);
        right.topRightCorner(m, p) = -f.Yhat.freq_response(w);
        right.bottomLeftCorner(p, m) = f.N.freq_response(w);
        right.bottomRightCorner(p, p) = f.Xhat.freq_response(w);
        MatrixXcd err = left * right - MatrixXcd::Identity(m + p, m + p);
        worst = std::max(worst, err.norm());
    }
    return worst;
}

StateSpace youla_controller(const BezoutFactors& f, const YoulaParam& q) {
    StateSpace XQN = parallel_add(f.X, series(f.Nhat, q.Q));
    StateSpace YQM = parallel_add(f.Y, series(f.Mhat, series(q.Q, StateSpace::static_gain(
                                                      -MatrixXd::Identity(q.Q.p(), q.Q.p()),
                                                      q.Q.Ts))));
    StateSpace inv = invert_io(XQN);
    StateSpace K = series(YQM, inv);
    // K = -(X + Q Nhat)^{-1} (Y - Q Mhat)
    K.C = -K.C;
    K.D = -K.D;
    return K;
}

MatrixXd closed_loop_matrix(const StateSpace& g, const StateSpace& k) {
    // u = K y, y = G u; well-posedness requires I - D_K D_G invertible.
    const int m = g.m();
    MatrixXd S = MatrixXd::Identity(m, m) - k.D * g.D;
    Eigen::FullPivLU<MatrixXd> lu(S);
    if (!lu.isInvertible())
        throw std::runtime_error("closed_loop_matrix: algebraic loop ill-posed");
    MatrixXd Sinv = lu.inverse();
    // u = Sinv (K_C x_k + K_D G_C x_g)
    const int ng = g.n(), nk = k.n();
    MatrixXd Ug(m, ng), Uk(m, nk);
    Ug = Sinv * k.D * g.C;
    Uk = Sinv * k.C;
    MatrixXd Acl(ng + nk, ng + nk);
    Acl.topLeftCorner(ng, ng) = g.A + g.B * Ug;
    Acl.topRightCorner(ng, nk) = g.B * Uk;
    // y = G_C x_g + G_D u
    Acl.bottomLeftCorner(nk, ng) = k.B * (g.C + g.D * Ug);
    Acl.bottomRightCorner(nk, nk) = k.A + k.B * g.D * Uk;
    return Acl;
}

ModeCompensators reparameterize_mode(const BezoutFactors& base, const MatrixXd& F_i,
                                     const MatrixXd& L_i) {
    const StateSpace& g = base.plant;
    const MatrixXd& A = g.A;
    const MatrixXd& B = g.B;
    const MatrixXd& C = g.C;
    const MatrixXd& F = base.gains.F;
    const MatrixXd& L = base.gains.L;
    const double Ts = g.Ts;
    const int m = g.m(), p = g.p();

    MatrixXd AFi = A + B * F_i;
    MatrixXd ALi = A - L_i * C;
    if (!is_schur(AFi)) throw std::invalid_argument("reparameterize_mode: A + B F_i not Schur");
    if (!is_schur(ALi)) throw std::invalid_argument("reparameterize_mode: A - L_i C not Schur");

    ModeCompensators mc;
    mc.V_i0 = StateSpace(AFi, B, F_i - F, MatrixXd::Identity(m, m), Ts);
    mc.V_0i = StateSpace(A + B * F, B, F - F_i, MatrixXd::Identity(m, m), Ts);
    mc.R_0i = StateSpace(A - L * C, L - L_i, -C, MatrixXd::Identity(p, p), Ts);
    mc.R_i0 = StateSpace(ALi, L - L_i, C, MatrixXd::Identity(p, p), Ts);

    FactorGains gi = base.gains;
    gi.F = F_i;
    gi.L = L_i;
    BezoutFactors fi = build_bezout_factors(g, gi);

    // Vbar_i0 = [X Y] [-Yhat_i; Xhat_i],  Rbar_i0 = [X_i Y_i] [-Yhat; Xhat].
    StateSpace negYhat_i = fi.Yhat;
    negYhat_i.C = -negYhat_i.C;
    negYhat_i.D = -negYhat_i.D;
    mc.Vbar_i0 = series(vertcat(negYhat_i, fi.Xhat), horzcat(base.X, base.Y));
    StateSpace negYhat = base.Yhat;
    negYhat.C = -negYhat.C;
    negYhat.D = -negYhat.D;
    mc.Rbar_i0 = series(vertcat(negYhat, base.Xhat), horzcat(fi.X, fi.Y));

    mc.Q_i = series(mc.R_0i, mc.Rbar_i0);
    mc.Q_u = mc.V_i0;
    mc.Q_e = parallel_add(mc.Vbar_i0, mc.Q_i);
    return mc;
}

Signal filter_signal(const StateSpace& sys, const Signal& input) {
    Filter f(sys);
    Signal out;
    out.reserve(input.size());
    for (const auto& u : input) out.push_back(f.step(u));
    return out;
}

std::pair<Signal, Signal> residuals_from_io(const BezoutFactors& f, const YoulaParam& q,
                                            const Signal& u, const Signal& y) {
    if (u.size() != y.size())
        throw std::invalid_argument("residuals_from_io: signal length mismatch");
    // r_y = -Nhat u + Mhat y
    Signal ry_a = filter_signal(f.Nhat, u);
    Signal ry_b = filter_signal(f.Mhat, y);
    // r_u = (X + Q Nhat) u + (Y - Q Mhat) y
    Signal xu = filter_signal(f.X, u);
    Signal yy = filter_signal(f.Y, y);
    Signal ry;
    ry.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) ry.push_back(ry_b[k] - ry_a[k]);
    Signal qn = filter_signal(q.Q, ry_a);   // Q Nhat u
    Signal qm = filter_signal(q.Q, ry_b);   // Q Mhat y
    Signal ru;
    ru.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) ru.push_back(xu[k] + qn[k] + yy[k] - qm[k]);
    return {std::move(ru), std::move(ry)};
}

std::pair<Signal, Signal> io_from_residuals(const BezoutFactors& f, const YoulaParam& q,
                                            const Signal& r_u, const Signal& r_y) {
    if (r_u.size() != r_y.size())
        throw std::invalid_argument("io_from_residuals: signal length mismatch");
    Signal mu = filter_signal(f.M, r_u);
    Signal nu = filter_signal(f.N, r_u);
    Signal yh = filter_signal(f.Yhat, r_y);
    Signal xh = filter_signal(f.Xhat, r_y);
    Signal qry = filter_signal(q.Q, r_y);
    Signal mq = filter_signal(f.M, qry);
    Signal nq = filter_signal(f.N, qry);
    Signal u, y;
    u.reserve(r_u.size());
    y.reserve(r_u.size());
    for (std::size_t k = 0; k < r_u.size(); ++k) {
        u.push_back(mu[k] + mq[k] - yh[k]);
        y.push_back(nu[k] + nq[k] + xh[k]);
    }
    return {std::move(u), std::move(y)};
}

}  // namespace cpslab

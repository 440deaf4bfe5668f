#include "cpslab/mcstation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpslab/norms.hpp"
#include "cpslab/stats.hpp"

namespace cpslab {

namespace {

StateSpace negate(StateSpace g) {
    g.C = -g.C;
    g.D = -g.D;
    return g;
}

double logdet_spd(const MatrixXd& M) {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("logdet_spd: matrix not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

PostFilterDesign design_attack_postfilter(const StateSpace& Q_r1, const MatrixXd& Sigma_ry) {
    const MatrixXd& A1 = Q_r1.A;
    const MatrixXd& B1 = Q_r1.B;
    const MatrixXd& C1 = Q_r1.C;
    const MatrixXd& D1 = Q_r1.D;

    PostFilterDesign d;
    MatrixXd P = solve_filter_dare(A1, C1, B1 * Sigma_ry * B1.transpose(),
                                   D1 * Sigma_ry * D1.transpose(),
                                   B1 * Sigma_ry * D1.transpose());
    d.Sigma_r1 = C1 * P * C1.transpose() + D1 * Sigma_ry * D1.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(d.Sigma_r1);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error(
            "design_attack_postfilter: singular residual covariance (filter not informative)");
    d.Sigma_r1_inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    d.L = (A1 * P * C1.transpose() + B1 * Sigma_ry * D1.transpose()) * d.Sigma_r1.inverse();
    d.R = StateSpace(A1 - d.L * C1, -d.L, d.Sigma_r1_inv_sqrt * C1, d.Sigma_r1_inv_sqrt,
                     Q_r1.Ts);
    if (!is_schur(d.R.A))
        throw std::runtime_error("design_attack_postfilter: innovation filter not Schur");
    return d;
}

StateSpace make_rbar(const PostFilterDesign& pf, const StateSpace& Q_r2,
                     const StateSpace& Q_uMC) {
    const int p = pf.R.m();
    StateSpace inner = parallel_add(StateSpace::identity(p, pf.R.Ts),
                                    negate(series(Q_uMC, Q_r2)));
    return series(inner, pf.R);
}

McStation::McStation(Config cfg)
    : cfg_(std::move(cfg)),
      fQuMC_(cfg_.Q_uMC),
      fQr2_v_(cfg_.Q_r2),
      fQv_(cfg_.Q_v),
      fQv0_(cfg_.Q_v) {
    if (moving_target()) {
        if (!cfg_.base)
            throw std::invalid_argument("McStation: mode recovery needs the base factors");
        if (cfg_.modes.F.size() != cfg_.modes.L.size())
            throw std::invalid_argument("McStation: mode gain lists differ in size");
        for (std::size_t j = 0; j < cfg_.modes.F.size(); ++j) {
            ModeCompensators mc =
                reparameterize_mode(*cfg_.base, cfg_.modes.F[j], cfg_.modes.L[j]);
            bankRj0_.emplace_back(mc.R_i0);
            bankR0j_.emplace_back(mc.R_0i);
            bankVj0_.emplace_back(mc.V_i0);
            bankV0j_.emplace_back(mc.V_0i);
            bankVbar_.emplace_back(mc.Vbar_i0);
        }
        fQr1_fuse_ = Filter(cfg_.Q_r1);
        fQr2_fuse_ = Filter(cfg_.Q_r2);
        fIO_ru_ = Filter(vertcat(cfg_.base->M, cfg_.base->N));
        fIO_ry_ = Filter(vertcat(negate(cfg_.base->Yhat), cfg_.base->Xhat));
    }
}

VectorXd McStation::vbar_at(int k) const {
    if (cfg_.vbar.empty()) return VectorXd::Zero(cfg_.Q_v.m());
    return cfg_.vbar[std::min<std::size_t>(static_cast<std::size_t>(k), cfg_.vbar.size() - 1)];
}

VectorXd McStation::vbar0_at(int k) const {
    if (cfg_.vbar0.empty()) return VectorXd::Zero(cfg_.Q_v.m());
    return cfg_.vbar0[std::min<std::size_t>(static_cast<std::size_t>(k), cfg_.vbar0.size() - 1)];
}

void McStation::begin_step(int k) {
    if (k != k_ + 1) throw std::logic_error("McStation::begin_step: steps must be consecutive");
    k_ = k;
    v_k_ = fQv_.peek(vbar_at(k) - vbar0_at(k));
    v0_k_ = fQv0_.peek(vbar0_at(k));
}

McStation::Recovered McStation::recover(const VectorXd& payload) const {
    Recovered rec;
    if (!moving_target()) {
        rec.r_yu = payload;
        return rec;
    }
    const int p = cfg_.Q_r1.m();
    const std::size_t i = static_cast<std::size_t>(cfg_.modes.mode_at(k_));
    const VectorXd ryi = payload.head(p);
    const VectorXd rui = payload.tail(payload.size() - p);
    rec.r_y = bankR0j_[i].peek(ryi);
    VectorXd ru_raw = bankVj0_[i].peek(rui) + bankVbar_[i].peek(ryi);
    rec.r_u = ru_raw - v0_k_;
    rec.r_yu = fQr1_fuse_.peek(rec.r_y) + fQr2_fuse_.peek(rec.r_u);
    return rec;
}

VectorXd McStation::peek_control(const VectorXd& payload) const {
    if (k_ < 0) throw std::logic_error("McStation: begin_step not called");
    Recovered rec = recover(payload);
    VectorXd tap = rec.r_yu - fQr2_v_.peek(v_k_);
    return fQuMC_.peek(tap) + v_k_;
}

McStation::Frame McStation::commit(const VectorXd& payload) {
    if (k_ < 0) throw std::logic_error("McStation: begin_step not called");
    Recovered rec = recover(payload);
    Frame fr;
    fr.k = k_;
    fr.r_y = rec.r_y;
    fr.r_u = rec.r_u;
    fr.r_yu = rec.r_yu;
    fr.tap = rec.r_yu - fQr2_v_.peek(v_k_);
    fr.u_mc = fQuMC_.peek(fr.tap) + v_k_;

    if (moving_target()) {
        const VectorXd ru_raw = rec.r_u + v0_k_;
        const int m = static_cast<int>(cfg_.base->M.m());
        VectorXd uy = fIO_ru_.peek(ru_raw) + fIO_ry_.peek(rec.r_y);
        fr.u_rec = uy.head(m);
        fr.y_rec = uy.tail(uy.size() - m);
        for (std::size_t j = 0; j < bankRj0_.size(); ++j) {
            VectorXd ryj = bankRj0_[j].step(rec.r_y);
            bankR0j_[j].step(ryj);
            VectorXd vbj = bankVbar_[j].step(ryj);
            VectorXd ruj = bankV0j_[j].step(ru_raw - vbj);
            bankVj0_[j].step(ruj);
        }
        fQr1_fuse_.step(rec.r_y);
        fQr2_fuse_.step(rec.r_u);
        fIO_ru_.step(ru_raw);
        fIO_ry_.step(rec.r_y);
    }
    fQr2_v_.step(v_k_);
    fQuMC_.step(fr.tap);
    fQv_.step(vbar_at(k_) - vbar0_at(k_));
    fQv0_.step(vbar0_at(k_));
    last_ = fr;
    return fr;
}

void McStation::reconfigure_Q_r2(const StateSpace& q_r2) {
    cfg_.Q_r2 = q_r2;
    fQr2_v_.replace_system(q_r2);
    if (moving_target()) fQr2_fuse_.replace_system(q_r2);
}

// --- Detectors -------------------------------------------------------------

AttackChi2Detector::AttackChi2Detector(StateSpace rbar_filter, double threshold,
                                       std::string name)
    : f_(std::move(rbar_filter)), th_(threshold), name_(std::move(name)) {}

DetectorVerdict AttackChi2Detector::step(int k, const VectorXd& tap) {
    VectorXd rbar = f_.step(tap);
    DetectorVerdict v;
    v.detector = name_;
    v.k0 = k;
    v.J = rbar.squaredNorm();
    v.J_th = th_;
    v.alarm = v.J > th_;
    return v;
}

void AttackChi2Detector::replace_filter(StateSpace rbar_filter) {
    f_.replace_system(std::move(rbar_filter));
}

SwitchDetectorDesign build_switch_detector(const StateSpace& R, int s, int gamma, double L0) {
    if (s < 0 || gamma < 1) throw std::invalid_argument("build_switch_detector: bad horizon");
    if (!is_schur(R.A)) throw std::invalid_argument("build_switch_detector: filter not Schur");
    const int ky = R.p();
    const int n = R.n();
    SwitchDetectorDesign d;
    d.s = s;
    d.gamma = gamma;
    d.tau = gamma + s;
    d.L0 = L0;

    d.H_o.resize(ky * (s + 1), n);
    MatrixXd At = MatrixXd::Identity(n, n);
    for (int t = 0; t <= s; ++t) {
        d.H_o.middleRows(t * ky, ky) = R.C * At;
        At = R.A * At;
    }

    // Markov parameters G_0 = D, G_d = C A^{d-1} B for d = 1..tau-1.
    std::vector<MatrixXd> G(static_cast<std::size_t>(d.tau));
    G[0] = R.D;
    MatrixXd M = R.B;
    for (int dd = 1; dd < d.tau; ++dd) {
        G[static_cast<std::size_t>(dd)] = R.C * M;
        M = R.A * M;
    }

    d.H = MatrixXd::Zero(ky * (s + 1), ky * d.tau);
    for (int t = 0; t <= s; ++t) {
        for (int j = 0; j < d.tau; ++j) {
            const int delay = t + gamma - 1 - j;
            if (delay < 0) continue;
            d.H.block(t * ky, j * ky, ky, ky) = G[static_cast<std::size_t>(delay)];
        }
    }

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(d.H * d.H.transpose());
    d.sigma_min = std::max(0.0, es.eigenvalues().minCoeff());
    d.sigma_max = es.eigenvalues().maxCoeff();
    d.L_l = std::sqrt(static_cast<double>(d.tau) * d.sigma_min) * L0;
    d.L_u = std::sqrt(static_cast<double>(d.tau) * d.sigma_max) * L0;
    return d;
}

LlrBranches llr_branch_values(double window_norm, double L_l, double L_u) {
    LlrBranches b;
    const double du = window_norm - L_u;
    const double dl = window_norm - L_l;
    b.lower = 0.5 * du * du;
    b.middle = 0.5 * (du * du - dl * dl);
    b.upper = -0.5 * dl * dl;
    return b;
}

LlrResult llr_statistic(const std::vector<VectorXd>& window, double L_l, double L_u) {
    double s2 = 0.0;
    for (const auto& r : window) s2 += r.squaredNorm();
    LlrResult out;
    out.window_norm = std::sqrt(s2);
    const double below = std::max(L_u - out.window_norm, 0.0);
    const double above = std::max(out.window_norm - L_l, 0.0);
    out.J = 0.5 * below * below - 0.5 * above * above;
    if (out.window_norm < L_l)
        out.branch = "below";
    else if (out.window_norm <= L_u)
        out.branch = "inside";
    else
        out.branch = "above";
    return out;
}

double llr_threshold(const SwitchDetectorDesign& d, double alpha) {
    // Matched-encoding window: squared norm is non-central chi-square with
    // k_y (s+1) dof and non-centrality at most L_u^2.
    const int dof = static_cast<int>(d.H_o.rows());
    const double q = noncentral_chi2_quantile(1.0 - alpha, dof, d.L_u * d.L_u);
    const double nr = std::sqrt(q);
    const double below = std::max(d.L_u - nr, 0.0);
    const double above = std::max(nr - d.L_l, 0.0);
    return 0.5 * below * below - 0.5 * above * above;
}

SwitchLlrDetector::SwitchLlrDetector(SwitchDetectorDesign design, double alpha, std::string name)
    : d_(std::move(design)), th_(llr_threshold(d_, alpha)), name_(std::move(name)) {}

std::optional<DetectorVerdict> SwitchLlrDetector::step(int k, const VectorXd& rbar) {
    win_.push_back(rbar);
    if (static_cast<int>(win_.size()) < d_.s + 1) return std::nullopt;
    std::vector<VectorXd> w(win_.begin(), win_.end());
    LlrResult r = llr_statistic(w, d_.L_l, d_.L_u);
    win_.pop_front();
    DetectorVerdict v;
    v.detector = name_;
    v.k0 = k;
    v.J = r.J;
    v.J_th = th_;
    v.branch = r.branch;
    v.alarm = r.J < th_;
    return v;
}

GlrDetector::GlrDetector(MatrixXd Sigma, int window, double threshold, std::string name)
    : Sigma_(std::move(Sigma)),
      Sigma_inv_(Sigma_.inverse()),
      logdet_(logdet_spd(Sigma_)),
      N_(window),
      th_(threshold),
      name_(std::move(name)) {}

double GlrDetector::statistic(const MatrixXd& Sigma, const std::vector<VectorXd>& window) {
    const int N = static_cast<int>(window.size());
    const int p = static_cast<int>(Sigma.rows());
    MatrixXd Shat = MatrixXd::Zero(p, p);
    MatrixXd Sinv = Sigma.inverse();
    double quad = 0.0;
    for (const auto& r : window) {
        Shat += r * r.transpose();
        quad += r.dot(Sinv * r);
    }
    Shat /= static_cast<double>(N);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Shat);
    if (es.eigenvalues().minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    const double logdet_hat = es.eigenvalues().array().log().sum();
    return 0.5 * N * (logdet_spd(Sigma) - logdet_hat) + 0.5 * quad - 0.5 * N * p;
}

std::optional<DetectorVerdict> GlrDetector::step(int k, const VectorXd& r) {
    win_.push_back(r);
    if (static_cast<int>(win_.size()) < N_) return std::nullopt;
    const int N = N_;
    const int p = static_cast<int>(Sigma_.rows());
    MatrixXd Shat = MatrixXd::Zero(p, p);
    double quad = 0.0;
    for (const auto& x : win_) {
        Shat += x * x.transpose();
        quad += x.dot(Sigma_inv_ * x);
    }
    Shat /= static_cast<double>(N);
    DetectorVerdict v;
    v.detector = name_;
    v.k0 = k;
    v.J_th = th_;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Shat);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        v.J = std::numeric_limits<double>::infinity();
    } else {
        v.J = 0.5 * N * (logdet_ - es.eigenvalues().array().log().sum()) + 0.5 * quad -
              0.5 * N * p;
    }
    v.alarm = v.J > th_;
    win_.clear();
    return v;
}

// --- Design-condition checks ----------------------------------------------

PerformanceReport check_performance(const BezoutFactors& f, const StateSpace& Q_r1,
                                    const StateSpace& Q_r2, const StateSpace& Q_uMC) {
    const double Ts = f.plant.Ts;
    const int m = f.plant.m();
    const int p = f.plant.p();
    PerformanceReport rep;

    StateSpace loop_u = parallel_add(StateSpace::identity(m, Ts),
                                     negate(series(Q_r2, Q_uMC)));
    rep.gamma_theta = hinf_norm(invert_io(loop_u));

    StateSpace loop_r = parallel_add(StateSpace::identity(p, Ts),
                                     negate(series(Q_uMC, Q_r2)));
    StateSpace qbar_r1 = series(Q_r1, invert_io(loop_r));
    StateSpace term = series(series(qbar_r1, Q_uMC), vertcat(f.M, f.N));
    StateSpace total = parallel_add(vertcat(negate(f.Yhat), f.Xhat), term);
    rep.gamma_ry = hinf_norm(total);
    return rep;
}

}  // namespace cpslab

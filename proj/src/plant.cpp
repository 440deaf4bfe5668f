#include "cpslab/plant.hpp"

#include <stdexcept>

namespace cpslab {

namespace {
constexpr std::uint64_t kStreamProcessNoise = 0;
constexpr std::uint64_t kStreamMeasNoise = 1;
constexpr std::uint64_t kStreamFault = 2;
}  // namespace

PlantRuntime::PlantRuntime(Config cfg)
    : cfg_(std::move(cfg)),
      fQr1_(cfg_.Q_r1),
      fQr2_(cfg_.Q_r2),
      fQv_(cfg_.Q_v),
      rng_w_(substream_seed(cfg_.seed, kStreamProcessNoise)),
      rng_nu_(substream_seed(cfg_.seed, kStreamMeasNoise)),
      rng_f_(substream_seed(cfg_.seed, kStreamFault)) {
    const int nn = n(), mm = m(), pp = p();
    if (cfg_.F.rows() != mm || cfg_.F.cols() != nn)
        throw std::invalid_argument("PlantRuntime: F dimension mismatch");
    if (cfg_.L.rows() != nn || cfg_.L.cols() != pp)
        throw std::invalid_argument("PlantRuntime: L dimension mismatch");
    if (cfg_.Q_r1.m() != pp || cfg_.Q_r2.m() != mm)
        throw std::invalid_argument("PlantRuntime: residual filter dimension mismatch");
    if (extended_residual()) {
        if (cfg_.Psi.rows() != pp || cfg_.Psi.cols() != mm + pp)
            throw std::invalid_argument("PlantRuntime: Psi must be p x (m+p)");
        if (!cfg_.Q_uMC)
            throw std::invalid_argument("PlantRuntime: extended residual needs the Q_uMC copy");
        fQuMC_.emplace(*cfg_.Q_uMC);
    }
    if (!cfg_.modes.empty()) {
        if (cfg_.modes.F.size() != cfg_.modes.L.size())
            throw std::invalid_argument("PlantRuntime: mode gain lists differ in size");
        for (std::size_t i = 0; i < cfg_.modes.F.size(); ++i) {
            if (!is_schur(cfg_.plant.A + cfg_.plant.B * cfg_.modes.F[i]) ||
                !is_schur(cfg_.plant.A - cfg_.modes.L[i] * cfg_.plant.C))
                throw std::invalid_argument("PlantRuntime: mode gains not stabilizing");
        }
        xhat_mode_.assign(cfg_.modes.F.size(), VectorXd::Zero(nn));
    }
    x_ = VectorXd::Zero(nn);
    xhat_ = VectorXd::Zero(nn);
    e_ = VectorXd::Zero(nn);
    if (cfg_.Sigma_ry.size() == 0) cfg_.Sigma_ry = MatrixXd::Identity(pp, pp);
    Sigma_ry_inv_ = cfg_.Sigma_ry.inverse();
    sqrt_w_ = matrix_sqrt_psd(cfg_.noise.Sigma_w);
    sqrt_nu_ = matrix_sqrt_psd(cfg_.noise.Sigma_nu);
    w_k_ = VectorXd::Zero(nn);
    nu_k_ = VectorXd::Zero(pp);
    ry_k_ = VectorXd::Zero(pp);
}

VectorXd PlantRuntime::vbar0_at(int k) const {
    if (cfg_.vbar0.empty()) return VectorXd::Zero(m());
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                cfg_.vbar0.size() - 1);
    return cfg_.vbar0[i];
}

void PlantRuntime::begin_step(int k) {
    if (k != k_ + 1)
        throw std::logic_error("PlantRuntime::begin_step: steps must be consecutive");
    k_ = k;
    w_k_ = sqrt_w_ * rng_w_.vector(n());
    nu_k_ = sqrt_nu_ * rng_nu_.vector(p());
    if (cfg_.fault.active(k)) {
        VectorXd z = rng_f_.vector(static_cast<int>(cfg_.fault.mean.size()));
        f_k_ = cfg_.fault.mean + cfg_.fault.stddev.cwiseProduct(z);
    } else {
        f_k_ = VectorXd::Zero(cfg_.fault.empty() ? 0 : cfg_.fault.mean.size());
    }
    // Output residual from the estimation-error recursion: depends only on
    // noise and fault draws, never on the control channel.
    ry_k_ = cfg_.plant.C * e_ + nu_k_;
    if (cfg_.fault.active(k)) ry_k_ += cfg_.fault.F_f * f_k_;
}

PlantRuntime::StepEval PlantRuntime::evaluate(const VectorXd& u_mc_a) const {
    StepEval ev;
    ev.v0 = fQv_.peek(vbar0_at(k_));
    const VectorXd base = cfg_.F * xhat_ + ev.v0 + u_mc_a;
    if (extended_residual()) {
        // u = base - Q_uMC(Psi [u; y]) with y = C xhat + D u + r_y: an affine
        // inner loop in u, resolved exactly by probing.
        const int mm = m();
        auto respond = [&](const VectorXd& u) -> VectorXd {
            VectorXd y = cfg_.plant.C * xhat_ + cfg_.plant.D * u + ry_k_;
            VectorXd uy(mm + p());
            uy << u, y;
            VectorXd drive = ext_active_ ? VectorXd(cfg_.Psi * uy) : VectorXd::Zero(p());
            return base - fQuMC_->peek(drive);
        };
        const VectorXd b = respond(VectorXd::Zero(mm));
        MatrixXd S(mm, mm);
        for (int j = 0; j < mm; ++j)
            S.col(j) = respond(VectorXd::Unit(mm, j)) - b;
        ev.u = (MatrixXd::Identity(mm, mm) - S).fullPivLu().solve(b);
    } else {
        ev.u = base;
    }
    ev.y = cfg_.plant.C * xhat_ + cfg_.plant.D * ev.u + ry_k_;
    ev.r_u = ev.u - cfg_.F * xhat_ - ev.v0;
    if (moving_target()) {
        const int i = cfg_.modes.mode_at(k_);
        const VectorXd& xi = xhat_mode_[static_cast<std::size_t>(i)];
        ev.r_y_mode = ev.y - cfg_.plant.C * xi - cfg_.plant.D * ev.u;
        ev.r_u_mode = ev.u - cfg_.modes.F[static_cast<std::size_t>(i)] * xi;
        ev.payload.resize(p() + m());
        ev.payload << ev.r_y_mode, ev.r_u_mode;
    } else {
        VectorXd ryu = fQr1_.peek(ry_k_) + fQr2_.peek(ev.r_u);
        if (extended_residual()) {
            VectorXd uy(m() + p());
            uy << ev.u, ev.y;
            ev.rbar_pd = cfg_.Psi * uy;
            if (ext_active_) ryu += ev.rbar_pd;
        }
        ev.payload = ryu;
    }
    return ev;
}

VectorXd PlantRuntime::peek_payload(const VectorXd& u_mc_a) const {
    if (k_ < 0) throw std::logic_error("PlantRuntime: begin_step not called");
    return evaluate(u_mc_a).payload;
}

ResidualFrame PlantRuntime::commit(const VectorXd& u_mc_a) {
    if (k_ < 0) throw std::logic_error("PlantRuntime: begin_step not called");
    StepEval ev = evaluate(u_mc_a);

    ResidualFrame fr;
    fr.k = k_;
    fr.u = ev.u;
    fr.y = ev.y;
    fr.r_y = ry_k_;
    fr.r_u = ev.r_u;
    fr.r_yu = moving_target() ? VectorXd() : ev.payload;
    fr.rbar_pd = ev.rbar_pd;
    fr.r_y_mode = ev.r_y_mode;
    fr.r_u_mode = ev.r_u_mode;
    fr.mode = cfg_.modes.mode_at(k_);
    fr.J_rel = ry_k_.dot(Sigma_ry_inv_ * ry_k_);

    // Advance: true plant, error recursion, embedded observer, mode
    // observers and the fusion/pre-filters.
    const MatrixXd& A = cfg_.plant.A;
    const MatrixXd& B = cfg_.plant.B;
    const MatrixXd& C = cfg_.plant.C;
    VectorXd x_next = A * x_ + B * ev.u + w_k_;
    VectorXd e_next = (A - cfg_.L * C) * e_ + w_k_ - cfg_.L * nu_k_;
    if (cfg_.fault.active(k_)) {
        x_next += cfg_.fault.E_f * f_k_;
        e_next += cfg_.fault.E_f * f_k_ - cfg_.L * cfg_.fault.F_f * f_k_;
    }
    xhat_ = A * xhat_ + B * ev.u + cfg_.L * ry_k_;
    for (std::size_t j = 0; j < xhat_mode_.size(); ++j) {
        VectorXd ry_j = fr.y - C * xhat_mode_[j] - cfg_.plant.D * ev.u;
        xhat_mode_[j] = A * xhat_mode_[j] + B * ev.u + cfg_.modes.L[j] * ry_j;
    }
    x_ = x_next;
    e_ = e_next;
    fQv_.step(vbar0_at(k_));
    fQr1_.step(ry_k_);
    fQr2_.step(ev.r_u);
    if (fQuMC_) {
        VectorXd uy(m() + p());
        uy << ev.u, ev.y;
        fQuMC_->step(ext_active_ ? VectorXd(cfg_.Psi * uy) : VectorXd::Zero(p()));
    }
    return fr;
}

void PlantRuntime::reconfigure_Q_r2(const StateSpace& q_r2) {
    cfg_.Q_r2 = q_r2;
    fQr2_.replace_system(q_r2);
}

}  // namespace cpslab

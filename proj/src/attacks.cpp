#include "cpslab/attacks.hpp"

#include <stdexcept>

namespace cpslab {

namespace {

StateSpace negate(StateSpace g) {
    g.C = -g.C;
    g.D = -g.D;
    return g;
}

// Pseudo-inverse of a symmetric PSD matrix (strictly proper stream models
// start with a rank-deficient innovation covariance).
MatrixXd psd_pinv(const MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    const double cutoff = 1e-12 * std::max(1e-300, es.eigenvalues().maxCoeff());
    VectorXd inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::pair<VectorXd, MatrixXd> estimate_steady_stats(const Signal& frames,
                                                    std::size_t min_count) {
    const std::size_t N = frames.size();
    if (N < std::max<std::size_t>(2, min_count))
        throw std::invalid_argument("estimate_steady_stats: too few samples");
    const int p = static_cast<int>(frames.front().size());
    VectorXd mean = VectorXd::Zero(p);
    for (const auto& r : frames) mean += r;
    mean /= static_cast<double>(N);
    MatrixXd cov = MatrixXd::Zero(p, p);
    for (const auto& r : frames) {
        VectorXd d = r - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(N);
    return {mean, cov};
}

AttackSpec covert_attack_gen(const AttackSpec& additive_profile, const StateSpace&) {
    AttackSpec s = additive_profile;
    s.kind = AttackSpec::Kind::Covert;
    s.a_ryu_det.clear();
    s.a_ryu_mean = VectorXd();
    s.a_ryu_std = VectorXd();
    return s;
}

AttackRuntime::AttackRuntime(AttackSpec spec, const StateSpace& Q_r2, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {
    if (spec_.kind == AttackSpec::Kind::Covert) covert_filter_ = Filter(negate(Q_r2));
    if (spec_.kind == AttackSpec::Kind::FeedbackStealth) {
        if (spec_.stream_model) {
            kalman_ = true;
            const StateSpace& s = *spec_.stream_model;
            xhat_ = VectorXd::Zero(s.n());
            P_ = MatrixXd::Zero(s.n(), s.n());
            if (spec_.U.size() == 0) spec_.U = MatrixXd::Identity(s.p(), s.p());
            if ((spec_.U * spec_.U.transpose() -
                 MatrixXd::Identity(spec_.U.rows(), spec_.U.rows()))
                    .cwiseAbs()
                    .maxCoeff() > 1e-10)
                throw std::invalid_argument("AttackRuntime: U not orthogonal");
            sqrt_target_ = matrix_sqrt_psd(spec_.Sigma_hat);
        } else {
            if (spec_.Pi.size() == 0)
                throw std::invalid_argument("AttackRuntime: feedback stealth needs Pi or a model");
            // Moment preservation: Pi Sigma Pi^T = Sigma.
            if (spec_.Sigma_hat.size() > 0) {
                MatrixXd gap = spec_.Pi * spec_.Sigma_hat * spec_.Pi.transpose() - spec_.Sigma_hat;
                if (gap.cwiseAbs().maxCoeff() >
                    1e-8 * std::max(1.0, spec_.Sigma_hat.cwiseAbs().maxCoeff()))
                    throw std::invalid_argument(
                        "AttackRuntime: Pi does not preserve the payload covariance");
            }
        }
    }
}

void AttackRuntime::begin_step(int k) {
    if (k != k_ + 1) throw std::logic_error("AttackRuntime::begin_step: steps must be consecutive");
    k_ = k;
    const bool on = spec_.active(k);
    a_umc_k_ = VectorXd::Zero(static_cast<int>(spec_.a_umc.size()));
    if (on)
        for (std::size_t i = 0; i < spec_.a_umc.size(); ++i)
            a_umc_k_(static_cast<int>(i)) = spec_.a_umc[i].at(k);
    if (spec_.kind == AttackSpec::Kind::Covert) {
        // The derived transmission-channel term: a_uMC filtered through -Q_r2.
        a_ryu_k_ = covert_filter_.step(a_umc_k_);
    } else {
        a_ryu_k_ = VectorXd::Zero(static_cast<int>(
            std::max<std::size_t>(spec_.a_ryu_det.size(),
                                  static_cast<std::size_t>(spec_.a_ryu_mean.size()))));
        if (on && spec_.kind == AttackSpec::Kind::Additive) {
            for (std::size_t i = 0; i < spec_.a_ryu_det.size(); ++i)
                a_ryu_k_(static_cast<int>(i)) += spec_.a_ryu_det[i].at(k);
            if (spec_.a_ryu_mean.size() > 0) {
                VectorXd z = rng_.vector(static_cast<int>(spec_.a_ryu_mean.size()));
                a_ryu_k_.head(spec_.a_ryu_mean.size()) +=
                    spec_.a_ryu_mean + spec_.a_ryu_std.cwiseProduct(z);
            }
        }
    }
}

VectorXd AttackRuntime::apply_to_plant(const VectorXd& u_mc) const {
    if (!active(k_) || a_umc_k_.size() == 0) return u_mc;
    VectorXd out = u_mc;
    out.head(std::min<Eigen::Index>(a_umc_k_.size(), out.size())) +=
        a_umc_k_.head(std::min<Eigen::Index>(a_umc_k_.size(), out.size()));
    return out;
}

VectorXd AttackRuntime::peek_to_mc(const VectorXd& payload) const {
    if (spec_.kind == AttackSpec::Kind::FeedbackStealth) {
        if (!active(k_)) return payload;
        if (kalman_) {
            const StateSpace& s = *spec_.stream_model;
            VectorXd iota = (payload - spec_.zeta_hat) - s.C * xhat_;
            MatrixXd S_iota = s.C * P_ * s.C.transpose() +
                              s.D * spec_.Sigma_drive * s.D.transpose();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(S_iota);
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw std::runtime_error("AttackRuntime: singular innovation covariance");
            MatrixXd inv_sqrt = es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
            return spec_.zeta_hat + sqrt_target_ * spec_.U * inv_sqrt * iota;
        }
        return spec_.Pi * (payload - spec_.zeta_hat) + spec_.zeta_hat;
    }
    // The covert term keeps ringing down after the control-channel profile
    // stops, so the composite signature stays identically zero.
    const bool emitting =
        spec_.kind == AttackSpec::Kind::Covert ? (k_ >= spec_.start_step) : active(k_);
    if (!emitting || a_ryu_k_.size() == 0) return payload;
    VectorXd out = payload;
    out.head(std::min<Eigen::Index>(a_ryu_k_.size(), out.size())) +=
        a_ryu_k_.head(std::min<Eigen::Index>(a_ryu_k_.size(), out.size()));
    return out;
}

void AttackRuntime::commit_to_mc(const VectorXd& payload) {
    if (!kalman_) return;
    // Advance the innovations recursion on the observed stream (also outside
    // the active window, so the filter is warmed up at attack onset).
    const StateSpace& s = *spec_.stream_model;
    const MatrixXd Q = s.B * spec_.Sigma_drive * s.B.transpose();
    const MatrixXd R = s.D * spec_.Sigma_drive * s.D.transpose();
    const MatrixXd S = s.B * spec_.Sigma_drive * s.D.transpose();
    VectorXd iota = (payload - spec_.zeta_hat) - s.C * xhat_;
    MatrixXd S_iota = s.C * P_ * s.C.transpose() + R;
    MatrixXd K = (s.A * P_ * s.C.transpose() + S) * psd_pinv(S_iota);
    xhat_ = s.A * xhat_ + K * iota;
    P_ = s.A * P_ * s.A.transpose() + Q - K * S_iota * K.transpose();
    P_ = 0.5 * (P_ + P_.transpose());
}

Signal composite_attack_signature(const StateSpace& Q_r2, const Signal& a_umc,
                                  const Signal& a_ryu) {
    if (a_umc.size() != a_ryu.size())
        throw std::invalid_argument("composite_attack_signature: length mismatch");
    Signal filtered = filter_signal(Q_r2, a_umc);
    Signal out;
    out.reserve(a_umc.size());
    for (std::size_t k = 0; k < a_umc.size(); ++k) out.push_back(filtered[k] + a_ryu[k]);
    return out;
}

AttackedLoopPrediction predict_attacked_closed_loop(const BezoutFactors& f,
                                                    const StateSpace& Q_r2,
                                                    const StateSpace& Q_uMC) {
    const int m = f.plant.m();
    const double Ts = f.plant.Ts;
    // delta r_u = (I - Q_uMC Q_r2)^{-1} (a_uMC + Q_uMC a_ryu)
    StateSpace composite = horzcat(StateSpace::identity(m, Ts), Q_uMC);
    StateSpace loop = parallel_add(StateSpace::identity(m, Ts),
                                   negate(series(Q_r2, Q_uMC)));
    AttackedLoopPrediction out;
    out.deviation_ru = series(composite, invert_io(loop));
    out.deviation = series(out.deviation_ru, vertcat(f.M, f.N));
    out.stable = is_schur(out.deviation.A);
    return out;
}

}  // namespace cpslab

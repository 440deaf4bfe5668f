#pragma once

#include <cstdint>
#include <optional>

#include "cpslab/factors.hpp"
#include "cpslab/random.hpp"
#include "cpslab/statespace.hpp"

namespace cpslab {

// Deterministic per-step channel profile amp*sin(omega*k) + offset.
struct SinePhase {
    double amp = 0.0, omega = 0.0, offset = 0.0;
    double at(int k) const { return amp * std::sin(omega * k) + offset; }
};

// Channel-attack description. Additive profiles act componentwise; the covert
// variant derives its transmission-channel term from the control-channel
// profile; the feedback-stealth variant replaces the transmitted payload by an
// affine transform matching its first two moments.
struct AttackSpec {
    enum class Kind { None, Additive, Covert, FeedbackStealth };
    Kind kind = Kind::None;
    int start_step = 0, end_step = 0;  // active window [start, end)

    // Additive / Covert: control-channel profile (one entry per input).
    std::vector<SinePhase> a_umc;
    // Additive only: transmission-channel deterministic and Gaussian parts.
    std::vector<SinePhase> a_ryu_det;
    VectorXd a_ryu_mean, a_ryu_std;

    // FeedbackStealth: r^a = Pi (r - zeta) + zeta, with Pi Sigma Pi^T = Sigma.
    MatrixXd Pi;
    VectorXd zeta_hat;
    MatrixXd Sigma_hat;
    // Optional innovations-based construction: whiten the payload deviation
    // with a time-varying Kalman filter for the given stream model, then
    // rescale to the target covariance through an orthogonal factor.
    std::optional<StateSpace> stream_model;  // drives r_yu - zeta from white noise
    MatrixXd Sigma_drive;                    // covariance of that white drive
    MatrixXd U;                              // orthogonal factor, default identity

    bool active(int k) const {
        return kind != Kind::None && k >= start_step && k < end_step;
    }
};

// Sample mean and covariance of a steady residual stream.
std::pair<VectorXd, MatrixXd> estimate_steady_stats(const Signal& frames,
                                                    std::size_t min_count = 0);

// Covert construction: the transmission-channel term is the control-channel
// profile filtered through -Q_r2, cancelling the composite attack signature.
AttackSpec covert_attack_gen(const AttackSpec& additive_profile, const StateSpace& Q_r2);

// Stateful channel model: applies the attack terms on both directions of the
// communication link, deterministically per seed.
class AttackRuntime {
public:
    AttackRuntime(AttackSpec spec, const StateSpace& Q_r2, std::uint64_t seed);

    bool active(int k) const { return spec_.active(k); }
    const AttackSpec& spec() const { return spec_; }

    // Draw/update the exogenous attack terms for step k.
    void begin_step(int k);
    // Control channel: u_MC -> u_MC + a_uMC(k).
    VectorXd apply_to_plant(const VectorXd& u_mc) const;
    // Transmission channel, side-effect free / committing variants.
    VectorXd peek_to_mc(const VectorXd& payload) const;
    void commit_to_mc(const VectorXd& payload);

    // Exogenous terms of the current step (additive kinds).
    const VectorXd& a_umc_now() const { return a_umc_k_; }
    const VectorXd& a_ryu_now() const { return a_ryu_k_; }

private:
    void ensure_kalman(int dim);

    AttackSpec spec_;
    Filter covert_filter_;  // -Q_r2 path of the covert construction
    GaussianSampler rng_;
    int k_ = -1;
    VectorXd a_umc_k_, a_ryu_k_;
    // Time-varying innovations recursion for the feedback-stealth variant.
    bool kalman_ = false;
    VectorXd xhat_;
    MatrixXd P_;
    MatrixXd sqrt_target_;
};

// Composite transmission-channel signature eta_a = Q_r2 a_uMC + a_ryu;
// identically zero for the covert construction.
Signal composite_attack_signature(const StateSpace& Q_r2, const Signal& a_umc,
                                  const Signal& a_ryu);

// LTI deviation predictors: response of the loop deviation to the attack
// inputs [a_uMC; a_ryu], as used by the superposition oracles.
struct AttackedLoopPrediction {
    StateSpace deviation;      // (m+p) inputs -> [du; dy]
    StateSpace deviation_ru;   // (m+p) inputs -> delta r_u at the station
    bool stable = true;
};
AttackedLoopPrediction predict_attacked_closed_loop(const BezoutFactors& f,
                                                    const StateSpace& Q_r2,
                                                    const StateSpace& Q_uMC);

}  // namespace cpslab

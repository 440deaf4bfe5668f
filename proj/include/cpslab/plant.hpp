#pragma once

#include <cstdint>
#include <optional>

#include "cpslab/factors.hpp"
#include "cpslab/random.hpp"
#include "cpslab/riccati.hpp"
#include "cpslab/statespace.hpp"

namespace cpslab {

// Windowed additive fault f entering the state via E_f and the output via F_f.
// Each active step draws f(k) ~ N(mean, diag(stddev^2)) from a dedicated
// substream so fault activation never perturbs other noise draws.
struct FaultSpec {
    MatrixXd E_f, F_f;        // n x q, p x q
    VectorXd mean, stddev;    // q
    int start_step = 0;
    int end_step = 0;         // window [start, end)
    bool empty() const { return E_f.size() == 0; }
    bool active(int k) const { return !empty() && k >= start_step && k < end_step; }
};

// Finite set of residual-generator gain modes with a cyclic schedule.
// Index 0 is the base mode (F, L).
struct ModeSet {
    std::vector<MatrixXd> F;
    std::vector<MatrixXd> L;
    std::vector<int> schedule;  // repeated cyclically over the run
    bool empty() const { return F.empty(); }
    int mode_at(int k) const {
        if (schedule.empty()) return 0;
        return schedule[static_cast<std::size_t>(k) % schedule.size()];
    }
};

// Per-step record of everything the plant side computes and transmits.
struct ResidualFrame {
    int k = 0;
    VectorXd u, y;
    VectorXd r_y, r_u, r_yu;
    VectorXd rbar_pd;           // Psi [u; y] when the extended residual is on
    VectorXd r_y_mode, r_u_mode;  // transmitted pair when mode switching is on
    int mode = 0;
    double J_rel = 0.0;
};

// Simulates the true plant with noise and faults and runs the embedded
// observer/controller that fuses r_{y,u} for transmission.  The output
// residual r_y is computed through the estimation-error recursion, which by
// construction contains no channel-attack-dependent quantity; this realizes
// the subspace-separation property at bit level.
class PlantRuntime {
public:
    struct Config {
        StateSpace plant;
        NoiseSpec noise;
        FaultSpec fault;
        MatrixXd F, L;           // embedded feedback and observer gains
        StateSpace Q_r1, Q_r2;   // residual fusion filters
        StateSpace Q_v;          // pre-filter producing v0 from the baseline
        Signal vbar0;            // baseline reference (last value held)
        MatrixXd Sigma_ry;       // innovation covariance for the fault statistic
        MatrixXd Psi;            // p x (m+p); non-empty switches on the extended residual
        std::optional<StateSpace> Q_uMC;  // plant-side copy, used with Psi
        ModeSet modes;           // non-empty switches on mode-frame transmission
        std::uint64_t seed = 1;
    };

    explicit PlantRuntime(Config cfg);

    int n() const { return cfg_.plant.n(); }
    int m() const { return cfg_.plant.m(); }
    int p() const { return cfg_.plant.p(); }
    bool moving_target() const { return !cfg_.modes.empty(); }
    bool extended_residual() const { return cfg_.Psi.size() > 0; }
    // Dwell control for the extended residual: while off, the payload reverts
    // to the plain fused form but the plant-side copy keeps running on zero
    // input and its ring-down stays subtracted, so the closed loop is
    // unchanged across toggles.
    void set_extended_active(bool on) { ext_active_ = on; }
    bool extended_active() const { return extended_residual() && ext_active_; }
    // Dimension of the transmitted payload: fused residual (p) or the
    // mode-frame residual pair (p + m).
    int payload_dim() const { return moving_target() ? p() + m() : p(); }

    // Draw the step-k noise and fault and fix r_y(k); must be called once per
    // step before peeking or committing.
    void begin_step(int k);

    const VectorXd& r_y_now() const { return ry_k_; }

    // Transmitted payload as an affine function of the received control input
    // (post-channel); no state is mutated.
    VectorXd peek_payload(const VectorXd& u_mc_a) const;

    // Advance every internal state with the resolved control input and emit
    // the step record.
    ResidualFrame commit(const VectorXd& u_mc_a);

    const VectorXd& state() const { return x_; }
    const VectorXd& estimate() const { return xhat_; }

    // Atomic plant-side part of a controller reconfiguration.
    void reconfigure_Q_r2(const StateSpace& q_r2);

private:
    struct StepEval {
        VectorXd u, y, r_u, payload, rbar_pd, v0;
        VectorXd r_y_mode, r_u_mode;
    };
    StepEval evaluate(const VectorXd& u_mc_a) const;
    VectorXd vbar0_at(int k) const;

    Config cfg_;
    VectorXd x_, xhat_, e_;
    std::vector<VectorXd> xhat_mode_;  // parallel observers, aligned with modes
    Filter fQr1_, fQr2_, fQv_;
    std::optional<Filter> fQuMC_;      // plant-side copy for the extended mode
    MatrixXd Sigma_ry_inv_, sqrt_w_, sqrt_nu_;
    GaussianSampler rng_w_, rng_nu_, rng_f_;
    int k_ = -1;
    bool ext_active_ = true;
    VectorXd w_k_, nu_k_, f_k_, ry_k_;
};

}  // namespace cpslab

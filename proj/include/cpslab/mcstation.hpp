#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "cpslab/factors.hpp"
#include "cpslab/plant.hpp"
#include "cpslab/riccati.hpp"

namespace cpslab {

// One detector decision over a residual window (or a single step).
struct DetectorVerdict {
    std::string detector;
    int k0 = 0;          // step at which the decision is issued
    double J = 0.0;
    double J_th = 0.0;
    std::string branch;  // statistic branch label where applicable
    bool alarm = false;
};

// Innovations post-filter that whitens the fused residual driven by white
// r_y with covariance Sigma_ry: R = (A1 - L C1, -L, S^{-1/2} C1, S^{-1/2})
// where S is the output covariance of Q_r1 driven by that noise.
struct PostFilterDesign {
    StateSpace R;
    MatrixXd L;
    MatrixXd Sigma_r1;      // output covariance before normalization
    MatrixXd Sigma_r1_inv_sqrt;
};

PostFilterDesign design_attack_postfilter(const StateSpace& Q_r1, const MatrixXd& Sigma_ry);

// Cascade R (I - Q_r2 Q_uMC) applied to (r_yu - Q_r2 v); in the nominal loop
// its output is the whitened fused residual.
StateSpace make_rbar(const PostFilterDesign& pf, const StateSpace& Q_r2,
                     const StateSpace& Q_uMC);

// Monitoring/control station: recovers base-frame residuals from the
// transmitted payload (identity in the fused mode, compensator banks in the
// mode-switching mode), forms the control input
//   u_MC = Q_uMC(r_yu - Q_r2 v) + v,
// and exposes the detector tap (r_yu - Q_r2 v).
class McStation {
public:
    struct Config {
        StateSpace Q_uMC, Q_r2, Q_v;
        Signal vbar, vbar0;            // shaped reference and its baseline
        // Mode-switching recovery (empty = fused payload):
        ModeSet modes;
        std::optional<BezoutFactors> base;  // base factor family, required with modes
        StateSpace Q_r1;               // fusion copies, required with modes
    };

    struct Frame {
        int k = 0;
        VectorXd r_y, r_u;     // recovered residuals (mode-switching mode only)
        VectorXd r_yu;         // fused residual used by the control law
        VectorXd tap;          // r_yu - Q_r2 v, shared by control and detectors
        VectorXd u_mc;
        VectorXd u_rec, y_rec; // I/O reconstruction (mode-switching mode only)
    };

    explicit McStation(Config cfg);

    bool moving_target() const { return !cfg_.modes.empty(); }
    void begin_step(int k);
    VectorXd peek_control(const VectorXd& payload) const;
    Frame commit(const VectorXd& payload);
    const Frame& last() const { return last_; }

    // Atomic MC-side part of a controller reconfiguration: swaps the
    // residual-fusion and feedthrough copies of Q_r2 (states carry over).
    void reconfigure_Q_r2(const StateSpace& q_r2);

private:
    struct Recovered {
        VectorXd r_y, r_u, r_yu;
    };
    Recovered recover(const VectorXd& payload) const;
    VectorXd vbar_at(int k) const;
    VectorXd vbar0_at(int k) const;

    Config cfg_;
    Filter fQuMC_, fQr2_v_, fQv_, fQv0_;
    // Mode-switching banks (aligned with cfg_.modes):
    std::vector<Filter> bankRj0_, bankR0j_, bankVj0_, bankV0j_, bankVbar_;
    Filter fQr1_fuse_, fQr2_fuse_;
    Filter fIO_ru_, fIO_ry_;  // [M;N] and [-Yhat;Xhat] for I/O reconstruction
    int k_ = -1;
    VectorXd v_k_, v0_k_;
    Frame last_;
};

// --- Detectors -------------------------------------------------------------

// Chi-square detector on the whitened fused residual: J = rbar^T rbar
// against a chi-square quantile threshold.
class AttackChi2Detector {
public:
    AttackChi2Detector(StateSpace rbar_filter, double threshold, std::string name = "attack_chi2");
    DetectorVerdict step(int k, const VectorXd& tap);
    void replace_filter(StateSpace rbar_filter);

private:
    Filter f_;
    double th_;
    std::string name_;
};

// Finite-horizon encoding-switch detector on the whitened residual: over a
// window of s+1 samples the squared norm concentrates inside [L_l, L_u] under
// matched encoding and leaves it on a mismatch.
struct SwitchDetectorDesign {
    int s = 0;          // window length is s + 1
    int gamma = 0;      // steps after which the filter state is negligible
    int tau = 0;        // gamma + s
    double L0 = 0.0;    // per-sample input-norm scale
    double sigma_min = 0.0, sigma_max = 0.0;  // extreme eigenvalues of H H^T
    double L_l = 0.0, L_u = 0.0;
    MatrixXd H_o;       // observability stack, k_y(s+1) x n
    MatrixXd H;         // convolution map from tau inputs to the window outputs
};

SwitchDetectorDesign build_switch_detector(const StateSpace& R, int s, int gamma, double L0);

// Three-branch log-likelihood-ratio values at a given window norm
// (unclamped closed forms): accept-lower, middle, accept-upper.
struct LlrBranches {
    double lower = 0.0, middle = 0.0, upper = 0.0;
};
LlrBranches llr_branch_values(double window_norm, double L_l, double L_u);

// Continuous clamped statistic with its active-branch label.
struct LlrResult {
    double J = 0.0;
    std::string branch;
    double window_norm = 0.0;
};
LlrResult llr_statistic(const std::vector<VectorXd>& window, double L_l, double L_u);

// Decision threshold from the (1-alpha) quantile of the non-central
// chi-square law of the matched-window squared norm.
double llr_threshold(const SwitchDetectorDesign& d, double alpha);

// Sliding-window LLR switch detector fed with whitened residual samples.
class SwitchLlrDetector {
public:
    SwitchLlrDetector(SwitchDetectorDesign design, double alpha = 0.01,
                      std::string name = "switch_llr");
    std::optional<DetectorVerdict> step(int k, const VectorXd& rbar);
    const SwitchDetectorDesign& design() const { return d_; }
    double threshold() const { return th_; }

private:
    SwitchDetectorDesign d_;
    double th_;
    std::string name_;
    std::deque<VectorXd> win_;
};

// Windowed generalized-likelihood-ratio detector for covariance-changing
// (multiplicative) attacks on a nominally N(0, Sigma) residual stream.
class GlrDetector {
public:
    GlrDetector(MatrixXd Sigma, int window, double threshold, std::string name = "glr");
    std::optional<DetectorVerdict> step(int k, const VectorXd& r);
    // Drop a partially filled window (used at detector-dwell boundaries).
    void reset() { win_.clear(); }
    static double statistic(const MatrixXd& Sigma, const std::vector<VectorXd>& window);

private:
    MatrixXd Sigma_, Sigma_inv_;
    double logdet_;
    int N_;
    double th_;
    std::string name_;
    std::vector<VectorXd> win_;
};

// --- Design-condition checks ----------------------------------------------

// Gains of the resilient-performance conditions:
//   gamma_theta = || (I - Q_uMC Q_r2)^{-1} ||_inf
//   gamma_ry    = || [-Yhat; Xhat] + [M; N] Q_uMC (I - Q_r2 Q_uMC)^{-1} Q_r1 ||_inf
struct PerformanceReport {
    double gamma_theta = 0.0;
    double gamma_ry = 0.0;
};
PerformanceReport check_performance(const BezoutFactors& f, const StateSpace& Q_r1,
                                    const StateSpace& Q_r2, const StateSpace& Q_uMC);

}  // namespace cpslab

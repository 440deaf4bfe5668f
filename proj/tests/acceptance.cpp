// Acceptance gate: twelve end-to-end checks, one pass/fail line each.
// Exit code 0 only when every check passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cpslab/presets.hpp"
#include "cpslab/scenario.hpp"
#include "cpslab/stats.hpp"
#include "helpers.hpp"

using namespace cpslab;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& text) {
    std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
    if (!ok) ++failures;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig quiet_base(int steps, std::uint64_t seed) {
    ScenarioConfig c;
    c.steps = steps;
    c.seed = seed;
    c.y_ref = VectorXd(3);
    c.y_ref << 0.1, 0.1, 0.05;
    return c;
}

AttackSpec periodic_attack(bool offsets, int start, int end) {
    AttackSpec a;
    a.kind = AttackSpec::Kind::Additive;
    a.start_step = start;
    a.end_step = end;
    a.a_umc.resize(3);
    a.a_umc[0] = {0.05, 0.2 * M_PI, offsets ? 1.0 : 0.0};
    a.a_umc[2] = {-0.05, 0.2 * M_PI, offsets ? 1.0 : 0.0};
    return a;
}

bool binomial_ci_ok(double rate, double alpha, int n) {
    const double sigma = std::sqrt(alpha * (1.0 - alpha) / n);
    return std::abs(rate - alpha) <= 3.0 * sigma;
}

double regular_rate(const RunLog& log, int k0, int k1) {
    int total = 0, alarms = 0;
    for (const auto& v : log.verdicts)
        if (v.detector == "attack_chi2" && v.k0 >= k0 && v.k0 < k1) {
            ++total;
            if (v.alarm) ++alarms;
        }
    return total ? static_cast<double>(alarms) / total : 0.0;
}

// --- 1: factor identity on random systems -----------------------------------

void criterion_bezout() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::mt19937_64 eng(2024);
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + static_cast<int>(eng() % 7);  // 2..8 states
        const int m = 1 + static_cast<int>(eng() % 3);
        const int p = 1 + static_cast<int>(eng() % 3);
        auto g = testutil::random_stable(1000 + i, n, m, p);
        auto kal = kalman_gain(g, NoiseSpec{MatrixXd::Identity(n, n),
                                            MatrixXd::Identity(p, p)});
        auto lq = lq_gain(g, MatrixXd::Identity(n, n), MatrixXd::Identity(m, m));
        auto f = build_bezout_factors(g, make_gains(lq.gain, kal.gain));
        worst = std::max(worst, verify_bezout(f, 64));
    }
    const double dt = elapsed_s(t0);
    report(1, worst < 1e-8 && dt < 30.0,
           "factor identity residual < 1e-8 on 100 random systems (worst " + num(worst) +
               ", " + num(dt) + " s)");
}

// --- 2..5: closed-form constants --------------------------------------------

void criterion_constants() {
    const double q = chi2_quantile(0.99, 3.0);
    report(2, std::abs(q - 11.3450) <= 5e-3,
           "chi-square quantile at alpha=0.01, 3 dof: " + num(q) + " (target 11.3450)");

    auto d = presets::robot_design();
    auto f = build_bezout_factors(d.plant, make_gains(d.F, d.L));
    const double g_nom =
        check_performance(f, presets::q_r1(), presets::q_r2(-0.15), presets::q_umc())
            .gamma_theta;
    const double g_ftc =
        check_performance(f, presets::q_r1(), presets::q_r2(-90.0), presets::q_umc())
            .gamma_theta;
    report(3,
           std::abs(g_nom - 0.4000) <= 1e-6 && std::abs(g_ftc - 1.1099e-3) <= 1e-7,
           "loop sensitivity gains: " + num(g_nom) + " / " + num(g_ftc) +
               " (targets 0.4000 / 1.1099e-3)");

    LlrBranches b = llr_branch_values(std::sqrt(129.15), 0.1433, 1.0474);
    report(4,
           std::abs(b.lower - 53.2207) <= 1e-3 && std::abs(b.middle + 9.7366) <= 1e-3 &&
               std::abs(b.upper + 62.9573) <= 1e-3,
           "window-statistic branch values: " + num(b.lower) + " / " + num(b.middle) +
               " / " + num(b.upper) + " (targets 53.2207 / -9.7366 / -62.9573)");

    const double nc = noncentral_chi2_quantile(0.99, 93.0, 1.0970);
    report(5, std::abs(nc - 129.15) <= 0.5,
           "noncentral chi-square quantile (93 dof, ncp 1.0970): " + num(nc) +
               " (target 129.15)");
}

// --- 6: output residual invariant under channel attacks ---------------------

void criterion_residual_invariance() {
    ScenarioConfig free_cfg = quiet_base(2000, 61);
    ScenarioConfig add_cfg = free_cfg;
    AttackSpec add = periodic_attack(false, 400, 1600);
    add.a_ryu_mean = VectorXd::Zero(3);
    add.a_ryu_std = VectorXd::Zero(3);
    add.a_ryu_mean(1) = -0.025;
    add.a_ryu_std(1) = 1e-5;
    add_cfg.attacks.push_back(add);
    ScenarioConfig cov_cfg = free_cfg;
    AttackSpec cov = periodic_attack(true, 400, 1600);
    cov.kind = AttackSpec::Kind::Covert;
    cov_cfg.attacks.push_back(cov);

    RunLog a = run_scenario(free_cfg), b = run_scenario(add_cfg), c = run_scenario(cov_cfg);
    bool same = a.frames.size() == 2000 && b.frames.size() == 2000 && c.frames.size() == 2000;
    for (std::size_t k = 0; same && k < a.frames.size(); ++k)
        same = (a.frames[k].r_y.array() == b.frames[k].r_y.array()).all() &&
               (a.frames[k].r_y.array() == c.frames[k].r_y.array()).all();
    report(6, same,
           "output residual bitwise identical across attack-free / additive / covert runs "
           "(2000 steps)");
}

// --- 7: gain-mode transmission equals the base loop --------------------------

void criterion_mode_equivalence() {
    ScenarioConfig base = quiet_base(1000, 67);
    ScenarioConfig moded = base;
    moded.mode_scales = {1.0, 0.85, 0.9};
    moded.mode_schedule = {0, 1, 2, 2, 1, 0, 1};
    RunLog a = run_scenario(base), b = run_scenario(moded);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        worst = std::max(worst, (a.frames[k].u - b.frames[k].u).cwiseAbs().maxCoeff());
        worst = std::max(worst, (a.frames[k].y - b.frames[k].y).cwiseAbs().maxCoeff());
    }
    report(7, worst < 1e-9,
           "base vs mode-switched transmission agree over 1000 steps (gap " + num(worst) + ")");
}

// --- 8: superposition of additive attacks ------------------------------------

void criterion_superposition() {
    ScenarioConfig base = quiet_base(400, 71);
    RunLog lb = run_scenario(base);
    auto d = presets::robot_design(base.noise_scale);
    auto f = build_bezout_factors(d.plant, make_gains(d.F, d.L));
    auto pred = predict_attacked_closed_loop(f, presets::q_r2(-0.15), presets::q_umc());
    std::mt19937_64 eng(55);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (eng() >> 11) * (1.0 / 9007199254740992.0);
    };
    double worst = 0.0;
    for (int trial = 0; trial < 10 && pred.stable; ++trial) {
        AttackSpec a;
        a.kind = AttackSpec::Kind::Additive;
        a.start_step = 100;
        a.end_step = 300;
        a.a_umc.resize(3);
        a.a_ryu_det.resize(3);
        for (int i = 0; i < 3; ++i) {
            a.a_umc[i] = {uni(-0.05, 0.05), uni(0.1, 1.5), uni(-0.02, 0.02)};
            a.a_ryu_det[i] = {uni(-0.01, 0.01), uni(0.1, 1.5), uni(-0.005, 0.005)};
        }
        ScenarioConfig att = base;
        att.attacks.push_back(a);
        RunLog la = run_scenario(att);
        Signal drive;
        for (int k = 0; k < base.steps; ++k) {
            VectorXd in = VectorXd::Zero(6);
            if (a.active(k))
                for (int i = 0; i < 3; ++i) {
                    in(i) = a.a_umc[i].at(k);
                    in(3 + i) = a.a_ryu_det[i].at(k);
                }
            drive.push_back(in);
        }
        Signal dev = filter_signal(pred.deviation, drive);
        for (int k = 0; k < base.steps; ++k) {
            VectorXd du = la.frames[k].u - lb.frames[k].u;
            VectorXd dy = la.frames[k].y - lb.frames[k].y;
            worst = std::max(worst, (du - dev[k].head(3)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (dy - dev[k].tail(3)).cwiseAbs().maxCoeff());
        }
    }
    report(8, pred.stable && worst < 1e-8,
           "attack deviation equals the linear deviation model for 10 random additive "
           "attacks (gap " + num(worst) + ")");
}

// --- 9: covert attacks evade the regular detector while hurting tracking -----

RunLog g_free_run;  // reused by criterion 10a

void criterion_covert_stealth() {
    ScenarioConfig free_cfg = quiet_base(6000, 83);
    ScenarioConfig cov_cfg = free_cfg;
    AttackSpec cov = periodic_attack(true, 500, 6000);
    cov.kind = AttackSpec::Kind::Covert;
    cov_cfg.attacks.push_back(cov);
    g_free_run = run_scenario(free_cfg);
    RunLog att = run_scenario(cov_cfg);

    const int n = 6000 - 520;
    const double rate = regular_rate(att, 520, 6000);
    const bool ci_ok = binomial_ci_ok(rate, 0.01, n);

    // Tracking deviation: attacked-vs-free I/O gap compared with the natural
    // fluctuation of the attack-free loop over the same window.
    VectorXd mean = VectorXd::Zero(6);
    for (int k = 520; k < 6000; ++k) {
        VectorXd uy(6);
        uy << g_free_run.frames[k].u, g_free_run.frames[k].y;
        mean += uy;
    }
    mean /= n;
    double dev2 = 0.0, base2 = 0.0;
    for (int k = 520; k < 6000; ++k) {
        VectorXd uy(6), uy0(6);
        uy << att.frames[k].u, att.frames[k].y;
        uy0 << g_free_run.frames[k].u, g_free_run.frames[k].y;
        dev2 += (uy - uy0).squaredNorm();
        base2 += (uy0 - mean).squaredNorm();
    }
    const double ratio = std::sqrt(dev2 / base2);
    report(9, ci_ok && ratio >= 10.0,
           "covert attack: detector rate " + num(rate) + " within 3-sigma of alpha=0.01 over " +
               std::to_string(n) + " windows, deviation RMS " + num(ratio) +
               "x baseline; published gamma_ry=6.2406 and exact window bounds depend on "
               "unpublished covariances and are not reproduced");
}

// --- 10: stealth-attack detectors --------------------------------------------

void criterion_stealth_power() {
    const auto t0 = std::chrono::steady_clock::now();

    // (a) Regular detector statistics unchanged under the payload flip at the
    // stream level: whiten the recorded nominal tap and its flipped image.
    auto d = presets::robot_design();
    PostFilterDesign pf = design_attack_postfilter(presets::q_r1(), d.Sigma_ry);
    StateSpace rbar = make_rbar(pf, presets::q_r2(-0.15), presets::q_umc());
    const double th = chi2_quantile(0.99, 3.0);
    VectorXd zeta = VectorXd::Zero(3);
    for (int k = 500; k < 6000; ++k) zeta += g_free_run.mc_frames[k].tap;
    zeta /= 5500;
    Filter f0(rbar), f1(rbar);
    int n = 0, alarms0 = 0, alarms1 = 0;
    for (int k = 0; k < 6000; ++k) {
        const VectorXd& tap = g_free_run.mc_frames[k].tap;
        VectorXd w0 = f0.step(tap);
        VectorXd w1 = f1.step(VectorXd(2.0 * zeta - tap));
        if (k < 520) continue;
        ++n;
        if (w0.squaredNorm() > th) ++alarms0;
        if (w1.squaredNorm() > th) ++alarms1;
    }
    const double far0 = static_cast<double>(alarms0) / n;
    const double far1 = static_cast<double>(alarms1) / n;
    const bool far_ok = binomial_ci_ok(far0, 0.01, n) && binomial_ci_ok(far1, 0.01, n);

    // (b) Covariance detector against the in-loop payload flip, empirically
    // calibrated decision threshold at a 1% per-window false-alarm rate.
    ScenarioConfig glr_free = quiet_base(6000, 89);
    glr_free.pdd = true;
    glr_free.det_glr = true;
    glr_free.glr_threshold = 0.0;  // calibrate
    glr_free.calib_steps = 12000;
    ScenarioConfig glr_att = glr_free;
    AttackSpec flip;
    flip.kind = AttackSpec::Kind::FeedbackStealth;
    flip.start_step = 500;
    flip.end_step = 6000;
    glr_att.attacks.push_back(flip);
    RunLog lf = run_scenario(glr_free);
    RunLog la = run_scenario(glr_att);
    int far_n = 0, far_a = 0, pow_n = 0, pow_a = 0;
    for (const auto& v : lf.verdicts)
        if (v.detector == "glr_pdd") {
            ++far_n;
            if (v.alarm) ++far_a;
        }
    for (const auto& v : la.verdicts)
        if (v.detector == "glr_pdd" && v.k0 >= 550) {
            ++pow_n;
            if (v.alarm) ++pow_a;
        }
    const double glr_far = far_n ? static_cast<double>(far_a) / far_n : 1.0;
    const double glr_pow = pow_n ? static_cast<double>(pow_a) / pow_n : 0.0;
    const bool glr_ok = !la.diverged && glr_pow >= 0.95 && glr_far <= 0.05;

    // (c) Additive-stealth detector against the covert profile.
    ScenarioConfig add_cfg = quiet_base(3000, 97);
    add_cfg.pdd = true;
    add_cfg.det_additive = true;
    AttackSpec cov = periodic_attack(true, 500, 3000);
    cov.kind = AttackSpec::Kind::Covert;
    add_cfg.attacks.push_back(cov);
    RunLog ladd = run_scenario(add_cfg);
    int an = 0, aa = 0;
    for (const auto& v : ladd.verdicts)
        if (v.detector == "additive_stealth" && v.k0 >= 600) {
            ++an;
            if (v.alarm) ++aa;
        }
    const double add_pow = an ? static_cast<double>(aa) / an : 0.0;

    const double dt = elapsed_s(t0);
    report(10, far_ok && glr_ok && add_pow >= 0.90 && dt <= 120.0,
           "payload-flip: stream-level FAR " + num(far0) + "->" + num(far1) +
               " unchanged, covariance-detector power " + num(glr_pow) + " at FAR " +
               num(glr_far) + " (threshold " + num(la.glr_threshold_used) +
               "); covert-profile power of additive-stealth detector " + num(add_pow) +
               " (" + num(dt) + " s)");
}

// --- 11: window statistic equals numeric sphere projection -------------------

void criterion_llr_vs_numeric() {
    const double Ll = 0.1433, Lu = 1.0474;
    GaussianSampler gen(777);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<VectorXd> window;
        const double scale = 0.01 + 0.05 * trial;
        const int len = 3 + trial % 8;
        VectorXd stacked(3 * len);
        for (int t = 0; t < len; ++t) {
            window.push_back(scale * gen.vector(3));
            stacked.segment(3 * t, 3) = window.back();
        }
        auto res = llr_statistic(window, Ll, Lu);

        // Numeric optimization: projected gradient on the stacked window for
        // both constrained likelihood maximizations.
        auto run_pgd = [&](bool outside, VectorXd mu) {
            for (int it = 0; it < 400; ++it) {
                mu = mu - 0.3 * (mu - stacked);
                const double nr = mu.norm();
                if (!outside && nr > Ll) mu *= Ll / nr;
                if (outside && nr < Lu) {
                    if (nr < 1e-12)
                        mu = Lu * VectorXd::Unit(stacked.size(), 0);
                    else
                        mu *= Lu / nr;
                }
            }
            return (mu - stacked).squaredNorm();
        };
        const double lower = run_pgd(false, VectorXd::Zero(stacked.size()));
        double upper = run_pgd(true, stacked);
        upper = std::min(upper, run_pgd(true, VectorXd(-stacked)));
        const double brute = 0.5 * upper - 0.5 * lower;
        worst = std::max(worst, std::abs(res.J - brute) / std::max(1.0, std::abs(brute)));
    }
    report(11, worst < 1e-9,
           "piecewise window statistic equals numeric sphere projection on 100 windows "
           "(gap " + num(worst) + ")");
}

// --- 12: post-filter whitening ----------------------------------------------

void criterion_whitening() {
    auto d = presets::robot_design();
    PostFilterDesign pf = design_attack_postfilter(presets::q_r1(), d.Sigma_ry);
    Filter fQ1(presets::q_r1()), fR(pf.R);
    GaussianSampler gen(31337);
    MatrixXd sq = matrix_sqrt_psd(d.Sigma_ry);
    MatrixXd acc = MatrixXd::Zero(3, 3);
    int count = 0;
    for (int k = 0; k < 100200; ++k) {
        VectorXd out = fR.step(fQ1.step(VectorXd(sq * gen.vector(3))));
        if (k < 200) continue;
        acc += out * out.transpose();
        ++count;
    }
    MatrixXd cov = acc / count;
    const double gap = (cov - MatrixXd::Identity(3, 3)).norm() /
                       MatrixXd::Identity(3, 3).norm();
    report(12, gap < 0.05,
           "whitened residual covariance within 5% of identity over 1e5 samples "
           "(relative gap " + num(gap) + ")");
}

}  // namespace

int main() {
    criterion_bezout();
    criterion_constants();
    criterion_residual_invariance();
    criterion_mode_equivalence();
    criterion_superposition();
    criterion_covert_stealth();
    criterion_stealth_power();
    criterion_llr_vs_numeric();
    criterion_whitening();
    std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
    return failures == 0 ? 0 : 1;
}

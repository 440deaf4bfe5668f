#include "cpslab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cpslab/presets.hpp"
#include "cpslab/stats.hpp"

namespace cpslab {

namespace {

constexpr double kGuard = 1e9;

StateSpace negate(StateSpace g) {
    g.C = -g.C;
    g.D = -g.D;
    return g;
}

json mat_to_json(const MatrixXd& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

MatrixXd mat_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("config: matrix must be an array of rows");
    const int rows = static_cast<int>(j.size());
    if (rows == 0) return MatrixXd();
    const int cols = static_cast<int>(j[0].size());
    MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw std::invalid_argument("config: ragged matrix rows");
        for (int c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
    }
    return M;
}

json vec_to_json(const VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

VectorXd vec_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("config: vector must be an array");
    VectorXd v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

int sec_to_step(double seconds, std::vector<std::string>* warn, const char* what) {
    const double exact = seconds / presets::kTs;
    const int k = static_cast<int>(std::floor(exact + 1e-9));
    if (std::abs(exact - k) > 1e-9 && warn)
        warn->push_back(std::string(what) + ": time " + std::to_string(seconds) +
                        " s is not a step multiple; rounded down to step " + std::to_string(k));
    return k;
}

double step_to_sec(int k) { return k * presets::kTs; }

json sine_list_to_json(const std::vector<SinePhase>& v) {
    json a = json::array();
    for (const auto& s : v)
        a.push_back(json{{"amp", s.amp}, {"omega", s.omega}, {"offset", s.offset}});
    return a;
}

std::vector<SinePhase> sine_list_from_json(const json& j) {
    std::vector<SinePhase> out;
    for (const auto& e : j) {
        SinePhase s;
        s.amp = e.value("amp", 0.0);
        s.omega = e.value("omega", 0.0);
        s.offset = e.value("offset", 0.0);
        out.push_back(s);
    }
    return out;
}

json attack_to_json(const AttackSpec& a) {
    json j;
    switch (a.kind) {
        case AttackSpec::Kind::Additive: j["kind"] = "additive"; break;
        case AttackSpec::Kind::Covert: j["kind"] = "covert"; break;
        case AttackSpec::Kind::FeedbackStealth: j["kind"] = "feedback_stealth"; break;
        default: j["kind"] = "none"; break;
    }
    j["start_s"] = step_to_sec(a.start_step);
    j["end_s"] = step_to_sec(a.end_step);
    if (!a.a_umc.empty()) j["a_umc"] = sine_list_to_json(a.a_umc);
    if (!a.a_ryu_det.empty()) j["a_ryu_det"] = sine_list_to_json(a.a_ryu_det);
    if (a.a_ryu_mean.size() > 0) j["a_ryu_mean"] = vec_to_json(a.a_ryu_mean);
    if (a.a_ryu_std.size() > 0) j["a_ryu_std"] = vec_to_json(a.a_ryu_std);
    if (a.Pi.size() > 0) j["Pi"] = mat_to_json(a.Pi);
    if (a.zeta_hat.size() > 0) j["zeta_hat"] = vec_to_json(a.zeta_hat);
    if (a.Sigma_hat.size() > 0) j["Sigma_hat"] = mat_to_json(a.Sigma_hat);
    return j;
}

AttackSpec attack_from_json(const json& j, std::vector<std::string>* warn) {
    AttackSpec a;
    const std::string kind = j.value("kind", "none");
    if (kind == "additive")
        a.kind = AttackSpec::Kind::Additive;
    else if (kind == "covert")
        a.kind = AttackSpec::Kind::Covert;
    else if (kind == "feedback_stealth")
        a.kind = AttackSpec::Kind::FeedbackStealth;
    else if (kind == "none")
        a.kind = AttackSpec::Kind::None;
    else
        throw std::invalid_argument("config: unknown attack kind '" + kind + "'");
    a.start_step = sec_to_step(j.value("start_s", 0.0), warn, "attack start");
    a.end_step = sec_to_step(j.value("end_s", 0.0), warn, "attack end");
    if (j.contains("a_umc")) a.a_umc = sine_list_from_json(j["a_umc"]);
    if (j.contains("a_ryu_det")) a.a_ryu_det = sine_list_from_json(j["a_ryu_det"]);
    if (j.contains("a_ryu_mean")) a.a_ryu_mean = vec_from_json(j["a_ryu_mean"]);
    if (j.contains("a_ryu_std")) a.a_ryu_std = vec_from_json(j["a_ryu_std"]);
    if (j.contains("Pi")) a.Pi = mat_from_json(j["Pi"]);
    if (j.contains("zeta_hat")) a.zeta_hat = vec_from_json(j["zeta_hat"]);
    if (j.contains("Sigma_hat")) a.Sigma_hat = mat_from_json(j["Sigma_hat"]);
    return a;
}

}  // namespace

// --- DetectorSchedule -------------------------------------------------------

int DetectorSchedule::cycle_steps() const {
    int total = 0;
    for (const auto& [name, steps] : dwell) total += steps;
    return total;
}

std::string DetectorSchedule::active_at(int k) const {
    if (dwell.empty()) return "";
    int phase = k % cycle_steps();
    for (const auto& [name, steps] : dwell) {
        if (phase < steps) return name;
        phase -= steps;
    }
    return dwell.back().first;
}

// --- ScenarioConfig ---------------------------------------------------------

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    ScenarioConfig c;
    c.steps = j.value("steps", 2000);
    c.seed = j.value("seed", std::uint64_t{1});
    c.noise_scale = j.value("noise_scale", 1e-6);
    c.q_r2_gain = j.value("q_r2_gain", -0.15);
    if (j.contains("reference")) {
        const json& r = j["reference"];
        if (r.contains("y_ref")) c.y_ref = vec_from_json(r["y_ref"]);
        c.use_reference_shaping = r.value("use_shaping", true);
    }
    if (j.contains("fault")) {
        const json& f = j["fault"];
        if (f.contains("sensor")) {
            const int s = f["sensor"].get<int>();
            c.fault.F_f = MatrixXd::Zero(3, 1);
            if (s < 0 || s > 2) throw std::invalid_argument("config: fault sensor index");
            c.fault.F_f(s, 0) = 1.0;
            c.fault.E_f = MatrixXd::Zero(3, 1);
        } else {
            if (f.contains("F_f")) c.fault.F_f = mat_from_json(f["F_f"]);
            if (f.contains("E_f")) c.fault.E_f = mat_from_json(f["E_f"]);
        }
        c.fault.mean = f.contains("mean") && f["mean"].is_array()
                           ? vec_from_json(f["mean"])
                           : VectorXd::Constant(1, f.value("mean", 0.0));
        c.fault.stddev = f.contains("stddev") && f["stddev"].is_array()
                             ? vec_from_json(f["stddev"])
                             : VectorXd::Constant(1, f.value("stddev", 0.0));
        c.fault.start_step = sec_to_step(f.value("start_s", 0.0), &c.warnings, "fault start");
        c.fault.end_step = sec_to_step(f.value("end_s", 0.0), &c.warnings, "fault end");
        if (c.fault.E_f.size() == 0 && c.fault.F_f.size() > 0)
            c.fault.E_f = MatrixXd::Zero(3, c.fault.F_f.cols());
    }
    if (j.contains("attacks"))
        for (const auto& a : j["attacks"]) c.attacks.push_back(attack_from_json(a, &c.warnings));
    if (j.contains("reconfig"))
        for (const auto& e : j["reconfig"]) {
            ReconfigEvent ev;
            ev.at_step = sec_to_step(e.value("at_s", 0.0), &c.warnings, "reconfig");
            ev.q_r2_gain = e.value("q_r2_gain", -0.15);
            c.reconfig.push_back(ev);
        }
    if (j.contains("pdd")) {
        c.pdd = j["pdd"].value("enabled", false);
        c.psi_gain = j["pdd"].value("psi_gain", 0.05);
    }
    if (j.contains("modes")) {
        for (const auto& s : j["modes"].value("scales", json::array()))
            c.mode_scales.push_back(s.get<double>());
        for (const auto& s : j["modes"].value("schedule", json::array()))
            c.mode_schedule.push_back(s.get<int>());
    }
    if (j.contains("detectors")) {
        const json& d = j["detectors"];
        c.alpha = d.value("alpha", 0.01);
        c.det_fault = d.value("fault_chi2", true);
        c.det_attack = d.value("attack_chi2", true);
        if (d.contains("switch_llr")) {
            const json& s = d["switch_llr"];
            c.det_switch = s.value("enabled", false);
            c.sw_s = s.value("s", 30);
            c.sw_gamma = s.value("gamma", 500);
            c.sw_L0 = s.value("L0", 1e-4);
            c.sw_Ll = s.value("L_l", 0.0);
            c.sw_Lu = s.value("L_u", 0.0);
        }
        if (d.contains("additive_stealth"))
            c.det_additive = d["additive_stealth"].value("enabled", false);
        if (d.contains("glr")) {
            const json& g = d["glr"];
            c.det_glr = g.value("enabled", false);
            c.glr_window = g.value("window", 50);
            c.glr_threshold = g.value("threshold", 180.0);
        }
        if (d.contains("schedule"))
            for (const auto& e : d["schedule"])
                c.schedule.dwell.emplace_back(
                    e[0].get<std::string>(),
                    sec_to_step(e[1].get<double>(), &c.warnings, "detector dwell"));
    }
    c.calib_steps = j.value("calib_steps", 4000);
    c.validate();
    return c;
}

json ScenarioConfig::to_json() const {
    json j;
    j["steps"] = steps;
    j["seed"] = seed;
    j["noise_scale"] = noise_scale;
    j["q_r2_gain"] = q_r2_gain;
    json ref;
    if (y_ref.size() > 0) ref["y_ref"] = vec_to_json(y_ref);
    ref["use_shaping"] = use_reference_shaping;
    j["reference"] = ref;
    if (!fault.empty()) {
        json f;
        f["F_f"] = mat_to_json(fault.F_f);
        f["E_f"] = mat_to_json(fault.E_f);
        f["mean"] = vec_to_json(fault.mean);
        f["stddev"] = vec_to_json(fault.stddev);
        f["start_s"] = step_to_sec(fault.start_step);
        f["end_s"] = step_to_sec(fault.end_step);
        j["fault"] = f;
    }
    if (!attacks.empty()) {
        json a = json::array();
        for (const auto& s : attacks) a.push_back(attack_to_json(s));
        j["attacks"] = a;
    }
    if (!reconfig.empty()) {
        json r = json::array();
        for (const auto& e : reconfig)
            r.push_back(json{{"at_s", step_to_sec(e.at_step)}, {"q_r2_gain", e.q_r2_gain}});
        j["reconfig"] = r;
    }
    j["pdd"] = json{{"enabled", pdd}, {"psi_gain", psi_gain}};
    if (!mode_scales.empty())
        j["modes"] = json{{"scales", mode_scales}, {"schedule", mode_schedule}};
    json d;
    d["alpha"] = alpha;
    d["fault_chi2"] = det_fault;
    d["attack_chi2"] = det_attack;
    d["switch_llr"] = json{{"enabled", det_switch}, {"s", sw_s},     {"gamma", sw_gamma},
                           {"L0", sw_L0},           {"L_l", sw_Ll}, {"L_u", sw_Lu}};
    d["additive_stealth"] = json{{"enabled", det_additive}};
    d["glr"] = json{{"enabled", det_glr}, {"window", glr_window}, {"threshold", glr_threshold}};
    if (!schedule.empty()) {
        json s = json::array();
        for (const auto& [name, st] : schedule.dwell)
            s.push_back(json::array({name, step_to_sec(st)}));
        d["schedule"] = s;
    }
    j["detectors"] = d;
    j["calib_steps"] = calib_steps;
    return j;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (steps < 0) fail("steps must be non-negative");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (noise_scale < 0.0) fail("noise_scale must be non-negative");
    if (y_ref.size() != 0 && y_ref.size() != 3) fail("y_ref must have 3 entries");
    if (!fault.empty()) {
        if (fault.start_step < 0 || fault.end_step > steps || fault.start_step > fault.end_step)
            fail("fault window must lie inside the run");
        if (fault.mean.size() != fault.F_f.cols() || fault.stddev.size() != fault.F_f.cols())
            fail("fault mean/stddev dimension mismatch");
    }
    for (const auto& a : attacks) {
        if (a.kind == AttackSpec::Kind::None) continue;
        if (a.start_step < 0 || a.end_step > steps || a.start_step > a.end_step)
            fail("attack window must lie inside the run");
        if (a.kind == AttackSpec::Kind::FeedbackStealth && !mode_scales.empty())
            fail("feedback-stealth attacks are not supported with gain-mode transmission");
    }
    for (const auto& e : reconfig)
        if (e.at_step < 0 || e.at_step >= std::max(steps, 1))
            fail("reconfiguration event outside the run");
    for (int idx : mode_schedule)
        if (idx < 0 || idx >= static_cast<int>(mode_scales.size()))
            fail("mode schedule references an undefined mode");
    if (!mode_scales.empty() && mode_scales.front() != 1.0)
        fail("mode 0 must be the base gain (scale 1.0)");
    if ((det_additive || det_glr) && !pdd)
        fail("the stealth detectors require the extended residual (pdd)");
    if (det_glr && glr_window < 2) fail("glr window too small");
    for (const auto& [name, st] : schedule.dwell) {
        if (name != "regular" && name != "additive" && name != "multiplicative")
            fail("unknown detector dwell '" + name + "'");
        if (st <= 0) fail("detector dwell must be positive");
    }
    if (!schedule.empty() && !pdd) fail("a detector schedule requires the extended residual");
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: parse error in '" + path + "': " + e.what());
    }
    return ScenarioConfig::from_json(j);
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << cfg.to_json().dump(2) << "\n";
}

// --- Extended-residual coloring --------------------------------------------

StateSpace pdd_gamma(const BezoutFactors& f, const StateSpace& Q_r1,
                     const StateSpace& Q_r2, const StateSpace& Q_uMC,
                     const MatrixXd& Psi) {
    const double Ts = f.plant.Ts;
    const int m = f.plant.m();
    StateSpace psi = StateSpace::static_gain(Psi, Ts);
    StateSpace psiMN = series(vertcat(f.M, f.N), psi);
    StateSpace psiYX = series(vertcat(negate(f.Yhat), f.Xhat), psi);
    // (I - Q_uMC Q_r2)^{-1} Q_uMC Q_r1 : response of the control loop to r_y.
    StateSpace loop_u = parallel_add(StateSpace::identity(m, Ts),
                                     negate(series(Q_r2, Q_uMC)));
    StateSpace dmap = series(series(Q_r1, Q_uMC), invert_io(loop_u));
    return parallel_add(parallel_add(Q_r1, psiYX),
                        series(dmap, parallel_add(Q_r2, psiMN)));
}

// --- Execution --------------------------------------------------------------

namespace {

struct LoopParts {
    presets::RobotDesign d;
    BezoutFactors f;
    StateSpace Q_r1, Q_r2, Q_uMC, Q_v;
    MatrixXd Psi;
    VectorXd v;  // shaped constant reference
};

LoopParts build_parts(const ScenarioConfig& cfg) {
    LoopParts lp;
    // Zero injected noise keeps the nominal design covariances for the gains
    // and whitening, so the noise-free run exercises the same loop.
    lp.d = presets::robot_design(cfg.noise_scale > 0.0 ? cfg.noise_scale : 1e-6);
    if (cfg.noise_scale == 0.0)
        lp.d.noise = NoiseSpec{MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3)};
    lp.f = build_bezout_factors(lp.d.plant, make_gains(lp.d.F, lp.d.L));
    lp.Q_r1 = presets::q_r1();
    lp.Q_r2 = presets::q_r2(cfg.q_r2_gain);
    lp.Q_uMC = presets::q_umc();
    lp.Q_v = StateSpace::identity(3, presets::kTs);
    if (cfg.pdd) {
        lp.Psi.resize(3, 6);
        lp.Psi << cfg.psi_gain * MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3);
    }
    lp.v = VectorXd::Zero(3);
    if (cfg.y_ref.size() > 0)
        lp.v = cfg.use_reference_shaping
                   ? VectorXd(presets::reference_shaping() * cfg.y_ref)
                   : cfg.y_ref;
    return lp;
}

ModeSet modes_from_config(const ScenarioConfig& cfg, const presets::RobotDesign& d) {
    ModeSet modes;
    if (cfg.mode_scales.empty()) return modes;
    for (double s : cfg.mode_scales) {
        modes.F.push_back(s * d.F);
        modes.L.push_back(s * d.L);
    }
    modes.schedule = cfg.mode_schedule;
    return modes;
}

// Whether the extended residual form is transmitted at step k.
bool extended_at(const ScenarioConfig& cfg, int k) {
    if (!cfg.pdd) return false;
    if (cfg.schedule.empty()) return true;
    return cfg.schedule.active_at(k) != "regular";
}

struct Calibration {
    bool has = false;
    VectorXd bias;           // steady mean of the extended detector tap
    MatrixXd Sigma;          // steady covariance of the extended detector tap
    VectorXd zeta_nom, zeta_ext;  // steady payload means per transmitted form
    double glr_th = 0.0;
};

Calibration calibrate(const ScenarioConfig& cfg) {
    ScenarioConfig c = cfg;
    c.attacks.clear();
    c.reconfig.clear();
    c.fault = FaultSpec();
    c.det_fault = c.det_attack = c.det_switch = c.det_additive = c.det_glr = false;
    c.steps = std::max(cfg.calib_steps, 400);
    c.seed = substream_seed(cfg.seed, 9999);
    RunLog log = run_scenario(c);
    if (log.diverged) throw std::runtime_error("calibration run diverged");

    const int burn = c.steps / 4;
    Signal ext_tap, nom_payload, ext_payload;
    for (int k = burn; k < c.steps; ++k) {
        const VectorXd& payload = log.frames[static_cast<std::size_t>(k)].r_yu;
        if (extended_at(c, k)) {
            ext_tap.push_back(log.mc_frames[static_cast<std::size_t>(k)].tap);
            ext_payload.push_back(payload);
        } else {
            nom_payload.push_back(payload);
        }
    }
    Calibration cal;
    cal.has = true;
    if (!ext_tap.empty()) {
        auto [m, S] = estimate_steady_stats(ext_tap);
        cal.bias = m;
        cal.Sigma = S;
        auto [mp, Sp] = estimate_steady_stats(ext_payload);
        cal.zeta_ext = mp;
    }
    if (!nom_payload.empty()) {
        auto [m, S] = estimate_steady_stats(nom_payload);
        cal.zeta_nom = m;
    } else if (!ext_payload.empty()) {
        cal.zeta_nom = cal.zeta_ext;
    }
    // Empirical decision threshold for the covariance detector when requested.
    if (cfg.det_glr && cfg.glr_threshold <= 0.0) {
        if (ext_tap.empty()) throw std::runtime_error("calibration produced no extended samples");
        std::vector<double> stats;
        std::vector<VectorXd> win;
        for (const auto& s : ext_tap) {
            win.push_back(s - cal.bias);
            if (static_cast<int>(win.size()) == cfg.glr_window) {
                stats.push_back(GlrDetector::statistic(cal.Sigma, win));
                win.clear();
            }
        }
        if (stats.size() < 20)
            throw std::runtime_error("too few calibration windows for the glr threshold");
        std::sort(stats.begin(), stats.end());
        const std::size_t idx = std::min(
            stats.size() - 1,
            static_cast<std::size_t>(std::ceil((1.0 - cfg.alpha) * stats.size())));
        cal.glr_th = stats[idx];
    } else {
        cal.glr_th = cfg.glr_threshold;
    }
    return cal;
}

// Per-attack runtime wrapper: library runtime for additive/covert/explicit
// stealth, or an inline calibrated mean-flip for stealth specs without stats.
struct ChannelAttack {
    AttackSpec spec;
    std::optional<AttackRuntime> rt;
    bool calibrated_flip = false;
    MatrixXd Pi;
    VectorXd zeta_nom, zeta_ext;

    VectorXd to_mc(const VectorXd& payload, int k, bool extended) const {
        if (rt) return rt->peek_to_mc(payload);
        if (!spec.active(k)) return payload;
        const VectorXd& z = extended ? zeta_ext : zeta_nom;
        return Pi * (payload - z) + z;
    }
};

}  // namespace

RunLog run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    LoopParts lp = build_parts(cfg);
    const int p = lp.d.plant.p();
    const int m = lp.d.plant.m();

    RunLog log;
    log.seed = cfg.seed;
    log.config_echo = cfg.to_json();

    const bool needs_cal =
        cfg.det_additive || cfg.det_glr ||
        std::any_of(cfg.attacks.begin(), cfg.attacks.end(), [](const AttackSpec& a) {
            return a.kind == AttackSpec::Kind::FeedbackStealth && a.Sigma_hat.size() == 0;
        });
    Calibration cal;
    if (needs_cal) {
        cal = calibrate(cfg);
        log.calib_bias = cal.bias;
        log.calib_sigma = cal.Sigma;
        log.glr_threshold_used = cal.glr_th;
    }

    // Plant side.
    PlantRuntime::Config pcfg;
    pcfg.plant = lp.d.plant;
    pcfg.noise = lp.d.noise;
    pcfg.fault = cfg.fault;
    pcfg.F = lp.d.F;
    pcfg.L = lp.d.L;
    pcfg.Q_r1 = lp.Q_r1;
    pcfg.Q_r2 = lp.Q_r2;
    pcfg.Q_v = lp.Q_v;
    pcfg.Sigma_ry = lp.d.Sigma_ry;
    if (cfg.pdd) {
        pcfg.Psi = lp.Psi;
        pcfg.Q_uMC = lp.Q_uMC;
    }
    pcfg.modes = modes_from_config(cfg, lp.d);
    pcfg.seed = cfg.seed;
    PlantRuntime plant(pcfg);

    // MC station.
    McStation::Config mcfg;
    mcfg.Q_uMC = lp.Q_uMC;
    mcfg.Q_r2 = lp.Q_r2;
    mcfg.Q_v = lp.Q_v;
    if (lp.v.cwiseAbs().maxCoeff() > 0.0) mcfg.vbar = Signal(1, lp.v);
    if (!pcfg.modes.empty()) {
        mcfg.modes = pcfg.modes;
        mcfg.base = lp.f;
        mcfg.Q_r1 = lp.Q_r1;
    }
    McStation mc(mcfg);

    // Channel attacks.
    std::vector<ChannelAttack> attacks;
    for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
        ChannelAttack ca;
        ca.spec = cfg.attacks[i];
        if (ca.spec.kind == AttackSpec::Kind::FeedbackStealth &&
            ca.spec.Sigma_hat.size() == 0) {
            ca.calibrated_flip = true;
            ca.Pi = ca.spec.Pi.size() > 0 ? ca.spec.Pi
                                          : MatrixXd(-MatrixXd::Identity(p, p));
            ca.zeta_nom = cal.zeta_nom.size() > 0 ? cal.zeta_nom : VectorXd::Zero(p);
            ca.zeta_ext = cal.zeta_ext.size() > 0 ? cal.zeta_ext : ca.zeta_nom;
        } else {
            ca.rt.emplace(ca.spec, lp.Q_r2, substream_seed(cfg.seed, 100 + i));
        }
        attacks.push_back(std::move(ca));
    }

    // Detectors.
    const double chi2_th = chi2_quantile(1.0 - cfg.alpha, static_cast<double>(p));
    PostFilterDesign pf = design_attack_postfilter(lp.Q_r1, lp.d.Sigma_ry);
    Filter fRbar(make_rbar(pf, lp.Q_r2, lp.Q_uMC));
    std::optional<SwitchLlrDetector> swdet;
    if (cfg.det_switch) {
        SwitchDetectorDesign sd = build_switch_detector(pf.R, cfg.sw_s, cfg.sw_gamma, cfg.sw_L0);
        if (cfg.sw_Ll > 0.0) sd.L_l = cfg.sw_Ll;
        if (cfg.sw_Lu > 0.0) sd.L_u = cfg.sw_Lu;
        swdet.emplace(sd, cfg.alpha);
    }
    std::optional<Filter> fAdd;
    if (cfg.det_additive) {
        StateSpace gamma = pdd_gamma(lp.f, lp.Q_r1, lp.Q_r2, lp.Q_uMC, lp.Psi);
        fAdd.emplace(design_attack_postfilter(gamma, lp.d.Sigma_ry).R);
    }
    std::optional<GlrDetector> glr;
    if (cfg.det_glr)
        glr.emplace(cal.Sigma, cfg.glr_window, cal.glr_th, "glr_pdd");

    std::vector<ReconfigEvent> events = cfg.reconfig;
    std::sort(events.begin(), events.end(),
              [](const ReconfigEvent& a, const ReconfigEvent& b) { return a.at_step < b.at_step; });
    std::size_t next_event = 0;

    log.frames.reserve(static_cast<std::size_t>(cfg.steps));
    log.mc_frames.reserve(static_cast<std::size_t>(cfg.steps));
    std::string prev_dwell;

    for (int k = 0; k < cfg.steps; ++k) {
        // Atomic controller reconfiguration on both loop ends, including the
        // detector's matched cascade (filter states carry over).
        while (next_event < events.size() && events[next_event].at_step == k) {
            StateSpace q2 = presets::q_r2(events[next_event].q_r2_gain);
            plant.reconfigure_Q_r2(q2);
            mc.reconfigure_Q_r2(q2);
            fRbar.replace_system(make_rbar(pf, q2, lp.Q_uMC));
            ++next_event;
        }
        const bool extended = extended_at(cfg, k);
        if (cfg.pdd) plant.set_extended_active(extended);
        const std::string dwell = cfg.schedule.empty() ? "" : cfg.schedule.active_at(k);

        plant.begin_step(k);
        mc.begin_step(k);
        for (auto& ca : attacks)
            if (ca.rt) ca.rt->begin_step(k);

        // Resolve the well-posed within-step loop: the full pipeline
        // u_MC -> control channel -> plant -> transmission channel -> station
        // is affine in u_MC; probe it and solve (I - S) u_MC = b.
        auto pipeline = [&](const VectorXd& u_mc) -> VectorXd {
            VectorXd u_a = u_mc;
            for (const auto& ca : attacks)
                if (ca.rt) u_a = ca.rt->apply_to_plant(u_a);
            VectorXd payload = plant.peek_payload(u_a);
            for (const auto& ca : attacks) payload = ca.to_mc(payload, k, extended);
            return mc.peek_control(payload);
        };
        const VectorXd b = pipeline(VectorXd::Zero(m));
        MatrixXd S(m, m);
        for (int j = 0; j < m; ++j) S.col(j) = pipeline(VectorXd::Unit(m, j)) - b;
        Eigen::FullPivLU<MatrixXd> lu(MatrixXd::Identity(m, m) - S);
        if (!lu.isInvertible()) {
            log.diverged = true;
            log.diverged_at = k;
            log.summary.push_back("aborted: within-step loop singular at step " +
                                  std::to_string(k));
            break;
        }
        const VectorXd u_mc = lu.solve(b);

        VectorXd u_a = u_mc;
        for (const auto& ca : attacks)
            if (ca.rt) u_a = ca.rt->apply_to_plant(u_a);
        ResidualFrame fr = plant.commit(u_a);
        VectorXd payload = plant.moving_target()
                               ? VectorXd((VectorXd(p + m) << fr.r_y_mode, fr.r_u_mode).finished())
                               : fr.r_yu;
        VectorXd attacked = payload;
        for (auto& ca : attacks) {
            attacked = ca.to_mc(attacked, k, extended);
            if (ca.rt) ca.rt->commit_to_mc(payload);
        }
        McStation::Frame mf = mc.commit(attacked);

        // Detectors.
        if (cfg.det_fault) {
            DetectorVerdict v;
            v.detector = "fault_chi2";
            v.k0 = k;
            v.J = fr.J_rel;
            v.J_th = chi2_th;
            v.alarm = v.J > chi2_th;
            log.verdicts.push_back(v);
        }
        if (!extended && (cfg.det_attack || cfg.det_switch)) {
            // The whitening cascade is matched to the plain fused form; it is
            // advanced only on those steps (state freezes across dwell gaps).
            VectorXd rbar = fRbar.step(mf.tap);
            if (cfg.det_attack && (cfg.schedule.empty() || dwell == "regular")) {
                DetectorVerdict v;
                v.detector = "attack_chi2";
                v.k0 = k;
                v.J = rbar.squaredNorm();
                v.J_th = chi2_th;
                v.alarm = v.J > chi2_th;
                log.verdicts.push_back(v);
            }
            if (swdet) {
                auto v = swdet->step(k, rbar);
                if (v) log.verdicts.push_back(*v);
            }
        }
        if (extended && fAdd) {
            VectorXd ra = fAdd->step(mf.tap - cal.bias);
            if (cfg.schedule.empty() || dwell == "additive") {
                DetectorVerdict v;
                v.detector = "additive_stealth";
                v.k0 = k;
                v.J = ra.squaredNorm();
                v.J_th = chi2_th;
                v.alarm = v.J > chi2_th;
                log.verdicts.push_back(v);
            }
        }
        if (glr && extended && (cfg.schedule.empty() || dwell == "multiplicative")) {
            if (dwell != prev_dwell && dwell == "multiplicative") glr->reset();
            auto v = glr->step(k, mf.tap - cal.bias);
            if (v) log.verdicts.push_back(*v);
        }
        prev_dwell = dwell;

        log.frames.push_back(fr);
        log.mc_frames.push_back(mf);

        const double worst =
            std::max({fr.u.cwiseAbs().maxCoeff(), fr.y.cwiseAbs().maxCoeff(),
                      mf.tap.size() > 0 ? mf.tap.cwiseAbs().maxCoeff() : 0.0});
        if (!std::isfinite(worst) || worst > kGuard) {
            log.diverged = true;
            log.diverged_at = k;
            log.summary.push_back("aborted: signal norm exceeded " + std::to_string(kGuard) +
                                  " at step " + std::to_string(k));
            break;
        }
    }

    log.perf = check_performance(lp.f, lp.Q_r1, lp.Q_r2, lp.Q_uMC);
    return log;
}

// --- Output emission --------------------------------------------------------

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

void emit_outputs(const RunLog& log, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);

    const int m = log.frames.empty() ? 3 : static_cast<int>(log.frames.front().u.size());
    const int p = log.frames.empty() ? 3 : static_cast<int>(log.frames.front().y.size());

    std::ostringstream tr;
    tr << "k,t";
    for (int i = 1; i <= m; ++i) tr << ",u" << i;
    for (int i = 1; i <= p; ++i) tr << ",y" << i;
    for (int i = 1; i <= p; ++i) tr << ",ry" << i;
    for (int i = 1; i <= m; ++i) tr << ",ru" << i;
    for (int i = 1; i <= p; ++i) tr << ",ryu" << i;
    tr << ",J_rel\n";
    for (std::size_t idx = 0; idx < log.frames.size(); ++idx) {
        const ResidualFrame& fr = log.frames[idx];
        const VectorXd& ryu =
            fr.r_yu.size() > 0 ? fr.r_yu : log.mc_frames[idx].r_yu;
        tr << fr.k << "," << fmt(fr.k * presets::kTs);
        for (int i = 0; i < m; ++i) tr << "," << fmt(fr.u(i));
        for (int i = 0; i < p; ++i) tr << "," << fmt(fr.y(i));
        for (int i = 0; i < p; ++i) tr << "," << fmt(fr.r_y(i));
        for (int i = 0; i < m; ++i) tr << "," << fmt(fr.r_u(i));
        for (int i = 0; i < p; ++i) tr << "," << fmt(ryu(i));
        tr << "," << fmt(fr.J_rel) << "\n";
    }
    write_file(base / "trajectories.csv", tr.str());

    std::ostringstream vd;
    vd << "detector,k0,J,J_th,branch,decision\n";
    for (const auto& v : log.verdicts)
        vd << v.detector << "," << v.k0 << "," << fmt(v.J) << "," << fmt(v.J_th) << ","
           << v.branch << "," << (v.alarm ? "alarm" : "clear") << "\n";
    write_file(base / "verdicts.csv", vd.str());

    std::ostringstream rp;
    rp << "seed: " << log.seed << "\n";
    rp << "steps: " << log.frames.size() << "\n";
    rp << "gamma_theta: " << fmt(log.perf.gamma_theta) << "\n";
    rp << "gamma_ry: " << fmt(log.perf.gamma_ry) << "\n";
    rp << "diverged: " << (log.diverged ? "yes" : "no") << "\n";
    if (log.glr_threshold_used > 0.0)
        rp << "glr_threshold: " << fmt(log.glr_threshold_used) << "\n";
    for (const auto& s : log.summary) rp << s << "\n";
    write_file(base / "report.txt", rp.str());

    write_file(base / "config.json", log.config_echo.dump(2) + "\n");
}

// --- Experiment reproductions ----------------------------------------------

namespace {

double alarm_rate(const RunLog& log, const std::string& det, int k0, int k1) {
    int total = 0, alarms = 0;
    for (const auto& v : log.verdicts)
        if (v.detector == det && v.k0 >= k0 && v.k0 < k1) {
            ++total;
            if (v.alarm) ++alarms;
        }
    return total > 0 ? static_cast<double>(alarms) / total : 0.0;
}

int verdict_count(const RunLog& log, const std::string& det, int k0, int k1) {
    int total = 0;
    for (const auto& v : log.verdicts)
        if (v.detector == det && v.k0 >= k0 && v.k0 < k1) ++total;
    return total;
}

// Root-mean-square deviation between two same-seed runs over [k0, k1).
double rms_dev(const RunLog& a, const RunLog& b, int k0, int k1, bool on_input) {
    double acc = 0.0;
    int count = 0;
    for (int k = k0; k < k1 && k < static_cast<int>(std::min(a.frames.size(), b.frames.size()));
         ++k) {
        const VectorXd d = on_input
                               ? VectorXd(a.frames[static_cast<std::size_t>(k)].u -
                                          b.frames[static_cast<std::size_t>(k)].u)
                               : VectorXd(a.frames[static_cast<std::size_t>(k)].y -
                                          b.frames[static_cast<std::size_t>(k)].y);
        acc += d.squaredNorm();
        ++count;
    }
    return count > 0 ? std::sqrt(acc / count) : 0.0;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

AttackSpec case_attack(bool with_ryu) {
    AttackSpec a;
    a.kind = AttackSpec::Kind::Additive;
    a.a_umc.resize(3);
    a.a_umc[0] = {0.05, 0.2 * M_PI, 0.0};
    a.a_umc[2] = {-0.05, 0.2 * M_PI, 0.0};
    if (with_ryu) {
        a.a_ryu_mean = VectorXd::Zero(3);
        a.a_ryu_std = VectorXd::Zero(3);
        a.a_ryu_mean(1) = -0.025;
        a.a_ryu_std(1) = 1e-5;
    }
    return a;
}

ScenarioConfig base_experiment(std::uint64_t seed) {
    ScenarioConfig c;
    c.steps = 2000;
    c.seed = seed;
    c.y_ref = VectorXd(3);
    c.y_ref << 0.1, 0.1, 0.05;
    return c;
}

// Traditional loop for the comparison study: the station hosts the observer,
// receives y over the channel and sends u back; its detector is the
// chi-square test on the observer innovation.
struct TraditionalRun {
    std::vector<double> J1;
    double threshold = 0.0;
};

TraditionalRun run_traditional(const ScenarioConfig& cfg) {
    LoopParts lp = build_parts(cfg);
    const int n = lp.d.plant.n(), p = lp.d.plant.p();
    GaussianSampler rw(substream_seed(cfg.seed, 0)), rn(substream_seed(cfg.seed, 1));
    MatrixXd sw = matrix_sqrt_psd(lp.d.noise.Sigma_w);
    MatrixXd sn = matrix_sqrt_psd(lp.d.noise.Sigma_nu);
    MatrixXd Sinv = lp.d.Sigma_ry.inverse();
    std::vector<std::optional<AttackRuntime>> atk;
    for (std::size_t i = 0; i < cfg.attacks.size(); ++i)
        atk.emplace_back(std::in_place, cfg.attacks[i], lp.Q_r2,
                         substream_seed(cfg.seed, 100 + i));
    VectorXd x = VectorXd::Zero(n), xhat = VectorXd::Zero(n);
    Filter fQ(lp.Q_r1);
    TraditionalRun out;
    out.threshold = chi2_quantile(1.0 - cfg.alpha, static_cast<double>(p));
    for (int k = 0; k < cfg.steps; ++k) {
        VectorXd w = sw * rw.vector(n), nu = sn * rn.vector(p);
        VectorXd y = lp.d.plant.C * x + nu;
        VectorXd ry = y - lp.d.plant.C * xhat;
        out.J1.push_back(ry.dot(Sinv * ry));
        VectorXd u_mc = lp.d.F * xhat + lp.v + fQ.step(ry);
        VectorXd u = u_mc;
        for (auto& a : atk) {
            a->begin_step(k);
            u = a->apply_to_plant(u);
        }
        x = lp.d.plant.A * x + lp.d.plant.B * u + w;
        xhat = lp.d.plant.A * xhat + lp.d.plant.B * u_mc + lp.d.L * ry;
    }
    return out;
}

void push(RunLog& log, const std::string& s) { log.summary.push_back(s); }

}  // namespace

ScenarioConfig experiment_config(const std::string& experiment) {
    if (experiment == "E1") {
        ScenarioConfig c = base_experiment(101);
        c.fault.F_f = MatrixXd::Zero(3, 1);
        c.fault.F_f(0, 0) = 1.0;
        c.fault.E_f = MatrixXd::Zero(3, 1);
        c.fault.mean = VectorXd::Constant(1, 0.025);
        c.fault.stddev = VectorXd::Constant(1, 1e-3);
        c.fault.start_step = 500;
        c.fault.end_step = 2000;
        c.reconfig.push_back({1250, -90.0});
        return c;
    }
    if (experiment == "E2") {
        ScenarioConfig c = base_experiment(102);
        AttackSpec a = case_attack(true);
        a.start_step = 500;
        a.end_step = 1500;
        c.attacks.push_back(a);
        c.reconfig.push_back({1000, -90.0});
        c.reconfig.push_back({1500, -0.15});
        return c;
    }
    if (experiment == "E3") {
        ScenarioConfig c = base_experiment(103);
        AttackSpec a = case_attack(true);
        a.start_step = 200;
        a.end_step = 1700;
        c.attacks.push_back(a);
        c.det_switch = true;
        c.sw_Ll = 0.1433;
        c.sw_Lu = 1.0474;
        return c;
    }
    if (experiment == "E4") {
        ScenarioConfig c = base_experiment(104);
        AttackSpec a = case_attack(false);  // control-channel attack only
        a.start_step = 500;
        a.end_step = 1500;
        c.attacks.push_back(a);
        return c;
    }
    if (experiment == "E5" || experiment == "E6") {
        ScenarioConfig c = base_experiment(experiment == "E5" ? 105 : 106);
        c.steps = 1250;
        c.pdd = true;
        c.det_additive = true;
        c.det_glr = true;
        c.glr_threshold = 180.0;
        c.glr_window = 50;
        c.schedule.dwell = {{"regular", 150}, {"additive", 50}, {"multiplicative", 50}};
        AttackSpec mult;
        mult.kind = AttackSpec::Kind::FeedbackStealth;
        mult.start_step = 250;
        mult.end_step = 500;
        c.attacks.push_back(mult);
        AttackSpec cov = case_attack(false);
        cov.a_umc[0].offset = 1.0;
        cov.a_umc[2].offset = 1.0;
        cov.kind = AttackSpec::Kind::Covert;
        cov.start_step = 750;
        cov.end_step = 1000;
        c.attacks.push_back(cov);
        return c;
    }
    throw std::invalid_argument("unknown experiment '" + experiment + "' (expect E1..E6)");
}

RunLog reproduce(const std::string& experiment) {
    ScenarioConfig cfg = experiment_config(experiment);
    RunLog log = run_scenario(cfg);
    const double chi2_th = chi2_quantile(1.0 - cfg.alpha, 3.0);
    push(log, "experiment: " + experiment);
    push(log, "chi2 threshold (alpha=0.01, 3 dof): " + num(chi2_th) + " (expected 11.3450)");

    if (experiment == "E1") {
        ScenarioConfig base = cfg;
        base.fault = FaultSpec();
        base.reconfig.clear();
        RunLog ref = run_scenario(base);
        const double far = alarm_rate(log, "fault_chi2", 0, 500);
        const double rate = alarm_rate(log, "fault_chi2", 520, 1250);
        const double pre = rms_dev(log, ref, 750, 1250, true);
        const double post = rms_dev(log, ref, 1500, 2000, true);
        PerformanceReport ftc = check_performance(
            build_parts(base).f, presets::q_r1(), presets::q_r2(-90.0), presets::q_umc());
        push(log, "fault detection rate in [52,125) s: " + num(rate) +
                      " (false alarms before: " + num(far) + ")");
        push(log, "gamma_theta nominal/reconfigured: " + num(log.perf.gamma_theta) + " / " +
                      num(ftc.gamma_theta) + " (expected 0.4000 / 1.1099e-3)");
        push(log, "control-effort fault deviation RMS before/after reconfiguration: " +
                      num(pre) + " / " + num(post) + " (ratio " + num(post / pre) + ")");
        push(log, "note: the published reconfiguration also resynthesizes the output-residual "
                  "fusion filter with an external H-inf solver; only the input-side swap is "
                  "reproduced here.");
    } else if (experiment == "E2") {
        ScenarioConfig base = cfg;
        base.attacks.clear();
        base.reconfig.clear();
        RunLog ref = run_scenario(base);
        const double far = alarm_rate(log, "attack_chi2", 0, 500);
        const double rate = alarm_rate(log, "attack_chi2", 520, 1000);
        const double pre_u = rms_dev(log, ref, 550, 1000, true);
        const double post_u = rms_dev(log, ref, 1050, 1500, true);
        const double pre_y = rms_dev(log, ref, 550, 1000, false);
        const double post_y = rms_dev(log, ref, 1050, 1500, false);
        push(log, "attack detection rate in [52,100) s: " + num(rate) +
                      " (false alarms before: " + num(far) + ")");
        push(log, "input deviation RMS before/after reconfiguration: " + num(pre_u) + " / " +
                      num(post_u) + " (ratio " + num(post_u / pre_u) + ")");
        push(log, "output deviation RMS before/after reconfiguration: " + num(pre_y) + " / " +
                      num(post_y) + " (ratio " + num(post_y / pre_y) + ")");
    } else if (experiment == "E3") {
        LlrBranches b = llr_branch_values(std::sqrt(129.15), 0.1433, 1.0474);
        push(log, "branch constants at ||rbar||^2=129.15: " + num(b.lower) + " / " +
                      num(b.middle) + " / " + num(b.upper) +
                      " (expected 53.2207 / -9.7366 / -62.9573)");
        push(log, "noncentral quantile (93 dof, ncp 1.0970, p=0.99): " +
                      num(noncentral_chi2_quantile(0.99, 93.0, 1.0474 * 1.0474)) +
                      " (expected 129.15)");
        const double pre = alarm_rate(log, "switch_llr", 30, 200);
        const double during = alarm_rate(log, "switch_llr", 260, 1700);
        const double post = alarm_rate(log, "switch_llr", 1810, 2000);
        int first_alarm = -1, clear_by = -1, clear_run = 0;
        for (const auto& v : log.verdicts) {
            if (v.detector != "switch_llr") continue;
            if (v.alarm && first_alarm < 0 && v.k0 >= 200) first_alarm = v.k0;
            if (v.k0 >= 1700 && clear_by < 0) {
                clear_run = v.alarm ? 0 : clear_run + 1;
                if (clear_run == 30) clear_by = v.k0 - 29;
            }
        }
        push(log, "switch detector rate before/during/after attack: " + num(pre) + " / " +
                      num(during) + " / " + num(post));
        push(log, "switching-on detected at step " + std::to_string(first_alarm) +
                      " (attack starts at 200); sustained clear from step " +
                      std::to_string(clear_by) + " (attack ends at 1700; delay " +
                      num((clear_by - 1700) * presets::kTs) + " s)");
    } else if (experiment == "E4") {
        TraditionalRun trad = run_traditional(cfg);
        int alarms = 0, total = 0;
        for (int k = 520; k < 1500; ++k) {
            ++total;
            if (trad.J1[static_cast<std::size_t>(k)] > trad.threshold) ++alarms;
        }
        const double j1_rate = static_cast<double>(alarms) / total;
        const double j0_rate = alarm_rate(log, "attack_chi2", 520, 1500);
        push(log, "input-only attack, residual-transmission detector rate: " + num(j0_rate));
        push(log, "same attack, traditional output-innovation detector rate: " + num(j1_rate) +
                      " (indistinguishable from its false-alarm level)");
    } else if (experiment == "E5" || experiment == "E6") {
        const double reg_far = alarm_rate(log, "attack_chi2", 500, 750);
        if (experiment == "E5") {
            const double add_hit = alarm_rate(log, "additive_stealth", 900, 950);
            const double reg_during = alarm_rate(log, "attack_chi2", 750, 900);
            const double add_far = alarm_rate(log, "additive_stealth", 650, 700);
            push(log, "covert attack, regular detector rate during attack: " + num(reg_during) +
                          " (attack-free level " + num(reg_far) + ")");
            push(log, "covert attack, dedicated detector rate: " + num(add_hit) +
                          " (attack-free level " + num(add_far) + ")");
        } else {
            const double glr_hit = alarm_rate(log, "glr_pdd", 450, 500);
            int far_total = 0, far_alarms = 0;
            for (const auto& v : log.verdicts)
                if (v.detector == "glr_pdd" &&
                    !(v.k0 >= 450 && v.k0 < 500) && !(v.k0 >= 950 && v.k0 < 1000)) {
                    ++far_total;
                    if (v.alarm) ++far_alarms;
                }
            const double glr_far =
                far_total > 0 ? static_cast<double>(far_alarms) / far_total : 0.0;
            const double glr_covert = alarm_rate(log, "glr_pdd", 950, 1000);
            const double reg_during = alarm_rate(log, "attack_chi2", 250, 400);
            push(log, "payload-flip attack, covariance detector rate during attack: " +
                          num(glr_hit) + " (attack-free level " + num(glr_far) + ")");
            push(log, "payload-flip attack, regular detector rate during attack: " +
                          num(reg_during) +
                          " (stream-level moments are preserved; the closed loop re-colors the "
                          "fed-back stream, so the in-loop statistic may respond)");
            push(log, "covariance detector also exposes the covert window through the "
                      "auxiliary payload term: rate " + num(glr_covert));
        }
        push(log, "detector dwell audit: regular/additive/multiplicative verdict counts " +
                      std::to_string(verdict_count(log, "attack_chi2", 0, cfg.steps)) + "/" +
                      std::to_string(verdict_count(log, "additive_stealth", 0, cfg.steps)) + "/" +
                      std::to_string(verdict_count(log, "glr_pdd", 0, cfg.steps)));
    }
    return log;
}

}  // namespace cpslab

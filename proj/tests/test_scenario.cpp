#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cpslab/presets.hpp"
#include "cpslab/scenario.hpp"
#include "helpers.hpp"

using namespace cpslab;

namespace {

ScenarioConfig small_run(int steps = 300, std::uint64_t seed = 5) {
    ScenarioConfig c;
    c.steps = steps;
    c.seed = seed;
    c.y_ref = VectorXd(3);
    c.y_ref << 0.1, 0.1, 0.05;
    return c;
}

double max_dev(const RunLog& a, const RunLog& b) {
    REQUIRE(a.frames.size() == b.frames.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        worst = std::max(worst, (a.frames[k].u - b.frames[k].u).cwiseAbs().maxCoeff());
        worst = std::max(worst, (a.frames[k].y - b.frames[k].y).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

TEST_CASE("same seed gives bitwise identical runs") {
    RunLog a = run_scenario(small_run());
    RunLog b = run_scenario(small_run());
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        CHECK(a.frames[k].u == b.frames[k].u);
        CHECK(a.frames[k].y == b.frames[k].y);
        CHECK(a.mc_frames[k].tap == b.mc_frames[k].tap);
    }
}

TEST_CASE("config JSON round-trip is lossless") {
    for (const char* e : {"E1", "E2", "E3", "E5"}) {
        ScenarioConfig c = experiment_config(e);
        json j = c.to_json();
        ScenarioConfig back = ScenarioConfig::from_json(j);
        CHECK(back.to_json() == j);
    }
}

TEST_CASE("config validation rejects malformed runs") {
    ScenarioConfig c = small_run(10);
    c.fault.F_f = MatrixXd::Identity(3, 3).leftCols(1);
    c.fault.E_f = MatrixXd::Zero(3, 1);
    c.fault.mean = VectorXd::Constant(1, 0.1);
    c.fault.stddev = VectorXd::Constant(1, 0.0);
    c.fault.start_step = 5;
    c.fault.end_step = 50;  // beyond the run
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    ScenarioConfig d = small_run(10);
    d.det_additive = true;  // needs the extended residual
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);

    ScenarioConfig s = small_run(10);
    s.pdd = true;
    s.schedule.dwell = {{"regular", 5}, {"bogus", 5}};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    ScenarioConfig a = small_run(10);
    a.alpha = 1.5;
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

TEST_CASE("emitted CSV files follow the documented schema") {
    namespace fs = std::filesystem;
    RunLog log = run_scenario(small_run(50));
    const std::string dir = (fs::temp_directory_path() / "cpslab_emit_test").string();
    emit_outputs(log, dir);

    std::ifstream tr(dir + "/trajectories.csv");
    REQUIRE(tr.good());
    std::string header;
    std::getline(tr, header);
    CHECK(header ==
          "k,t,u1,u2,u3,y1,y2,y3,ry1,ry2,ry3,ru1,ru2,ru3,ryu1,ryu2,ryu3,J_rel");
    int rows = 0;
    for (std::string line; std::getline(tr, line);) ++rows;
    CHECK(rows == 50);

    std::ifstream vd(dir + "/verdicts.csv");
    REQUIRE(vd.good());
    std::getline(vd, header);
    CHECK(header == "detector,k0,J,J_th,branch,decision");
    CHECK(fs::exists(dir + "/report.txt"));
    CHECK(fs::exists(dir + "/config.json"));
    fs::remove_all(dir);
}

TEST_CASE("extended-tap coloring model matches the simulated loop") {
    // With zero reference the attack-free extended tap is exactly the white
    // output residual filtered through the derived coloring system.
    ScenarioConfig c;
    c.steps = 300;
    c.seed = 17;
    c.pdd = true;
    RunLog log = run_scenario(c);

    auto d = presets::robot_design(c.noise_scale);
    auto f = build_bezout_factors(d.plant, make_gains(d.F, d.L));
    MatrixXd Psi(3, 6);
    Psi << 0.05 * MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3);
    StateSpace gamma =
        pdd_gamma(f, presets::q_r1(), presets::q_r2(-0.15), presets::q_umc(), Psi);

    Signal ry;
    for (const auto& fr : log.frames) ry.push_back(fr.r_y);
    Signal pred = filter_signal(gamma, ry);
    double worst = 0.0;
    for (std::size_t k = 0; k < ry.size(); ++k)
        worst = std::max(worst,
                         (pred[k] - log.mc_frames[k].tap).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-9);
}

TEST_CASE("auxiliary payload term leaves the closed loop unchanged") {
    ScenarioConfig plain = small_run(400, 23);
    ScenarioConfig ext = plain;
    ext.pdd = true;
    CHECK(max_dev(run_scenario(plain), run_scenario(ext)) < 1e-8);
}

TEST_CASE("detector dwell schedule: same loop, audited verdict counts") {
    ScenarioConfig always = small_run(500, 31);
    always.pdd = true;
    ScenarioConfig sched = always;
    sched.schedule.dwell = {{"regular", 60}, {"additive", 20}, {"multiplicative", 20}};
    RunLog a = run_scenario(always);
    RunLog s = run_scenario(sched);
    CHECK(max_dev(a, s) < 1e-8);

    int regular = 0, fault = 0;
    for (const auto& v : s.verdicts) {
        if (v.detector == "attack_chi2") ++regular;
        if (v.detector == "fault_chi2") ++fault;
    }
    CHECK(fault == 500);    // fault monitor runs every step
    CHECK(regular == 300);  // 60 of every 100 steps are regular dwells
}

TEST_CASE("reconfiguring to the same gain is a no-op") {
    ScenarioConfig plain = small_run(300, 41);
    ScenarioConfig reconf = plain;
    reconf.reconfig.push_back({150, -0.15});
    CHECK(max_dev(run_scenario(plain), run_scenario(reconf)) == 0.0);
}

TEST_CASE("reconfiguration to the strong gain keeps the loop stable") {
    ScenarioConfig c = small_run(400, 43);
    c.reconfig.push_back({100, -90.0});
    c.reconfig.push_back({300, -0.15});
    RunLog log = run_scenario(c);
    CHECK_FALSE(log.diverged);
    for (const auto& fr : log.frames) CHECK(fr.u.cwiseAbs().maxCoeff() < 1e3);
}

TEST_CASE("scenario-level attack deviation obeys superposition") {
    ScenarioConfig base = small_run(400, 47);
    ScenarioConfig att = base;
    AttackSpec a;
    a.kind = AttackSpec::Kind::Additive;
    a.start_step = 100;
    a.end_step = 300;
    a.a_umc = {{0.02, 0.3, 0.0}, {0.0, 0.0, 0.0}, {-0.01, 0.5, 0.1}};
    a.a_ryu_det = {{0.005, 0.7, 0.0}, {0.0, 0.0, -0.002}, {0.0, 0.0, 0.0}};
    att.attacks.push_back(a);
    RunLog la = run_scenario(att);
    RunLog lb = run_scenario(base);

    auto d = presets::robot_design(base.noise_scale);
    auto f = build_bezout_factors(d.plant, make_gains(d.F, d.L));
    auto pred = predict_attacked_closed_loop(f, presets::q_r2(-0.15), presets::q_umc());
    REQUIRE(pred.stable);
    Signal drive;
    for (int k = 0; k < base.steps; ++k) {
        VectorXd in = VectorXd::Zero(6);
        if (a.active(k)) {
            for (int i = 0; i < 3; ++i) in(i) = a.a_umc[i].at(k);
            for (int i = 0; i < 3; ++i) in(3 + i) = a.a_ryu_det[i].at(k);
        }
        drive.push_back(in);
    }
    Signal dev = filter_signal(pred.deviation, drive);
    double worst = 0.0;
    for (int k = 0; k < base.steps; ++k) {
        VectorXd du = la.frames[k].u - lb.frames[k].u;
        VectorXd dy = la.frames[k].y - lb.frames[k].y;
        worst = std::max(worst, (du - dev[k].head(3)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (dy - dev[k].tail(3)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("unknown experiment name is rejected") {
    CHECK_THROWS_AS(experiment_config("E9"), std::invalid_argument);
    CHECK_THROWS_AS(experiment_config(""), std::invalid_argument);
}

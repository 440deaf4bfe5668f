#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "cpslab/presets.hpp"
#include "cpslab/scenario.hpp"
#include "cpslab/stats.hpp"

namespace {

using namespace cpslab;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::string out = "out";
};

ScenarioConfig load_with_overrides(const std::string& path, const Overrides& ov) {
    ScenarioConfig cfg = load_config(path);
    if (const char* env = std::getenv("CPSLAB_SEED"))
        cfg.seed = std::strtoull(env, nullptr, 10);
    if (ov.seed) cfg.seed = *ov.seed;  // command line beats the environment
    if (ov.steps) cfg.steps = *ov.steps;
    cfg.validate();
    return cfg;
}

void print_mat(const std::string& name, const MatrixXd& M) {
    std::cout << name << " (" << M.rows() << "x" << M.cols() << "):\n" << M << "\n";
}

int finish_run(const RunLog& log, const std::string& out) {
    emit_outputs(log, out);
    for (const auto& s : log.summary) std::cout << s << "\n";
    std::cout << "wrote " << out << "/{trajectories.csv,verdicts.csv,report.txt,config.json}\n";
    if (log.diverged) {
        std::cerr << "error: simulation diverged at step " << log.diverged_at << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Networked control loop laboratory: simulation, residual "
                 "transmission, attack and fault detection"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides ov;
    app.add_option("--seed", ov.seed, "override the run seed");
    app.add_option("--steps", ov.steps, "override the number of steps");
    app.add_option("--out", ov.out, "output directory (default ./out)");

    std::string config_path, experiment;
    auto* sim = app.add_subcommand("simulate", "run a scenario from a JSON config");
    sim->add_option("config", config_path, "config file")->required();
    auto* rep = app.add_subcommand("reproduce", "run a bundled case study (E1..E6)");
    rep->add_option("experiment", experiment, "E1..E6")->required();
    auto* fac = app.add_subcommand("factorize", "build and check the coprime factor family");
    fac->add_option("config", config_path, "config file")->required();
    auto* ver = app.add_subcommand("verify-bezout", "check the factor identity residual");
    ver->add_option("config", config_path, "config file")->required();
    auto* dpf = app.add_subcommand("design-postfilter", "whitening post-filter of the fused residual");
    dpf->add_option("config", config_path, "config file")->required();
    auto* chk = app.add_subcommand("check-performance", "loop performance gains");
    chk->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            ScenarioConfig cfg = load_with_overrides(config_path, ov);
            for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
            return finish_run(run_scenario(cfg), ov.out);
        }
        if (rep->parsed()) {
            return finish_run(reproduce(experiment), ov.out + "/" + experiment);
        }

        ScenarioConfig cfg = load_with_overrides(config_path, ov);
        auto d = presets::robot_design(cfg.noise_scale);
        auto f = build_bezout_factors(d.plant, make_gains(d.F, d.L));
        if (fac->parsed() || ver->parsed()) {
            const double gap = verify_bezout(f);
            if (fac->parsed()) {
                print_mat("plant A", d.plant.A);
                print_mat("feedback gain F", d.F);
                print_mat("observer gain L", d.L);
                std::cout << "factor state dimensions: M/N/Mhat/Nhat = " << f.M.n() << "/"
                          << f.N.n() << "/" << f.Mhat.n() << "/" << f.Nhat.n() << "\n";
            }
            std::printf("factor identity residual (max over frequency grid): %.3e\n", gap);
            if (!(gap < 1e-8)) {
                std::cerr << "error: factor identity residual exceeds 1e-8\n";
                return 2;
            }
            return 0;
        }
        if (dpf->parsed()) {
            PostFilterDesign pf = design_attack_postfilter(presets::q_r1(), d.Sigma_ry);
            print_mat("innovation gain L", pf.L);
            print_mat("residual covariance", pf.Sigma_r1);
            print_mat("normalizer", pf.Sigma_r1_inv_sqrt);
            std::cout << "post-filter state dimension: " << pf.R.n() << "\n";
            return 0;
        }
        if (chk->parsed()) {
            PerformanceReport r = check_performance(f, presets::q_r1(),
                                                    presets::q_r2(cfg.q_r2_gain),
                                                    presets::q_umc());
            std::printf("gamma_theta = %.6g\ngamma_ry    = %.6g\n", r.gamma_theta, r.gamma_ry);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

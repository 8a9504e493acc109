// Command-line front end: resonances, evolve, sweep.
//
// Exit codes: 0 success, 1 configuration or output error, 2 numerical
// assertion failure.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "spinchain/spinchain.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    unsigned jobs = 0;
    bool strict_norm = false;
    std::string phase;
    bool full_resolution = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Configuration file (key = value)");
    cmd->add_option("--set", o.sets, "Override a config key, e.g. --set j2=0.4 (repeatable)");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--jobs", o.jobs, "Worker threads for sweeps (default: hardware concurrency)");
    cmd->add_flag("--strict-norm", o.strict_norm, "Fail when the norm drifts by more than 1e-6");
    cmd->add_option("--phase", o.phase, "Phase of pulse 2 in radians (accepts 'pi', 'pi/2', ...)");
    cmd->add_flag("--full-resolution", o.full_resolution, "Record every integrator step");
}

spinchain::RunConfig resolve(const CommonOptions& o) {
    using spinchain::ConfigError;
    std::vector<std::string> overrides = o.sets;
    if (!o.out_dir.empty()) overrides.push_back("out_dir=" + o.out_dir);
    if (o.strict_norm) overrides.push_back("strict_norm=true");
    if (o.full_resolution) overrides.push_back("sample_stride=1");
    auto cfg = spinchain::load_config(o.config_path, overrides);
    if (!o.phase.empty()) {
        const auto phase = spinchain::parse_angle(o.phase);
        if (!phase) throw ConfigError(ConfigError::Kind::malformed, "--phase '" + o.phase + "'");
        if (cfg.pulses.size() < 2) throw ConfigError(ConfigError::Kind::non_physical, "--phase needs a second pulse");
        cfg.pulses[1].phase = *phase;
    }
    return cfg;
}

void warn_norm(const spinchain::RunConfig& cfg, double max_norm_error) {
    if (max_norm_error > cfg.policy.norm_tolerance)
        std::fprintf(stderr, "warning: norm drift %.3g exceeds %.1g (rerun with --strict-norm to fail)\n",
                     max_norm_error, cfg.policy.norm_tolerance);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ising spin-chain pulse simulator"};
    app.require_subcommand(1);

    CommonOptions res_opts, evo_opts, sweep_opts;
    auto* res = app.add_subcommand("resonances", "Print eigenenergies and single-flip transition frequencies");
    add_common(res, res_opts);
    auto* evo = app.add_subcommand("evolve", "Integrate the pulse sequence and write time series");
    add_common(evo, evo_opts);
    auto* sweep = app.add_subcommand("sweep", "Final fidelity as a function of J'/J");
    add_common(sweep, sweep_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*res) {
            const auto cfg = resolve(res_opts);
            const auto table = spinchain::cmd_resonances(cfg);
            spinchain::print_resonances(std::cout, cfg, table);
            if (!res_opts.out_dir.empty()) spinchain::write_resonances_csv(cfg, table, cfg.out_dir);
        } else if (*evo) {
            const auto cfg = resolve(evo_opts);
            const auto r = spinchain::cmd_evolve(cfg);
            std::printf("t_end = %.6f us, steps = %zu, samples = %zu, max norm error = %.3g, %.2f s\n",
                        r.trajectory.end_time(), r.trajectory.steps, r.trajectory.samples.size(),
                        r.trajectory.max_norm_error, r.wall_seconds);
            if (r.fidelity)
                std::printf("fidelity vs target (sign %+d): %.6f %+.6fi, |F| = %.6f\n", cfg.target_sign,
                            r.fidelity->value.real(), r.fidelity->value.imag(), r.fidelity->modulus);
            std::printf("outputs written to %s\n", cfg.out_dir.c_str());
            warn_norm(cfg, r.trajectory.max_norm_error);
        } else if (*sweep) {
            const auto cfg = resolve(sweep_opts);
            unsigned jobs = sweep_opts.jobs ? sweep_opts.jobs : std::max(1u, std::thread::hardware_concurrency());
            const auto rows = spinchain::cmd_sweep(cfg, jobs);
            double worst = 0.0;
            for (const auto& row : rows) {
                std::printf("J'/J = %.4f  |F| = %.6f  (Re %.6f, Im %.6f)\n", row.ratio, row.fidelity.modulus,
                            row.fidelity.value.real(), row.fidelity.value.imag());
                worst = std::max(worst, row.max_norm_error);
            }
            std::printf("sweep written to %s/sweep.csv\n", cfg.out_dir.c_str());
            warn_norm(cfg, worst);
        }
    } catch (const spinchain::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const spinchain::OutputError& e) {
        std::fprintf(stderr, "output error: %s\n", e.what());
        return 1;
    } catch (const spinchain::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

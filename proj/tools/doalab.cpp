// SPDX-License-Identifier: Apache-2.0
// doalab: Monte Carlo sweeps and a one-trial demo for the DOA estimators.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "doalab/doalab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

double to_degrees(double u) { return std::asin(std::clamp(u, -1.0, 1.0)) * 180.0 / std::numbers::pi; }

int run_demo() {
    doalab::SweepSpec spec;
    spec.base.targets = 4;
    spec.base.snr_db = 20.0;
    spec.trials = 1;
    spec.serial = true;
    spec.validate();

    const auto& cfg = spec.base;
    const doalab::GridEvaluator ge(cfg.grid_points, cfg.antennas, cfg.element_phase_factor);
    const auto rec = doalab::run_trial(spec, cfg, ge, 0);

    std::printf("scenario: K=%zu M=%zu Q=%zu D=%zu SNR=%.1f dB N=%zu seed=%llu\n", cfg.targets, cfg.antennas,
                cfg.subcarriers, cfg.symbols, cfg.snr_db, cfg.grid_points,
                static_cast<unsigned long long>(cfg.seed));
    std::printf("diagnostics: T=%.4f S=%.4f\n\n", rec.diagnostics.t_metric, rec.diagnostics.s_metric);
    std::printf("true DOAs (deg):");
    for (double u : rec.truth.doas)
        std::printf(" %7.2f", to_degrees(u));
    std::printf("\n\n%-14s %5s %7s %7s %9s  %s\n", "method", "K^", "J", "rmse", "time_ms", "estimates (deg)");
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
        const auto& mt = rec.methods[i];
        const std::string name = doalab::to_string(spec.methods[i]);
        if (mt.failed) {
            std::printf("%-14s failed: %s\n", name.c_str(), mt.error.c_str());
            continue;
        }
        std::printf("%-14s %5zu %7.3f %7.4f %9.3f ", name.c_str(), mt.k_hat, mt.detection.youden_j,
                    mt.rmse ? *mt.rmse : std::nan(""), mt.time_ms);
        auto angles = mt.estimate.angles;
        std::sort(angles.begin(), angles.end());
        for (double u : angles)
            std::printf(" %7.2f", to_degrees(u));
        std::printf("\n");
    }
    return kExitOk;
}

struct SweepArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    bool serial = false;
    std::optional<std::string> evaluator;
    bool evd_per_iter = false;
};

int run_sweep_cmd(const SweepArgs& a) {
    doalab::SweepSpec spec = doalab::load_config(a.config);
    if (a.seed)
        spec.base.seed = *a.seed;
    if (a.trials)
        spec.trials = *a.trials;
    if (a.evaluator)
        spec.evaluator = doalab::parse_evaluator(*a.evaluator);
    spec.serial = spec.serial || a.serial;
    spec.evd_per_iter = spec.evd_per_iter || a.evd_per_iter;
    spec.validate();

    const auto result = doalab::run_sweep(spec);
    doalab::emit_csv(result.rows, a.out);
    for (const auto& r : result.rows)
        if (r.warning)
            std::cerr << "warning: " << r.method << " failed on " << r.failed_trials << " trials at "
                      << r.sweep_param << "=" << r.sweep_value << "\n";
    std::cerr << "wrote " << result.rows.size() << " rows to " << a.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DOA estimation benchmark"};
    app.require_subcommand(1);

    SweepArgs args;
    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and write a CSV table");
    sweep->add_option("--config", args.config, "configuration file")->required();
    sweep->add_option("--out", args.out, "output CSV path")->required();
    sweep->add_option("--seed", args.seed, "base seed (overrides the config)");
    sweep->add_option("--trials", args.trials, "trials per sweep value (overrides the config)");
    sweep->add_flag("--serial", args.serial, "single worker, for clean timings");
    sweep->add_option("--evaluator", args.evaluator, "grid evaluator")->check(CLI::IsMember({"fft", "direct"}));
    sweep->add_flag("--evd-per-iter", args.evd_per_iter, "re-decompose the residual covariance every iteration");
    auto* demo = app.add_subcommand("demo", "run and print a single trial");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (demo->parsed())
            return run_demo();
        return run_sweep_cmd(args);
    } catch (const doalab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const doalab::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

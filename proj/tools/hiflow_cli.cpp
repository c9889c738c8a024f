// Command-line front end for the hiflow shared library: single-stage
// generation, cascade runs, alignment ablation sweeps, and dump inspection.

#include <hiflow/hiflow.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool dump_trajectories = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file path")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides out_dir)");
    cmd->add_option("--set", opts.sets, "config override KEY=VALUE (repeatable)");
    cmd->add_option("--seed", opts.seed, "override base.seed")->each([&](const std::string&) {
        opts.has_seed = true;
    });
    cmd->add_flag("--dump-trajectories", opts.dump_trajectories, "also write HFT1/HFR1 dumps");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

int report_error(const std::string& what) {
    std::fprintf(stderr, "error: %s: %s\n", what.c_str(), hf_last_error());
    return 1;
}

using ConfigPtr = std::unique_ptr<hf_config, decltype(&hf_config_free)>;

ConfigPtr load_config(const CommonOpts& opts, int& rc) {
    hf_config* raw = nullptr;
    rc = 0;
    if (hf_config_load(opts.config_path.c_str(), &raw) != HF_OK) {
        rc = report_error("loading " + opts.config_path);
        return {nullptr, &hf_config_free};
    }
    ConfigPtr config(raw, &hf_config_free);
    for (const std::string& kv : opts.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
            rc = 1;
            return {nullptr, &hf_config_free};
        }
        if (hf_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) !=
            HF_OK) {
            rc = report_error("applying --set " + kv);
            return {nullptr, &hf_config_free};
        }
    }
    if (hf_config_validate(config.get()) != HF_OK) {
        rc = report_error("validating " + opts.config_path);
        return {nullptr, &hf_config_free};
    }
    return config;
}

hf_run_options make_run_options(const CommonOpts& opts) {
    hf_run_options run{};
    run.out_dir = opts.out_dir.empty() ? nullptr : opts.out_dir.c_str();
    run.dump_trajectories = opts.dump_trajectories ? 1 : 0;
    run.quiet = opts.quiet ? 1 : 0;
    run.has_seed_override = opts.has_seed ? 1 : 0;
    run.seed_override = opts.seed;
    return run;
}

int run_driver(const CommonOpts& opts, hf_status (*driver)(const hf_config*, const hf_run_options*),
               const char* name) {
    int rc = 0;
    ConfigPtr config = load_config(opts, rc);
    if (!config) return rc;
    const hf_run_options run = make_run_options(opts);
    if (driver(config.get(), &run) != HF_OK) return report_error(name);
    if (!opts.quiet) {
        char out_buf[512] = "out";
        if (!opts.out_dir.empty())
            std::snprintf(out_buf, sizeof(out_buf), "%s", opts.out_dir.c_str());
        else
            hf_config_get(config.get(), "out_dir", out_buf, sizeof(out_buf));
        std::printf("%s: wrote artifacts under %s\n", name, out_buf);
    }
    return 0;
}

double grid_rms(const hf_grid* grid) {
    uint32_t c = 0, h = 0, w = 0;
    hf_grid_dims(grid, &c, &h, &w);
    const std::size_t n = static_cast<std::size_t>(c) * h * w;
    const double* data = hf_grid_data(grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i] * data[i];
    return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

int inspect_trajectory(const std::string& path, bool quiet) {
    hf_trajectory* traj = nullptr;
    if (hf_trajectory_load(path.c_str(), &traj) != HF_OK)
        return report_error("loading " + path);
    std::unique_ptr<hf_trajectory, decltype(&hf_trajectory_free)> guard(traj,
                                                                        &hf_trajectory_free);
    uint32_t count = 0;
    hf_trajectory_step_count(traj, &count);
    if (!quiet)
        std::printf("%-5s %-12s %-13s %-13s %-12s %-12s %s\n", "step", "t", "eq4_residual",
                    "bound", "v_rms", "accel_rms", "status");
    uint32_t violations = 0;
    for (uint32_t i = 0; i < count; ++i) {
        hf_step_stats stats{};
        if (hf_trajectory_step_stats(traj, i, &stats) != HF_OK)
            return report_error("reading step stats");
        const bool bad = stats.eq4_residual > stats.residual_bound;
        if (bad) ++violations;
        if (!quiet)
            std::printf("%-5u %-12.6f %-13.3e %-13.3e %-12.5f %-12.5f %s\n", i, stats.t,
                        stats.eq4_residual, stats.residual_bound, stats.velocity_rms,
                        stats.accel_rms, bad ? "VIOLATION" : "ok");
    }
    std::printf("%s: %u steps, %u residual violation%s\n", path.c_str(), count, violations,
                violations == 1 ? "" : "s");
    return violations == 0 ? 0 : 1;
}

int inspect_reference(const std::string& path, bool quiet) {
    hf_reference* ref = nullptr;
    if (hf_reference_load(path.c_str(), &ref) != HF_OK) return report_error("loading " + path);
    std::unique_ptr<hf_reference, decltype(&hf_reference_free)> guard(ref, &hf_reference_free);
    uint32_t count = 0;
    hf_reference_count(ref, &count);
    if (!quiet) std::printf("%-6s %-12s %s\n", "entry", "t", "velocity_delta_rms");
    for (uint32_t i = 0; i < count && !quiet; ++i) {
        double t = 0.0;
        hf_reference_time(ref, i, &t);
        double delta_rms = 0.0;
        if (i > 0 && t > 0.0) {
            hf_grid* delta = nullptr;
            if (hf_reference_velocity_delta(ref, i, &delta) == HF_OK) {
                delta_rms = grid_rms(delta);
                hf_grid_free(delta);
            }
        }
        std::printf("%-6u %-12.6f %.6f\n", i, t, delta_rms);
    }
    std::printf("%s: %u reference entries\n", path.c_str(), count);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow-aligned guidance for rectified-flow sampling"};
    app.require_subcommand(1);

    CommonOpts gen_opts, cas_opts, cmp_opts;
    CLI::App* generate = app.add_subcommand("generate", "single-stage unguided sampling");
    add_common(generate, gen_opts);
    CLI::App* cascade = app.add_subcommand("cascade", "multi-stage guided generation");
    add_common(cascade, cas_opts);
    CLI::App* compare = app.add_subcommand("compare", "alignment ablation sweep");
    add_common(compare, cmp_opts);

    std::string inspect_path;
    bool inspect_quiet = false;
    CLI::App* inspect = app.add_subcommand("inspect", "summarize a HFT1/HFR1 dump");
    inspect->add_option("path", inspect_path, "dump file")->required();
    inspect->add_flag("--quiet", inspect_quiet, "summary line only");

    CLI11_PARSE(app, argc, argv);

    if (generate->parsed()) return run_driver(gen_opts, &hf_run_generate, "generate");
    if (cascade->parsed()) return run_driver(cas_opts, &hf_run_cascade, "cascade");
    if (compare->parsed()) return run_driver(cmp_opts, &hf_run_compare, "compare");
    if (inspect->parsed()) {
        hf_dump_kind kind;
        if (hf_dump_probe(inspect_path.c_str(), &kind) != HF_OK)
            return report_error("probing " + inspect_path);
        return kind == HF_DUMP_TRAJECTORY ? inspect_trajectory(inspect_path, inspect_quiet)
                                          : inspect_reference(inspect_path, inspect_quiet);
    }
    return 1;
}

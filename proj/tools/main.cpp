// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rorecomp/config.hpp"
#include "rorecomp/metrics_io.hpp"
#include "rorecomp/selfcheck.hpp"
#include "rorecomp/trainer.hpp"

namespace {

using rorecomp::RunConfig;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
};

RunConfig load_config(const std::string& path, const Overrides& ov) {
    RunConfig cfg = rorecomp::parse_config_file(path);
    if (ov.seed) {
        cfg.seed = *ov.seed;
    }
    if (ov.out_dir) {
        cfg.out_dir = *ov.out_dir;
    }
    if (ov.workers) {
        cfg.workers = *ov.workers;
    }
    rorecomp::validate(cfg);
    return cfg;
}

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "Override the config seed");
    cmd->add_option("--out", ov.out_dir, "Override the output directory");
    cmd->add_option("--workers", ov.workers, "Override the rollout worker count");
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << j.dump(2) << "\n";
}

void print_run_summary(const rorecomp::RunReport& report) {
    std::cout << "environment      " << rorecomp::env_name(report.config.environment)
              << "\n"
              << "steps            " << report.series.size() << "\n"
              << "final mean cost  " << report.final_mean_cost << "\n"
              << "final mean reward " << report.final_mean_reward << "\n";
    for (const auto& [k, v] : report.pass_at_k_table) {
        std::cout << "pass@" << k << "           " << v << "\n";
    }
}

int cmd_run(const std::string& config_path, const Overrides& ov,
            const std::string& buffer_path) {
    const RunConfig cfg = load_config(config_path, ov);
    const rorecomp::RunReport report = rorecomp::train(cfg);
    rorecomp::emit_metrics(report, cfg.out_dir);
    if (!buffer_path.empty()) {
        rorecomp::write_buffer_jsonl(report.final_buffer, buffer_path);
        std::cout << "buffer           " << report.final_buffer.size()
                  << " entries -> " << buffer_path << "\n";
    }
    print_run_summary(report);
    std::cout << "metrics          " << cfg.out_dir << "/metrics.jsonl\n";
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::vector<std::uint64_t>& seeds,
                const std::string& out_path) {
    const RunConfig a = load_config(path_a, {});
    const RunConfig b = load_config(path_b, {});
    const rorecomp::ComparisonReport report = rorecomp::compare(a, b, seeds);
    std::cout << "arm A  cost " << report.arm_a.cost_mean << " +- "
              << report.arm_a.cost_std << "  reward " << report.arm_a.reward_mean
              << " +- " << report.arm_a.reward_std << "\n"
              << "arm B  cost " << report.arm_b.cost_mean << " +- "
              << report.arm_b.cost_std << "  reward " << report.arm_b.reward_mean
              << " +- " << report.arm_b.reward_std << "\n"
              << "cost reduction (A->B)  " << report.reduction_pct_mean << "% +- "
              << report.reduction_pct_std << "\n"
              << "reward diff (B-A)      " << report.reward_diff_mean << "\n";
    if (!out_path.empty()) {
        write_json_file(rorecomp::comparison_to_json(report), out_path);
        std::cout << "report -> " << out_path << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& alphas,
              const std::vector<std::uint64_t>& seeds,
              const std::string& out_path) {
    const RunConfig base = load_config(config_path, {});
    const auto rows = rorecomp::sweep_alpha(base, alphas, seeds);
    std::cout << "alpha   cost (mean +- std)    reward (mean +- std)\n";
    for (const auto& row : rows) {
        std::cout << row.alpha << "    " << row.cost_mean << " +- "
                  << row.cost_std << "    " << row.reward_mean << " +- "
                  << row.reward_std << "\n";
    }
    if (!out_path.empty()) {
        write_json_file(rorecomp::sweep_to_json(rows), out_path);
        std::cout << "report -> " << out_path << "\n";
    }
    return 0;
}

int cmd_verify(std::uint64_t seed) {
    const auto results = rorecomp::run_property_suites(seed);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) {
            std::cout << " (" << r.detail << ")";
        }
        std::cout << "\n";
        ok = ok && r.passed;
    }
    std::cout << (ok ? "all property suites passed\n"
                     : "property suite failures detected\n");
    return ok ? 0 : 1;
}

int cmd_dump_buffer(const std::string& config_path, const Overrides& ov,
                    const std::string& out_path) {
    const RunConfig cfg = load_config(config_path, ov);
    const rorecomp::RunReport report = rorecomp::train(cfg);
    rorecomp::write_buffer_jsonl(report.final_buffer, out_path);
    std::cout << report.final_buffer.size() << " buffered responses -> "
              << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RoRecomp trainer: priority/compensation batch recomposition "
                 "for RLVR on synthetic environments"};
    app.require_subcommand(1);

    std::string run_config;
    Overrides run_ov;
    std::string run_buffer_path;
    CLI::App* run = app.add_subcommand("run", "Train one configuration");
    run->add_option("config", run_config, "Config file")
        ->required()
        ->check(CLI::ExistingFile);
    add_override_flags(run, run_ov);
    run->add_option("--dump-buffer", run_buffer_path,
                    "Also dump the final replay buffer to this JSONL file");

    std::string cmp_a;
    std::string cmp_b;
    std::vector<std::uint64_t> cmp_seeds{1, 2, 3, 4, 5};
    std::string cmp_out;
    CLI::App* cmp = app.add_subcommand(
        "compare", "Run two configs over shared seeds and report the contrast");
    cmp->add_option("config_a", cmp_a, "First (reference) config")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("config_b", cmp_b, "Second (treatment) config")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("--seeds", cmp_seeds, "Seeds to pair the runs over");
    cmp->add_option("--out", cmp_out, "Write the comparison report JSON here");

    std::string sweep_config;
    std::vector<double> sweep_alphas;
    std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
    std::string sweep_out;
    CLI::App* sweep = app.add_subcommand(
        "sweep-alpha", "Sweep the selection fraction over a list of alphas");
    sweep->add_option("config", sweep_config, "Base config file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--alphas", sweep_alphas, "Alpha values to sweep")
        ->required();
    sweep->add_option("--seeds", sweep_seeds, "Seeds per alpha");
    sweep->add_option("--out", sweep_out, "Write the sweep table JSON here");

    std::uint64_t verify_seed = 7;
    CLI::App* verify =
        app.add_subcommand("verify", "Run the randomized property suites");
    verify->add_option("--seed", verify_seed, "Property suite seed");

    std::string dump_config;
    Overrides dump_ov;
    std::string dump_out = "buffer.jsonl";
    CLI::App* dump = app.add_subcommand(
        "dump-buffer", "Train a config and dump its final replay buffer");
    dump->add_option("config", dump_config, "Config file")
        ->required()
        ->check(CLI::ExistingFile);
    dump->add_option("--seed", dump_ov.seed, "Override the config seed");
    dump->add_option("--out", dump_out, "Buffer JSONL path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(run_config, run_ov, run_buffer_path);
        }
        if (cmp->parsed()) {
            return cmd_compare(cmp_a, cmp_b, cmp_seeds, cmp_out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_config, sweep_alphas, sweep_seeds, sweep_out);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_seed);
        }
        if (dump->parsed()) {
            return cmd_dump_buffer(dump_config, dump_ov, dump_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rorecomp/config.hpp"
#include "rorecomp/core.hpp"
#include "rorecomp/policy.hpp"
#include "rorecomp/recompose.hpp"
#include "rorecomp/sim.hpp"

namespace rorecomp {

struct RunReport {
    RunConfig config;
    std::vector<StepMetrics> series;
    // Means over the last summary_window steps.
    double final_mean_cost{};
    double final_mean_reward{};
    // Unbiased pass@k of the final policy over a held-out question set.
    std::map<int, double> pass_at_k_table;
    // Per-step policy digests; lets tests compare parameter trajectories.
    std::vector<std::uint64_t> param_trace;
    TabularPolicy final_policy;
    std::vector<Response> final_buffer;
};

std::unique_ptr<Environment> make_environment(const RunConfig& cfg);

// Runs one training job. Per step: sample prompts, roll out groups, score,
// compute advantages, then either one update over the whole batch (baseline)
// or a priority update followed by an optional gated compensation update.
// Byte-deterministic for a given (config, seed) for any worker count.
RunReport train(const RunConfig& cfg);

struct ArmSummary {
    double cost_mean{};
    double cost_std{};
    double reward_mean{};
    double reward_std{};
};

// Paired runs of two configs over shared seeds. b is treated as the
// treatment arm; reduction is reduction_pct(a_cost, b_cost) per seed.
struct ComparisonReport {
    ArmSummary arm_a;
    ArmSummary arm_b;
    double reduction_pct_mean{};
    double reduction_pct_std{};
    double reward_diff_mean{}; // mean of (b - a) final rewards
    std::vector<std::uint64_t> seeds;
};

ComparisonReport compare(const RunConfig& a, const RunConfig& b,
                         std::span<const std::uint64_t> seeds);

struct AlphaSweepRow {
    double alpha{};
    double cost_mean{};
    double cost_std{};
    double reward_mean{};
    double reward_std{};
};

std::vector<AlphaSweepRow> sweep_alpha(const RunConfig& base,
                                       std::span<const double> alphas,
                                       std::span<const std::uint64_t> seeds);

} // namespace rorecomp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "rorecomp/optim.hpp"
#include "rorecomp/sim.hpp"

namespace rorecomp {

enum class EnvId { PatternSeek, ToolChain };
enum class RewardMode { Exact, F1 };
enum class RewardShaping { None, TruncationZero, LengthPenalty };

struct RecompositionConfig {
    bool enabled{true};
    double alpha{0.8};
    double p_lower{0.2};
    std::size_t comp_batch_size{64};
    std::size_t buffer_capacity{128};    // default 2 * comp_batch_size
    bool retain_on_skip{false};
    bool comp_enabled{true};             // false trains on priority batches only
    bool comp_on_policy_loss{false};     // drop the stored ratio for comp items
    bool recompute_comp_advantages{false}; // renormalize within the comp batch
    bool filter_zero_variance_groups{false}; // drop groups with equal rewards
};

struct RunConfig {
    std::uint64_t seed{0};
    EnvId environment{EnvId::PatternSeek};
    long total_steps{240};
    int prompts_per_step{16};
    int workers{1};

    SamplingConfig sampling{};
    OptimConfig optimizer{};
    double critic_learning_rate{0.1};
    RecompositionConfig recomposition{};

    RewardMode reward_mode{RewardMode::Exact};
    RewardShaping shaping{RewardShaping::None};
    long truncation_limit{64};
    double penalty_weight{0.5};
    double tau_correct{0.5};

    int vocab_size{8}; // tool_chain lifts the default to 12
    int pattern_length{2};
    int max_turns{32};

    int eval_questions{32};
    int eval_samples{32};
    int summary_window{10};
    std::string out_dir{"out"};
};

// Parses the flat `key = value` format ('#' starts a comment). Unknown keys
// and malformed values are errors. Keys not present keep their defaults;
// reward_mode defaults to f1 when the environment is tool_chain.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Enforces cross-field invariants (ranges, mode/environment pairing).
void validate(const RunConfig& cfg);

std::string env_name(EnvId env);
std::string advantage_mode_name(AdvantageKind kind);
std::string reward_mode_name(RewardMode mode);
std::string shaping_name(RewardShaping shaping);

} // namespace rorecomp

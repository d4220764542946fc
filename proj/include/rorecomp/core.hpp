// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace rorecomp {

// A prompt instance. payload is environment-specific (pattern tokens for
// PatternSeek, {hop depth} for ToolChain); reference holds the gold tokens.
struct Question {
    std::uint64_t id{};
    std::vector<int> payload;
    std::vector<int> reference;
};

// One sampled response. tokens is the emitted action sequence (STOP included
// when emitted); states holds the conditioning state for each token so the
// response can be replayed exactly under any policy snapshot. cost is the
// environment's length measure (token count, or tool-call count). advantage
// is frozen at scoring time: size 1 for group-scalar modes, per-token for
// GAE. token_rewards is populated only for the GAE path.
struct Response {
    std::uint64_t question_id{};
    std::vector<int> tokens;
    std::vector<int> states;
    long cost{};
    double reward{};
    bool correct{};
    std::vector<double> behavior_logprobs;
    std::vector<double> advantage;
    std::vector<double> token_rewards;
    std::uint64_t born_step{};
    int sample_index{};
};

struct RolloutGroup {
    std::uint64_t question_id{};
    std::vector<Response> responses;
};

enum class BatchSource { Priority, Compensation };

// A response paired with the advantage the update consumes. advantage has
// size 1 (broadcast over tokens) or one entry per token.
struct TrainItem {
    Response response;
    std::vector<double> advantage;
    BatchSource source{BatchSource::Priority};
};

// Per-step training telemetry. Serialized field names match these names
// one-for-one; no timestamps, so identical runs serialize identically.
struct StepMetrics {
    long step{};
    double mean_reward{};
    double mean_cost{};
    double p_comp{};
    long n_priority_items{};
    long n_comp_items{};
    long buffer_size{};
    bool did_comp_update{};
};

struct GroupStats {
    double mean_reward{};
    double std_reward{};
    double mean_cost{};
};

// Population statistics over a rollout group. Throws on an empty group.
GroupStats group_stats(const RolloutGroup& group);

// Percent reduction of `treated` relative to `baseline`:
// 100 * (baseline - treated) / baseline. Requires baseline > 0.
double reduction_pct(double baseline, double treated);

// Unbiased pass@k estimator: 1 - C(n-c, k) / C(n, k).
// Requires 0 <= c <= n and 1 <= k <= n.
double pass_at_k(long n, long c, long k);

} // namespace rorecomp

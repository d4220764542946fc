// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rorecomp/core.hpp"
#include "rorecomp/policy.hpp"
#include "rorecomp/rewards.hpp"
#include "rorecomp/rng.hpp"

namespace rorecomp {

struct SamplingConfig {
    double temperature{1.0};
    int max_tokens{64};
    int group_size{12};
};

// Geometry of an environment's action space. Actions are dense ids; the
// policy has one state per action plus the BOS state.
struct ActionLayout {
    int n_actions{};
    int stop_action{};
    int search_action{-1}; // -1 when the environment has no tool action
    int n_states() const { return n_actions + 1; }
};

// ---------------------------------------------------------------------------
// PatternSeek: emit a token stream that contains the target pattern as a
// contiguous run, then stop. Tokens 0..V-1, STOP = V. Cost is the token
// count.
// ---------------------------------------------------------------------------

struct PatternSeekTask {
    std::vector<int> pattern; // length 1..3, drawn from the non-STOP vocabulary
    int vocab_size{8};
};

// Reward 1 iff the pattern occurs contiguously before STOP and the response
// terminated with STOP; the truncation-zero wrapper is applied at `limit`.
RewardOutcome score_pattern(const Response& response, const PatternSeekTask& task,
                            long limit);

// ---------------------------------------------------------------------------
// ToolChain: follow a key chain of depth d with SEARCH, then report the
// answer set. Actions: 0..V-1 answer token v, V = SEARCH, V+1 = STOP. Cost
// is the SEARCH count. Each mid-chain SEARCH observes the next key of the
// chain; the SEARCH that completes the chain, and every SEARCH after it,
// shows one uniformly drawn member of the gold set, so collecting a
// two-token answer takes repeated looks with diminishing returns. Keys and
// answers share the token alphabet, so an observed token never certifies
// arrival by itself. Reward is multiset F1 of the distinct answered tokens
// against the gold set (re-answering a token is idempotent), gated on
// stopping within max_turns.
// ---------------------------------------------------------------------------

struct ToolChainTask {
    int depth{1};
    std::vector<int> gold;  // 1-2 distinct answer tokens at the terminal
    std::vector<int> keys;  // intermediate chain keys, size depth - 1
    int vocab_size{8};
    int max_turns{32};
};

class ToolChainEpisode {
public:
    // obs_seed drives which gold token each post-arrival look presents; it
    // never affects scoring, so replays may pass anything.
    explicit ToolChainEpisode(const ToolChainTask& task,
                              std::uint64_t obs_seed = 0);

    // Applies one action and returns the next conditioning state. An unknown
    // action id marks the episode as a format failure and ends it.
    int step(int action);

    bool done() const {
        return stopped_ || malformed_ || turns_ >= task_.max_turns;
    }
    long tool_calls() const { return cost_; }
    int turns() const { return turns_; }
    const std::vector<int>& candidates() const { return candidates_; }

    RewardOutcome outcome(double tau_correct) const;

private:
    ToolChainTask task_;
    SplitMix64 obs_rng_;
    int hops_done_{0};
    int turns_{0};
    long cost_{0};
    std::vector<int> candidates_;
    bool stopped_{false};
    bool malformed_{false};
};

// ---------------------------------------------------------------------------
// Environment interface shared by the trainer and the evaluation pass.
// ---------------------------------------------------------------------------

class Environment {
public:
    virtual ~Environment() = default;
    virtual ActionLayout layout() const = 0;
    virtual Question make_question(std::uint64_t id, SplitMix64& rng) const = 0;
    virtual Response sample_response(const TabularPolicy& policy, const Question& q,
                                     const SamplingConfig& cfg,
                                     SplitMix64& rng) const = 0;
    virtual RewardOutcome score(const Response& response, const Question& q) const = 0;
};

struct PatternSeekParams {
    int vocab_size{8};
    int pattern_length{2};
    long truncation_limit{64};
};

class PatternSeekEnv final : public Environment {
public:
    explicit PatternSeekEnv(PatternSeekParams params);
    ActionLayout layout() const override;
    Question make_question(std::uint64_t id, SplitMix64& rng) const override;
    Response sample_response(const TabularPolicy& policy, const Question& q,
                             const SamplingConfig& cfg,
                             SplitMix64& rng) const override;
    RewardOutcome score(const Response& response, const Question& q) const override;

private:
    PatternSeekParams params_;
};

struct ToolChainParams {
    int vocab_size{8};
    int max_turns{32};
    double tau_correct{0.5};
};

class ToolChainEnv final : public Environment {
public:
    explicit ToolChainEnv(ToolChainParams params);
    ActionLayout layout() const override;
    // Hop depth mix: 1 with probability 0.5, 2 with 0.3, 3 with 0.2.
    Question make_question(std::uint64_t id, SplitMix64& rng) const override;
    Response sample_response(const TabularPolicy& policy, const Question& q,
                             const SamplingConfig& cfg,
                             SplitMix64& rng) const override;
    RewardOutcome score(const Response& response, const Question& q) const override;

    ToolChainTask task_for(const Question& q) const;

private:
    ToolChainParams params_;
};

// Draws cfg.group_size responses for one question. Every sample uses its own
// stream derived from (run_seed, step, question id, sample index), so the
// group is a pure function of (policy, question, cfg, seed) regardless of
// scheduling. Requires cfg.group_size >= 2.
RolloutGroup rollout(const TabularPolicy& policy, const Question& q,
                     const SamplingConfig& cfg, const Environment& env,
                     std::uint64_t run_seed, long step);

} // namespace rorecomp

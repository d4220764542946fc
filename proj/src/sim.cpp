// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace rorecomp {

RewardOutcome score_pattern(const Response& response, const PatternSeekTask& task,
                            long limit) {
    if (task.pattern.empty() || task.pattern.size() > 3) {
        throw std::invalid_argument("score_pattern: pattern length must be 1..3");
    }
    const int stop_action = task.vocab_size;
    const bool terminated =
        !response.tokens.empty() && response.tokens.back() == stop_action;
    if (!terminated) {
        return RewardOutcome::format_failure();
    }
    const auto body_end = response.tokens.end() - 1;
    const bool found = std::search(response.tokens.begin(), body_end,
                                   task.pattern.begin(),
                                   task.pattern.end()) != body_end;
    const RewardOutcome base{found ? 1.0 : 0.0, found, true};
    return apply_truncation_zero(base, response.cost, limit);
}

ToolChainEpisode::ToolChainEpisode(const ToolChainTask& task,
                                   std::uint64_t obs_seed)
    : task_(task), obs_rng_(obs_seed) {
    if (task.depth < 1) {
        throw std::invalid_argument("ToolChainEpisode: depth must be >= 1");
    }
    if (task.gold.empty() || task.gold.size() > 2) {
        throw std::invalid_argument("ToolChainEpisode: gold must hold 1-2 tokens");
    }
    if (task.gold.size() == 2 && task.gold[0] == task.gold[1]) {
        throw std::invalid_argument("ToolChainEpisode: gold tokens must differ");
    }
    for (int g : task.gold) {
        if (g < 0 || g >= task.vocab_size) {
            throw std::invalid_argument("ToolChainEpisode: answer outside vocabulary");
        }
    }
    if (static_cast<int>(task.keys.size()) != task.depth - 1) {
        throw std::invalid_argument("ToolChainEpisode: need depth - 1 keys");
    }
    for (int key : task.keys) {
        if (key < 0 || key >= task.vocab_size) {
            throw std::invalid_argument("ToolChainEpisode: key outside vocabulary");
        }
    }
    if (task.max_turns < 1) {
        throw std::invalid_argument("ToolChainEpisode: max_turns must be >= 1");
    }
}

int ToolChainEpisode::step(int action) {
    if (done()) {
        throw std::logic_error("ToolChainEpisode: episode already finished");
    }
    ++turns_;
    const int search_action = task_.vocab_size;
    const int stop_action = task_.vocab_size + 1;
    if (action >= 0 && action < task_.vocab_size) {
        // Answers land in the shared post-answer state rather than echoing
        // the token back, so token states always mean a chain arrival.
        // Recording is idempotent: answering the same token again neither
        // helps nor hurts the final F1.
        if (std::find(candidates_.begin(), candidates_.end(), action) ==
            candidates_.end()) {
            candidates_.push_back(action);
        }
        return state_of(stop_action);
    }
    if (action == search_action) {
        ++cost_;
        if (hops_done_ < task_.depth) {
            ++hops_done_;
        }
        if (hops_done_ >= task_.depth) {
            const std::size_t pick = obs_rng_.next_below(task_.gold.size());
            return state_of(task_.gold[pick]);
        }
        return state_of(task_.keys[static_cast<std::size_t>(hops_done_ - 1)]);
    }
    if (action == stop_action) {
        stopped_ = true;
        return state_of(stop_action);
    }
    malformed_ = true;
    return kBosState;
}

RewardOutcome ToolChainEpisode::outcome(double tau_correct) const {
    if (malformed_ || !stopped_) {
        return RewardOutcome::format_failure();
    }
    return f1_reward(candidates_, task_.gold, tau_correct);
}

PatternSeekEnv::PatternSeekEnv(PatternSeekParams params) : params_(params) {
    if (params.vocab_size < 2) {
        throw std::invalid_argument("PatternSeekEnv: vocab_size must be >= 2");
    }
    if (params.pattern_length < 1 || params.pattern_length > 3) {
        throw std::invalid_argument("PatternSeekEnv: pattern_length must be 1..3");
    }
}

ActionLayout PatternSeekEnv::layout() const {
    return ActionLayout{params_.vocab_size + 1, params_.vocab_size, -1};
}

Question PatternSeekEnv::make_question(std::uint64_t id, SplitMix64& rng) const {
    Question q;
    q.id = id;
    q.payload.resize(params_.pattern_length);
    for (int& t : q.payload) {
        t = static_cast<int>(rng.next_below(params_.vocab_size));
    }
    q.reference = q.payload;
    return q;
}

Response PatternSeekEnv::sample_response(const TabularPolicy& policy,
                                         const Question& q,
                                         const SamplingConfig& cfg,
                                         SplitMix64& rng) const {
    const int stop_action = params_.vocab_size;
    Response r;
    r.question_id = q.id;
    int state = kBosState;
    for (int i = 0; i < cfg.max_tokens; ++i) {
        double lp = 0.0;
        const int a = policy.sample(state, cfg.temperature, rng, lp);
        r.tokens.push_back(a);
        r.states.push_back(state);
        r.behavior_logprobs.push_back(lp);
        if (a == stop_action) {
            break;
        }
        state = state_of(a);
    }
    r.cost = static_cast<long>(r.tokens.size());
    return r;
}

RewardOutcome PatternSeekEnv::score(const Response& response,
                                    const Question& q) const {
    const PatternSeekTask task{q.payload, params_.vocab_size};
    return score_pattern(response, task, params_.truncation_limit);
}

ToolChainEnv::ToolChainEnv(ToolChainParams params) : params_(params) {
    // Floor of 10 keeps blind guessing against two-token answers at an
    // expected F1 of at most 1/8.
    if (params.vocab_size < 10) {
        throw std::invalid_argument("ToolChainEnv: vocab_size must be >= 10");
    }
    if (params.max_turns < 1) {
        throw std::invalid_argument("ToolChainEnv: max_turns must be >= 1");
    }
}

ActionLayout ToolChainEnv::layout() const {
    return ActionLayout{params_.vocab_size + 2, params_.vocab_size + 1,
                        params_.vocab_size};
}

Question ToolChainEnv::make_question(std::uint64_t id, SplitMix64& rng) const {
    const double u = rng.next_double();
    const int depth = u < 0.5 ? 1 : (u < 0.8 ? 2 : 3);
    Question q;
    q.id = id;
    q.payload = {depth};
    for (int hop = 1; hop < depth; ++hop) {
        q.payload.push_back(static_cast<int>(rng.next_below(params_.vocab_size)));
    }
    const bool two_gold = rng.next_double() < 0.5;
    const int first = static_cast<int>(rng.next_below(params_.vocab_size));
    q.reference = {first};
    if (two_gold) {
        const int offset =
            1 + static_cast<int>(rng.next_below(params_.vocab_size - 1));
        q.reference.push_back((first + offset) % params_.vocab_size);
    }
    return q;
}

ToolChainTask ToolChainEnv::task_for(const Question& q) const {
    if (q.payload.empty() || q.reference.empty() || q.reference.size() > 2 ||
        q.payload.size() != static_cast<std::size_t>(q.payload[0])) {
        throw std::invalid_argument("ToolChainEnv: malformed question");
    }
    ToolChainTask task;
    task.depth = q.payload[0];
    task.gold = q.reference;
    task.keys.assign(q.payload.begin() + 1, q.payload.end());
    task.vocab_size = params_.vocab_size;
    task.max_turns = params_.max_turns;
    return task;
}

Response ToolChainEnv::sample_response(const TabularPolicy& policy,
                                       const Question& q,
                                       const SamplingConfig& cfg,
                                       SplitMix64& rng) const {
    ToolChainEpisode episode(task_for(q), rng.next_u64());
    Response r;
    r.question_id = q.id;
    int state = kBosState;
    while (!episode.done()) {
        double lp = 0.0;
        const int a = policy.sample(state, cfg.temperature, rng, lp);
        r.tokens.push_back(a);
        r.states.push_back(state);
        r.behavior_logprobs.push_back(lp);
        state = episode.step(a);
    }
    r.cost = episode.tool_calls();
    return r;
}

RewardOutcome ToolChainEnv::score(const Response& response,
                                  const Question& q) const {
    ToolChainEpisode episode(task_for(q));
    for (int a : response.tokens) {
        if (episode.done()) {
            break;
        }
        episode.step(a);
    }
    return episode.outcome(params_.tau_correct);
}

RolloutGroup rollout(const TabularPolicy& policy, const Question& q,
                     const SamplingConfig& cfg, const Environment& env,
                     std::uint64_t run_seed, long step) {
    if (cfg.group_size < 2) {
        throw std::invalid_argument("rollout: group_size must be >= 2");
    }
    RolloutGroup group;
    group.question_id = q.id;
    group.responses.resize(static_cast<std::size_t>(cfg.group_size));
    for (int s = 0; s < cfg.group_size; ++s) {
        SplitMix64 rng = derive_stream(
            run_seed, StreamKind::Rollout,
            {static_cast<std::uint64_t>(step), q.id, static_cast<std::uint64_t>(s)});
        Response r = env.sample_response(policy, q, cfg, rng);
        r.born_step = static_cast<std::uint64_t>(step);
        r.sample_index = s;
        group.responses[static_cast<std::size_t>(s)] = std::move(r);
    }
    return group;
}

} // namespace rorecomp

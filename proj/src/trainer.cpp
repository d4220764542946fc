// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rorecomp/optim.hpp"
#include "rorecomp/rewards.hpp"

namespace rorecomp {

namespace {

// Deterministic fan-out: worker w handles indices w, w + n_workers, ... and
// each index writes its own output slot, so results never depend on timing.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const int w = std::min(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(w));
    std::mutex err_mutex;
    std::exception_ptr err;
    for (int tid = 0; tid < w; ++tid) {
        threads.emplace_back([&, tid] {
            try {
                for (int i = tid; i < n; i += w) {
                    fn(i);
                }
            } catch (...) {
                std::scoped_lock lock(err_mutex);
                if (!err) {
                    err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (err) {
        std::rethrow_exception(err);
    }
}

RewardOutcome shaped_outcome(const Environment& env, const Response& r,
                             const Question& q, const RunConfig& cfg,
                             long group_min_cost, long group_max_cost) {
    RewardOutcome out = env.score(r, q);
    switch (cfg.shaping) {
        case RewardShaping::None:
            break;
        case RewardShaping::TruncationZero:
            out = apply_truncation_zero(out, r.cost, cfg.truncation_limit);
            break;
        case RewardShaping::LengthPenalty:
            out = length_penalty_baseline(out, r.cost, group_min_cost,
                                          group_max_cost, cfg.penalty_weight);
            break;
    }
    return out;
}

// Scores a group and freezes advantages onto each response.
void score_group(RolloutGroup& group, const Question& q, const Environment& env,
                 const RunConfig& cfg, const TabularPolicy& reference,
                 const ValueTable& critic) {
    long min_cost = group.responses.front().cost;
    long max_cost = min_cost;
    for (const Response& r : group.responses) {
        min_cost = std::min(min_cost, r.cost);
        max_cost = std::max(max_cost, r.cost);
    }
    for (Response& r : group.responses) {
        const RewardOutcome out =
            shaped_outcome(env, r, q, cfg, min_cost, max_cost);
        r.reward = out.reward;
        r.correct = out.correct;
    }
    const AdvantageMode& mode = cfg.optimizer.advantage_mode;
    if (mode.kind != AdvantageKind::PpoGae) {
        std::vector<double> rewards;
        rewards.reserve(group.responses.size());
        for (const Response& r : group.responses) {
            rewards.push_back(r.reward);
        }
        const auto adv = grpo_advantages(rewards, mode, cfg.optimizer.std_floor);
        for (std::size_t i = 0; i < group.responses.size(); ++i) {
            group.responses[i].advantage = {adv[i]};
        }
        return;
    }
    for (Response& r : group.responses) {
        const std::size_t t_len = r.tokens.size();
        r.token_rewards.assign(t_len, 0.0);
        r.token_rewards.back() = r.reward;
        if (cfg.optimizer.kl_coef > 0.0) {
            std::vector<double> ref_logprobs(t_len);
            for (std::size_t t = 0; t < t_len; ++t) {
                ref_logprobs[t] = reference.logprob(r.states[t], r.tokens[t],
                                                    cfg.sampling.temperature);
            }
            const auto k3 = kl_penalty(r.behavior_logprobs, ref_logprobs);
            for (std::size_t t = 0; t < t_len; ++t) {
                r.token_rewards[t] -= cfg.optimizer.kl_coef * k3[t];
            }
        }
        std::vector<double> values(t_len);
        for (std::size_t t = 0; t < t_len; ++t) {
            values[t] = critic.values[static_cast<std::size_t>(r.states[t])];
        }
        r.advantage = gae_advantages(r.token_rewards, values, 0.0, mode.gamma,
                                     mode.lambda);
    }
}

std::vector<TrainItem> to_items(std::vector<Response> responses,
                                BatchSource source) {
    std::vector<TrainItem> items;
    items.reserve(responses.size());
    for (Response& r : responses) {
        TrainItem item;
        item.advantage = r.advantage;
        item.source = source;
        item.response = std::move(r);
        items.push_back(std::move(item));
    }
    return items;
}

// Compensation items reuse the advantages and behavior log-probs frozen at
// generation time unless the corresponding knobs say otherwise.
std::vector<TrainItem> build_comp_items(std::vector<Response> comp,
                                        const RunConfig& cfg,
                                        const TabularPolicy& current) {
    if (cfg.recomposition.recompute_comp_advantages &&
        cfg.optimizer.advantage_mode.kind != AdvantageKind::PpoGae) {
        std::vector<double> rewards;
        rewards.reserve(comp.size());
        for (const Response& r : comp) {
            rewards.push_back(r.reward);
        }
        const auto adv = grpo_advantages(rewards, cfg.optimizer.advantage_mode,
                                         cfg.optimizer.std_floor);
        for (std::size_t i = 0; i < comp.size(); ++i) {
            comp[i].advantage = {adv[i]};
        }
    }
    if (cfg.recomposition.comp_on_policy_loss) {
        for (Response& r : comp) {
            for (std::size_t t = 0; t < r.tokens.size(); ++t) {
                r.behavior_logprobs[t] = current.logprob(
                    r.states[t], r.tokens[t], cfg.sampling.temperature);
            }
        }
    }
    return to_items(std::move(comp), BatchSource::Compensation);
}

bool zero_variance(const RolloutGroup& group) {
    const double first = group.responses.front().reward;
    for (const Response& r : group.responses) {
        if (r.reward != first) {
            return false;
        }
    }
    return true;
}

} // namespace

std::unique_ptr<Environment> make_environment(const RunConfig& cfg) {
    if (cfg.environment == EnvId::PatternSeek) {
        return std::make_unique<PatternSeekEnv>(PatternSeekParams{
            cfg.vocab_size, cfg.pattern_length,
            static_cast<long>(cfg.sampling.max_tokens)});
    }
    return std::make_unique<ToolChainEnv>(
        ToolChainParams{cfg.vocab_size, cfg.max_turns, cfg.tau_correct});
}

RunReport train(const RunConfig& cfg) {
    validate(cfg);
    const auto env = make_environment(cfg);
    const ActionLayout layout = env->layout();
    TabularPolicy policy(layout.n_states(), layout.n_actions);
    const TabularPolicy reference = policy;
    ValueTable critic(layout.n_states(), cfg.critic_learning_rate);
    ReplayBuffer buffer(cfg.recomposition.buffer_capacity);
    const ScheduleParams sched{cfg.recomposition.p_lower, cfg.total_steps};

    RunReport report;
    report.config = cfg;
    report.series.reserve(static_cast<std::size_t>(cfg.total_steps));

    const int prompts = cfg.prompts_per_step;
    for (long t = 0; t < cfg.total_steps; ++t) {
        std::vector<Question> questions(static_cast<std::size_t>(prompts));
        for (int i = 0; i < prompts; ++i) {
            SplitMix64 rng = derive_stream(
                cfg.seed, StreamKind::Question,
                {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i)});
            const std::uint64_t qid =
                static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(prompts) +
                static_cast<std::uint64_t>(i);
            questions[static_cast<std::size_t>(i)] = env->make_question(qid, rng);
        }

        std::vector<RolloutGroup> groups(static_cast<std::size_t>(prompts));
        parallel_for(prompts, cfg.workers, [&](int i) {
            const auto idx = static_cast<std::size_t>(i);
            groups[idx] = rollout(policy, questions[idx], cfg.sampling, *env,
                                  cfg.seed, t);
            score_group(groups[idx], questions[idx], *env, cfg, reference, critic);
        });

        double reward_sum = 0.0;
        double cost_sum = 0.0;
        long n_responses = 0;
        for (const RolloutGroup& g : groups) {
            for (const Response& r : g.responses) {
                reward_sum += r.reward;
                cost_sum += static_cast<double>(r.cost);
                ++n_responses;
            }
        }

        StepMetrics m;
        m.step = t;
        m.mean_reward = reward_sum / static_cast<double>(n_responses);
        m.mean_cost = cost_sum / static_cast<double>(n_responses);
        m.p_comp = comp_probability(t, sched);

        if (cfg.recomposition.enabled) {
            std::vector<RolloutGroup> kept;
            std::span<const RolloutGroup> train_groups{groups};
            if (cfg.recomposition.filter_zero_variance_groups) {
                for (const RolloutGroup& g : groups) {
                    if (!zero_variance(g)) {
                        kept.push_back(g);
                    }
                }
                train_groups = kept;
            }
            RecomposeResult rec;
            if (cfg.recomposition.comp_enabled) {
                SplitMix64 gate_rng = derive_stream(
                    cfg.seed, StreamKind::Gate, {static_cast<std::uint64_t>(t)});
                rec = recompose_step(train_groups, cfg.recomposition.alpha, buffer,
                                     t, sched, cfg.recomposition.comp_batch_size,
                                     cfg.recomposition.retain_on_skip, gate_rng);
            } else {
                // Ablation arm: priority batches only, remainders discarded.
                for (const RolloutGroup& g : train_groups) {
                    PrioritySelection sel =
                        select_priority(partition(g), cfg.recomposition.alpha);
                    rec.priority.insert(rec.priority.end(),
                                        std::make_move_iterator(sel.selected.begin()),
                                        std::make_move_iterator(sel.selected.end()));
                }
            }
            m.n_priority_items = static_cast<long>(rec.priority.size());
            if (!rec.priority.empty()) {
                const auto items =
                    to_items(std::move(rec.priority), BatchSource::Priority);
                policy = apply_update(policy, items, cfg.optimizer,
                                      cfg.sampling.temperature, &critic);
            }
            if (rec.comp.has_value()) {
                auto items = build_comp_items(std::move(*rec.comp), cfg, policy);
                m.n_comp_items = static_cast<long>(items.size());
                policy = apply_update(policy, items, cfg.optimizer,
                                      cfg.sampling.temperature, &critic);
                m.did_comp_update = true;
            }
        } else {
            std::vector<Response> all;
            all.reserve(static_cast<std::size_t>(n_responses));
            for (RolloutGroup& g : groups) {
                for (Response& r : g.responses) {
                    all.push_back(std::move(r));
                }
            }
            const auto items = to_items(std::move(all), BatchSource::Priority);
            policy = apply_update(policy, items, cfg.optimizer,
                                  cfg.sampling.temperature, &critic);
        }
        m.buffer_size = static_cast<long>(buffer.size());
        report.series.push_back(m);
        report.param_trace.push_back(policy.digest());
    }

    const long window =
        std::min<long>(cfg.summary_window, static_cast<long>(report.series.size()));
    double cost_acc = 0.0;
    double reward_acc = 0.0;
    for (long i = static_cast<long>(report.series.size()) - window;
         i < static_cast<long>(report.series.size()); ++i) {
        cost_acc += report.series[static_cast<std::size_t>(i)].mean_cost;
        reward_acc += report.series[static_cast<std::size_t>(i)].mean_reward;
    }
    report.final_mean_cost = cost_acc / static_cast<double>(window);
    report.final_mean_reward = reward_acc / static_cast<double>(window);

    // pass@k of the final policy on held-out questions.
    const int n = cfg.eval_samples;
    std::vector<int> ks;
    for (int k : {1, 2, 4, 8, 16, 32}) {
        if (k <= n) {
            ks.push_back(k);
        }
    }
    SamplingConfig eval_cfg = cfg.sampling;
    eval_cfg.group_size = n;
    for (int j = 0; j < cfg.eval_questions; ++j) {
        SplitMix64 qrng = derive_stream(cfg.seed, StreamKind::EvalQuestion,
                                        {static_cast<std::uint64_t>(j)});
        const Question q = env->make_question(
            0x8000000000000000ULL + static_cast<std::uint64_t>(j), qrng);
        long n_correct = 0;
        for (int s = 0; s < n; ++s) {
            SplitMix64 rng = derive_stream(
                cfg.seed, StreamKind::EvalRollout,
                {static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(s)});
            Response r = env->sample_response(policy, q, eval_cfg, rng);
            const RewardOutcome out = shaped_outcome(*env, r, q, cfg, r.cost, r.cost);
            if (out.correct) {
                ++n_correct;
            }
        }
        for (int k : ks) {
            report.pass_at_k_table[k] += pass_at_k(n, n_correct, k);
        }
    }
    for (int k : ks) {
        report.pass_at_k_table[k] /= static_cast<double>(cfg.eval_questions);
    }

    report.final_policy = policy;
    report.final_buffer.assign(buffer.entries().begin(), buffer.entries().end());
    return report;
}

namespace {

ArmSummary summarize(const std::vector<double>& costs,
                     const std::vector<double>& rewards) {
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v, double mean) {
        double sq = 0.0;
        for (double x : v) sq += (x - mean) * (x - mean);
        return std::sqrt(sq / static_cast<double>(v.size()));
    };
    ArmSummary s;
    s.cost_mean = mean_of(costs);
    s.cost_std = std_of(costs, s.cost_mean);
    s.reward_mean = mean_of(rewards);
    s.reward_std = std_of(rewards, s.reward_mean);
    return s;
}

} // namespace

ComparisonReport compare(const RunConfig& a, const RunConfig& b,
                         std::span<const std::uint64_t> seeds) {
    if (a.environment != b.environment) {
        throw std::invalid_argument("compare: environment mismatch between arms");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("compare: need at least one seed");
    }
    std::vector<double> a_costs, a_rewards, b_costs, b_rewards, reductions;
    for (std::uint64_t seed : seeds) {
        RunConfig ca = a;
        RunConfig cb = b;
        ca.seed = seed;
        cb.seed = seed;
        const RunReport ra = train(ca);
        const RunReport rb = train(cb);
        a_costs.push_back(ra.final_mean_cost);
        a_rewards.push_back(ra.final_mean_reward);
        b_costs.push_back(rb.final_mean_cost);
        b_rewards.push_back(rb.final_mean_reward);
        reductions.push_back(reduction_pct(ra.final_mean_cost, rb.final_mean_cost));
    }
    ComparisonReport report;
    report.arm_a = summarize(a_costs, a_rewards);
    report.arm_b = summarize(b_costs, b_rewards);
    double red_mean = 0.0;
    for (double r : reductions) red_mean += r;
    red_mean /= static_cast<double>(reductions.size());
    double red_sq = 0.0;
    for (double r : reductions) red_sq += (r - red_mean) * (r - red_mean);
    report.reduction_pct_mean = red_mean;
    report.reduction_pct_std =
        std::sqrt(red_sq / static_cast<double>(reductions.size()));
    report.reward_diff_mean =
        report.arm_b.reward_mean - report.arm_a.reward_mean;
    report.seeds.assign(seeds.begin(), seeds.end());
    return report;
}

std::vector<AlphaSweepRow> sweep_alpha(const RunConfig& base,
                                       std::span<const double> alphas,
                                       std::span<const std::uint64_t> seeds) {
    if (alphas.empty()) {
        throw std::invalid_argument("sweep_alpha: need at least one alpha");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("sweep_alpha: need at least one seed");
    }
    std::vector<AlphaSweepRow> rows;
    for (double alpha : alphas) {
        RunConfig cfg = base;
        cfg.recomposition.enabled = true;
        cfg.recomposition.alpha = alpha;
        validate(cfg);
        std::vector<double> costs, rewards;
        for (std::uint64_t seed : seeds) {
            cfg.seed = seed;
            const RunReport r = train(cfg);
            costs.push_back(r.final_mean_cost);
            rewards.push_back(r.final_mean_reward);
        }
        const ArmSummary s = summarize(costs, rewards);
        rows.push_back(AlphaSweepRow{alpha, s.cost_mean, s.cost_std,
                                     s.reward_mean, s.reward_std});
    }
    return rows;
}

} // namespace rorecomp

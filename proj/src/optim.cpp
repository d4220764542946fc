// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rorecomp {

std::vector<double> grpo_advantages(std::span<const double> rewards,
                                    const AdvantageMode& mode, double std_floor) {
    if (rewards.empty()) {
        throw std::invalid_argument("grpo_advantages: empty group");
    }
    if (mode.kind == AdvantageKind::PpoGae) {
        throw std::invalid_argument("grpo_advantages: mode must be group-relative");
    }
    const auto n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    std::vector<double> out(rewards.size());
    if (mode.kind == AdvantageKind::DrGrpoMeanOnly) {
        for (std::size_t i = 0; i < rewards.size(); ++i) {
            out[i] = rewards[i] - mean;
        }
        return out;
    }
    double sq = 0.0;
    for (double r : rewards) {
        sq += (r - mean) * (r - mean);
    }
    const double std_dev = std::sqrt(sq / n);
    if (std_dev == 0.0) {
        return std::vector<double>(rewards.size(), 0.0);
    }
    const double denom = std::max(std_dev, std_floor);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out[i] = (rewards[i] - mean) / denom;
    }
    return out;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double bootstrap, double gamma, double lambda) {
    if (rewards.empty()) {
        throw std::invalid_argument("gae_advantages: empty sequence");
    }
    if (rewards.size() != values.size()) {
        throw std::invalid_argument("gae_advantages: length mismatch");
    }
    const std::size_t t_len = rewards.size();
    std::vector<double> adv(t_len);
    double next_adv = 0.0;
    double next_value = bootstrap;
    for (std::size_t i = t_len; i-- > 0;) {
        const double delta = rewards[i] + gamma * next_value - values[i];
        next_adv = delta + gamma * lambda * next_adv;
        adv[i] = next_adv;
        next_value = values[i];
    }
    return adv;
}

ClipResult ppo_clip_objective(std::span<const double> logp_new,
                              std::span<const double> logp_old,
                              std::span<const double> advantages,
                              double clip_epsilon) {
    if (logp_new.empty()) {
        throw std::invalid_argument("ppo_clip_objective: empty sequence");
    }
    if (logp_new.size() != logp_old.size() ||
        logp_new.size() != advantages.size()) {
        throw std::invalid_argument("ppo_clip_objective: length mismatch");
    }
    ClipResult result;
    result.active_mask.resize(logp_new.size());
    double total = 0.0;
    for (std::size_t t = 0; t < logp_new.size(); ++t) {
        const double rho = std::exp(logp_new[t] - logp_old[t]);
        const double clipped =
            std::clamp(rho, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
        const double unclipped_term = rho * advantages[t];
        const double clipped_term = clipped * advantages[t];
        result.active_mask[t] = unclipped_term <= clipped_term;
        total += std::min(unclipped_term, clipped_term);
    }
    result.objective = total / static_cast<double>(logp_new.size());
    return result;
}

std::vector<double> kl_penalty(std::span<const double> logp_new,
                               std::span<const double> logp_ref) {
    if (logp_new.size() != logp_ref.size()) {
        throw std::invalid_argument("kl_penalty: length mismatch");
    }
    std::vector<double> out(logp_new.size());
    for (std::size_t t = 0; t < logp_new.size(); ++t) {
        const double d = logp_ref[t] - logp_new[t];
        out[t] = std::exp(d) - d - 1.0;
    }
    return out;
}

RowGradient logprob_grad(const TabularPolicy& params, int state, int action) {
    if (action < 0 || action >= params.n_actions()) {
        throw std::out_of_range("logprob_grad: action out of range");
    }
    RowGradient g;
    g.state = state;
    params.probs_into(state, 1.0, g.d_logits);
    for (int a = 0; a < params.n_actions(); ++a) {
        g.d_logits[a] = ((a == action) ? 1.0 : 0.0) - g.d_logits[a];
    }
    return g;
}

namespace {

void validate_item(const TrainItem& item) {
    const Response& r = item.response;
    if (r.tokens.empty()) {
        throw std::invalid_argument("train item: empty response");
    }
    if (r.tokens.size() != r.states.size() ||
        r.tokens.size() != r.behavior_logprobs.size()) {
        throw std::invalid_argument("train item: per-token field length mismatch");
    }
    if (item.advantage.size() != 1 &&
        item.advantage.size() != r.tokens.size()) {
        throw std::invalid_argument("train item: advantage must be scalar or per-token");
    }
}

std::vector<std::size_t> canonical_order(std::span<const TrainItem> batch) {
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Response& ra = batch[a].response;
        const Response& rb = batch[b].response;
        if (ra.born_step != rb.born_step) return ra.born_step < rb.born_step;
        if (ra.question_id != rb.question_id) return ra.question_id < rb.question_id;
        return ra.sample_index < rb.sample_index;
    });
    return idx;
}

double item_weight(const OptimConfig& cfg, std::size_t n_items,
                   std::size_t n_tokens) {
    if (cfg.advantage_mode.kind == AdvantageKind::DrGrpoMeanOnly) {
        return 1.0 / static_cast<double>(n_items);
    }
    return 1.0 / (static_cast<double>(n_items) * static_cast<double>(n_tokens));
}

} // namespace

double batch_objective(const TabularPolicy& params,
                       std::span<const TrainItem> batch,
                       const OptimConfig& cfg, double temperature) {
    const auto order = canonical_order(batch);
    double total = 0.0;
    for (std::size_t idx : order) {
        const TrainItem& item = batch[idx];
        validate_item(item);
        const Response& r = item.response;
        const std::size_t t_len = r.tokens.size();
        const double w = item_weight(cfg, batch.size(), t_len);
        double item_sum = 0.0;
        for (std::size_t t = 0; t < t_len; ++t) {
            const double adv =
                item.advantage.size() == 1 ? item.advantage[0] : item.advantage[t];
            const double lpn = params.logprob(r.states[t], r.tokens[t], temperature);
            const double rho = std::exp(lpn - r.behavior_logprobs[t]);
            const double clipped =
                std::clamp(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
            item_sum += std::min(rho * adv, clipped * adv);
        }
        total += w * item_sum;
    }
    return total;
}

std::vector<double> batch_gradient(const TabularPolicy& params,
                                   std::span<const TrainItem> batch,
                                   const OptimConfig& cfg, double temperature) {
    std::vector<double> grad(params.data().size(), 0.0);
    const auto order = canonical_order(batch);
    std::vector<double> probs;
    for (std::size_t idx : order) {
        const TrainItem& item = batch[idx];
        validate_item(item);
        const Response& r = item.response;
        const std::size_t t_len = r.tokens.size();
        const double w = item_weight(cfg, batch.size(), t_len);
        for (std::size_t t = 0; t < t_len; ++t) {
            const double adv =
                item.advantage.size() == 1 ? item.advantage[0] : item.advantage[t];
            const int state = r.states[t];
            const int action = r.tokens[t];
            const double lpn = params.logprob(state, action, temperature);
            const double rho = std::exp(lpn - r.behavior_logprobs[t]);
            const double clipped =
                std::clamp(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
            if (rho * adv > clipped * adv) {
                continue; // clipped branch attains the min: zero gradient
            }
            const double coef = w * rho * adv / temperature;
            params.probs_into(state, temperature, probs);
            double* row = grad.data() +
                          static_cast<std::size_t>(state) * params.n_actions();
            for (int a = 0; a < params.n_actions(); ++a) {
                row[a] += coef * (((a == action) ? 1.0 : 0.0) - probs[a]);
            }
        }
    }
    return grad;
}

TabularPolicy apply_update(const TabularPolicy& params,
                           std::span<const TrainItem> batch,
                           const OptimConfig& cfg, double temperature,
                           ValueTable* critic) {
    if (batch.empty()) {
        throw std::invalid_argument("apply_update: empty batch");
    }
    const auto grad = batch_gradient(params, batch, cfg, temperature);
    TabularPolicy out = params;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] += cfg.learning_rate * grad[i];
    }
    if (cfg.advantage_mode.kind == AdvantageKind::PpoGae && critic != nullptr) {
        const double gamma = cfg.advantage_mode.gamma;
        const auto order = canonical_order(batch);
        std::vector<double> returns;
        for (std::size_t idx : order) {
            const Response& r = batch[idx].response;
            const std::size_t t_len = r.tokens.size();
            returns.assign(t_len, 0.0);
            double acc = 0.0;
            for (std::size_t t = t_len; t-- > 0;) {
                const double reward_t = r.token_rewards.size() == t_len
                                            ? r.token_rewards[t]
                                            : (t + 1 == t_len ? r.reward : 0.0);
                acc = reward_t + gamma * acc;
                returns[t] = acc;
            }
            for (std::size_t t = 0; t < t_len; ++t) {
                double& v = critic->values[static_cast<std::size_t>(r.states[t])];
                v += critic->learning_rate * (returns[t] - v);
            }
        }
    }
    return out;
}

} // namespace rorecomp

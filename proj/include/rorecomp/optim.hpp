// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "rorecomp/core.hpp"
#include "rorecomp/policy.hpp"

namespace rorecomp {

enum class AdvantageKind { GrpoStdNorm, DrGrpoMeanOnly, PpoGae };

struct AdvantageMode {
    AdvantageKind kind{AdvantageKind::DrGrpoMeanOnly};
    double gamma{1.0};
    double lambda{1.0};
};

struct OptimConfig {
    double clip_epsilon{0.2};
    double learning_rate{0.1};
    double kl_coef{0.0};
    AdvantageMode advantage_mode{};
    double std_floor{1e-6};
};

// Group-relative advantages over outcome rewards.
//   GrpoStdNorm:    (r_i - mean) / max(std, std_floor), population std.
//   DrGrpoMeanOnly: r_i - mean.
// A zero-variance group yields all zeros in both modes.
std::vector<double> grpo_advantages(std::span<const double> rewards,
                                    const AdvantageMode& mode, double std_floor);

// Generalized advantage estimation, reverse recursion:
//   delta_t = r_t + gamma * V_{t+1} - V_t   (V_T = bootstrap)
//   A_t     = delta_t + gamma * lambda * A_{t+1}
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double bootstrap, double gamma, double lambda);

struct ClipResult {
    double objective{};
    std::vector<bool> active_mask;
};

// Token-level clipped surrogate for one sequence:
//   rho_t  = exp(logp_new_t - logp_old_t)
//   term_t = min(rho_t * A_t, clamp(rho_t, 1 - eps, 1 + eps) * A_t)
// objective is the mean of term over tokens; active_mask marks tokens whose
// unclipped branch attains the min (ties count as active).
ClipResult ppo_clip_objective(std::span<const double> logp_new,
                              std::span<const double> logp_old,
                              std::span<const double> advantages,
                              double clip_epsilon);

// k3 estimator per token: exp(d) - d - 1 with d = logp_ref - logp_new.
// Non-negative everywhere; zero iff logp_new == logp_ref.
std::vector<double> kl_penalty(std::span<const double> logp_new,
                               std::span<const double> logp_ref);

// Analytic score-function gradient for one token of the softmax policy:
//   d log pi(a|s) / d theta_{s,a'} = 1{a' == a} - pi(a'|s).
// Only row `state` is non-zero; d_logits holds that row.
struct RowGradient {
    int state{};
    std::vector<double> d_logits;
};
RowGradient logprob_grad(const TabularPolicy& params, int state, int action);

// Batch surrogate built from stored advantages and behavior log-probs, with
// current log-probs evaluated at `temperature` (the sampling temperature, so
// rho == 1 right after a rollout). Normalization follows the advantage mode:
// GrpoStdNorm and PpoGae average per-token within each item (token mean),
// DrGrpoMeanOnly sums tokens and divides by the item count only.
double batch_objective(const TabularPolicy& params,
                       std::span<const TrainItem> batch,
                       const OptimConfig& cfg, double temperature);

// Exact gradient of batch_objective with respect to every logit.
std::vector<double> batch_gradient(const TabularPolicy& params,
                                   std::span<const TrainItem> batch,
                                   const OptimConfig& cfg, double temperature);

// One gradient-ascent step on batch_objective. Items are accumulated in a
// canonical (born_step, question_id, sample_index) order so the result does
// not depend on how the caller assembled the batch. In PpoGae mode `critic`
// is stepped toward the empirical discounted returns of each item.
TabularPolicy apply_update(const TabularPolicy& params,
                           std::span<const TrainItem> batch,
                           const OptimConfig& cfg, double temperature,
                           ValueTable* critic = nullptr);

} // namespace rorecomp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace rorecomp {

// Outcome of scoring one response. Invariant: format_ok == false implies
// reward == 0 and correct == false.
struct RewardOutcome {
    double reward{};
    bool correct{};
    bool format_ok{true};

    static RewardOutcome format_failure() { return RewardOutcome{0.0, false, false}; }
};

// Binary exact-match verifier: reward 1 iff format_ok and pred == ref.
RewardOutcome verify_exact(std::span<const int> pred, std::span<const int> ref,
                           bool format_ok);

// Multiset token F1: F1 = 2PR / (P + R); reward 0 if either side is empty or
// the overlap is empty. correct iff reward >= tau_correct.
RewardOutcome f1_reward(std::span<const int> pred, std::span<const int> ref,
                        double tau_correct = 0.5);

// Truncation shaping: cost > limit zeroes reward and correctness (format_ok
// forced false); otherwise the outcome passes through unchanged. Idempotent.
RewardOutcome apply_truncation_zero(RewardOutcome outcome, long cost, long limit);

// Explicit length-penalty baseline:
// reward' = clamp(reward - weight * (cost - min) / (max - min), 0, 1),
// no-op when group_min_cost == group_max_cost. Correctness is untouched.
RewardOutcome length_penalty_baseline(RewardOutcome outcome, long cost,
                                      long group_min_cost, long group_max_cost,
                                      double weight);

} // namespace rorecomp

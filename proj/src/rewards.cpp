// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/rewards.hpp"

#include <algorithm>
#include <map>

namespace rorecomp {

RewardOutcome verify_exact(std::span<const int> pred, std::span<const int> ref,
                           bool format_ok) {
    if (!format_ok) {
        return RewardOutcome::format_failure();
    }
    const bool match = pred.size() == ref.size() &&
                       std::equal(pred.begin(), pred.end(), ref.begin());
    return RewardOutcome{match ? 1.0 : 0.0, match, true};
}

RewardOutcome f1_reward(std::span<const int> pred, std::span<const int> ref,
                        double tau_correct) {
    if (pred.empty() || ref.empty()) {
        return RewardOutcome{0.0, false, true};
    }
    std::map<int, long> ref_counts;
    for (int t : ref) {
        ++ref_counts[t];
    }
    long overlap = 0;
    for (int t : pred) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) {
        return RewardOutcome{0.0, false, true};
    }
    const double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(ref.size());
    const double f1 = 2.0 * p * r / (p + r);
    return RewardOutcome{f1, f1 >= tau_correct, true};
}

RewardOutcome apply_truncation_zero(RewardOutcome outcome, long cost, long limit) {
    if (cost > limit) {
        return RewardOutcome::format_failure();
    }
    return outcome;
}

RewardOutcome length_penalty_baseline(RewardOutcome outcome, long cost,
                                      long group_min_cost, long group_max_cost,
                                      double weight) {
    if (group_min_cost == group_max_cost) {
        return outcome;
    }
    const double frac = static_cast<double>(cost - group_min_cost) /
                        static_cast<double>(group_max_cost - group_min_cost);
    outcome.reward = std::clamp(outcome.reward - weight * frac, 0.0, 1.0);
    return outcome;
}

} // namespace rorecomp

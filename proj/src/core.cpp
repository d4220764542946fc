// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/core.hpp"

#include <cmath>
#include <stdexcept>

namespace rorecomp {

GroupStats group_stats(const RolloutGroup& group) {
    if (group.responses.empty()) {
        throw std::invalid_argument("empty group");
    }
    const auto n = static_cast<double>(group.responses.size());
    double reward_sum = 0.0;
    double cost_sum = 0.0;
    for (const Response& r : group.responses) {
        reward_sum += r.reward;
        cost_sum += static_cast<double>(r.cost);
    }
    const double mean = reward_sum / n;
    double sq = 0.0;
    for (const Response& r : group.responses) {
        const double d = r.reward - mean;
        sq += d * d;
    }
    return GroupStats{mean, std::sqrt(sq / n), cost_sum / n};
}

double reduction_pct(double baseline, double treated) {
    if (!(baseline > 0.0)) {
        throw std::invalid_argument("reduction_pct: baseline must be > 0");
    }
    return 100.0 * (baseline - treated) / baseline;
}

double pass_at_k(long n, long c, long k) {
    if (c < 0 || c > n) {
        throw std::invalid_argument("pass_at_k: need 0 <= c <= n");
    }
    if (k < 1 || k > n) {
        throw std::invalid_argument("pass_at_k: need 1 <= k <= n");
    }
    if (n - c < k) {
        return 1.0;
    }
    // C(n-c, k) / C(n, k) = prod_{i=0..k-1} (n-c-i) / (n-i)
    double miss = 1.0;
    for (long i = 0; i < k; ++i) {
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - miss;
}

} // namespace rorecomp

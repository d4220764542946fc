// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/recompose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rorecomp {

PartitionedGroup partition(const RolloutGroup& group) {
    PartitionedGroup out;
    for (const Response& r : group.responses) {
        (r.correct ? out.correct : out.incorrect).push_back(r);
    }
    return out;
}

namespace {

std::size_t top_k_count(double alpha, std::size_t n) {
    if (n == 0) {
        return 0;
    }
    const auto k = static_cast<std::size_t>(
        std::floor(alpha * static_cast<double>(n) + 0.5));
    return std::max<std::size_t>(1, k);
}

// Stable sort of indices by cost; ascending for the correct side, descending
// for the incorrect side. Stability preserves the sampling order on ties.
std::vector<std::size_t> order_by_cost(const std::vector<Response>& side,
                                       bool ascending) {
    std::vector<std::size_t> idx(side.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return ascending ? side[a].cost < side[b].cost : side[a].cost > side[b].cost;
    });
    return idx;
}

void split_side(const std::vector<Response>& side, bool ascending, double alpha,
                PrioritySelection& out) {
    const std::size_t k = top_k_count(alpha, side.size());
    const auto idx = order_by_cost(side, ascending);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < k ? out.selected : out.remainder).push_back(side[idx[i]]);
    }
}

} // namespace

PrioritySelection select_priority(const PartitionedGroup& group, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::invalid_argument("select_priority: alpha must be in (0, 1]");
    }
    PrioritySelection out;
    split_side(group.correct, /*ascending=*/true, alpha, out);
    split_side(group.incorrect, /*ascending=*/false, alpha, out);
    return out;
}

double comp_probability(long t, const ScheduleParams& sched) {
    if (sched.t_max < 1) {
        throw std::invalid_argument("comp_probability: t_max must be >= 1");
    }
    if (!(sched.p_lower > 0.0) || sched.p_lower > 1.0) {
        throw std::invalid_argument("comp_probability: p_lower must be in (0, 1]");
    }
    if (t < 0 || t > sched.t_max) {
        throw std::out_of_range("comp_probability: t outside [0, t_max]");
    }
    const double phase = std::numbers::pi * static_cast<double>(t) /
                         static_cast<double>(sched.t_max);
    const double cosine = (1.0 + std::cos(phase)) / 2.0;
    return std::max(sched.p_lower, cosine);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    }
}

void ReplayBuffer::push(std::span<const Response> items) {
    if (entries_.size() + items.size() > capacity_) {
        throw std::length_error("ReplayBuffer: push would overflow; drain first");
    }
    entries_.insert(entries_.end(), items.begin(), items.end());
}

std::vector<Response> ReplayBuffer::pop_oldest(std::size_t n) {
    if (n > entries_.size()) {
        throw std::length_error("ReplayBuffer: pop_oldest underflow");
    }
    std::vector<Response> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(std::move(entries_.front()));
        entries_.pop_front();
    }
    return out;
}

RecomposeResult recompose_step(std::span<const RolloutGroup> groups, double alpha,
                               ReplayBuffer& buf, long t,
                               const ScheduleParams& sched,
                               std::size_t comp_batch_size, bool retain_on_skip,
                               SplitMix64& rng) {
    if (comp_batch_size == 0) {
        throw std::invalid_argument("recompose_step: comp_batch_size must be >= 1");
    }
    RecomposeResult result;
    std::vector<Response> remainder;
    for (const RolloutGroup& g : groups) {
        PrioritySelection sel = select_priority(partition(g), alpha);
        result.priority.insert(result.priority.end(),
                               std::make_move_iterator(sel.selected.begin()),
                               std::make_move_iterator(sel.selected.end()));
        remainder.insert(remainder.end(),
                         std::make_move_iterator(sel.remainder.begin()),
                         std::make_move_iterator(sel.remainder.end()));
    }

    // Make room before pushing; the oldest entries go first. A remainder
    // larger than the whole buffer keeps only its newest `capacity` items.
    if (remainder.size() > buf.capacity()) {
        const std::size_t excess = remainder.size() - buf.capacity();
        result.n_dropped_capacity += buf.size() + excess;
        buf.pop_oldest(buf.size());
        remainder.erase(remainder.begin(),
                        remainder.begin() + static_cast<std::ptrdiff_t>(excess));
    } else if (buf.size() + remainder.size() > buf.capacity()) {
        const std::size_t drop = buf.size() + remainder.size() - buf.capacity();
        buf.pop_oldest(drop);
        result.n_dropped_capacity += drop;
    }
    buf.push(remainder);
    result.n_buffered = remainder.size();

    if (buf.size() >= comp_batch_size) {
        const double u = rng.next_double();
        if (u < comp_probability(t, sched)) {
            result.comp = buf.pop_oldest(comp_batch_size);
        } else if (!retain_on_skip) {
            buf.pop_oldest(comp_batch_size);
            result.n_discarded_on_skip = comp_batch_size;
        }
    }
    return result;
}

} // namespace rorecomp

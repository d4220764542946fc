// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "rorecomp/core.hpp"
#include "rorecomp/rng.hpp"

namespace rorecomp {

// A scored rollout group split by the correctness flag. Order within each
// side preserves the original sampling order.
struct PartitionedGroup {
    std::vector<Response> correct;
    std::vector<Response> incorrect;
};

PartitionedGroup partition(const RolloutGroup& group);

// Result of priority selection for one group. selected holds the shortest
// correct responses (ascending cost) followed by the longest incorrect ones
// (descending cost); remainder holds everything else in the same class
// order. selected and remainder are disjoint and cover the input.
struct PrioritySelection {
    std::vector<Response> selected;
    std::vector<Response> remainder;
};

// Top-alpha selection. With k = max(1, floor(alpha * n + 0.5)) per non-empty
// side, takes the k cheapest correct and the k most expensive incorrect
// responses. Ties are broken by the original sampling index (stable).
// Requires alpha in (0, 1].
PrioritySelection select_priority(const PartitionedGroup& group, double alpha);

// Cosine-decayed compensation schedule.
struct ScheduleParams {
    double p_lower{0.2};
    long t_max{1};
};

// p_comp(t) = max(p_lower, (1 + cos(pi * t / t_max)) / 2) for 0 <= t <= t_max.
// Monotonically non-increasing in t; throws outside the domain.
double comp_probability(long t, const ScheduleParams& sched);

// Bounded FIFO over responses. push appends at the tail and throws if the
// batch does not fit (callers drain first); pop_oldest removes from the
// head. Single-writer: the training loop owns the buffer.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }

    void push(std::span<const Response> items);
    std::vector<Response> pop_oldest(std::size_t n);

    const std::deque<Response>& entries() const { return entries_; }

private:
    std::deque<Response> entries_;
    std::size_t capacity_;
};

// One recomposition step:
//   1. per group, select_priority; the concatenated selections form the
//      priority batch,
//   2. remainders are pushed into the buffer, draining the oldest entries
//      first when a push would overflow,
//   3. if the buffer holds at least comp_batch_size entries, a single
//      uniform draw against comp_probability(t) gates the compensation
//      batch: on success the oldest comp_batch_size entries are popped and
//      returned; on failure they are popped and discarded unless
//      retain_on_skip is set.
struct RecomposeResult {
    std::vector<Response> priority;
    std::optional<std::vector<Response>> comp;
    std::size_t n_buffered{};            // remainder items pushed this step
    std::size_t n_dropped_capacity{};    // drained to make room for a push
    std::size_t n_discarded_on_skip{};   // popped and thrown away by the gate
};

RecomposeResult recompose_step(std::span<const RolloutGroup> groups, double alpha,
                               ReplayBuffer& buf, long t,
                               const ScheduleParams& sched,
                               std::size_t comp_batch_size, bool retain_on_skip,
                               SplitMix64& rng);

} // namespace rorecomp

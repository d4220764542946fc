// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rorecomp/recompose.hpp"

namespace rorecomp {

struct CheckResult {
    std::string name;
    bool passed{};
    std::string detail;
};

// Reference selection: full sort of (cost, original index) pairs, then a
// slice of the first k. Kept deliberately separate from select_priority so
// the two can cross-check each other.
PrioritySelection select_priority_bruteforce(const PartitionedGroup& group,
                                             double alpha);

CheckResult check_selection_oracle(int n_groups, std::uint64_t seed);
CheckResult check_advantage_properties(int n_groups, std::uint64_t seed);
CheckResult check_schedule_exactness();
CheckResult check_gradient_fidelity(int n_policies, std::uint64_t seed);
CheckResult check_clip_semantics(int n_triples, std::uint64_t seed);
CheckResult check_buffer_fifo(int n_ops, std::uint64_t seed);
CheckResult check_gate_frequency(int n_trials, std::uint64_t seed);

// Everything above with the default sizes used by `verify`.
std::vector<CheckResult> run_property_suites(std::uint64_t seed = 7);

} // namespace rorecomp

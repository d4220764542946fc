// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rorecomp/rng.hpp"

namespace rorecomp {

// State 0 is the begin-of-sequence state; every action a owns state a + 1,
// so a policy over A actions has A + 1 states (Markov on the last token).
constexpr int kBosState = 0;
inline int state_of(int action) { return action + 1; }

// Dense logits table over (state, action). Sampling, log-prob evaluation and
// the score-function gradient all share one softmax routine so recorded
// behavior log-probs replay bit-for-bit under the frozen table.
class TabularPolicy {
public:
    TabularPolicy() = default;
    TabularPolicy(int n_states, int n_actions, double init = 0.0);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    double logit(int state, int action) const;
    double& logit(int state, int action);
    std::span<const double> row(int state) const;

    // Full parameter vector, row-major. Used by updates and finite-difference
    // checks.
    std::span<double> data() { return logits_; }
    std::span<const double> data() const { return logits_; }

    // Softmax over row `state` at the given temperature, written into `out`.
    // Robust to +inf logits: entries equal to the row max get weight 1.
    void probs_into(int state, double temperature, std::vector<double>& out) const;

    // log pi(action | state) at the given temperature.
    double logprob(int state, int action, double temperature) const;

    // Draws one action; logprob_out receives exactly the value logprob()
    // would return for the drawn action.
    int sample(int state, double temperature, SplitMix64& rng,
               double& logprob_out) const;

    // FNV-1a digest of the raw parameter bytes; used to compare trajectories.
    std::uint64_t digest() const;

private:
    int n_states_{0};
    int n_actions_{0};
    std::vector<double> logits_;
};

// Tabular state-value estimates for the GAE path.
struct ValueTable {
    std::vector<double> values;
    double learning_rate{0.1};

    ValueTable() = default;
    ValueTable(int n_states, double lr) : values(n_states, 0.0), learning_rate(lr) {}
};

} // namespace rorecomp

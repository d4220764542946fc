// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/policy.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace rorecomp {

TabularPolicy::TabularPolicy(int n_states, int n_actions, double init)
    : n_states_(n_states),
      n_actions_(n_actions),
      logits_(static_cast<std::size_t>(n_states) * n_actions, init) {
    if (n_states < 1 || n_actions < 1) {
        throw std::invalid_argument("TabularPolicy: need n_states, n_actions >= 1");
    }
}

double TabularPolicy::logit(int state, int action) const {
    return logits_[static_cast<std::size_t>(state) * n_actions_ + action];
}

double& TabularPolicy::logit(int state, int action) {
    return logits_[static_cast<std::size_t>(state) * n_actions_ + action];
}

std::span<const double> TabularPolicy::row(int state) const {
    return {logits_.data() + static_cast<std::size_t>(state) * n_actions_,
            static_cast<std::size_t>(n_actions_)};
}

void TabularPolicy::probs_into(int state, double temperature,
                               std::vector<double>& out) const {
    if (state < 0 || state >= n_states_) {
        throw std::out_of_range("TabularPolicy: state out of range");
    }
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("TabularPolicy: temperature must be > 0");
    }
    const auto r = row(state);
    out.resize(r.size());
    double max_logit = r[0];
    for (double v : r) {
        if (v > max_logit) max_logit = v;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        // exp(0) for the max entry keeps +inf logits well-defined.
        const double e = (r[i] == max_logit)
                             ? 1.0
                             : std::exp((r[i] - max_logit) / temperature);
        out[i] = e;
        total += e;
    }
    for (double& p : out) {
        p /= total;
    }
}

double TabularPolicy::logprob(int state, int action, double temperature) const {
    if (action < 0 || action >= n_actions_) {
        throw std::out_of_range("TabularPolicy: action out of range");
    }
    const auto r = row(state);
    double max_logit = r[0];
    for (double v : r) {
        if (v > max_logit) max_logit = v;
    }
    double total = 0.0;
    for (double v : r) {
        total += (v == max_logit) ? 1.0 : std::exp((v - max_logit) / temperature);
    }
    const double scaled = (r[action] == max_logit)
                              ? 0.0
                              : (r[action] - max_logit) / temperature;
    return scaled - std::log(total);
}

int TabularPolicy::sample(int state, double temperature, SplitMix64& rng,
                          double& logprob_out) const {
    const auto r = row(state);
    double max_logit = r[0];
    for (double v : r) {
        if (v > max_logit) max_logit = v;
    }
    double total = 0.0;
    std::vector<double> weights(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        weights[i] = (r[i] == max_logit)
                         ? 1.0
                         : std::exp((r[i] - max_logit) / temperature);
        total += weights[i];
    }
    const double u = rng.next_double() * total;
    double acc = 0.0;
    int chosen = n_actions_ - 1;
    for (int i = 0; i < n_actions_; ++i) {
        acc += weights[i];
        if (u < acc) {
            chosen = i;
            break;
        }
    }
    const double scaled = (r[chosen] == max_logit)
                              ? 0.0
                              : (r[chosen] - max_logit) / temperature;
    logprob_out = scaled - std::log(total);
    return chosen;
}

std::uint64_t TabularPolicy::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : logits_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace rorecomp

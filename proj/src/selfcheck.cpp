// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "rorecomp/optim.hpp"
#include "rorecomp/policy.hpp"

namespace rorecomp {

namespace {

std::size_t top_k_count(double alpha, std::size_t n) {
    if (n == 0) {
        return 0;
    }
    const auto k = static_cast<std::size_t>(
        std::floor(alpha * static_cast<double>(n) + 0.5));
    return std::max<std::size_t>(1, k);
}

} // namespace

PrioritySelection select_priority_bruteforce(const PartitionedGroup& group,
                                             double alpha) {
    PrioritySelection out;
    auto run_side = [&](const std::vector<Response>& side, bool ascending) {
        std::vector<std::pair<long, std::size_t>> keyed;
        keyed.reserve(side.size());
        for (std::size_t i = 0; i < side.size(); ++i) {
            keyed.emplace_back(side[i].cost, i);
        }
        std::sort(keyed.begin(), keyed.end(),
                  [&](const auto& a, const auto& b) {
                      if (a.first != b.first) {
                          return ascending ? a.first < b.first : a.first > b.first;
                      }
                      return a.second < b.second;
                  });
        const std::size_t k = top_k_count(alpha, side.size());
        for (std::size_t i = 0; i < keyed.size(); ++i) {
            (i < k ? out.selected : out.remainder)
                .push_back(side[keyed[i].second]);
        }
    };
    run_side(group.correct, true);
    run_side(group.incorrect, false);
    return out;
}

namespace {

std::vector<int> identities(const std::vector<Response>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (const Response& r : v) {
        out.push_back(r.sample_index);
    }
    return out;
}

CheckResult pass(const std::string& name, const std::string& detail = "") {
    return CheckResult{name, true, detail};
}

CheckResult fail(const std::string& name, const std::string& detail) {
    return CheckResult{name, false, detail};
}

} // namespace

CheckResult check_selection_oracle(int n_groups, std::uint64_t seed) {
    const std::string name = "selection matches sort-and-slice oracle";
    SplitMix64 rng(seed);
    const double alphas[] = {0.5, 0.7, 0.8, 0.9, 1.0};
    for (int g = 0; g < n_groups; ++g) {
        const auto size = 1 + rng.next_below(32);
        RolloutGroup group;
        group.question_id = static_cast<std::uint64_t>(g);
        for (std::size_t i = 0; i < size; ++i) {
            Response r;
            r.sample_index = static_cast<int>(i);
            r.cost = static_cast<long>(rng.next_below(9)); // small range forces ties
            r.correct = rng.next_double() < 0.5;
            group.responses.push_back(r);
        }
        const double alpha = g % 2 == 0 ? alphas[rng.next_below(5)]
                                        : 0.05 + 0.95 * rng.next_double();
        const PartitionedGroup parts = partition(group);
        const PrioritySelection got = select_priority(parts, alpha);
        const PrioritySelection want = select_priority_bruteforce(parts, alpha);
        if (identities(got.selected) != identities(want.selected) ||
            identities(got.remainder) != identities(want.remainder)) {
            std::ostringstream os;
            os << "mismatch on group " << g << " (size " << size << ", alpha "
               << alpha << ")";
            return fail(name, os.str());
        }
        if (got.selected.size() + got.remainder.size() != size) {
            return fail(name, "selected + remainder does not cover the group");
        }
        // Dominance: every selected element beats every remaining one.
        long sel_max = -1;
        long rem_min = static_cast<long>(1) << 40;
        for (const Response& r : got.selected) {
            if (r.correct) sel_max = std::max(sel_max, r.cost);
        }
        for (const Response& r : got.remainder) {
            if (r.correct) rem_min = std::min(rem_min, r.cost);
        }
        if (sel_max >= 0 && rem_min < (static_cast<long>(1) << 40) &&
            sel_max > rem_min) {
            return fail(name, "correct-side cost dominance violated");
        }
    }
    std::ostringstream os;
    os << n_groups << " random groups, sizes 1..32";
    return pass(name, os.str());
}

CheckResult check_advantage_properties(int n_groups, std::uint64_t seed) {
    const std::string name = "group advantages sum to zero with unit std";
    SplitMix64 rng(seed);
    const double std_floor = 1e-6;
    for (int g = 0; g < n_groups; ++g) {
        const auto size = 2 + rng.next_below(31);
        std::vector<double> rewards(size);
        for (double& r : rewards) {
            r = rng.next_double();
        }
        const auto norm =
            grpo_advantages(rewards, {AdvantageKind::GrpoStdNorm}, std_floor);
        const auto centered =
            grpo_advantages(rewards, {AdvantageKind::DrGrpoMeanOnly}, std_floor);
        double sum_n = 0.0;
        double sum_c = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            sum_n += norm[i];
            sum_c += centered[i];
        }
        if (std::abs(sum_n) > 1e-9 || std::abs(sum_c) > 1e-9) {
            return fail(name, "advantage sum exceeds 1e-9");
        }
        double mean = 0.0;
        for (double r : rewards) mean += r;
        mean /= static_cast<double>(size);
        double var = 0.0;
        for (double r : rewards) var += (r - mean) * (r - mean);
        const double std_dev = std::sqrt(var / static_cast<double>(size));
        if (std_dev > std_floor) {
            double out_var = 0.0;
            for (double a : norm) out_var += a * a;
            const double out_std =
                std::sqrt(out_var / static_cast<double>(size));
            if (std::abs(out_std - 1.0) > 1e-6) {
                return fail(name, "normalized std deviates from 1 by > 1e-6");
            }
        }
    }
    std::ostringstream os;
    os << n_groups << " random groups";
    return pass(name, os.str());
}

CheckResult check_schedule_exactness() {
    const std::string name = "compensation schedule hits exact anchors";
    const ScheduleParams sched{0.2, 1200};
    struct Anchor {
        long t;
        double want;
    };
    const Anchor anchors[] = {
        {0, 1.0},
        {300, (1.0 + std::sqrt(0.5)) / 2.0},
        {600, 0.5},
        {800, 0.25},
        {1200, 0.2},
    };
    for (const Anchor& a : anchors) {
        const double got = comp_probability(a.t, sched);
        if (std::abs(got - a.want) > 1e-12) {
            std::ostringstream os;
            os << "p_comp(" << a.t << ") = " << got << ", want " << a.want;
            return fail(name, os.str());
        }
    }
    double prev = 2.0;
    for (long t = 0; t <= sched.t_max; ++t) {
        const double p = comp_probability(t, sched);
        if (p > prev) {
            return fail(name, "schedule is not non-increasing");
        }
        if (p < sched.p_lower || p > 1.0) {
            return fail(name, "schedule leaves [p_lower, 1]");
        }
        prev = p;
    }
    return pass(name, "five anchors within 1e-12, full monotone scan");
}

CheckResult check_gradient_fidelity(int n_policies, std::uint64_t seed) {
    const std::string name = "analytic gradient matches finite differences";
    SplitMix64 rng(seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (int p = 0; p < n_policies; ++p) {
        const int n_actions = 3 + static_cast<int>(rng.next_below(4));
        const int n_states = n_actions + 1;
        TabularPolicy policy(n_states, n_actions);
        for (double& v : policy.data()) {
            v = 2.0 * rng.next_double() - 1.0;
        }
        OptimConfig cfg;
        cfg.advantage_mode.kind = p % 2 == 0 ? AdvantageKind::DrGrpoMeanOnly
                                             : AdvantageKind::GrpoStdNorm;
        const double temperature = p % 3 == 0 ? 1.3 : 1.0;

        std::vector<TrainItem> batch;
        const auto n_items = 4 + rng.next_below(6);
        for (std::size_t i = 0; i < n_items; ++i) {
            TrainItem item;
            Response& r = item.response;
            r.question_id = i;
            r.sample_index = static_cast<int>(i);
            const auto t_len = 3 + rng.next_below(9);
            for (std::size_t t = 0; t < t_len; ++t) {
                const int state = static_cast<int>(rng.next_below(n_states));
                const int action = static_cast<int>(rng.next_below(n_actions));
                const double lpn = policy.logprob(state, action, temperature);
                // Keep the ratio away from the clip corners so the central
                // difference never straddles a kink.
                double delta = 0.0;
                for (int tries = 0; tries < 100; ++tries) {
                    delta = 0.8 * rng.next_double() - 0.4;
                    const double rho = std::exp(delta);
                    if (std::abs(rho - (1.0 - cfg.clip_epsilon)) > 1e-3 &&
                        std::abs(rho - (1.0 + cfg.clip_epsilon)) > 1e-3) {
                        break;
                    }
                }
                r.states.push_back(state);
                r.tokens.push_back(action);
                r.behavior_logprobs.push_back(lpn - delta);
            }
            if (i % 2 == 0) {
                item.advantage = {4.0 * rng.next_double() - 2.0};
            } else {
                item.advantage.resize(t_len);
                for (double& a : item.advantage) {
                    a = 4.0 * rng.next_double() - 2.0;
                }
            }
            batch.push_back(std::move(item));
        }

        const auto grad = batch_gradient(policy, batch, cfg, temperature);
        auto data = policy.data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double keep = data[i];
            data[i] = keep + h;
            const double up = batch_objective(policy, batch, cfg, temperature);
            data[i] = keep - h;
            const double down = batch_objective(policy, batch, cfg, temperature);
            data[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double rel = std::abs(grad[i] - fd) /
                               std::max({1e-6, std::abs(grad[i]), std::abs(fd)});
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream os;
    os << n_policies << " random policies, max rel err " << worst;
    if (worst >= 1e-4) {
        return fail(name, os.str());
    }
    return pass(name, os.str());
}

CheckResult check_clip_semantics(int n_triples, std::uint64_t seed) {
    const std::string name = "clip activity equals the closed-form condition";
    SplitMix64 rng(seed);
    for (int i = 0; i < n_triples; ++i) {
        const double logp_old = -4.0 + 3.5 * rng.next_double();
        const double delta = 3.0 * rng.next_double() - 1.5;
        const double logp_new = std::min(0.0, logp_old + delta);
        const double adv = 4.0 * rng.next_double() - 2.0;
        const double eps = 0.05 + 0.45 * rng.next_double();
        const double lpn[] = {logp_new};
        const double lpo[] = {logp_old};
        const double a[] = {adv};
        const ClipResult res = ppo_clip_objective(lpn, lpo, a, eps);
        const double rho = std::exp(logp_new - logp_old);
        const bool clipped_out = (adv > 0.0 && rho > 1.0 + eps) ||
                                 (adv < 0.0 && rho < 1.0 - eps);
        if (res.active_mask[0] != !clipped_out) {
            std::ostringstream os;
            os << "triple " << i << ": rho " << rho << " adv " << adv << " eps "
               << eps;
            return fail(name, os.str());
        }
    }
    std::ostringstream os;
    os << n_triples << " random (rho, adv, eps) triples";
    return pass(name, os.str());
}

CheckResult check_buffer_fifo(int n_ops, std::uint64_t seed) {
    const std::string name = "replay buffer preserves FIFO order";
    SplitMix64 rng(seed);
    const std::size_t capacity = 64;
    ReplayBuffer buf(capacity);
    std::deque<std::uint64_t> model;
    std::uint64_t stamp = 0;
    for (int op = 0; op < n_ops; ++op) {
        if (rng.next_double() < 0.55) {
            const auto n = rng.next_below(9);
            std::vector<Response> batch(n);
            for (Response& r : batch) {
                r.question_id = stamp++;
            }
            if (model.size() + n > capacity) {
                bool threw = false;
                try {
                    buf.push(batch);
                } catch (const std::length_error&) {
                    threw = true;
                }
                if (!threw) {
                    return fail(name, "overflowing push did not throw");
                }
            } else {
                buf.push(batch);
                for (const Response& r : batch) {
                    model.push_back(r.question_id);
                }
            }
        } else {
            const auto n = rng.next_below(model.size() + 3);
            if (n > model.size()) {
                bool threw = false;
                try {
                    buf.pop_oldest(n);
                } catch (const std::length_error&) {
                    threw = true;
                }
                if (!threw) {
                    return fail(name, "underflowing pop did not throw");
                }
            } else {
                const auto got = buf.pop_oldest(n);
                for (const Response& r : got) {
                    if (model.empty() || r.question_id != model.front()) {
                        return fail(name, "pop returned out-of-order entry");
                    }
                    model.pop_front();
                }
            }
        }
        if (buf.size() != model.size()) {
            return fail(name, "size diverged from the reference model");
        }
        std::size_t i = 0;
        for (const Response& r : buf.entries()) {
            if (r.question_id != model[i++]) {
                return fail(name, "contents diverged from the reference model");
            }
        }
    }
    std::ostringstream os;
    os << n_ops << " random push/pop operations against a deque model";
    return pass(name, os.str());
}

CheckResult check_gate_frequency(int n_trials, std::uint64_t seed) {
    const std::string name = "gate fires at the scheduled frequency";
    const ScheduleParams sched{0.2, 100};
    struct Probe {
        long t;
        double want;
    };
    const Probe probes[] = {{0, 1.0}, {50, 0.5}, {100, 0.2}};
    const std::vector<RolloutGroup> no_groups;
    std::ostringstream os;
    for (const Probe& probe : probes) {
        int fired = 0;
        for (int trial = 0; trial < n_trials; ++trial) {
            ReplayBuffer buf(8);
            std::vector<Response> fill(4);
            buf.push(fill);
            SplitMix64 rng = derive_stream(
                seed, StreamKind::Gate,
                {static_cast<std::uint64_t>(probe.t),
                 static_cast<std::uint64_t>(trial)});
            const auto res = recompose_step(no_groups, 0.8, buf, probe.t,
                                            sched, 4, false, rng);
            if (res.comp.has_value()) {
                ++fired;
            }
        }
        const double freq = static_cast<double>(fired) / n_trials;
        os << "t=" << probe.t << " freq " << freq << " ";
        if (std::abs(freq - probe.want) > 0.02) {
            return fail(name, os.str());
        }
    }
    return pass(name, os.str());
}

std::vector<CheckResult> run_property_suites(std::uint64_t seed) {
    return {
        check_selection_oracle(1000, seed),
        check_advantage_properties(1000, seed + 1),
        check_schedule_exactness(),
        check_gradient_fidelity(20, seed + 2),
        check_clip_semantics(10000, seed + 3),
        check_buffer_fifo(10000, seed + 4),
        check_gate_frequency(10000, seed + 5),
    };
}

} // namespace rorecomp

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rorecomp/optim.hpp"
#include "rorecomp/rng.hpp"
#include "rorecomp/selfcheck.hpp"

using namespace rorecomp;

namespace {

constexpr AdvantageMode kStdNorm{AdvantageKind::GrpoStdNorm, 1.0, 1.0};
constexpr AdvantageMode kMeanOnly{AdvantageKind::DrGrpoMeanOnly, 1.0, 1.0};

TrainItem make_item(std::vector<int> states, std::vector<int> tokens,
                    std::vector<double> logprobs, std::vector<double> advantage) {
    TrainItem item;
    item.response.states = std::move(states);
    item.response.tokens = std::move(tokens);
    item.response.behavior_logprobs = std::move(logprobs);
    item.advantage = std::move(advantage);
    return item;
}

} // namespace

TEST_SUITE("optim") {

TEST_CASE("grpo_advantages hand examples") {
    const std::vector<double> flat{1, 1, 1, 1};
    for (double a : grpo_advantages(flat, kStdNorm, 1e-6)) {
        CHECK(a == 0.0);
    }

    const std::vector<double> mixed{1, 0, 0, 1};
    const auto norm = grpo_advantages(mixed, kStdNorm, 1e-6);
    CHECK(norm[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(norm[2] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(norm[3] == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> three{1, 0, 1};
    const auto centered = grpo_advantages(three, kMeanOnly, 1e-6);
    CHECK(centered[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(centered[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(centered[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("grpo_advantages input validation") {
    const std::vector<double> none;
    CHECK_THROWS_AS(grpo_advantages(none, kStdNorm, 1e-6), std::invalid_argument);
    const std::vector<double> some{1.0};
    CHECK_THROWS_AS(
        grpo_advantages(some, AdvantageMode{AdvantageKind::PpoGae, 1, 1}, 1e-6),
        std::invalid_argument);
}

TEST_CASE("mean-only advantages scale linearly with the rewards") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = 2 + rng.next_below(14);
        std::vector<double> rewards(n);
        std::vector<double> doubled(n);
        for (std::size_t i = 0; i < n; ++i) {
            rewards[i] = rng.next_double();
            doubled[i] = 2.0 * rewards[i];
        }
        const auto base = grpo_advantages(rewards, kMeanOnly, 1e-6);
        const auto scaled = grpo_advantages(doubled, kMeanOnly, 1e-6);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(scaled[i] == 2.0 * base[i]); // exact for a power-of-two factor
        }
    }
}

TEST_CASE("group advantage population properties") {
    const CheckResult r = check_advantage_properties(1000, 8);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("gae_advantages hand examples") {
    const std::vector<double> terminal{0, 0, 0, 2};
    const std::vector<double> zeros{0, 0, 0, 0};
    for (double a : gae_advantages(terminal, zeros, 0.0, 1.0, 1.0)) {
        CHECK(a == doctest::Approx(2.0).epsilon(1e-12));
    }

    const std::vector<double> one_r{1};
    const std::vector<double> one_v{0.5};
    const auto single = gae_advantages(one_r, one_v, 0.0, 1.0, 1.0);
    CHECK(single[0] == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> two_r{0, 1};
    const std::vector<double> two_v{0, 0};
    const auto pair = gae_advantages(two_r, two_v, 0.0, 0.9, 1.0);
    CHECK(pair[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(pair[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gae_advantages equals return-to-go with a zero critic") {
    SplitMix64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const auto t_len = 1 + rng.next_below(12);
        std::vector<double> rewards(t_len);
        for (double& r : rewards) {
            r = 2.0 * rng.next_double() - 1.0;
        }
        const std::vector<double> values(t_len, 0.0);
        const auto adv = gae_advantages(rewards, values, 0.0, 1.0, 1.0);
        double rtg = 0.0;
        for (std::size_t i = t_len; i-- > 0;) {
            rtg += rewards[i];
            CHECK(adv[i] == doctest::Approx(rtg).epsilon(1e-9));
        }
    }
}

TEST_CASE("gae_advantages validates lengths") {
    const std::vector<double> r{1, 2};
    const std::vector<double> v{0};
    CHECK_THROWS_AS(gae_advantages(r, v, 0.0, 1.0, 1.0), std::invalid_argument);
    const std::vector<double> none;
    CHECK_THROWS_AS(gae_advantages(none, none, 0.0, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("ppo_clip_objective worked cases") {
    {
        // rho = 1 everywhere: objective is the advantage mean, all active.
        const std::vector<double> lp{-0.7, -1.3};
        const std::vector<double> adv{0.4, -0.6};
        const ClipResult res = ppo_clip_objective(lp, lp, adv, 0.2);
        CHECK(res.objective == doctest::Approx(-0.1).epsilon(1e-12));
        CHECK(res.active_mask[0]);
        CHECK(res.active_mask[1]);
    }
    {
        // rho = 1.5 with positive advantage clips to 1.2.
        const std::vector<double> lpo{-1.0};
        const std::vector<double> lpn{-1.0 + std::log(1.5)};
        const std::vector<double> adv{1.0};
        const ClipResult res = ppo_clip_objective(lpn, lpo, adv, 0.2);
        CHECK(res.objective == doctest::Approx(1.2).epsilon(1e-12));
        CHECK_FALSE(res.active_mask[0]);
    }
    {
        // rho = 0.5 with negative advantage clips to -0.8.
        const std::vector<double> lpo{-0.5};
        const std::vector<double> lpn{-0.5 + std::log(0.5)};
        const std::vector<double> adv{-1.0};
        const ClipResult res = ppo_clip_objective(lpn, lpo, adv, 0.2);
        CHECK(res.objective == doctest::Approx(-0.8).epsilon(1e-12));
        CHECK_FALSE(res.active_mask[0]);
    }
    const std::vector<double> a{-1.0};
    const std::vector<double> b{-1.0, -2.0};
    CHECK_THROWS_AS(ppo_clip_objective(a, b, a, 0.2), std::invalid_argument);
}

TEST_CASE("ppo_clip_objective never exceeds the unclipped mean") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t_len = 1 + rng.next_below(8);
        std::vector<double> lpn(t_len), lpo(t_len), adv(t_len);
        for (std::size_t t = 0; t < t_len; ++t) {
            lpo[t] = -3.0 * rng.next_double() - 0.1;
            lpn[t] = std::min(0.0, lpo[t] + 2.0 * rng.next_double() - 1.0);
            adv[t] = 4.0 * rng.next_double() - 2.0;
        }
        const double eps = 0.05 + 0.4 * rng.next_double();
        const ClipResult res = ppo_clip_objective(lpn, lpo, adv, eps);
        double unclipped = 0.0;
        for (std::size_t t = 0; t < t_len; ++t) {
            unclipped += std::exp(lpn[t] - lpo[t]) * adv[t];
        }
        unclipped /= static_cast<double>(t_len);
        CHECK(res.objective <= unclipped + 1e-12);
    }
}

TEST_CASE("clip activity matches the closed-form condition") {
    const CheckResult r = check_clip_semantics(10000, 10);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("kl_penalty values and positivity") {
    const std::vector<double> same{-1.0, -2.0};
    for (double k : kl_penalty(same, same)) {
        CHECK(k == 0.0);
    }

    const std::vector<double> lpn{-1.5};
    const std::vector<double> lpr{-0.5}; // d = +1
    CHECK(kl_penalty(lpn, lpr)[0] ==
          doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-12));

    const std::vector<double> lpn2{-0.5};
    const std::vector<double> lpr2{-1.5}; // d = -1
    CHECK(kl_penalty(lpn2, lpr2)[0] ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    SplitMix64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<double> a{-4.0 * rng.next_double()};
        const std::vector<double> b{-4.0 * rng.next_double()};
        CHECK(kl_penalty(a, b)[0] >= 0.0);
    }
    const std::vector<double> mism{-1.0};
    CHECK_THROWS_AS(kl_penalty(same, mism), std::invalid_argument);
}

TEST_CASE("logprob_grad on a uniform row") {
    const TabularPolicy policy(2, 4, 0.0);
    const RowGradient g = logprob_grad(policy, 0, 2);
    REQUIRE(g.d_logits.size() == 4);
    for (int a = 0; a < 4; ++a) {
        CHECK(g.d_logits[static_cast<std::size_t>(a)] ==
              (a == 2 ? 0.75 : -0.25));
    }
    CHECK_THROWS_AS(logprob_grad(policy, 0, 4), std::out_of_range);
}

TEST_CASE("logprob_grad rows sum to zero") {
    SplitMix64 rng(31);
    TabularPolicy policy(3, 5, 0.0);
    for (double& v : policy.data()) {
        v = 4.0 * rng.next_double() - 2.0;
    }
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 5; ++a) {
            const RowGradient g = logprob_grad(policy, s, a);
            double sum = 0.0;
            for (double d : g.d_logits) {
                sum += d;
            }
            CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_update with zero advantages leaves parameters unchanged") {
    TabularPolicy policy(3, 2, 0.0);
    policy.logit(0, 1) = 0.3;
    OptimConfig cfg;
    std::vector<TrainItem> batch{make_item(
        {0, 1}, {1, 0},
        {policy.logprob(0, 1, 1.0), policy.logprob(1, 0, 1.0)}, {0.0})};
    const TabularPolicy next = apply_update(policy, batch, cfg, 1.0);
    CHECK(next.digest() == policy.digest());
}

TEST_CASE("apply_update at rho one follows the score-function direction") {
    TabularPolicy policy(3, 2, 0.0);
    SplitMix64 rng(37);
    for (double& v : policy.data()) {
        v = rng.next_double() - 0.5;
    }
    OptimConfig cfg; // mean-only mode: one item weights 1
    cfg.learning_rate = 0.1;

    const std::vector<int> states{0, 1, 2};
    const std::vector<int> tokens{0, 1, 0};
    std::vector<double> lps;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        lps.push_back(policy.logprob(states[t], tokens[t], 1.0));
    }
    const double advantage = 0.7;
    std::vector<TrainItem> batch{make_item(states, tokens, lps, {advantage})};

    std::vector<double> expected(policy.data().begin(), policy.data().end());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const RowGradient g = logprob_grad(policy, states[t], tokens[t]);
        for (int a = 0; a < 2; ++a) {
            expected[static_cast<std::size_t>(g.state) * 2 +
                     static_cast<std::size_t>(a)] +=
                cfg.learning_rate * advantage *
                g.d_logits[static_cast<std::size_t>(a)];
        }
    }

    const TabularPolicy next = apply_update(policy, batch, cfg, 1.0);
    const auto got = next.data();
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("apply_update validates its batch") {
    const TabularPolicy policy(3, 2, 0.0);
    const OptimConfig cfg;
    const std::vector<TrainItem> empty;
    CHECK_THROWS_AS(apply_update(policy, empty, cfg, 1.0),
                    std::invalid_argument);

    std::vector<TrainItem> bad{
        make_item({0, 1, 2}, {0, 1, 0}, {-1.0, -1.0, -1.0}, {0.1, 0.2})};
    CHECK_THROWS_AS(apply_update(policy, bad, cfg, 1.0), std::invalid_argument);
}

TEST_CASE("batch gradient agrees with finite differences") {
    const CheckResult r = check_gradient_fidelity(5, 9);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("critic moves toward empirical returns in gae mode") {
    TabularPolicy policy(3, 2, 0.0);
    OptimConfig cfg;
    cfg.advantage_mode.kind = AdvantageKind::PpoGae;
    ValueTable critic(3, 0.5);

    TrainItem item = make_item({0, 1}, {1, 0}, {std::log(0.5), std::log(0.5)},
                               {0.3, 0.3});
    item.response.token_rewards = {0.0, 1.0};
    std::vector<TrainItem> batch{item};
    apply_update(policy, batch, cfg, 1.0, &critic);
    // Returns are [1, 1]; both visited states move halfway there.
    CHECK(critic.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(critic.values[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(critic.values[2] == 0.0);
}

} // TEST_SUITE

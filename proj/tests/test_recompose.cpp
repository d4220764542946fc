// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "rorecomp/recompose.hpp"
#include "rorecomp/selfcheck.hpp"

using namespace rorecomp;

namespace {

Response resp(long cost, bool correct, int sample_index) {
    Response r;
    r.cost = cost;
    r.correct = correct;
    r.sample_index = sample_index;
    return r;
}

RolloutGroup group_of(const std::vector<std::pair<long, bool>>& spec) {
    RolloutGroup g;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        g.responses.push_back(
            resp(spec[i].first, spec[i].second, static_cast<int>(i)));
    }
    return g;
}

std::vector<long> costs_of(const std::vector<Response>& v) {
    std::vector<long> out;
    for (const Response& r : v) {
        out.push_back(r.cost);
    }
    return out;
}

} // namespace

TEST_SUITE("recompose") {

TEST_CASE("partition splits by the correct flag, order preserved") {
    const auto g = group_of({{10, true}, {20, false}, {30, true}});
    const PartitionedGroup p = partition(g);
    REQUIRE(p.correct.size() == 2);
    REQUIRE(p.incorrect.size() == 1);
    CHECK(p.correct[0].sample_index == 0);
    CHECK(p.correct[1].sample_index == 2);
    CHECK(p.incorrect[0].sample_index == 1);

    const auto all = partition(group_of({{1, true}, {2, true}}));
    CHECK(all.incorrect.empty());

    const auto none = partition(RolloutGroup{});
    CHECK(none.correct.empty());
    CHECK(none.incorrect.empty());
}

TEST_CASE("select_priority keeps cheap correct and expensive incorrect") {
    PartitionedGroup parts;
    for (long c : {10, 20, 30, 40, 50}) {
        parts.correct.push_back(resp(c, true, static_cast<int>(c)));
    }
    for (long c : {15, 25, 35}) {
        parts.incorrect.push_back(resp(c, false, static_cast<int>(c)));
    }
    const PrioritySelection sel = select_priority(parts, 0.8);
    CHECK(costs_of(sel.selected) == std::vector<long>{10, 20, 30, 40, 35, 25});
    CHECK(costs_of(sel.remainder) == std::vector<long>{50, 15});
}

TEST_CASE("select_priority at alpha 1 selects everything") {
    const auto g = group_of({{3, true}, {9, false}, {4, true}, {1, false}});
    const PrioritySelection sel = select_priority(partition(g), 1.0);
    CHECK(sel.selected.size() == 4);
    CHECK(sel.remainder.empty());
}

TEST_CASE("select_priority rounds half up with a floor of one") {
    PartitionedGroup parts;
    parts.correct.push_back(resp(5, true, 0));
    parts.correct.push_back(resp(9, true, 1));
    const PrioritySelection sel = select_priority(parts, 0.5);
    CHECK(costs_of(sel.selected) == std::vector<long>{5});
    CHECK(costs_of(sel.remainder) == std::vector<long>{9});

    // One response per side is always kept, however small alpha is.
    PartitionedGroup tiny;
    tiny.correct.push_back(resp(7, true, 0));
    tiny.incorrect.push_back(resp(3, false, 1));
    const PrioritySelection keep = select_priority(tiny, 0.05);
    CHECK(keep.selected.size() == 2);
}

TEST_CASE("select_priority breaks ties by sampling order") {
    PartitionedGroup parts;
    for (int i = 0; i < 4; ++i) {
        parts.correct.push_back(resp(5, true, i));
    }
    const PrioritySelection sel = select_priority(parts, 0.5);
    REQUIRE(sel.selected.size() == 2);
    CHECK(sel.selected[0].sample_index == 0);
    CHECK(sel.selected[1].sample_index == 1);
    CHECK(sel.remainder[0].sample_index == 2);
    CHECK(sel.remainder[1].sample_index == 3);
}

TEST_CASE("select_priority validates alpha") {
    const PartitionedGroup parts;
    CHECK_THROWS_AS(select_priority(parts, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(select_priority(parts, 1.2), std::invalid_argument);
}

TEST_CASE("select_priority matches the brute-force oracle") {
    const CheckResult r = check_selection_oracle(1000, 7);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("comp_probability anchors and clamp") {
    const ScheduleParams sched{0.2, 1200};
    CHECK(comp_probability(0, sched) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(comp_probability(600, sched) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(comp_probability(800, sched) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(comp_probability(1200, sched) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(comp_probability(-1, sched), std::out_of_range);
    CHECK_THROWS_AS(comp_probability(1201, sched), std::out_of_range);
    CHECK_THROWS_AS(comp_probability(0, ScheduleParams{0.0, 10}),
                    std::invalid_argument);
}

TEST_CASE("comp_probability is monotone non-increasing") {
    const CheckResult r = check_schedule_exactness();
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("replay buffer basic FIFO") {
    ReplayBuffer buf(4);
    CHECK(buf.empty());
    const std::vector<Response> ab{resp(1, true, 0), resp(2, true, 1)};
    buf.push(ab);
    const std::vector<Response> c{resp(3, true, 2)};
    buf.push(c);
    CHECK(buf.size() == 3);

    auto popped = buf.pop_oldest(2);
    REQUIRE(popped.size() == 2);
    CHECK(popped[0].sample_index == 0);
    CHECK(popped[1].sample_index == 1);
    CHECK(buf.size() == 1);

    CHECK(buf.pop_oldest(0).empty());
    CHECK(buf.size() == 1);
    buf.pop_oldest(1);
    CHECK(buf.empty());
}

TEST_CASE("replay buffer overflow and underflow") {
    ReplayBuffer buf(2);
    const std::vector<Response> three{resp(1, true, 0), resp(2, true, 1),
                                      resp(3, true, 2)};
    CHECK_THROWS_AS(buf.push(three), std::length_error);
    CHECK(buf.empty()); // failed push leaves the buffer untouched
    CHECK_THROWS_AS(buf.pop_oldest(1), std::length_error);
    CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

TEST_CASE("replay buffer randomized FIFO property") {
    const CheckResult r = check_buffer_fifo(10000, 11);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("recompose_step at p_comp one always yields a compensation batch") {
    const ScheduleParams sched{0.2, 100};
    ReplayBuffer buf(8);
    const std::vector<Response> fill{resp(1, true, 0), resp(2, true, 1),
                                     resp(3, true, 2), resp(4, true, 3)};
    buf.push(fill);
    SplitMix64 rng(99);
    const std::vector<RolloutGroup> no_groups;
    const RecomposeResult res =
        recompose_step(no_groups, 0.8, buf, 0, sched, 4, false, rng);
    REQUIRE(res.comp.has_value());
    CHECK(res.comp->size() == 4);
    CHECK((*res.comp)[0].sample_index == 0); // oldest first
    CHECK(buf.empty());
}

TEST_CASE("recompose_step below comp_batch_size leaves the gate closed") {
    const ScheduleParams sched{0.2, 100};
    ReplayBuffer buf(64);
    SplitMix64 rng(5);
    std::vector<RolloutGroup> groups{
        group_of({{4, true}, {6, true}, {9, false}, {2, false}})};
    const RecomposeResult res =
        recompose_step(groups, 0.5, buf, 10, sched, 16, false, rng);
    CHECK_FALSE(res.comp.has_value());
    // alpha 0.5 over 2-element sides keeps one per side.
    CHECK(res.priority.size() == 2);
    CHECK(res.n_buffered == 2);
    CHECK(buf.size() == 2);
    CHECK(res.n_discarded_on_skip == 0);
}

TEST_CASE("recompose_step across two groups covers the rollout set") {
    // Two groups of 12 with 10 correct / 2 incorrect each at alpha 0.8:
    // per group 8 + 2 selected, 2 buffered.
    std::vector<std::pair<long, bool>> spec;
    for (long i = 0; i < 10; ++i) {
        spec.emplace_back(10 + i, true);
    }
    spec.emplace_back(40, false);
    spec.emplace_back(50, false);
    std::vector<RolloutGroup> groups{group_of(spec), group_of(spec)};
    groups[0].question_id = 0;
    groups[1].question_id = 1;

    const ScheduleParams sched{0.2, 100};
    ReplayBuffer buf(64);
    SplitMix64 rng(5);
    const RecomposeResult res =
        recompose_step(groups, 0.8, buf, 50, sched, 64, false, rng);
    CHECK(res.priority.size() == 20);
    CHECK(res.n_buffered == 4);
    CHECK(res.priority.size() + res.n_buffered == 24);
    CHECK(buf.size() == 4);
}

TEST_CASE("recompose_step gate skip discards unless retain_on_skip") {
    const ScheduleParams sched{0.2, 100};
    const std::vector<RolloutGroup> no_groups;

    // Find seeds whose first draw lands on each side of p = 0.2 (t = t_max).
    std::uint64_t skip_seed = 0;
    std::uint64_t fire_seed = 0;
    bool have_skip = false;
    bool have_fire = false;
    for (std::uint64_t s = 0; s < 64 && !(have_skip && have_fire); ++s) {
        SplitMix64 probe(s);
        const double u = probe.next_double();
        if (u >= 0.2 && !have_skip) {
            skip_seed = s;
            have_skip = true;
        }
        if (u < 0.2 && !have_fire) {
            fire_seed = s;
            have_fire = true;
        }
    }
    REQUIRE(have_skip);
    REQUIRE(have_fire);

    auto fresh_buffer = [&] {
        ReplayBuffer buf(8);
        const std::vector<Response> fill{resp(1, true, 0), resp(2, true, 1),
                                         resp(3, true, 2), resp(4, true, 3)};
        buf.push(fill);
        return buf;
    };

    {
        ReplayBuffer buf = fresh_buffer();
        SplitMix64 rng(skip_seed);
        const RecomposeResult res =
            recompose_step(no_groups, 0.8, buf, 100, sched, 4, false, rng);
        CHECK_FALSE(res.comp.has_value());
        CHECK(res.n_discarded_on_skip == 4);
        CHECK(buf.empty());
    }
    {
        ReplayBuffer buf = fresh_buffer();
        SplitMix64 rng(skip_seed);
        const RecomposeResult res =
            recompose_step(no_groups, 0.8, buf, 100, sched, 4, true, rng);
        CHECK_FALSE(res.comp.has_value());
        CHECK(res.n_discarded_on_skip == 0);
        CHECK(buf.size() == 4); // retained for a later gate
    }
    {
        ReplayBuffer buf = fresh_buffer();
        SplitMix64 rng(fire_seed);
        const RecomposeResult res =
            recompose_step(no_groups, 0.8, buf, 100, sched, 4, false, rng);
        CHECK(res.comp.has_value());
    }
}

TEST_CASE("recompose_step drains the oldest entries to fit a push") {
    const ScheduleParams sched{0.2, 100};
    ReplayBuffer buf(4);
    const std::vector<Response> fill{resp(1, true, 10), resp(2, true, 11),
                                     resp(3, true, 12)};
    buf.push(fill);

    // One group, 4 correct at alpha 0.5 -> 2 selected, 2 remainder.
    std::vector<RolloutGroup> groups{
        group_of({{5, true}, {6, true}, {7, true}, {8, true}})};
    SplitMix64 rng(3);
    const RecomposeResult res =
        recompose_step(groups, 0.5, buf, 50, sched, 100, false, rng);
    CHECK(res.n_buffered == 2);
    CHECK(res.n_dropped_capacity == 1); // 3 + 2 > 4, oldest entry dropped
    CHECK(buf.size() == 4);
    CHECK(buf.entries().front().sample_index == 11);
}

TEST_CASE("gate frequency tracks the schedule") {
    const CheckResult r = check_gate_frequency(10000, 13);
    INFO(r.detail);
    CHECK(r.passed);
}

} // TEST_SUITE

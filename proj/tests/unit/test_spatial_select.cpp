// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "tokcomp/oracle.hpp"
#include "tokcomp/spatial_select.hpp"

using namespace tokcomp;
using Idx = std::vector<std::size_t>;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected tokcomp::Error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("per-frame keep count") {
    CHECK(keep_count_per_frame(1.0, 8, 8, 196) == 196);
    CHECK(keep_count_per_frame(0.2, 32, 16, 196) == 78);
    CHECK(keep_count_per_frame(0.01, 32, 32, 16) == 1);  // clamped up
    CHECK(keep_count_per_frame(1.0, 32, 4, 16) == 16);   // clamped down
    CHECK(code_of([] { keep_count_per_frame(0.0, 32, 16, 196); }) == ErrorCode::InvalidRatio);
    CHECK(code_of([] { keep_count_per_frame(1.2, 32, 16, 196); }) == ErrorCode::InvalidRatio);
    CHECK(code_of([] { keep_count_per_frame(0.2, 32, 33, 196); }) == ErrorCode::ConfigConflict);
    CHECK(code_of([] { keep_count_per_frame(0.2, 32, 0, 196); }) == ErrorCode::ConfigConflict);
}

TEST_CASE("budget plan hits round(r*B*L) exactly") {
    const auto plan = plan_budget(0.2, 32, 16, 196);
    CHECK(plan.per_frame == 78);
    CHECK(plan.requested == 1254);
    CHECK(plan.total == 1254);
    CHECK(std::accumulate(plan.quotas.begin(), plan.quotas.end(), std::size_t{0}) == 1254);
    CHECK_FALSE(plan.floor_binds);
    CHECK_FALSE(plan.cap_binds);
    for (std::size_t q : plan.quotas) {
        CHECK((q == 78 || q == 79));
    }
}

TEST_CASE("budget plan floors and caps") {
    const auto floor = plan_budget(0.01, 32, 30, 10);  // requested 3 < 30 frames
    CHECK(floor.floor_binds);
    CHECK(floor.total == 30);
    CHECK(floor.quotas == Idx(30, 1));

    const auto cap = plan_budget(1.0, 32, 4, 10);  // requested 320 > 40 tokens
    CHECK(cap.cap_binds);
    CHECK(cap.total == 40);
}

TEST_CASE("budget plan over a sweep") {
    synth::Rng rng(21);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t B = 1 + rng.below(64);
        const std::size_t N = 1 + rng.below(B);
        const std::size_t L = 1 + rng.below(300);
        const double r = rng.uniform(0.001, 1.0);
        const auto plan = plan_budget(r, B, N, L);
        const std::size_t want = std::clamp<std::size_t>(plan.requested, N, N * L);
        REQUIRE(plan.total == want);
        REQUIRE(std::accumulate(plan.quotas.begin(), plan.quotas.end(), std::size_t{0}) == want);
        for (std::size_t q : plan.quotas) {
            REQUIRE(q >= 1);
            REQUIRE(q <= L);
        }
    }
}

TEST_CASE("decouple") {
    auto d = decouple(SegmentList({{0, 5}}, 5));
    CHECK(d.dynamic_idx == Idx{0, 4});
    CHECK(d.static_idx == Idx{1, 2, 3});

    d = decouple(SegmentList({{0, 2}, {2, 3}}, 3));
    CHECK(d.dynamic_idx == Idx{0, 1, 2});
    CHECK(d.static_idx.empty());

    d = decouple(SegmentList({{0, 4}, {4, 8}}, 8));
    CHECK(d.dynamic_idx == Idx{0, 3, 4, 7});
    CHECK(d.static_idx == Idx{1, 2, 5, 6});
}

TEST_CASE("global top-k") {
    CHECK(global_topk_select(std::vector<float>{0.1f, 0.9f, 0.5f, 0.9f}, 2) == Idx{1, 3});
    CHECK(global_topk_select(std::vector<float>{3, 1, 2}, 3) == Idx{0, 1, 2});
    CHECK(global_topk_select(std::vector<float>(5, 0.5f), 3) == Idx{0, 1, 2});
    CHECK(global_topk_select(std::vector<float>{0.9f, 0.1f, 0.9f}, 1) == Idx{0});
    CHECK(global_topk_select(std::vector<float>{1, 2}, 0).empty());
    CHECK(code_of([] { global_topk_select(std::vector<float>{1, 2}, 3); }) == ErrorCode::BudgetExceedsFrame);
}

TEST_CASE("local window") {
    // L=10, K=3: w=3 gives 4 windows, the weakest winner is dropped.
    const std::vector<float> a{0.1f, 0.5f, 0.2f, 0.9f, 0.1f, 0.1f, 0.3f, 0.2f, 0.1f, 0.05f};
    CHECK(local_window_select(a, 3) == Idx{1, 3, 6});

    std::vector<float> ramp(7);
    std::iota(ramp.begin(), ramp.end(), 0.f);
    CHECK(local_window_select(ramp, 7) == Idx{0, 1, 2, 3, 4, 5, 6});

    std::vector<float> spike(8, 0.1f);
    spike[2] = 0.2f;
    spike[7] = 100.f;
    CHECK(local_window_select(spike, 2) == Idx{2, 7});
    CHECK(global_topk_select(spike, 2) == Idx{2, 7});

    std::vector<float> flat(8, 0.5f);
    CHECK(local_window_select(flat, 2) == Idx{0, 4});
    CHECK(local_window_select(flat, 0).empty());
    CHECK(code_of([] { local_window_select(std::vector<float>{1}, 2); }) == ErrorCode::BudgetExceedsFrame);
}

TEST_CASE("local window spreads picks where top-k clusters") {
    // A sink band at the front.
    std::vector<float> row(16, 0.1f);
    for (std::size_t p = 0; p < 4; ++p) row[p] = 10.f + static_cast<float>(p);
    row[9] = 0.2f;
    CHECK(global_topk_select(row, 4) == Idx{0, 1, 2, 3});
    CHECK(local_window_select(row, 4) == Idx{3, 4, 9, 12});
}

TEST_CASE("selectors agree with the oracles") {
    synth::Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t L = 1 + rng.below(64);
        const std::size_t k = rng.below(L + 1);
        auto row = testing::random_row(rng, L);
        if (trial % 3 == 0) {
            for (auto& v : row) v = static_cast<float>(rng.below(4));  // many ties
        }
        CAPTURE(L);
        CAPTURE(k);
        REQUIRE(global_topk_select(row, k) == oracle::oracle_topk(row, k));
        REQUIRE(local_window_select(row, k) == oracle::oracle_local_window(row, k));
    }
}

TEST_CASE("attention from matrix") {
    CHECK(attention_from_matrix(std::vector<float>(9, 0.25f), 3) == std::vector<float>(3, 0.25f));
    CHECK(attention_from_matrix(std::vector<float>{1, 0, 0, 0, 1, 0, 0, 0, 1}, 3) ==
          std::vector<float>(3, static_cast<float>(1.0 / 3.0)));
    CHECK(attention_from_matrix(std::vector<float>{0, 1, 0, 0, 1, 0, 0, 1, 0}, 3) == std::vector<float>{0, 1, 0});
    CHECK(code_of([] { attention_from_matrix(std::vector<float>(8, 1.f), 3); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([] { attention_from_matrix(std::vector<float>{1, -1, 0, 0}, 2); }) == ErrorCode::NegativeValue);
}

TEST_CASE("gather_reorder emits temporal order") {
    std::vector<float> data(24);
    std::iota(data.begin(), data.end(), 0.f);
    FeatureTensor g(4, 3, 2, data);

    auto one = gather_reorder({{0, {2, 0}}}, {}, FeatureTensor(1, 3, 2, std::vector<float>(data.begin(), data.begin() + 6)));
    CHECK(one.frames[0].tokens == Idx{0, 2});
    CHECK(one.rows == std::vector<float>{0, 1, 4, 5});

    auto r = gather_reorder({{3, {1}}, {0, {0}}}, {{2, {2}}, {1, {0}}}, g);
    REQUIRE(r.frames.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.frames[i].frame == i);
    CHECK(r.total_kept() == 4);
    CHECK(r.rows == std::vector<float>{0, 1, 6, 7, 16, 17, 20, 21});

    CHECK(code_of([&] { gather_reorder({{0, {0}}}, {{1, {0}}}, g); }) == ErrorCode::CoverageGap);
    CHECK(code_of([&] { gather_reorder({{0, {0}}, {0, {1}}}, {{1, {0}}, {2, {0}}, {3, {0}}}, g); }) ==
          ErrorCode::CoverageGap);
    CHECK(code_of([&] { gather_reorder({{0, {0, 0}}}, {{1, {0}}, {2, {0}}, {3, {0}}}, g); }) ==
          ErrorCode::CoverageGap);
}

TEST_CASE("select_tokens is schedule independent") {
    synth::Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        const std::size_t l = 1 + rng.below(30);
        const auto feats = testing::random_tensor(rng, n, l, 4);
        AttentionScores att(n, l, testing::random_row(rng, n * l));
        std::vector<std::size_t> starts;
        for (std::size_t f = 1; f < n; ++f) {
            if (rng.below(3) == 0) starts.push_back(f);
        }
        const auto segs = SegmentList::from_boundaries(starts, n);
        const auto plan = plan_budget(rng.uniform(0.05, 1.0), n, n, l);
        const auto seq = select_tokens(feats, att, segs, plan.quotas, Schedule::Sequential);
        const auto con = select_tokens(feats, att, segs, plan.quotas, Schedule::Concurrent);
        REQUIRE(seq == con);
        CHECK(seq.total_kept() == plan.total);
        CHECK(seq.rows.size() == plan.total * 4);
    }
}

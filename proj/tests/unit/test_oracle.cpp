// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <vector>

#include "tokcomp/oracle.hpp"

using namespace tokcomp;
using namespace tokcomp::oracle;
using Idx = std::vector<std::size_t>;

TEST_CASE("oracle top-k") {
    CHECK(oracle_topk(std::vector<float>{3, 1, 2}, 2) == Idx{0, 2});
    CHECK(oracle_topk(std::vector<float>{3, 1, 2}, 0).empty());
    CHECK(oracle_topk(std::vector<float>(4, 1.f), 2) == Idx{0, 1});
}

TEST_CASE("oracle local window") {
    CHECK(oracle_local_window(std::vector<float>{1, 3, 2, 5, 4}, 2) == Idx{3, 4});
    CHECK(oracle_local_window(std::vector<float>(6, 1.f), 3) == Idx{0, 2, 4});
}

TEST_CASE("oracle segmentation") {
    CHECK(oracle_segment(std::vector<double>{}, 0.9, 0.8).empty());
    CHECK(oracle_segment(std::vector<double>(10, 1.0), 0.9, 1.0).empty());
    CHECK(oracle_segment(std::vector<double>{1.0, 0.2, 1.0}, 0.9, 0.8) == Idx{2});
    // alpha = 1 means no smoothing: every low similarity cuts.
    CHECK(oracle_segment(std::vector<double>{0.1, 0.9, 0.1}, 1.0, 0.5) == Idx{1, 3});
}

TEST_CASE("position histograms") {
    SelectionResult keep_all;
    for (std::size_t f = 0; f < 3; ++f) keep_all.frames.push_back({f, {0, 1, 2, 3}});
    const auto h = position_histogram(keep_all, 4);
    CHECK(h.bins == Idx(4, 3));
    CHECK(h.total == 12);
    CHECK(tv_distance(h, uniform_histogram(4, 3)) == 0.0);

    SelectionResult single;
    single.frames.push_back({0, {0}});
    CHECK(position_histogram(single, 4).bins == Idx{1, 0, 0, 0});
}

TEST_CASE("total variation") {
    const PositionHistogram a{{2, 0}, 2}, b{{1, 1}, 2};
    CHECK(tv_distance(a, b) == doctest::Approx(0.5));
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(PositionHistogram{{1, 0, 0}, 1}, PositionHistogram{{0, 0, 5}, 5}) == 1.0);
    CHECK_THROWS_AS(tv_distance(PositionHistogram{{0, 0}, 0}, b), Error);
    CHECK_THROWS_AS(tv_distance(PositionHistogram{{1}, 1}, b), Error);
}

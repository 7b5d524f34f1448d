// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "tokcomp/frame_merge.hpp"
#include "tokcomp/oracle.hpp"
#include "tokcomp/synth.hpp"

using namespace tokcomp;
using namespace tokcomp::synth;

TEST_CASE("generator is the standard 64-bit Mersenne Twister") {
    std::mt19937_64 engine;  // default seed 5489
    engine.discard(9999);
    CHECK(engine() == 9981545732273789042ull);

    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        REQUIRE(u == b.uniform());
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) REQUIRE(a.below(7) < 7);
}

TEST_CASE("synthetic videos are reproducible") {
    SynthSpec spec;
    spec.seed = 77;
    spec.block_lengths = {4, 5};
    spec.block_similarity = {0.9, 0.8};
    spec.sink_columns = {0, 3};
    spec.sink_factor = 10;
    const auto v1 = synth_video(spec);
    const auto v2 = synth_video(spec);
    CHECK(v1.features == v2.features);
    CHECK(v1.attention == v2.attention);
    CHECK(v1.features.frames() == 9);
    spec.seed = 78;
    CHECK_FALSE(synth_video(spec).features == v1.features);
}

TEST_CASE("similarity 1 yields identical frames") {
    SynthSpec spec;
    spec.block_lengths = {6};
    spec.block_similarity = {1.0};
    const auto v = synth_video(spec);
    for (std::size_t f = 1; f < 6; ++f) {
        CHECK(std::equal(v.features.frame(f).begin(), v.features.frame(f).end(), v.features.frame(0).begin()));
    }
}

TEST_CASE("two unrelated blocks give exactly one boundary") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthSpec spec;
        spec.seed = seed;
        spec.tokens = 32;
        spec.dim = 32;
        spec.block_lengths = {8, 8};
        spec.block_similarity = {0.95, 0.95};
        const auto v = synth_video(spec);
        const auto trace = stream_segment_traced(v.features, 0.9, 0.5);
        CAPTURE(seed);
        CHECK(trace.segments.boundaries() == std::vector<std::size_t>{8});
        CHECK(oracle::oracle_segment(trace.similarities, 0.9, 0.5) == trace.segments.boundaries());
    }
}

TEST_CASE("sink columns dominate the attention") {
    SynthSpec spec;
    spec.tokens = 10;
    spec.block_lengths = {50};
    spec.sink_columns = {2};
    spec.sink_factor = 25;
    const auto v = synth_video(spec);
    double sink = 0, other = 0;
    for (std::size_t f = 0; f < 50; ++f) {
        sink += v.attention.row(f)[2];
        other += v.attention.row(f)[5];
    }
    CHECK(sink > 10 * other);

    spec.sink_factor = 1;
    const auto flat = synth_video(spec);
    double lo = 1e9, hi = 0;
    for (std::size_t p = 0; p < 10; ++p) {
        double col = 0;
        for (std::size_t f = 0; f < 50; ++f) col += flat.attention.row(f)[p];
        lo = std::min(lo, col);
        hi = std::max(hi, col);
    }
    CHECK(hi / lo < 1.5);
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.block_similarity = {0.9, 0.9};
    CHECK_THROWS_AS(validate(spec), Error);
    spec = {};
    spec.sink_columns = {16};
    CHECK_THROWS_AS(validate(spec), Error);
    spec = {};
    spec.block_similarity = {1.2};
    CHECK_THROWS_AS(validate(spec), Error);
    spec = {};
    spec.sink_factor = 0;
    CHECK_THROWS_AS(validate(spec), Error);
}

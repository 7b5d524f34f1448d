// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "tokcomp/types.hpp"

using namespace tokcomp;

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

TEST_CASE("minimal tensor is valid") {
    FeatureTensor t(1, 1, 1, {0.5f});
    CHECK(t.frames() == 1);
    CHECK(t.token(0, 0)[0] == 0.5f);
    CHECK_FALSE(validate(t).has_value());
}

TEST_CASE("tensor length must equal N*L*D") {
    CHECK(code_of([] { FeatureTensor(2, 1, 1, {0.5f}); }) == ErrorCode::ShapeMismatch);
    auto err = check_features({2, 1, 1}, std::vector<float>{0.5f});
    REQUIRE(err);
    CHECK(err->code() == ErrorCode::ShapeMismatch);
}

TEST_CASE("non-finite features are rejected") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    const float inf = std::numeric_limits<float>::infinity();
    CHECK(code_of([&] { FeatureTensor(1, 1, 2, {0.f, nan}); }) == ErrorCode::NonFiniteValue);
    CHECK(code_of([&] { FeatureTensor(1, 1, 2, {-inf, 0.f}); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("empty axes are a shape error") {
    CHECK(code_of([] { FeatureTensor(0, 1, 1, {}); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([] { FeatureTensor(1, 0, 1, {}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("frame and token views") {
    FeatureTensor t(2, 2, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(t.frame(1)[0] == 6.f);
    CHECK(t.token(1, 1)[2] == 11.f);
    CHECK(t.shape().frame_stride() == 6);
}

TEST_CASE("attention scores must be finite and non-negative") {
    CHECK_NOTHROW(AttentionScores(1, 2, {0.f, 1.f}));
    CHECK(code_of([] { AttentionScores(1, 2, {0.f, -1.f}); }) == ErrorCode::NegativeValue);
    CHECK(code_of([] { AttentionScores(1, 2, {0.f, std::nanf("")}); }) == ErrorCode::NonFiniteValue);
    CHECK(code_of([] { AttentionScores(2, 2, {0.f, 1.f}); }) == ErrorCode::ShapeMismatch);

    FeatureTensor f(2, 2, 1, {1, 2, 3, 4});
    CHECK_NOTHROW(check_annotates(AttentionScores(2, 2, {1, 1, 1, 1}), f));
    CHECK(code_of([&] { check_annotates(AttentionScores(1, 2, {1, 1}), f); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("segment lists tile the frame range") {
    SegmentList ok({{0, 2}, {2, 5}}, 5);
    CHECK(ok.size() == 2);
    CHECK(ok.boundaries() == std::vector<std::size_t>{2});

    CHECK(code_of([] { SegmentList({{0, 2}, {3, 5}}, 5); }) == ErrorCode::CoverageGap);
    CHECK(code_of([] { SegmentList({{0, 2}, {1, 5}}, 5); }) == ErrorCode::CoverageGap);
    CHECK(code_of([] { SegmentList({{0, 2}, {2, 4}}, 5); }) == ErrorCode::CoverageGap);
    CHECK(code_of([] { SegmentList({{0, 0}, {0, 5}}, 5); }) == ErrorCode::CoverageGap);

    const std::vector<std::size_t> starts{2, 4};
    const auto s = SegmentList::from_boundaries(starts, 6);
    REQUIRE(s.size() == 3);
    CHECK(s.segments()[1] == Segment{2, 4});
    CHECK(s.boundaries() == starts);
}

TEST_CASE("config validation") {
    CompressionConfig c;
    CHECK_NOTHROW(validate(c));

    auto bad = c;
    bad.retain_ratio = 0.0;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidRatio);
    bad = c;
    bad.retain_ratio = 1.5;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidRatio);
    bad = c;
    bad.alpha = 0.0;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    bad = c;
    bad.merge_passes = {{6, {}, {}}, {6, {}, {}}};
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    bad = c;
    bad.merge_passes = {{6, 1.5, {}}};
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    bad = c;
    bad.merge_passes.clear();
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);

    c.merge_passes = {{6, 0.7, {}}, {14, {}, 0.9}};
    CHECK(c.pass_tau_seg(0) == 0.7);
    CHECK(c.pass_tau_seg(1) == c.tau_seg);
    CHECK(c.pass_tau_merge(1) == 0.9);
}

TEST_CASE("provenance consistency") {
    CHECK(FrameProvenance::identity(4).is_consistent(4));
    CHECK_FALSE(FrameProvenance::identity(4).is_consistent(5));

    FrameProvenance merged({{{0, 1.0}}, {{1, 0.6}, {2, 0.4}}, {{3, 1.0}}});
    CHECK(merged.is_consistent(4));
    FrameProvenance bad_weights({{{0, 1.0}}, {{1, 0.6}, {2, 0.5}}, {{3, 1.0}}});
    CHECK_FALSE(bad_weights.is_consistent(4));
    FrameProvenance duplicate({{{0, 1.0}}, {{0, 0.5}, {2, 0.5}}, {{3, 1.0}}});
    CHECK_FALSE(duplicate.is_consistent(4));
}

TEST_CASE("error classes drive exit codes") {
    CHECK(classify(ErrorCode::CorruptHeader) == ErrorClass::Input);
    CHECK(classify(ErrorCode::MissingInput) == ErrorClass::Input);
    CHECK(classify(ErrorCode::InvalidConfig) == ErrorClass::Config);
    CHECK(classify(ErrorCode::ConfigConflict) == ErrorClass::Config);
    CHECK(classify(ErrorCode::IoError) == ErrorClass::Output);
    CHECK(to_string(ErrorCode::CoverageGap) == "CoverageGap");
    Error e(ErrorCode::ShapeMismatch, "x");
    CHECK(std::string(e.what()) == "ShapeMismatch: x");
}

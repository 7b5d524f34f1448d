// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Stage I: streaming segmentation of a frame sequence by smoothed
// neighbour similarity, then pairwise weighted merging of the middle frames
// of every segment.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tokcomp/types.hpp"

namespace tokcomp {

enum class Schedule { Sequential, Concurrent };

/// Mean cosine similarity of tokens at matching positions; result in [-1, 1].
/// Positions where either token has norm below 1e-12 contribute 0.
double frame_similarity(std::span<const float> a, std::span<const float> b, std::size_t tokens, std::size_t dim);

/// Online segmenter over the similarity stream s_1, s_2, ...
///
/// The smoothed score is seeded with the first similarity observed in a
/// segment and follows  smoothed = alpha * s + (1 - alpha) * smoothed  after
/// that. A boundary is reported when the smoothed score drops below tau; the
/// next observation then reseeds it.
class StreamingSegmenter {
public:
    StreamingSegmenter(double alpha, double tau) : m_alpha(alpha), m_tau(tau) {}

    /// Feeds the similarity between frame t-1 and frame t. Returns true when
    /// frame t opens a new segment.
    bool push(double similarity);

    /// Smoothed value after the last push (before any reset it triggered).
    double smoothed() const { return m_smoothed; }

private:
    double m_alpha;
    double m_tau;
    double m_smoothed = 0.0;
    bool m_fresh = true;
};

struct SegmentationTrace {
    SegmentList segments;
    std::vector<double> similarities;  // s_t for t = 1..N-1
    std::vector<double> smoothed;      // smoothed score at each t
};

SegmentationTrace stream_segment_traced(const FeatureTensor& features, double alpha, double tau_seg);

SegmentList stream_segment(const FeatureTensor& features, double alpha, double tau_seg);

/// How one output frame of a pass is formed from the pass input.
struct FrameSource {
    std::size_t first = 0;
    std::optional<std::size_t> second;  // present for merged pairs
    double first_weight = 1.0;
    double second_weight = 0.0;
};

/// Scan of one segment's frames [begin, end) of `features`.
///
/// Head and tail pass through. For middle index i (1-based within the
/// segment, i < k-1 so that i+1 is also a middle frame), frames i and i+1
/// merge iff s_i > tau_merge and s_i > s_{i+1}, where s_j is the similarity
/// of frames j and j+1. A merge advances the scan by two. Merge weights are
/// max(s_j, weight_floor).
std::vector<FrameSource> plan_segment_merge(const FeatureTensor& features, Segment segment, double tau_merge,
                                            double weight_floor);

struct MergePassResult {
    FeatureTensor features;
    SegmentList segments;  // over output frames
    FrameProvenance provenance;
    std::vector<FrameSource> sources;  // per output frame, indices into the pass input
    std::vector<double> pair_similarities;
    std::vector<double> smoothed_similarities;
    SegmentList input_segments;
};

/// Segments `features`, merges middle frames in every segment and
/// concatenates the results in order. `prior` (if given) is the provenance of
/// the input frames and is composed into the result.
MergePassResult merge_pass(const FeatureTensor& features, double alpha, double tau_seg, double tau_merge,
                           double weight_floor, const FrameProvenance* prior = nullptr,
                           Schedule schedule = Schedule::Sequential);

/// Merges the frames of a single segment, e.g. F0..Fk, returning the output
/// frames and the pass-local sources.
struct SegmentMergeResult {
    FeatureTensor features;
    std::vector<FrameSource> sources;
};
SegmentMergeResult merge_segment_middle(const FeatureTensor& segment_frames, double tau_merge, double weight_floor);

/// Applies the same weighted combinations to per-frame attention rows.
AttentionScores propagate_attention(const AttentionScores& attention, std::span<const FrameSource> sources);

}  // namespace tokcomp

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Shared data model: frame features, per-token attention, segment lists,
// compression hyperparameters and merge provenance.
//
// Storage is row-major (frame, token, dim). Values are stored as float32;
// every reduction over them accumulates in double.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tokcomp/error.hpp"

namespace tokcomp {

struct TensorShape {
    std::size_t frames = 0;
    std::size_t tokens = 0;
    std::size_t dim = 0;

    std::size_t frame_stride() const { return tokens * dim; }
    std::size_t element_count() const { return frames * tokens * dim; }
    bool operator==(const TensorShape&) const = default;
};

/// Returns the first invariant violation of a raw feature buffer, if any.
std::optional<Error> check_features(const TensorShape& shape, std::span<const float> data);

class FeatureTensor {
public:
    /// Throws Error(ShapeMismatch | NonFiniteValue) when the invariants fail.
    FeatureTensor(std::size_t frames, std::size_t tokens, std::size_t dim, std::vector<float> data);

    std::size_t frames() const { return m_shape.frames; }
    std::size_t tokens_per_frame() const { return m_shape.tokens; }
    std::size_t dim() const { return m_shape.dim; }
    const TensorShape& shape() const { return m_shape; }

    std::span<const float> data() const { return m_data; }
    std::span<const float> frame(std::size_t f) const {
        return std::span<const float>(m_data).subspan(f * m_shape.frame_stride(), m_shape.frame_stride());
    }
    std::span<const float> token(std::size_t f, std::size_t p) const {
        return frame(f).subspan(p * m_shape.dim, m_shape.dim);
    }

    bool operator==(const FeatureTensor&) const = default;

private:
    TensorShape m_shape;
    std::vector<float> m_data;
};

/// Validates a tensor that was built elsewhere; the constructor already enforces
/// the same checks, so this only fails on tensors whose shape was tampered with.
std::optional<Error> validate(const FeatureTensor& tensor);

class AttentionScores {
public:
    /// Scores are per (frame, token); finite and non-negative.
    AttentionScores(std::size_t frames, std::size_t tokens, std::vector<float> scores);

    std::size_t frames() const { return m_frames; }
    std::size_t tokens_per_frame() const { return m_tokens; }
    std::span<const float> data() const { return m_scores; }
    std::span<const float> row(std::size_t f) const {
        return std::span<const float>(m_scores).subspan(f * m_tokens, m_tokens);
    }

    bool operator==(const AttentionScores&) const = default;

private:
    std::size_t m_frames;
    std::size_t m_tokens;
    std::vector<float> m_scores;
};

/// Throws ShapeMismatch unless the scores annotate `features` frame for frame.
void check_annotates(const AttentionScores& scores, const FeatureTensor& features);

/// Half-open frame interval [begin, end).
struct Segment {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const Segment&) const = default;
};

class SegmentList {
public:
    SegmentList() = default;
    /// Throws CoverageGap unless the segments tile [0, frame_count) in order.
    SegmentList(std::vector<Segment> segments, std::size_t frame_count);

    /// Builds the list from the start index of every segment after the first.
    static SegmentList from_boundaries(std::span<const std::size_t> starts, std::size_t frame_count);

    const std::vector<Segment>& segments() const { return m_segments; }
    std::size_t frame_count() const { return m_frames; }
    std::size_t size() const { return m_segments.size(); }
    std::vector<std::size_t> boundaries() const;

    bool operator==(const SegmentList&) const = default;

private:
    std::vector<Segment> m_segments;
    std::size_t m_frames = 0;
};

struct MergePassConfig {
    /// Encoder layer after which the pass runs; only used for FLOPs accounting.
    int layer = -1;
    std::optional<double> tau_seg;
    std::optional<double> tau_merge;

    bool operator==(const MergePassConfig&) const = default;
};

struct CompressionConfig {
    double alpha = 0.9;
    double tau_seg = 0.8;
    double tau_merge = 0.8;
    double retain_ratio = 0.2;
    std::size_t initial_frames = 32;
    std::vector<MergePassConfig> merge_passes{MergePassConfig{}};
    double weight_floor = 1e-6;

    double pass_tau_seg(std::size_t pass) const { return merge_passes.at(pass).tau_seg.value_or(tau_seg); }
    double pass_tau_merge(std::size_t pass) const {
        return merge_passes.at(pass).tau_merge.value_or(tau_merge);
    }

    bool operator==(const CompressionConfig&) const = default;
};

/// Throws InvalidConfig / InvalidRatio on the first violated constraint.
void validate(const CompressionConfig& config);

struct ProvenanceEntry {
    std::size_t source = 0;  // original frame index
    double weight = 0.0;
    bool operator==(const ProvenanceEntry&) const = default;
};

/// For every output frame, the original frames it aggregates and their weights.
class FrameProvenance {
public:
    FrameProvenance() = default;
    explicit FrameProvenance(std::vector<std::vector<ProvenanceEntry>> frames) : m_frames(std::move(frames)) {}

    static FrameProvenance identity(std::size_t frame_count);

    std::size_t size() const { return m_frames.size(); }
    const std::vector<ProvenanceEntry>& operator[](std::size_t f) const { return m_frames[f]; }
    const std::vector<std::vector<ProvenanceEntry>>& frames() const { return m_frames; }

    /// Checks that sources cover {0..original_frames-1} exactly once and
    /// each frame's weights sum to 1 within 1e-6.
    bool is_consistent(std::size_t original_frames) const;

private:
    std::vector<std::vector<ProvenanceEntry>> m_frames;
};

}  // namespace tokcomp

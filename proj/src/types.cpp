// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tokcomp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::NegativeValue: return "NegativeValue";
        case ErrorCode::InvalidRatio: return "InvalidRatio";
        case ErrorCode::BudgetExceedsFrame: return "BudgetExceedsFrame";
        case ErrorCode::CoverageGap: return "CoverageGap";
        case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
        case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
        case ErrorCode::UnsupportedShape: return "UnsupportedShape";
        case ErrorCode::CorruptHeader: return "CorruptHeader";
        case ErrorCode::ConfigConflict: return "ConfigConflict";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptyHistogram: return "EmptyHistogram";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingInput: return "MissingInput";
    }
    return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidRatio:
        case ErrorCode::ConfigConflict:
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidSpec:
        case ErrorCode::ScheduleMismatch:
        case ErrorCode::BudgetExceedsFrame:
            return ErrorClass::Config;
        case ErrorCode::IoError:
            return ErrorClass::Output;
        default:
            return ErrorClass::Input;
    }
}

namespace {

bool checked_product(std::size_t a, std::size_t b, std::size_t& out) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
        return false;
    }
    out = a * b;
    return true;
}

}  // namespace

std::optional<Error> check_features(const TensorShape& shape, std::span<const float> data) {
    if (shape.frames == 0 || shape.tokens == 0 || shape.dim == 0) {
        return Error(ErrorCode::ShapeMismatch, "frames, tokens and dim must all be >= 1");
    }
    std::size_t plane = 0;
    std::size_t total = 0;
    if (!checked_product(shape.frames, shape.tokens, plane) || !checked_product(plane, shape.dim, total)) {
        return Error(ErrorCode::ShapeMismatch, "element count overflows");
    }
    if (data.size() != total) {
        return Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data.size()) +
                                                   " != frames*tokens*dim = " + std::to_string(total));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            return Error(ErrorCode::NonFiniteValue, "element " + std::to_string(i) + " is not finite");
        }
    }
    return std::nullopt;
}

FeatureTensor::FeatureTensor(std::size_t frames, std::size_t tokens, std::size_t dim, std::vector<float> data)
    : m_shape{frames, tokens, dim}, m_data(std::move(data)) {
    if (auto err = check_features(m_shape, m_data)) {
        throw *err;
    }
}

std::optional<Error> validate(const FeatureTensor& tensor) {
    return check_features(tensor.shape(), tensor.data());
}

AttentionScores::AttentionScores(std::size_t frames, std::size_t tokens, std::vector<float> scores)
    : m_frames(frames), m_tokens(tokens), m_scores(std::move(scores)) {
    if (frames == 0 || tokens == 0) {
        throw Error(ErrorCode::ShapeMismatch, "attention needs at least one frame and one token");
    }
    if (m_scores.size() != frames * tokens) {
        throw Error(ErrorCode::ShapeMismatch, "attention length " + std::to_string(m_scores.size()) +
                                                  " != frames*tokens = " + std::to_string(frames * tokens));
    }
    for (std::size_t i = 0; i < m_scores.size(); ++i) {
        if (!std::isfinite(m_scores[i])) {
            throw Error(ErrorCode::NonFiniteValue, "attention score " + std::to_string(i) + " is not finite");
        }
        if (m_scores[i] < 0.0f) {
            throw Error(ErrorCode::NegativeValue, "attention score " + std::to_string(i) + " is negative");
        }
    }
}

void check_annotates(const AttentionScores& scores, const FeatureTensor& features) {
    if (scores.frames() != features.frames() || scores.tokens_per_frame() != features.tokens_per_frame()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "attention shape (" + std::to_string(scores.frames()) + ", " +
                        std::to_string(scores.tokens_per_frame()) + ") does not match features (" +
                        std::to_string(features.frames()) + ", " + std::to_string(features.tokens_per_frame()) +
                        ")");
    }
}

SegmentList::SegmentList(std::vector<Segment> segments, std::size_t frame_count)
    : m_segments(std::move(segments)), m_frames(frame_count) {
    std::size_t cursor = 0;
    for (const auto& seg : m_segments) {
        if (seg.begin != cursor || seg.end <= seg.begin) {
            throw Error(ErrorCode::CoverageGap, "segments must be contiguous and non-empty");
        }
        cursor = seg.end;
    }
    if (cursor != frame_count) {
        throw Error(ErrorCode::CoverageGap, "segments cover " + std::to_string(cursor) + " of " +
                                                std::to_string(frame_count) + " frames");
    }
}

SegmentList SegmentList::from_boundaries(std::span<const std::size_t> starts, std::size_t frame_count) {
    std::vector<Segment> segments;
    std::size_t begin = 0;
    for (std::size_t start : starts) {
        segments.push_back({begin, start});
        begin = start;
    }
    if (frame_count > 0 || !starts.empty()) {
        segments.push_back({begin, frame_count});
    }
    return SegmentList(std::move(segments), frame_count);
}

std::vector<std::size_t> SegmentList::boundaries() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < m_segments.size(); ++i) {
        out.push_back(m_segments[i].begin);
    }
    return out;
}

void validate(const CompressionConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "alpha must be in (0, 1]");
    }
    if (!(config.retain_ratio > 0.0 && config.retain_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidRatio, "retain_ratio must be in (0, 1]");
    }
    if (config.initial_frames < 1) {
        throw Error(ErrorCode::InvalidConfig, "initial_frames must be >= 1");
    }
    if (config.merge_passes.empty()) {
        throw Error(ErrorCode::InvalidConfig, "at least one merge pass is required");
    }
    if (!(config.weight_floor > 0.0) || !std::isfinite(config.weight_floor)) {
        throw Error(ErrorCode::InvalidConfig, "weight_floor must be a positive finite number");
    }
    auto in_unit_range = [](double t) { return t >= -1.0 && t <= 1.0; };
    if (!in_unit_range(config.tau_seg) || !in_unit_range(config.tau_merge)) {
        throw Error(ErrorCode::InvalidConfig, "tau_seg and tau_merge must be in [-1, 1]");
    }
    int previous_layer = -1;
    for (std::size_t i = 0; i < config.merge_passes.size(); ++i) {
        const auto& pass = config.merge_passes[i];
        if ((pass.tau_seg && !in_unit_range(*pass.tau_seg)) || (pass.tau_merge && !in_unit_range(*pass.tau_merge))) {
            throw Error(ErrorCode::InvalidConfig, "pass " + std::to_string(i) + " threshold outside [-1, 1]");
        }
        if (pass.layer >= 0) {
            if (pass.layer <= previous_layer) {
                throw Error(ErrorCode::InvalidConfig, "merge pass layers must be strictly increasing");
            }
            previous_layer = pass.layer;
        }
    }
}

FrameProvenance FrameProvenance::identity(std::size_t frame_count) {
    std::vector<std::vector<ProvenanceEntry>> frames(frame_count);
    for (std::size_t i = 0; i < frame_count; ++i) {
        frames[i].push_back({i, 1.0});
    }
    return FrameProvenance(std::move(frames));
}

bool FrameProvenance::is_consistent(std::size_t original_frames) const {
    std::vector<int> seen(original_frames, 0);
    for (const auto& frame : m_frames) {
        double total = 0.0;
        for (const auto& entry : frame) {
            if (entry.source >= original_frames || !(entry.weight > 0.0)) {
                return false;
            }
            ++seen[entry.source];
            total += entry.weight;
        }
        if (std::abs(total - 1.0) > 1e-6) {
            return false;
        }
    }
    for (int count : seen) {
        if (count != 1) {
            return false;
        }
    }
    return true;
}

}  // namespace tokcomp

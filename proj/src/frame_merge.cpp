// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/frame_merge.hpp"

#include <algorithm>
#include <future>

#include "tokcomp/kernels.hpp"

namespace tokcomp {

double frame_similarity(std::span<const float> a, std::span<const float> b, std::size_t tokens, std::size_t dim) {
    if (a.size() != b.size() || a.size() != tokens * dim) {
        throw Error(ErrorCode::ShapeMismatch, "frame slices must both hold tokens*dim values");
    }
    return kernels::active_kernels().mean_token_cosine(a.data(), b.data(), tokens, dim);
}

bool StreamingSegmenter::push(double similarity) {
    if (m_fresh) {
        m_smoothed = similarity;
        m_fresh = false;
    } else {
        m_smoothed = m_alpha * similarity + (1.0 - m_alpha) * m_smoothed;
    }
    if (m_smoothed < m_tau) {
        m_fresh = true;
        return true;
    }
    return false;
}

namespace {

double neighbour_similarity(const FeatureTensor& f, std::size_t i) {
    return frame_similarity(f.frame(i), f.frame(i + 1), f.tokens_per_frame(), f.dim());
}

}  // namespace

SegmentationTrace stream_segment_traced(const FeatureTensor& features, double alpha, double tau_seg) {
    SegmentationTrace trace;
    StreamingSegmenter segmenter(alpha, tau_seg);
    std::vector<std::size_t> starts;
    for (std::size_t t = 1; t < features.frames(); ++t) {
        const double s = neighbour_similarity(features, t - 1);
        const bool boundary = segmenter.push(s);
        trace.similarities.push_back(s);
        trace.smoothed.push_back(segmenter.smoothed());
        if (boundary) {
            starts.push_back(t);
        }
    }
    trace.segments = SegmentList::from_boundaries(starts, features.frames());
    return trace;
}

SegmentList stream_segment(const FeatureTensor& features, double alpha, double tau_seg) {
    return stream_segment_traced(features, alpha, tau_seg).segments;
}

std::vector<FrameSource> plan_segment_merge(const FeatureTensor& features, Segment segment, double tau_merge,
                                            double weight_floor) {
    std::vector<FrameSource> out;
    const std::size_t len = segment.size();
    if (len == 0) {
        return out;
    }
    out.push_back({segment.begin, std::nullopt, 1.0, 0.0});
    if (len == 1) {
        return out;
    }
    // Local indices: 0 is the head, k the tail; middles are 1..k-1.
    const std::size_t k = len - 1;
    auto sim = [&](std::size_t local) { return neighbour_similarity(features, segment.begin + local); };

    std::size_t i = 1;
    while (i < k) {
        if (i + 1 < k) {
            const double s_i = sim(i);
            const double s_next = sim(i + 1);
            if (s_i > tau_merge && s_i > s_next) {
                out.push_back({segment.begin + i, segment.begin + i + 1, std::max(s_i, weight_floor),
                               std::max(s_next, weight_floor)});
                i += 2;
                continue;
            }
        }
        out.push_back({segment.begin + i, std::nullopt, 1.0, 0.0});
        i += 1;
    }
    out.push_back({segment.end - 1, std::nullopt, 1.0, 0.0});
    return out;
}

namespace {

std::vector<float> materialize(const FeatureTensor& input, std::span<const FrameSource> sources) {
    const std::size_t stride = input.shape().frame_stride();
    std::vector<float> data(sources.size() * stride);
    const auto& k = kernels::active_kernels();
    for (std::size_t f = 0; f < sources.size(); ++f) {
        const FrameSource& src = sources[f];
        float* dst = data.data() + f * stride;
        const auto first = input.frame(src.first);
        if (src.second) {
            k.blend(first.data(), input.frame(*src.second).data(), src.first_weight, src.second_weight, dst, stride);
        } else {
            std::copy(first.begin(), first.end(), dst);
        }
    }
    return data;
}

FrameProvenance compose(const FrameProvenance& prior, std::span<const FrameSource> sources) {
    std::vector<std::vector<ProvenanceEntry>> frames;
    frames.reserve(sources.size());
    for (const FrameSource& src : sources) {
        std::vector<ProvenanceEntry> entry;
        if (!src.second) {
            entry = prior[src.first];
        } else {
            const double total = src.first_weight + src.second_weight;
            for (const auto& e : prior[src.first]) {
                entry.push_back({e.source, e.weight * src.first_weight / total});
            }
            for (const auto& e : prior[*src.second]) {
                entry.push_back({e.source, e.weight * src.second_weight / total});
            }
            std::sort(entry.begin(), entry.end(),
                      [](const ProvenanceEntry& a, const ProvenanceEntry& b) { return a.source < b.source; });
        }
        frames.push_back(std::move(entry));
    }
    return FrameProvenance(std::move(frames));
}

}  // namespace

MergePassResult merge_pass(const FeatureTensor& features, double alpha, double tau_seg, double tau_merge,
                           double weight_floor, const FrameProvenance* prior, Schedule schedule) {
    if (prior && prior->size() != features.frames()) {
        throw Error(ErrorCode::ShapeMismatch, "prior provenance does not match the pass input frame count");
    }
    SegmentationTrace trace = stream_segment_traced(features, alpha, tau_seg);
    const auto& segs = trace.segments.segments();

    std::vector<std::vector<FrameSource>> per_segment(segs.size());
    if (schedule == Schedule::Concurrent && segs.size() > 1) {
        std::vector<std::future<std::vector<FrameSource>>> jobs;
        jobs.reserve(segs.size());
        for (const Segment& seg : segs) {
            jobs.push_back(std::async(std::launch::async, [&features, seg, tau_merge, weight_floor] {
                return plan_segment_merge(features, seg, tau_merge, weight_floor);
            }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            per_segment[i] = jobs[i].get();
        }
    } else {
        for (std::size_t i = 0; i < segs.size(); ++i) {
            per_segment[i] = plan_segment_merge(features, segs[i], tau_merge, weight_floor);
        }
    }

    std::vector<FrameSource> sources;
    std::vector<Segment> out_segments;
    for (const auto& seg_sources : per_segment) {
        const std::size_t begin = sources.size();
        sources.insert(sources.end(), seg_sources.begin(), seg_sources.end());
        out_segments.push_back({begin, sources.size()});
    }

    const FrameProvenance base = prior ? *prior : FrameProvenance::identity(features.frames());
    const std::size_t out_frames = sources.size();
    return MergePassResult{
        FeatureTensor(out_frames, features.tokens_per_frame(), features.dim(), materialize(features, sources)),
        SegmentList(std::move(out_segments), out_frames),
        compose(base, sources),
        sources,
        std::move(trace.similarities),
        std::move(trace.smoothed),
        std::move(trace.segments),
    };
}

SegmentMergeResult merge_segment_middle(const FeatureTensor& segment_frames, double tau_merge, double weight_floor) {
    auto sources = plan_segment_merge(segment_frames, Segment{0, segment_frames.frames()}, tau_merge, weight_floor);
    FeatureTensor merged(sources.size(), segment_frames.tokens_per_frame(), segment_frames.dim(),
                         materialize(segment_frames, sources));
    return {std::move(merged), std::move(sources)};
}

AttentionScores propagate_attention(const AttentionScores& attention, std::span<const FrameSource> sources) {
    const std::size_t tokens = attention.tokens_per_frame();
    std::vector<float> out(sources.size() * tokens);
    const auto& k = kernels::active_kernels();
    for (std::size_t f = 0; f < sources.size(); ++f) {
        const FrameSource& src = sources[f];
        if (src.first >= attention.frames() || (src.second && *src.second >= attention.frames())) {
            throw Error(ErrorCode::ShapeMismatch, "frame source outside the attention frame range");
        }
        const auto first = attention.row(src.first);
        float* dst = out.data() + f * tokens;
        if (src.second) {
            k.blend(first.data(), attention.row(*src.second).data(), src.first_weight, src.second_weight, dst, tokens);
        } else {
            std::copy(first.begin(), first.end(), dst);
        }
    }
    return AttentionScores(sources.size(), tokens, std::move(out));
}

}  // namespace tokcomp

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/spatial_select.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>

#include "tokcomp/kernels.hpp"

namespace tokcomp {

namespace {

void check_ratio(double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidRatio, "retain ratio must be in (0, 1], got " + std::to_string(ratio));
    }
}

void check_frames(std::size_t initial_frames, std::size_t frames, std::size_t tokens) {
    if (frames < 1 || frames > initial_frames) {
        throw Error(ErrorCode::ConfigConflict, "surviving frame count " + std::to_string(frames) +
                                                   " must be in [1, initial_frames=" +
                                                   std::to_string(initial_frames) + "]");
    }
    if (tokens < 1) {
        throw Error(ErrorCode::ShapeMismatch, "tokens per frame must be >= 1");
    }
}

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

// Ranking used by both selectors: higher score first, lower index on ties.
struct Ranks {
    std::span<const float> scores;
    bool operator()(std::size_t a, std::size_t b) const {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return a < b;
    }
};

void check_budget(std::size_t k, std::size_t length) {
    if (k > length) {
        throw Error(ErrorCode::BudgetExceedsFrame,
                    "cannot keep " + std::to_string(k) + " of " + std::to_string(length) + " tokens");
    }
}

}  // namespace

std::size_t keep_count_per_frame(double ratio, std::size_t initial_frames, std::size_t frames, std::size_t tokens) {
    check_ratio(ratio);
    check_frames(initial_frames, frames, tokens);
    const double budget = ratio * static_cast<double>(initial_frames * tokens);
    const std::size_t k = round_count(budget / static_cast<double>(frames));
    return std::clamp<std::size_t>(k, 1, tokens);
}

BudgetPlan plan_budget(double ratio, std::size_t initial_frames, std::size_t frames, std::size_t tokens) {
    BudgetPlan plan;
    plan.per_frame = keep_count_per_frame(ratio, initial_frames, frames, tokens);
    plan.requested = round_count(ratio * static_cast<double>(initial_frames * tokens));
    plan.floor_binds = plan.requested < frames;
    plan.cap_binds = plan.requested > frames * tokens;
    const std::size_t target = std::clamp(plan.requested, frames, frames * tokens);

    plan.quotas.assign(frames, plan.per_frame);
    std::size_t sum = frames * plan.per_frame;
    while (sum < target) {
        for (std::size_t f = 0; f < frames && sum < target; ++f) {
            if (plan.quotas[f] < tokens) {
                ++plan.quotas[f];
                ++sum;
            }
        }
    }
    while (sum > target) {
        for (std::size_t f = frames; f-- > 0 && sum > target;) {
            if (plan.quotas[f] > 1) {
                --plan.quotas[f];
                --sum;
            }
        }
    }
    plan.total = sum;
    return plan;
}

DecoupledFrames decouple(const SegmentList& segments) {
    DecoupledFrames out;
    for (const Segment& seg : segments.segments()) {
        out.dynamic_idx.push_back(seg.begin);
        if (seg.size() >= 2) {
            for (std::size_t f = seg.begin + 1; f + 1 < seg.end; ++f) {
                out.static_idx.push_back(f);
            }
            out.dynamic_idx.push_back(seg.end - 1);
        }
    }
    return out;
}

std::vector<std::size_t> global_topk_select(std::span<const float> scores, std::size_t k) {
    check_budget(k, scores.size());
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), Ranks{scores});
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::size_t> local_window_select(std::span<const float> scores, std::size_t k) {
    const std::size_t length = scores.size();
    check_budget(k, length);
    if (k == 0) {
        return {};
    }
    const std::size_t width = length / k;
    std::vector<std::size_t> winners;
    winners.reserve(length / width + 1);
    for (std::size_t begin = 0; begin < length; begin += width) {
        const std::size_t end = std::min(begin + width, length);
        std::size_t best = begin;
        for (std::size_t p = begin + 1; p < end; ++p) {
            if (scores[p] > scores[best]) {
                best = p;
            }
        }
        winners.push_back(best);
    }
    if (winners.size() > k) {
        // Keep the k strongest winners; the weakest (lower index first on ties) go.
        std::sort(winners.begin(), winners.end(), Ranks{scores});
        winners.resize(k);
        std::sort(winners.begin(), winners.end());
    }
    return winners;
}

std::vector<float> attention_from_matrix(std::span<const float> matrix, std::size_t tokens) {
    if (tokens == 0 || matrix.size() != tokens * tokens) {
        throw Error(ErrorCode::ShapeMismatch, "attention matrix must be square with side " + std::to_string(tokens));
    }
    for (float v : matrix) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteValue, "attention matrix contains a non-finite value");
        }
        if (v < 0.0f) {
            throw Error(ErrorCode::NegativeValue, "attention matrix contains a negative value");
        }
    }
    std::vector<float> out(tokens);
    kernels::active_kernels().column_mean(matrix.data(), tokens, tokens, out.data());
    return out;
}

std::size_t SelectionResult::total_kept() const {
    std::size_t n = 0;
    for (const auto& f : frames) {
        n += f.tokens.size();
    }
    return n;
}

SelectionResult gather_reorder(std::vector<FrameSelection> dynamic_sel, std::vector<FrameSelection> static_sel,
                               const FeatureTensor& features) {
    const std::size_t n = features.frames();
    std::vector<const FrameSelection*> by_frame(n, nullptr);
    auto place = [&](const std::vector<FrameSelection>& group) {
        for (const auto& sel : group) {
            if (sel.frame >= n) {
                throw Error(ErrorCode::CoverageGap, "selection for frame " + std::to_string(sel.frame) +
                                                        " outside [0, " + std::to_string(n) + ")");
            }
            if (by_frame[sel.frame] != nullptr) {
                throw Error(ErrorCode::CoverageGap, "frame " + std::to_string(sel.frame) + " selected twice");
            }
            by_frame[sel.frame] = &sel;
        }
    };
    place(dynamic_sel);
    place(static_sel);

    SelectionResult out;
    out.dim = features.dim();
    out.frames.reserve(n);
    for (std::size_t f = 0; f < n; ++f) {
        if (by_frame[f] == nullptr) {
            throw Error(ErrorCode::CoverageGap, "frame " + std::to_string(f) + " has no selection");
        }
        FrameSelection sel{f, by_frame[f]->tokens};
        std::sort(sel.tokens.begin(), sel.tokens.end());
        if (std::adjacent_find(sel.tokens.begin(), sel.tokens.end()) != sel.tokens.end()) {
            throw Error(ErrorCode::CoverageGap, "frame " + std::to_string(f) + " selects a token twice");
        }
        if (!sel.tokens.empty() && sel.tokens.back() >= features.tokens_per_frame()) {
            throw Error(ErrorCode::ShapeMismatch, "token index outside the frame");
        }
        for (std::size_t p : sel.tokens) {
            const auto row = features.token(f, p);
            out.rows.insert(out.rows.end(), row.begin(), row.end());
        }
        out.frames.push_back(std::move(sel));
    }
    return out;
}

namespace {

using Selector = std::vector<std::size_t> (*)(std::span<const float>, std::size_t);

std::vector<FrameSelection> run_path(const AttentionScores& attention, const std::vector<std::size_t>& frames,
                                     std::span<const std::size_t> quotas, Selector selector) {
    std::vector<FrameSelection> out;
    out.reserve(frames.size());
    for (std::size_t f : frames) {
        out.push_back({f, selector(attention.row(f), quotas[f])});
    }
    return out;
}

}  // namespace

SelectionResult select_tokens(const FeatureTensor& features, const AttentionScores& attention,
                              const SegmentList& segments, std::span<const std::size_t> quotas, Schedule schedule) {
    check_annotates(attention, features);
    if (segments.frame_count() != features.frames() || quotas.size() != features.frames()) {
        throw Error(ErrorCode::ShapeMismatch, "segments and quotas must cover every frame");
    }
    const DecoupledFrames parts = decouple(segments);

    std::vector<FrameSelection> dynamic_sel;
    std::vector<FrameSelection> static_sel;
    if (schedule == Schedule::Concurrent) {
        auto static_job = std::async(std::launch::async, [&] {
            return run_path(attention, parts.static_idx, quotas, &local_window_select);
        });
        dynamic_sel = run_path(attention, parts.dynamic_idx, quotas, &global_topk_select);
        static_sel = static_job.get();
    } else {
        dynamic_sel = run_path(attention, parts.dynamic_idx, quotas, &global_topk_select);
        static_sel = run_path(attention, parts.static_idx, quotas, &local_window_select);
    }
    return gather_reorder(std::move(dynamic_sel), std::move(static_sel), features);
}

}  // namespace tokcomp

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Stage II: split frames into dynamic (segment heads/tails) and static
// (segment middles) sets, select tokens per frame by attention, and gather
// the survivors back into temporal order.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokcomp/frame_merge.hpp"
#include "tokcomp/types.hpp"

namespace tokcomp {

/// round(r * B * L / N) clamped to [1, L]. Rounding is half away from zero.
std::size_t keep_count_per_frame(double ratio, std::size_t initial_frames, std::size_t frames, std::size_t tokens);

/// Per-frame token quotas that hit the overall budget exactly.
struct BudgetPlan {
    std::size_t per_frame = 0;             // K_f
    std::size_t requested = 0;             // round(r * B * L)
    std::size_t total = 0;                 // sum of quotas
    std::vector<std::size_t> quotas;       // one per frame
    bool floor_binds = false;              // requested < N: one token per frame
    bool cap_binds = false;                // requested > N * L: every token kept
};

/// Starts every frame at K_f. If the sum falls short of the target, frames
/// gain one token each in temporal order (repeating while below L); if it
/// overshoots, frames lose one token each from the last frame backwards
/// (never below 1). The target is round(r*B*L) clamped to [N, N*L].
BudgetPlan plan_budget(double ratio, std::size_t initial_frames, std::size_t frames, std::size_t tokens);

struct DecoupledFrames {
    std::vector<std::size_t> dynamic_idx;
    std::vector<std::size_t> static_idx;
};

DecoupledFrames decouple(const SegmentList& segments);

/// Indices of the k largest scores, ties toward the lower index, ascending.
std::vector<std::size_t> global_topk_select(std::span<const float> scores, std::size_t k);

/// One argmax per window of width floor(L/k); surplus winners are trimmed by
/// lowest score (lower index first on ties). Ascending.
std::vector<std::size_t> local_window_select(std::span<const float> scores, std::size_t k);

/// Column means of a row-major L x L attention matrix (mean attention received).
std::vector<float> attention_from_matrix(std::span<const float> matrix, std::size_t tokens);

struct FrameSelection {
    std::size_t frame = 0;
    std::vector<std::size_t> tokens;
    bool operator==(const FrameSelection&) const = default;
};

struct SelectionResult {
    std::vector<FrameSelection> frames;  // temporal order
    std::size_t dim = 0;
    std::vector<float> rows;             // total_kept x dim, same order as frames/tokens

    std::size_t total_kept() const;
    bool operator==(const SelectionResult&) const = default;
};

/// Merges both selection sets into temporal order with ascending token
/// indices and copies the kept feature rows. Throws CoverageGap unless every
/// frame of `features` is selected exactly once.
SelectionResult gather_reorder(std::vector<FrameSelection> dynamic_sel, std::vector<FrameSelection> static_sel,
                               const FeatureTensor& features);

/// Full Stage II: decouple, global top-K on dynamic frames, local windows on
/// static frames (the two paths may run concurrently), gather.
SelectionResult select_tokens(const FeatureTensor& features, const AttentionScores& attention,
                              const SegmentList& segments, std::span<const std::size_t> quotas,
                              Schedule schedule = Schedule::Sequential);

}  // namespace tokcomp

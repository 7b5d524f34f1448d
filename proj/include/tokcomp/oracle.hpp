// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations and distribution metrics.
//
// Nothing here calls into frame_merge or spatial_select: the references are
// written from the definitions so they can check those modules.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokcomp/spatial_select.hpp"

namespace tokcomp::oracle {

/// Stable sort by descending score, take k, return ascending.
std::vector<std::size_t> oracle_topk(std::span<const float> scores, std::size_t k);

/// Window winners by pairwise comparison, then oracle ranking of the winners.
std::vector<std::size_t> oracle_local_window(std::span<const float> scores, std::size_t k);

/// Batch evaluation of the smoothed-similarity recurrence over a raw
/// sequence s_0..s_{n-1} (s_i compares frames i and i+1). Returns the frame
/// indices that open a new segment, i.e. i+1 for every break at s_i.
std::vector<std::size_t> oracle_segment(std::span<const double> similarities, double alpha, double tau);

struct PositionHistogram {
    std::vector<std::size_t> bins;
    std::size_t total = 0;
};

PositionHistogram position_histogram(const SelectionResult& selection, std::size_t tokens);
PositionHistogram position_histogram(std::span<const std::vector<std::size_t>> per_frame, std::size_t tokens);

/// Histogram with every position equally represented, as if nothing were dropped.
PositionHistogram uniform_histogram(std::size_t tokens, std::size_t per_bin);

/// (1/2) * sum |p_i - q_i| of the normalized histograms. Throws
/// EmptyHistogram if either total is zero, ShapeMismatch on differing bins.
double tv_distance(const PositionHistogram& a, const PositionHistogram& b);

}  // namespace tokcomp::oracle

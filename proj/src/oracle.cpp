// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tokcomp::oracle {

namespace {

std::vector<std::size_t> rank_descending(std::span<const float> scores, std::vector<std::size_t> candidates) {
    std::sort(candidates.begin(), candidates.end());
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return candidates;
}

}  // namespace

std::vector<std::size_t> oracle_topk(std::span<const float> scores, std::size_t k) {
    std::vector<std::size_t> all(scores.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto ranked = rank_descending(scores, std::move(all));
    ranked.resize(std::min(k, ranked.size()));
    std::sort(ranked.begin(), ranked.end());
    return ranked;
}

std::vector<std::size_t> oracle_local_window(std::span<const float> scores, std::size_t k) {
    const std::size_t n = scores.size();
    if (k == 0 || n == 0) {
        return {};
    }
    const std::size_t width = n / k;
    const std::size_t windows = (n + width - 1) / width;
    std::vector<std::size_t> winners;
    for (std::size_t w = 0; w < windows; ++w) {
        const std::size_t lo = w * width;
        const std::size_t hi = std::min(n, lo + width);
        for (std::size_t p = lo; p < hi; ++p) {
            bool beats_all = true;
            for (std::size_t q = lo; q < hi && beats_all; ++q) {
                if (q == p) {
                    continue;
                }
                beats_all = scores[p] > scores[q] || (scores[p] == scores[q] && p < q);
            }
            if (beats_all) {
                winners.push_back(p);
                break;
            }
        }
    }
    auto ranked = rank_descending(scores, winners);
    ranked.resize(std::min(k, ranked.size()));
    std::sort(ranked.begin(), ranked.end());
    return ranked;
}

std::vector<std::size_t> oracle_segment(std::span<const double> similarities, double alpha, double tau) {
    const std::size_t n = similarities.size();
    std::vector<double> smoothed(n, 0.0);
    std::vector<std::size_t> boundaries;
    std::size_t segment_first_pair = 0;
    for (std::size_t i = 0; i < n; ++i) {
        smoothed[i] = (i == segment_first_pair) ? similarities[i]
                                                : alpha * similarities[i] + (1.0 - alpha) * smoothed[i - 1];
        if (smoothed[i] < tau) {
            boundaries.push_back(i + 1);
            segment_first_pair = i + 1;
        }
    }
    return boundaries;
}

PositionHistogram position_histogram(const SelectionResult& selection, std::size_t tokens) {
    PositionHistogram h{std::vector<std::size_t>(tokens, 0), 0};
    for (const auto& frame : selection.frames) {
        for (std::size_t p : frame.tokens) {
            if (p < tokens) {
                ++h.bins[p];
                ++h.total;
            }
        }
    }
    return h;
}

PositionHistogram position_histogram(std::span<const std::vector<std::size_t>> per_frame, std::size_t tokens) {
    PositionHistogram h{std::vector<std::size_t>(tokens, 0), 0};
    for (const auto& frame : per_frame) {
        for (std::size_t p : frame) {
            if (p < tokens) {
                ++h.bins[p];
                ++h.total;
            }
        }
    }
    return h;
}

PositionHistogram uniform_histogram(std::size_t tokens, std::size_t per_bin) {
    return {std::vector<std::size_t>(tokens, per_bin), tokens * per_bin};
}

double tv_distance(const PositionHistogram& a, const PositionHistogram& b) {
    if (a.bins.size() != b.bins.size()) {
        throw Error(ErrorCode::ShapeMismatch, "histograms have different bin counts");
    }
    if (a.total == 0 || b.total == 0) {
        throw Error(ErrorCode::EmptyHistogram, "cannot normalize an empty histogram");
    }
    const double ta = static_cast<double>(a.total);
    const double tb = static_cast<double>(b.total);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        sum += std::abs(static_cast<double>(a.bins[i]) / ta - static_cast<double>(b.bins[i]) / tb);
    }
    return 0.5 * sum;
}

}  // namespace tokcomp::oracle

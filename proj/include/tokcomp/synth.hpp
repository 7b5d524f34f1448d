// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Reproducible synthetic videos: blocks of frames whose neighbouring frames
// have a controllable cosine similarity, plus attention rows with boosted
// "sink" columns that stay fixed across frames.
//
// Randomness comes from std::mt19937_64 (the 64-bit Mersenne Twister whose
// output sequence is fixed by the C++ standard; its 10000th output from the
// default seed is 9981545732273789042). Uniforms take the top 53 bits;
// normals use the Box-Muller transform. No std distributions are used, since
// their outputs are implementation-defined.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "tokcomp/types.hpp"

namespace tokcomp::synth {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    std::uint64_t next_u64() { return m_engine(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n must be > 0.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
    double normal();

private:
    std::mt19937_64 m_engine;
};

struct SynthSpec {
    std::uint64_t seed = 0;
    std::size_t tokens = 16;
    std::size_t dim = 16;
    /// Frames per block; the video has sum(block_lengths) frames.
    std::vector<std::size_t> block_lengths{8};
    /// Target cosine between a frame's tokens and its block's base tokens,
    /// roughly the similarity of neighbouring frames. 1.0 means identical frames.
    std::vector<double> block_similarity{0.95};
    std::vector<std::size_t> sink_columns;
    double sink_factor = 1.0;

    std::size_t frames() const;
};

/// Throws InvalidSpec on the first problem.
void validate(const SynthSpec& spec);

struct SynthVideo {
    FeatureTensor features;
    AttentionScores attention;
};

SynthVideo synth_video(const SynthSpec& spec);

}  // namespace tokcomp::synth

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/synth.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace tokcomp::synth {

double Rng::normal() {
    // 1 - u lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SynthSpec::frames() const {
    return std::accumulate(block_lengths.begin(), block_lengths.end(), std::size_t{0});
}

void validate(const SynthSpec& spec) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); };
    if (spec.tokens == 0 || spec.dim == 0) {
        fail("tokens and dim must be >= 1");
    }
    if (spec.block_lengths.empty()) {
        fail("at least one block is required");
    }
    if (spec.block_similarity.size() != spec.block_lengths.size()) {
        fail("block_similarity needs one entry per block");
    }
    for (std::size_t len : spec.block_lengths) {
        if (len == 0) {
            fail("block lengths must be >= 1");
        }
    }
    for (double s : spec.block_similarity) {
        if (!(s >= 0.0 && s <= 1.0)) {
            fail("block similarity must be in [0, 1]");
        }
    }
    for (std::size_t c : spec.sink_columns) {
        if (c >= spec.tokens) {
            fail("sink column " + std::to_string(c) + " outside [0, " + std::to_string(spec.tokens) + ")");
        }
    }
    if (!(spec.sink_factor > 0.0) || !std::isfinite(spec.sink_factor)) {
        fail("sink_factor must be positive and finite");
    }
}

namespace {

std::vector<double> unit_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) {
        x *= inv;
    }
    return v;
}

}  // namespace

SynthVideo synth_video(const SynthSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    const std::size_t frames = spec.frames();
    const std::size_t L = spec.tokens;
    const std::size_t D = spec.dim;

    std::vector<float> features;
    features.reserve(frames * L * D);
    for (std::size_t b = 0; b < spec.block_lengths.size(); ++b) {
        std::vector<std::vector<double>> base;
        base.reserve(L);
        for (std::size_t p = 0; p < L; ++p) {
            base.push_back(unit_vector(rng, D));
        }
        const double keep = std::sqrt(spec.block_similarity[b]);
        const double jitter = std::sqrt(1.0 - spec.block_similarity[b]);
        for (std::size_t t = 0; t < spec.block_lengths[b]; ++t) {
            for (std::size_t p = 0; p < L; ++p) {
                const std::vector<double> noise = unit_vector(rng, D);
                std::vector<double> token(D);
                double norm2 = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    token[d] = keep * base[p][d] + jitter * noise[d];
                    norm2 += token[d] * token[d];
                }
                const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
                for (double x : token) {
                    features.push_back(static_cast<float>(x * inv));
                }
            }
        }
    }

    std::vector<char> is_sink(L, 0);
    for (std::size_t c : spec.sink_columns) {
        is_sink[c] = 1;
    }
    std::vector<float> attention(frames * L);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t p = 0; p < L; ++p) {
            const double u = rng.uniform(0.05, 1.0);
            attention[f * L + p] = static_cast<float>(is_sink[p] ? u * spec.sink_factor : u);
        }
    }
    return {FeatureTensor(frames, L, D, std::move(features)), AttentionScores(frames, L, std::move(attention))};
}

}  // namespace tokcomp::synth

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/flops.hpp"

#include <cmath>
#include <string>

#include "tokcomp/error.hpp"

namespace tokcomp {

__extension__ typedef unsigned __int128 u128;

double layer_flops(std::size_t seq_len, std::size_t hidden, std::size_t ffn) {
    const u128 l = seq_len;
    const u128 d = hidden;
    const u128 m = ffn;
    const u128 total = 4 * l * d * d + 2 * l * l * d + 2 * l * d * m;
    return static_cast<double>(total);
}

double schedule_flops(const TransformerShape& shape, std::span<const std::size_t> seq_lens) {
    if (seq_lens.size() != shape.layers) {
        throw Error(ErrorCode::ScheduleMismatch, "schedule has " + std::to_string(seq_lens.size()) +
                                                     " entries for " + std::to_string(shape.layers) + " layers");
    }
    double total = 0.0;
    for (std::size_t len : seq_lens) {
        total += layer_flops(len, shape.hidden, shape.ffn);
    }
    return total;
}

double encoder_flops(const TransformerShape& shape, std::span<const std::size_t> frames_alive,
                     std::size_t tokens_per_frame, AttentionScope scope) {
    if (frames_alive.size() != shape.layers) {
        throw Error(ErrorCode::ScheduleMismatch, "frames_alive has " + std::to_string(frames_alive.size()) +
                                                     " entries for " + std::to_string(shape.layers) + " layers");
    }
    double total = 0.0;
    if (scope == AttentionScope::Joint) {
        for (std::size_t frames : frames_alive) {
            total += layer_flops(frames * tokens_per_frame, shape.hidden, shape.ffn);
        }
        return total;
    }
    const double per_frame = layer_flops(tokens_per_frame, shape.hidden, shape.ffn);
    for (std::size_t frames : frames_alive) {
        total += static_cast<double>(frames) * per_frame;
    }
    return total;
}

double prefill_flops(const TransformerShape& shape, std::size_t visual_tokens, std::size_t text_tokens) {
    return static_cast<double>(shape.layers) * layer_flops(visual_tokens + text_tokens, shape.hidden, shape.ffn);
}

std::vector<std::size_t> frames_alive_schedule(std::size_t layers, std::size_t initial_frames,
                                               std::span<const int> pass_layers,
                                               std::span<const std::size_t> frames_after_pass) {
    if (pass_layers.size() != frames_after_pass.size()) {
        throw Error(ErrorCode::ScheduleMismatch, "one frame count is needed per merge pass");
    }
    std::vector<std::size_t> alive(layers, initial_frames);
    int previous = -1;
    std::size_t current = initial_frames;
    for (std::size_t i = 0; i < pass_layers.size(); ++i) {
        const int layer = pass_layers[i];
        if (layer <= previous || layer < 0 || static_cast<std::size_t>(layer) >= layers) {
            throw Error(ErrorCode::ScheduleMismatch, "merge pass layer " + std::to_string(layer) +
                                                         " is out of order or outside [0, " +
                                                         std::to_string(layers) + ")");
        }
        if (frames_after_pass[i] > current) {
            throw Error(ErrorCode::ScheduleMismatch, "frame count increases across a merge pass");
        }
        current = frames_after_pass[i];
        for (std::size_t l = static_cast<std::size_t>(layer) + 1; l < layers; ++l) {
            alive[l] = current;
        }
        previous = layer;
    }
    return alive;
}

namespace {

std::size_t llm_tokens_per_frame(const EncoderPreset& enc) {
    return enc.llm_tokens_per_frame != 0 ? enc.llm_tokens_per_frame : enc.tokens_per_frame;
}

FlopsBreakdown breakdown(const FlopsInputs& in, std::span<const std::size_t> alive, std::size_t visual_tokens) {
    FlopsBreakdown b;
    b.encoder = encoder_flops(in.encoder.shape, alive, in.encoder.tokens_per_frame, in.encoder.scope);
    b.prefill = prefill_flops(in.llm.shape, visual_tokens, in.text_tokens);
    b.total = b.encoder + b.prefill;
    b.llm_visual_tokens = visual_tokens;
    return b;
}

}  // namespace

FlopsReport pipeline_report(const FlopsInputs& in) {
    if (!(in.kept_fraction >= 0.0 && in.kept_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidRatio, "kept fraction must be in [0, 1]");
    }
    const std::size_t layers = in.encoder.shape.layers;
    const std::vector<std::size_t> full(layers, in.initial_frames);
    const std::vector<std::size_t> alive =
        frames_alive_schedule(layers, in.initial_frames, in.pass_layers, in.frames_after_pass);

    const std::size_t baseline_visual = in.initial_frames * llm_tokens_per_frame(in.encoder);
    const auto compressed_visual =
        static_cast<std::size_t>(std::llround(in.kept_fraction * static_cast<double>(baseline_visual)));

    FlopsReport report;
    report.baseline = breakdown(in, full, baseline_visual);
    report.compressed = breakdown(in, alive, compressed_visual);
    report.ratio = report.baseline.total > 0.0 ? report.compressed.total / report.baseline.total : 1.0;
    report.text_tokens = in.text_tokens;
    report.encoder_preset = in.encoder.name;
    report.llm_preset = in.llm.name;
    return report;
}

}  // namespace tokcomp

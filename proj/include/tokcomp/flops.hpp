// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Analytic FLOPs of transformer stacks: per layer with sequence length L,
// hidden size D and FFN width M,
//
//     4*L*D^2 + 2*L^2*D + 2*L*D*M
//
// (attention projections, score and value products, FFN). Softmax, norms
// and the projector are not counted.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tokcomp {

struct TransformerShape {
    std::size_t layers = 0;
    std::size_t hidden = 0;
    std::size_t ffn = 0;
};

/// How the vision encoder attends: within each frame, or over the
/// concatenation of all frames as one sequence.
enum class AttentionScope { PerFrame, Joint };

struct EncoderPreset {
    std::string name;
    TransformerShape shape;
    std::size_t tokens_per_frame = 0;
    AttentionScope scope = AttentionScope::PerFrame;
    /// Visual tokens per frame handed to the LLM (after projector pooling).
    std::size_t llm_tokens_per_frame = 0;
};

struct LlmPreset {
    std::string name;
    TransformerShape shape;
};

/// Exact for results below 2^53; computed in 128-bit integers and rounded once.
double layer_flops(std::size_t seq_len, std::size_t hidden, std::size_t ffn);

/// Sum of layer_flops over an explicit per-layer sequence-length schedule.
/// Throws ScheduleMismatch if the schedule length differs from shape.layers.
double schedule_flops(const TransformerShape& shape, std::span<const std::size_t> seq_lens);

double encoder_flops(const TransformerShape& shape, std::span<const std::size_t> frames_alive,
                     std::size_t tokens_per_frame, AttentionScope scope = AttentionScope::PerFrame);

double prefill_flops(const TransformerShape& shape, std::size_t visual_tokens, std::size_t text_tokens);

/// Frames alive at each encoder layer. A pass at layer l reduces the count
/// for layers l+1 onwards. Throws ScheduleMismatch on inconsistent input.
std::vector<std::size_t> frames_alive_schedule(std::size_t layers, std::size_t initial_frames,
                                               std::span<const int> pass_layers,
                                               std::span<const std::size_t> frames_after_pass);

struct FlopsInputs {
    EncoderPreset encoder;
    LlmPreset llm;
    std::size_t initial_frames = 32;
    std::vector<int> pass_layers;
    std::vector<std::size_t> frames_after_pass;
    /// Fraction of the initial visual tokens that reach the LLM.
    double kept_fraction = 1.0;
    std::size_t text_tokens = 64;
};

struct FlopsBreakdown {
    double encoder = 0.0;
    double prefill = 0.0;
    double total = 0.0;
    std::size_t llm_visual_tokens = 0;
};

struct FlopsReport {
    FlopsBreakdown compressed;
    FlopsBreakdown baseline;
    double ratio = 1.0;  // compressed.total / baseline.total
    std::size_t text_tokens = 0;
    std::string encoder_preset;
    std::string llm_preset;
};

FlopsReport pipeline_report(const FlopsInputs& inputs);

}  // namespace tokcomp

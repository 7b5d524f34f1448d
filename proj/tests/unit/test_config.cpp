// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "tokcomp/config.hpp"

using namespace tokcomp;
using namespace tokcomp::config;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected tokcomp::Error");
    return ErrorCode::IoError;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("defaults without a file") {
    const auto rc = parse_run_config("");
    CHECK(rc.compression == CompressionConfig{});
    CHECK_FALSE(rc.initial_frames_set);
    CHECK(rc.encoder_preset == "siglip-so400m");
}

TEST_CASE("typed keys") {
    const auto rc = parse_run_config(
        "# comment\n"
        "alpha = 0.85\n"
        "tau_seg=0.65   # trailing comment\n"
        "retain_ratio = 0.1\n"
        "initial_frames = 16\n"
        "merge_passes = [8, 14, 20]\n"
        "pass.1.tau_merge = 0.7\n"
        "text_tokens = 100\n"
        "llm_preset = qwen2-0.5b\n");
    const auto& c = rc.compression;
    CHECK(c.alpha == 0.85);
    CHECK(c.tau_seg == 0.65);
    CHECK(c.retain_ratio == 0.1);
    CHECK(c.initial_frames == 16);
    CHECK(rc.initial_frames_set);
    REQUIRE(c.merge_passes.size() == 3);
    CHECK(c.merge_passes[2].layer == 20);
    CHECK(c.pass_tau_merge(1) == 0.7);
    CHECK(c.pass_tau_merge(0) == c.tau_merge);
    CHECK(rc.text_tokens == 100);
    CHECK(rc.llm_preset == "qwen2-0.5b");
}

TEST_CASE("unknown, duplicate and malformed keys are rejected") {
    CHECK(code_of([] { parse_run_config("tau_segment = 0.8\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("alpha = 0.9\nalpha = 0.8\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("alpha 0.9\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("alpha = fast\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("initial_frames = -3\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("merge_passes = [6, 14\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("merge_passes = [14, 6]\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("pass.3.tau_seg = 0.5\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_run_config("retain_ratio = 0\n"); }) == ErrorCode::InvalidRatio);
}

TEST_CASE("format round trip") {
    RunConfig rc;
    rc.compression.alpha = 0.1 + 0.2;  // not representable in short decimal
    rc.compression.tau_seg = 0.65;
    rc.compression.retain_ratio = 0.15;
    rc.compression.merge_passes = {{6, 0.7, {}}, {14, {}, 0.95}, {20, {}, {}}};
    rc.compression.initial_frames = 24;
    rc.initial_frames_set = true;
    rc.compression.weight_floor = 1e-9;
    rc.text_tokens = 7;
    rc.llm_preset = "qwen2-0.5b";
    const std::string text = format_run_config(rc);
    const RunConfig back = parse_run_config(text);
    CHECK(back.compression == rc.compression);
    CHECK(back.initial_frames_set);
    CHECK(back.text_tokens == 7);
    CHECK(back.llm_preset == rc.llm_preset);
    CHECK(format_run_config(back) == text);
}

TEST_CASE("built-in presets") {
    const auto enc = resolve_encoder_preset("siglip-so400m");
    CHECK(enc.shape.layers == 27);
    CHECK(enc.shape.hidden == 1152);
    CHECK(enc.shape.ffn == 4304);
    CHECK(enc.tokens_per_frame == 729);
    CHECK(enc.scope == AttentionScope::Joint);
    CHECK(enc.llm_tokens_per_frame == 196);

    const auto llm = resolve_llm_preset("qwen2-7b");
    CHECK(llm.shape.layers == 28);
    CHECK(llm.shape.hidden == 3584);
    CHECK(llm.shape.ffn == 18944);

    CHECK(code_of([] { resolve_llm_preset("siglip-so400m"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { resolve_encoder_preset("no-such-model"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("shipped preset files match the built-ins") {
    for (const auto& name : builtin_presets()) {
        CAPTURE(name);
        const auto path = std::filesystem::path(TOKCOMP_PRESET_DIR) / (name + ".cfg");
        REQUIRE(std::filesystem::exists(path));
        CHECK(slurp(path) == *builtin_preset_text(name));
    }
}

TEST_CASE("preset files resolve relative to a base directory") {
    testing::TempDir dir("presets");
    {
        std::ofstream out(dir.path / "tiny.cfg");
        out << "kind = encoder\nlayers = 2\nhidden = 8\nffn = 16\ntokens_per_frame = 4\n";
    }
    const auto enc = resolve_encoder_preset("tiny.cfg", dir.path);
    CHECK(enc.shape.layers == 2);
    CHECK(enc.scope == AttentionScope::PerFrame);
    CHECK(enc.llm_tokens_per_frame == 4);
    CHECK(code_of([] { parse_encoder_preset("kind = encoder\nlayers = 2\nhidden = 8\nffn = 16\n"); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_llm_preset("kind = llm\nlayers = 2\nhidden = 8\nffn = 16\nheads = 4\n"); }) ==
          ErrorCode::InvalidConfig);
}

TEST_CASE("every shipped run config parses and resolves") {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(TOKCOMP_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        const auto rc = load_run_config(entry.path());
        CHECK(rc.compression.alpha == 0.9);
        CHECK(rc.compression.merge_passes.size() == 3);
        CHECK_NOTHROW(resolve_encoder_preset(rc.encoder_preset));
        CHECK_NOTHROW(resolve_llm_preset(rc.llm_preset));
        ++count;
    }
    CHECK(count == 32);
}

TEST_CASE("synthetic spec files") {
    const auto spec = parse_synth_spec(
        "seed = 5\ntokens = 12\ndim = 6\nblock_lengths = [3, 4]\nblock_similarity = [0.9, 1.0]\n"
        "sink_columns = [0]\nsink_factor = 8\n");
    CHECK(spec.seed == 5);
    CHECK(spec.frames() == 7);
    CHECK(spec.block_similarity[1] == 1.0);
    CHECK(spec.sink_columns == std::vector<std::size_t>{0});
    CHECK(code_of([] { parse_synth_spec("seed = 1\nframes = 3\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_synth_spec("block_lengths = [3]\nblock_similarity = [0.9, 0.9]\n"); }) ==
          ErrorCode::InvalidSpec);
}

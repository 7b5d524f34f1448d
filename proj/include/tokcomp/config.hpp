// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Flat, typed `key = value` text format shared by run configs, model shape
// presets and synthetic fixture specs.
//
//   # comment
//   alpha = 0.9
//   merge_passes = [6, 14, 20]
//   encoder_preset = siglip-so400m
//
// Each file kind has a fixed key set; unknown or repeated keys are errors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tokcomp/flops.hpp"
#include "tokcomp/synth.hpp"
#include "tokcomp/types.hpp"

namespace tokcomp::config {

class KeyValueFile {
public:
    /// Throws InvalidConfig on syntax errors or duplicate keys.
    static KeyValueFile parse(std::string_view text, std::string origin = "<config>");
    static KeyValueFile load(const std::filesystem::path& path);

    /// Throws InvalidConfig naming the first key outside `allowed` (entries
    /// ending in '*' match any key with that prefix).
    void require_known(const std::set<std::string>& allowed) const;

    bool has(const std::string& key) const { return m_entries.count(key) != 0; }
    std::vector<std::string> keys() const;

    std::optional<double> get_double(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<std::size_t> get_count(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::vector<std::int64_t>> get_int_list(const std::string& key) const;
    std::optional<std::vector<double>> get_double_list(const std::string& key) const;

    const std::string& origin() const { return m_origin; }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    [[noreturn]] void fail(const std::string& key, const std::string& why) const;
    std::vector<std::string> list_items(const std::string& key) const;

    std::map<std::string, Entry> m_entries;
    std::string m_origin;
};

struct RunConfig {
    CompressionConfig compression;
    /// False when the file omits initial_frames; the input frame count is used.
    bool initial_frames_set = false;
    std::size_t text_tokens = 64;
    std::string encoder_preset = "siglip-so400m";
    std::string llm_preset = "qwen2-7b";
};

RunConfig parse_run_config(std::string_view text, std::string origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical text form; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& config);

/// Built-in preset names.
std::vector<std::string> builtin_presets();
/// Text of a built-in preset, or nullopt.
std::optional<std::string> builtin_preset_text(std::string_view name);

/// `name_or_path` is a built-in preset name or a path to a preset file
/// (relative paths resolve against `base_dir`).
EncoderPreset resolve_encoder_preset(const std::string& name_or_path, const std::filesystem::path& base_dir = {});
LlmPreset resolve_llm_preset(const std::string& name_or_path, const std::filesystem::path& base_dir = {});

EncoderPreset parse_encoder_preset(std::string_view text, std::string origin = "<preset>");
LlmPreset parse_llm_preset(std::string_view text, std::string origin = "<preset>");

synth::SynthSpec parse_synth_spec(std::string_view text, std::string origin = "<spec>");
synth::SynthSpec load_synth_spec(const std::filesystem::path& path);

}  // namespace tokcomp::config

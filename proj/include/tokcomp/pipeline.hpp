// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end run: merge passes, budgeted token selection, report, and the
// artifact directory with its manifest.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokcomp/config.hpp"
#include "tokcomp/frame_merge.hpp"
#include "tokcomp/report.hpp"
#include "tokcomp/spatial_select.hpp"
#include "tokcomp/types.hpp"

namespace tokcomp {

struct RunOptions {
    Schedule schedule = Schedule::Concurrent;
    /// Directory that relative preset paths resolve against.
    std::filesystem::path preset_dir;
    /// Skip the FLOPs section (no presets are resolved).
    bool skip_flops = false;
};

struct CompressionOutput {
    SelectionResult selection;
    CompressionReport report;
};

/// Throws ConfigConflict when initial_frames is set and differs from the
/// input frame count. A budget below one token per frame is only a warning.
CompressionOutput run_compress(const config::RunConfig& config, const FeatureTensor& features,
                               const AttentionScores& attention, const RunOptions& options = {});

/// FLOPs for a finished run; passes without an encoder layer count as
/// running after the encoder.
FlopsReport run_flops(const config::RunConfig& config, const CompressionReport& report,
                      const std::filesystem::path& preset_dir = {});

struct ArtifactEntry {
    std::string path;  // relative to the output directory
    std::size_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    int schema_version = 1;
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;  // role, path
    std::string output_dir;
    std::vector<ArtifactEntry> artifacts;
};

nlohmann::ordered_json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::ordered_json& doc);

std::string sha256_hex(const std::vector<char>& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes compressed_tokens.npy, token_index.npy, report.json and plots/*.csv.
/// Returns the artifact entries in write order.
std::vector<ArtifactEntry> write_outputs(const CompressionOutput& output, const std::filesystem::path& out_dir);

/// Adds entries for files already written under `out_dir`.
ArtifactEntry describe_artifact(const std::filesystem::path& out_dir, const std::string& relative);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Re-hashes every listed artifact. Returns the paths that are missing or
/// changed; empty when the directory matches its manifest.
std::vector<std::string> verify_manifest(const std::filesystem::path& out_dir);

}  // namespace tokcomp

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Run report: what every stage did, serialized as JSON with a fixed key
// order, plus CSV tables for plotting.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokcomp/flops.hpp"
#include "tokcomp/types.hpp"

namespace tokcomp {

inline constexpr int kReportSchemaVersion = 1;

struct PassReport {
    int layer = -1;
    double tau_seg = 0.0;
    double tau_merge = 0.0;
    std::size_t frames_in = 0;
    std::size_t frames_out = 0;
    std::vector<Segment> segments;  // over the pass input
    std::vector<double> similarities;
    std::vector<double> smoothed;
};

struct BudgetReport {
    std::size_t per_frame = 0;
    std::size_t requested = 0;
    std::size_t total_kept = 0;
    bool floor_binds = false;
    bool cap_binds = false;
};

struct HistogramReport {
    std::vector<std::size_t> uniform;
    std::vector<std::size_t> global_topk;
    std::vector<std::size_t> local_window;
    std::vector<std::size_t> engine;
    double tv_global_topk = 0.0;
    double tv_local_window = 0.0;
    double tv_engine = 0.0;
};

struct CompressionReport {
    int schema_version = kReportSchemaVersion;
    TensorShape input;
    double alpha = 0.0;
    double tau_seg = 0.0;
    double tau_merge = 0.0;
    double retain_ratio = 0.0;
    std::size_t initial_frames = 0;
    double weight_floor = 0.0;
    std::vector<PassReport> passes;
    std::vector<Segment> final_segments;
    std::vector<std::size_t> dynamic_frames;
    std::vector<std::size_t> static_frames;
    BudgetReport budget;
    std::vector<std::size_t> kept_per_frame;
    std::vector<std::vector<ProvenanceEntry>> provenance;
    HistogramReport histograms;
    std::optional<FlopsReport> flops;
    std::vector<std::string> warnings;
};

nlohmann::ordered_json to_json(const CompressionReport& report);
/// Throws InvalidConfig when the document does not follow the schema.
CompressionReport report_from_json(const nlohmann::ordered_json& doc);

std::string to_json_text(const CompressionReport& report);
CompressionReport load_report(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const FlopsReport& flops);

/// One RFC 4180 field.
std::string csv_field(const std::string& value);

/// Writes similarity.csv, position_histogram.csv and flops.csv into `dir`
/// and returns their paths. An empty report yields header-only files.
std::vector<std::filesystem::path> emit_plot_data(const CompressionReport& report, const std::filesystem::path& dir);

}  // namespace tokcomp

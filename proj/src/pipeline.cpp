// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/pipeline.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <fstream>
#include <limits>

#include "tokcomp/npy.hpp"
#include "tokcomp/oracle.hpp"

namespace tokcomp {

using nlohmann::ordered_json;

CompressionOutput run_compress(const config::RunConfig& cfg, const FeatureTensor& features,
                               const AttentionScores& attention, const RunOptions& options) {
    const CompressionConfig& cc = cfg.compression;
    validate(cc);
    check_annotates(attention, features);

    const std::size_t B = cfg.initial_frames_set ? cc.initial_frames : features.frames();
    if (B != features.frames()) {
        throw Error(ErrorCode::ConfigConflict, "initial_frames = " + std::to_string(B) + " but the input has " +
                                                   std::to_string(features.frames()) + " frames");
    }

    CompressionReport report;
    report.input = features.shape();
    report.alpha = cc.alpha;
    report.tau_seg = cc.tau_seg;
    report.tau_merge = cc.tau_merge;
    report.retain_ratio = cc.retain_ratio;
    report.initial_frames = B;
    report.weight_floor = cc.weight_floor;

    FeatureTensor current = features;
    AttentionScores scores = attention;
    FrameProvenance provenance = FrameProvenance::identity(B);
    SegmentList segments = SegmentList({Segment{0, B}}, B);

    for (std::size_t i = 0; i < cc.merge_passes.size(); ++i) {
        const double tau_seg = cc.pass_tau_seg(i);
        const double tau_merge = cc.pass_tau_merge(i);
        MergePassResult pass =
            merge_pass(current, cc.alpha, tau_seg, tau_merge, cc.weight_floor, &provenance, options.schedule);

        PassReport pr;
        pr.layer = cc.merge_passes[i].layer;
        pr.tau_seg = tau_seg;
        pr.tau_merge = tau_merge;
        pr.frames_in = current.frames();
        pr.frames_out = pass.features.frames();
        pr.segments = pass.input_segments.segments();
        pr.similarities = pass.pair_similarities;
        pr.smoothed = pass.smoothed_similarities;
        report.passes.push_back(std::move(pr));

        scores = propagate_attention(scores, pass.sources);
        current = std::move(pass.features);
        provenance = std::move(pass.provenance);
        segments = std::move(pass.segments);
    }

    const std::size_t N = current.frames();
    const std::size_t L = current.tokens_per_frame();
    const BudgetPlan plan = plan_budget(cc.retain_ratio, B, N, L);
    if (plan.floor_binds) {
        report.warnings.push_back(std::string(to_string(ErrorCode::ConfigConflict)) + ": budget " +
                                  std::to_string(plan.requested) + " is below one token for each of " +
                                  std::to_string(N) + " frames; keeping one token per frame");
    }
    if (plan.cap_binds) {
        report.warnings.push_back("budget " + std::to_string(plan.requested) + " exceeds the " +
                                  std::to_string(N * L) + " tokens left after merging; keeping every token");
    }

    CompressionOutput out;
    out.selection = select_tokens(current, scores, segments, plan.quotas, options.schedule);

    const DecoupledFrames split = decouple(segments);
    report.final_segments = segments.segments();
    report.dynamic_frames = split.dynamic_idx;
    report.static_frames = split.static_idx;
    report.budget = {plan.per_frame, plan.requested, out.selection.total_kept(), plan.floor_binds, plan.cap_binds};
    for (const auto& f : out.selection.frames) {
        report.kept_per_frame.push_back(f.tokens.size());
    }
    report.provenance = provenance.frames();

    std::vector<std::vector<std::size_t>> global(N);
    std::vector<std::vector<std::size_t>> local(N);
    for (std::size_t f = 0; f < N; ++f) {
        global[f] = global_topk_select(scores.row(f), plan.quotas[f]);
        local[f] = local_window_select(scores.row(f), plan.quotas[f]);
    }
    const auto uniform = oracle::uniform_histogram(L, N);
    const auto hg = oracle::position_histogram(global, L);
    const auto hl = oracle::position_histogram(local, L);
    const auto he = oracle::position_histogram(out.selection, L);
    report.histograms = {uniform.bins,
                         hg.bins,
                         hl.bins,
                         he.bins,
                         oracle::tv_distance(hg, uniform),
                         oracle::tv_distance(hl, uniform),
                         oracle::tv_distance(he, uniform)};

    out.report = std::move(report);
    if (!options.skip_flops) {
        out.report.flops = run_flops(cfg, out.report, options.preset_dir);
    }
    return out;
}

FlopsReport run_flops(const config::RunConfig& cfg, const CompressionReport& report,
                      const std::filesystem::path& preset_dir) {
    FlopsInputs in;
    in.encoder = config::resolve_encoder_preset(cfg.encoder_preset, preset_dir);
    in.llm = config::resolve_llm_preset(cfg.llm_preset, preset_dir);
    in.initial_frames = report.initial_frames;
    in.text_tokens = cfg.text_tokens;
    for (const auto& pass : report.passes) {
        if (pass.layer >= 0) {
            in.pass_layers.push_back(pass.layer);
            in.frames_after_pass.push_back(pass.frames_out);
        }
    }
    const double full = static_cast<double>(report.initial_frames) * static_cast<double>(report.input.tokens);
    in.kept_fraction = full > 0.0 ? static_cast<double>(report.budget.total_kept) / full : 1.0;
    return pipeline_report(in);
}

std::string sha256_hex(const std::vector<char>& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[md[i] >> 4];
        hex += kHex[md[i] & 0xF];
    }
    return hex;
}

namespace {

std::vector<char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
}

std::int32_t to_i32(std::size_t v) {
    if (v > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw Error(ErrorCode::UnsupportedShape, "index does not fit in int32");
    }
    return static_cast<std::int32_t>(v);
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

ArtifactEntry describe_artifact(const std::filesystem::path& out_dir, const std::string& relative) {
    const auto bytes = read_bytes(out_dir / relative);
    return {relative, bytes.size(), sha256_hex(bytes)};
}

std::vector<ArtifactEntry> write_outputs(const CompressionOutput& output, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
    }
    const auto& sel = output.selection;
    const std::size_t kept = sel.total_kept();

    const std::array<std::size_t, 2> token_shape{kept, sel.dim};
    npy::write_float32(out_dir / "compressed_tokens.npy", token_shape, sel.rows);

    std::vector<std::int32_t> index;
    index.reserve(2 * kept);
    for (const auto& f : sel.frames) {
        for (std::size_t p : f.tokens) {
            index.push_back(to_i32(f.frame));
            index.push_back(to_i32(p));
        }
    }
    const std::array<std::size_t, 2> index_shape{kept, 2};
    npy::write_int32(out_dir / "token_index.npy", index_shape, index);

    write_bytes(out_dir / "report.json", to_json_text(output.report));
    emit_plot_data(output.report, out_dir / "plots");

    std::vector<ArtifactEntry> entries;
    for (const char* rel : {"compressed_tokens.npy", "token_index.npy", "report.json", "plots/similarity.csv",
                            "plots/position_histogram.csv", "plots/flops.csv"}) {
        entries.push_back(describe_artifact(out_dir, rel));
    }
    return entries;
}

ordered_json to_json(const RunManifest& m) {
    ordered_json j;
    j["schema_version"] = m.schema_version;
    j["command"] = m.command;
    ordered_json inputs = ordered_json::object();
    for (const auto& [role, path] : m.inputs) {
        inputs[role] = path;
    }
    j["inputs"] = std::move(inputs);
    j["output_dir"] = m.output_dir;
    ordered_json arts = ordered_json::array();
    for (const auto& a : m.artifacts) {
        arts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"sha256", a.sha256}});
    }
    j["artifacts"] = std::move(arts);
    return j;
}

RunManifest manifest_from_json(const ordered_json& j) {
    try {
        RunManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        m.command = j.at("command").get<std::string>();
        for (const auto& [role, path] : j.at("inputs").items()) {
            m.inputs.emplace_back(role, path.get<std::string>());
        }
        m.output_dir = j.at("output_dir").get<std::string>();
        for (const auto& a : j.at("artifacts")) {
            m.artifacts.push_back({a.at("path").get<std::string>(), a.at("bytes").get<std::size_t>(),
                                   a.at("sha256").get<std::string>()});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("manifest does not match the schema: ") + e.what());
    }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir) {
    write_bytes(out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const std::filesystem::path& out_dir) {
    const auto bytes = read_bytes(out_dir / "manifest.json");
    ordered_json doc;
    try {
        doc = ordered_json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("manifest.json is not valid JSON: ") + e.what());
    }
    std::vector<std::string> bad;
    for (const auto& a : manifest_from_json(doc).artifacts) {
        const auto path = out_dir / a.path;
        if (!std::filesystem::is_regular_file(path)) {
            bad.push_back(a.path);
            continue;
        }
        const auto actual = describe_artifact(out_dir, a.path);
        if (actual.sha256 != a.sha256 || actual.bytes != a.bytes) {
            bad.push_back(a.path);
        }
    }
    return bad;
}

}  // namespace tokcomp

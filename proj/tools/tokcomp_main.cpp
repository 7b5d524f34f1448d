// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// tokcomp command line.
//
//   tokcomp compress --features F.npy --attention A.npy [--config run.cfg] --out DIR
//   tokcomp flops    [--config run.cfg] [--frames-after 20,12,8] [--kept-fraction 0.2] --out DIR
//   tokcomp synth    --config spec.cfg [--seed S] --out DIR
//   tokcomp report   --out DIR
//
// Exit status: 0 ok, 1 internal error, 2 usage, 3 bad input data,
// 4 bad configuration, 5 I/O failure or manifest mismatch.

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tokcomp/config.hpp"
#include "tokcomp/kernels.hpp"
#include "tokcomp/npy.hpp"
#include "tokcomp/pipeline.hpp"
#include "tokcomp/report.hpp"
#include "tokcomp/synth.hpp"

namespace fs = std::filesystem;
using namespace tokcomp;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kInput = 3, kConfig = 4, kOutput = 5 };

int exit_for(const Error& e) {
    switch (classify(e.code())) {
        case ErrorClass::Input:
            return kInput;
        case ErrorClass::Config:
            return kConfig;
        case ErrorClass::Output:
            return kOutput;
    }
    return kInternal;
}

struct Options {
    std::string config;
    std::string features;
    std::string attention;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool sequential = false;
    std::vector<std::size_t> frames_after;
    std::optional<double> kept_fraction;
};

config::RunConfig load_config(const Options& o) {
    return o.config.empty() ? config::RunConfig{} : config::load_run_config(o.config);
}

fs::path preset_dir(const Options& o) { return o.config.empty() ? fs::path{} : fs::path(o.config).parent_path(); }

void require_file(const std::string& role, const std::string& path) {
    if (!fs::is_regular_file(path)) {
        throw Error(ErrorCode::MissingInput, role + " file '" + path + "' does not exist");
    }
}

void finish_manifest(RunManifest manifest, const Options& o, std::vector<ArtifactEntry> artifacts) {
    manifest.output_dir = o.out;
    manifest.artifacts = std::move(artifacts);
    write_manifest(manifest, o.out);
}

int cmd_compress(const Options& o) {
    require_file("features", o.features);
    require_file("attention", o.attention);
    if (!o.config.empty()) {
        require_file("config", o.config);
    }
    const config::RunConfig cfg = load_config(o);
    const FeatureTensor features = npy::load_features(o.features);
    const AttentionScores attention = npy::load_attention(o.attention);

    RunOptions run;
    run.schedule = o.sequential ? Schedule::Sequential : Schedule::Concurrent;
    run.preset_dir = preset_dir(o);
    const CompressionOutput result = run_compress(cfg, features, attention, run);

    RunManifest manifest;
    manifest.command = "compress";
    manifest.inputs = {{"features", o.features}, {"attention", o.attention}, {"config", o.config}};
    finish_manifest(manifest, o, write_outputs(result, o.out));

    const auto& r = result.report;
    for (const auto& w : r.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::cout << "frames " << r.input.frames;
    for (const auto& p : r.passes) {
        std::cout << " -> " << p.frames_out;
    }
    std::cout << ", kept " << r.budget.total_kept << " of " << r.input.frames * r.input.tokens << " tokens"
              << " (K_f " << r.budget.per_frame << ")\n";
    if (r.flops) {
        std::printf("flops ratio %.4f (%.2f T -> %.2f T)\n", r.flops->ratio, r.flops->baseline.total / 1e12,
                    r.flops->compressed.total / 1e12);
    }
    std::cout << "kernels " << kernels::active_kernels().name << "\n";
    return kOk;
}

int cmd_flops(const Options& o) {
    const config::RunConfig cfg = load_config(o);
    const auto& cc = cfg.compression;
    validate(cc);

    FlopsInputs in;
    in.encoder = config::resolve_encoder_preset(cfg.encoder_preset, preset_dir(o));
    in.llm = config::resolve_llm_preset(cfg.llm_preset, preset_dir(o));
    in.initial_frames = cc.initial_frames;
    in.text_tokens = cfg.text_tokens;
    in.kept_fraction = o.kept_fraction.value_or(cc.retain_ratio);
    std::size_t placed = 0;
    for (const auto& p : cc.merge_passes) {
        if (p.layer >= 0) {
            in.pass_layers.push_back(p.layer);
            ++placed;
        }
    }
    if (o.frames_after.empty()) {
        in.frames_after_pass.assign(placed, cc.initial_frames);
    } else {
        in.frames_after_pass = o.frames_after;
    }
    const FlopsReport flops = pipeline_report(in);

    CompressionReport carrier;
    carrier.flops = flops;
    fs::create_directories(o.out);
    {
        std::ofstream out(fs::path(o.out) / "flops.json", std::ios::binary | std::ios::trunc);
        out << to_json(flops).dump(2) << "\n";
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write flops.json");
        }
    }
    emit_plot_data(carrier, fs::path(o.out) / "plots");

    RunManifest manifest;
    manifest.command = "flops";
    manifest.inputs = {{"config", o.config}};
    finish_manifest(manifest, o, {describe_artifact(o.out, "flops.json"), describe_artifact(o.out, "plots/flops.csv")});

    std::printf("baseline   encoder %.3f T  prefill %.3f T  total %.3f T\n", flops.baseline.encoder / 1e12,
                flops.baseline.prefill / 1e12, flops.baseline.total / 1e12);
    std::printf("compressed encoder %.3f T  prefill %.3f T  total %.3f T\n", flops.compressed.encoder / 1e12,
                flops.compressed.prefill / 1e12, flops.compressed.total / 1e12);
    std::printf("ratio %.4f\n", flops.ratio);
    return kOk;
}

int cmd_synth(const Options& o) {
    synth::SynthSpec spec = o.config.empty() ? synth::SynthSpec{} : config::load_synth_spec(o.config);
    if (o.seed) {
        spec.seed = *o.seed;
    }
    const synth::SynthVideo video = synth::synth_video(spec);
    fs::create_directories(o.out);

    const auto& s = video.features.shape();
    const std::array<std::size_t, 3> fshape{s.frames, s.tokens, s.dim};
    const std::array<std::size_t, 2> ashape{s.frames, s.tokens};
    npy::write_float32(fs::path(o.out) / "features.npy", fshape, video.features.data());
    npy::write_float32(fs::path(o.out) / "attention.npy", ashape, video.attention.data());

    RunManifest manifest;
    manifest.command = "synth";
    manifest.inputs = {{"spec", o.config}, {"seed", std::to_string(spec.seed)}};
    finish_manifest(manifest, o,
                    {describe_artifact(o.out, "features.npy"), describe_artifact(o.out, "attention.npy")});
    std::cout << "wrote " << s.frames << "x" << s.tokens << "x" << s.dim << " features, seed " << spec.seed << "\n";
    return kOk;
}

int cmd_report(const Options& o) {
    const auto bad = verify_manifest(o.out);
    for (const auto& path : bad) {
        std::cerr << "error: artifact '" << path << "' is missing or does not match its hash\n";
    }
    if (!bad.empty()) {
        return kOutput;
    }
    const fs::path report_path = fs::path(o.out) / "report.json";
    if (!fs::exists(report_path)) {
        std::cout << "manifest ok\n";
        return kOk;
    }
    const CompressionReport r = load_report(report_path);
    std::cout << "manifest ok\n";
    std::cout << "input " << r.input.frames << "x" << r.input.tokens << "x" << r.input.dim << "\n";
    for (std::size_t i = 0; i < r.passes.size(); ++i) {
        const auto& p = r.passes[i];
        std::cout << "pass " << i << " (layer " << p.layer << "): " << p.frames_in << " -> " << p.frames_out
                  << " frames, " << p.segments.size() << " segments\n";
    }
    std::cout << "K_f " << r.budget.per_frame << ", kept " << r.budget.total_kept << "\n";
    std::printf("TV to uniform: global top-K %.4f, local window %.4f\n", r.histograms.tv_global_topk,
                r.histograms.tv_local_window);
    if (r.flops) {
        std::printf("flops ratio %.4f\n", r.flops->ratio);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Video token compression: frame merging and budgeted token selection"};
    app.require_subcommand(1);
    Options o;

    auto* compress = app.add_subcommand("compress", "Compress a feature tensor");
    compress->add_option("--features", o.features, "(N, L, D) float32 NPY")->required();
    compress->add_option("--attention", o.attention, "(N, L) or (N, L, L) float32 NPY")->required();
    compress->add_option("--config", o.config, "Run config file");
    compress->add_option("--out", o.out, "Output directory")->required();
    compress->add_flag("--sequential", o.sequential, "Run dynamic and static selection on one thread");

    auto* flops = app.add_subcommand("flops", "FLOPs of a merge schedule");
    flops->add_option("--config", o.config, "Run config file");
    flops->add_option("--frames-after", o.frames_after, "Frame count after each placed merge pass")->delimiter(',');
    flops->add_option("--kept-fraction", o.kept_fraction, "Fraction of visual tokens reaching the LLM");
    flops->add_option("--out", o.out, "Output directory")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic feature/attention pair");
    synth->add_option("--config", o.config, "Synthetic spec file");
    synth->add_option("--seed", o.seed, "Override the spec seed");
    synth->add_option("--out", o.out, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Verify an output directory and summarize its report");
    report->add_option("--out", o.out, "Output directory of an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*compress) return cmd_compress(o);
        if (*flops) return cmd_flops(o);
        if (*synth) return cmd_synth(o);
        if (*report) return cmd_report(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOutput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tokcomp {

using nlohmann::ordered_json;

namespace {

ordered_json segments_json(const std::vector<Segment>& segments) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : segments) {
        arr.push_back({s.begin, s.end});
    }
    return arr;
}

std::vector<Segment> segments_from(const ordered_json& arr) {
    std::vector<Segment> out;
    for (const auto& s : arr) {
        out.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
    }
    return out;
}

ordered_json breakdown_json(const FlopsBreakdown& b) {
    ordered_json j;
    j["encoder"] = b.encoder;
    j["prefill"] = b.prefill;
    j["total"] = b.total;
    j["llm_visual_tokens"] = b.llm_visual_tokens;
    return j;
}

FlopsBreakdown breakdown_from(const ordered_json& j) {
    return {j.at("encoder").get<double>(), j.at("prefill").get<double>(), j.at("total").get<double>(),
            j.at("llm_visual_tokens").get<std::size_t>()};
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot create '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

}  // namespace

ordered_json to_json(const FlopsReport& flops) {
    ordered_json j;
    j["encoder_preset"] = flops.encoder_preset;
    j["llm_preset"] = flops.llm_preset;
    j["text_tokens"] = flops.text_tokens;
    j["baseline"] = breakdown_json(flops.baseline);
    j["compressed"] = breakdown_json(flops.compressed);
    j["ratio"] = flops.ratio;
    return j;
}

ordered_json to_json(const CompressionReport& r) {
    ordered_json j;
    j["schema_version"] = r.schema_version;
    j["input"] = {{"frames", r.input.frames}, {"tokens_per_frame", r.input.tokens}, {"dim", r.input.dim}};
    j["config"] = {{"alpha", r.alpha},
                   {"tau_seg", r.tau_seg},
                   {"tau_merge", r.tau_merge},
                   {"retain_ratio", r.retain_ratio},
                   {"initial_frames", r.initial_frames},
                   {"weight_floor", r.weight_floor}};
    ordered_json passes = ordered_json::array();
    for (const auto& p : r.passes) {
        ordered_json pj;
        pj["layer"] = p.layer;
        pj["tau_seg"] = p.tau_seg;
        pj["tau_merge"] = p.tau_merge;
        pj["frames_in"] = p.frames_in;
        pj["frames_out"] = p.frames_out;
        pj["segments"] = segments_json(p.segments);
        pj["similarities"] = p.similarities;
        pj["smoothed"] = p.smoothed;
        passes.push_back(std::move(pj));
    }
    j["passes"] = std::move(passes);
    j["segments"] = segments_json(r.final_segments);
    j["dynamic_frames"] = r.dynamic_frames;
    j["static_frames"] = r.static_frames;
    j["budget"] = {{"per_frame", r.budget.per_frame},
                   {"requested", r.budget.requested},
                   {"total_kept", r.budget.total_kept},
                   {"floor_binds", r.budget.floor_binds},
                   {"cap_binds", r.budget.cap_binds}};
    j["kept_per_frame"] = r.kept_per_frame;
    ordered_json prov = ordered_json::array();
    for (const auto& frame : r.provenance) {
        ordered_json fj = ordered_json::array();
        for (const auto& e : frame) {
            fj.push_back({{"source", e.source}, {"weight", e.weight}});
        }
        prov.push_back(std::move(fj));
    }
    j["provenance"] = std::move(prov);
    j["histograms"] = {{"uniform", r.histograms.uniform},
                       {"global_topk", r.histograms.global_topk},
                       {"local_window", r.histograms.local_window},
                       {"engine", r.histograms.engine},
                       {"tv_to_uniform",
                        {{"global_topk", r.histograms.tv_global_topk},
                         {"local_window", r.histograms.tv_local_window},
                         {"engine", r.histograms.tv_engine}}}};
    j["flops"] = r.flops ? to_json(*r.flops) : ordered_json(nullptr);
    j["warnings"] = r.warnings;
    return j;
}

CompressionReport report_from_json(const ordered_json& j) {
    try {
        CompressionReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw Error(ErrorCode::InvalidConfig, "unsupported report schema_version " +
                                                      std::to_string(r.schema_version));
        }
        const auto& in = j.at("input");
        r.input = {in.at("frames").get<std::size_t>(), in.at("tokens_per_frame").get<std::size_t>(),
                   in.at("dim").get<std::size_t>()};
        const auto& c = j.at("config");
        r.alpha = c.at("alpha").get<double>();
        r.tau_seg = c.at("tau_seg").get<double>();
        r.tau_merge = c.at("tau_merge").get<double>();
        r.retain_ratio = c.at("retain_ratio").get<double>();
        r.initial_frames = c.at("initial_frames").get<std::size_t>();
        r.weight_floor = c.at("weight_floor").get<double>();
        for (const auto& pj : j.at("passes")) {
            PassReport p;
            p.layer = pj.at("layer").get<int>();
            p.tau_seg = pj.at("tau_seg").get<double>();
            p.tau_merge = pj.at("tau_merge").get<double>();
            p.frames_in = pj.at("frames_in").get<std::size_t>();
            p.frames_out = pj.at("frames_out").get<std::size_t>();
            p.segments = segments_from(pj.at("segments"));
            p.similarities = pj.at("similarities").get<std::vector<double>>();
            p.smoothed = pj.at("smoothed").get<std::vector<double>>();
            r.passes.push_back(std::move(p));
        }
        r.final_segments = segments_from(j.at("segments"));
        r.dynamic_frames = j.at("dynamic_frames").get<std::vector<std::size_t>>();
        r.static_frames = j.at("static_frames").get<std::vector<std::size_t>>();
        const auto& b = j.at("budget");
        r.budget = {b.at("per_frame").get<std::size_t>(), b.at("requested").get<std::size_t>(),
                    b.at("total_kept").get<std::size_t>(), b.at("floor_binds").get<bool>(),
                    b.at("cap_binds").get<bool>()};
        r.kept_per_frame = j.at("kept_per_frame").get<std::vector<std::size_t>>();
        for (const auto& fj : j.at("provenance")) {
            std::vector<ProvenanceEntry> frame;
            for (const auto& e : fj) {
                frame.push_back({e.at("source").get<std::size_t>(), e.at("weight").get<double>()});
            }
            r.provenance.push_back(std::move(frame));
        }
        const auto& h = j.at("histograms");
        r.histograms.uniform = h.at("uniform").get<std::vector<std::size_t>>();
        r.histograms.global_topk = h.at("global_topk").get<std::vector<std::size_t>>();
        r.histograms.local_window = h.at("local_window").get<std::vector<std::size_t>>();
        r.histograms.engine = h.at("engine").get<std::vector<std::size_t>>();
        const auto& tv = h.at("tv_to_uniform");
        r.histograms.tv_global_topk = tv.at("global_topk").get<double>();
        r.histograms.tv_local_window = tv.at("local_window").get<double>();
        r.histograms.tv_engine = tv.at("engine").get<double>();
        if (const auto& f = j.at("flops"); !f.is_null()) {
            FlopsReport fr;
            fr.encoder_preset = f.at("encoder_preset").get<std::string>();
            fr.llm_preset = f.at("llm_preset").get<std::string>();
            fr.text_tokens = f.at("text_tokens").get<std::size_t>();
            fr.baseline = breakdown_from(f.at("baseline"));
            fr.compressed = breakdown_from(f.at("compressed"));
            fr.ratio = f.at("ratio").get<double>();
            r.flops = fr;
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("report JSON does not match the schema: ") + e.what());
    }
}

std::string to_json_text(const CompressionReport& report) { return to_json(report).dump(2) + "\n"; }

CompressionReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return report_from_json(doc);
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::vector<std::filesystem::path> emit_plot_data(const CompressionReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
    }

    // Rows use CRLF line breaks as RFC 4180 specifies.
    std::ostringstream sim;
    sim << "pass,layer,frame_index,similarity,smoothed,boundary\r\n";
    for (std::size_t p = 0; p < r.passes.size(); ++p) {
        const auto& pass = r.passes[p];
        std::vector<char> starts(pass.frames_in + 1, 0);
        for (std::size_t s = 1; s < pass.segments.size(); ++s) {
            if (pass.segments[s].begin < starts.size()) starts[pass.segments[s].begin] = 1;
        }
        for (std::size_t t = 0; t < pass.similarities.size(); ++t) {
            const double smoothed = t < pass.smoothed.size() ? pass.smoothed[t] : pass.similarities[t];
            sim << p << ',' << pass.layer << ',' << (t + 1) << ',' << format_number(pass.similarities[t]) << ','
                << format_number(smoothed) << ',' << (t + 1 < starts.size() && starts[t + 1] ? 1 : 0) << "\r\n";
        }
    }

    std::ostringstream hist;
    hist << "position,uniform,global_topk,local_window,engine\r\n";
    const auto& h = r.histograms;
    auto at = [](const std::vector<std::size_t>& v, std::size_t i) { return i < v.size() ? v[i] : std::size_t{0}; };
    for (std::size_t i = 0; i < h.uniform.size(); ++i) {
        hist << i << ',' << at(h.uniform, i) << ',' << at(h.global_topk, i) << ',' << at(h.local_window, i) << ','
             << at(h.engine, i) << "\r\n";
    }

    std::ostringstream flops;
    flops << "run,component,flops,encoder_preset,llm_preset\r\n";
    if (r.flops) {
        const auto& f = *r.flops;
        const std::string presets = csv_field(f.encoder_preset) + ',' + csv_field(f.llm_preset);
        for (const auto& [run, b] : {std::pair<std::string, FlopsBreakdown>{"baseline", f.baseline},
                                     std::pair<std::string, FlopsBreakdown>{"compressed", f.compressed}}) {
            flops << run << ",encoder," << format_number(b.encoder) << ',' << presets << "\r\n";
            flops << run << ",prefill," << format_number(b.prefill) << ',' << presets << "\r\n";
            flops << run << ",total," << format_number(b.total) << ',' << presets << "\r\n";
        }
    }

    std::vector<std::filesystem::path> written{dir / "similarity.csv", dir / "position_histogram.csv",
                                               dir / "flops.csv"};
    write_text(written[0], sim.str());
    write_text(written[1], hist.str());
    write_text(written[2], flops.str());
    return written;
}

}  // namespace tokcomp

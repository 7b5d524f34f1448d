// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tokcomp::config {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && text.front() == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || begin == end) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, std::string origin) {
    KeyValueFile file;
    file.m_origin = std::move(origin);
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = file.m_origin + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, where + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (!valid_key(key)) {
            throw Error(ErrorCode::InvalidConfig, where + ": invalid key '" + key + "'");
        }
        if (value.empty()) {
            throw Error(ErrorCode::InvalidConfig, where + ": key '" + key + "' has no value");
        }
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (!file.m_entries.emplace(key, Entry{value, line_no}).second) {
            throw Error(ErrorCode::InvalidConfig, where + ": duplicate key '" + key + "'");
        }
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) { return parse(read_text(path), path.string()); }

void KeyValueFile::require_known(const std::set<std::string>& allowed) const {
    for (const auto& [key, entry] : m_entries) {
        bool ok = allowed.count(key) != 0;
        for (const auto& pattern : allowed) {
            if (!ok && !pattern.empty() && pattern.back() == '*' &&
                key.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0) {
                ok = true;
            }
        }
        if (!ok) {
            throw Error(ErrorCode::InvalidConfig,
                        m_origin + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
        }
    }
}

std::vector<std::string> KeyValueFile::keys() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : m_entries) {
        out.push_back(key);
    }
    return out;
}

void KeyValueFile::fail(const std::string& key, const std::string& why) const {
    const auto it = m_entries.find(key);
    const std::string where = it == m_entries.end() ? m_origin : m_origin + ":" + std::to_string(it->second.line);
    throw Error(ErrorCode::InvalidConfig, where + ": '" + key + "' " + why);
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
    const auto it = m_entries.find(key);
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    const auto v = parse_number<double>(it->second.value);
    if (!v || !std::isfinite(*v)) {
        fail(key, "must be a finite number, got '" + it->second.value + "'");
    }
    return v;
}

std::optional<std::int64_t> KeyValueFile::get_int(const std::string& key) const {
    const auto it = m_entries.find(key);
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    const auto v = parse_number<std::int64_t>(it->second.value);
    if (!v) {
        fail(key, "must be an integer, got '" + it->second.value + "'");
    }
    return v;
}

std::optional<std::size_t> KeyValueFile::get_count(const std::string& key) const {
    const auto v = get_int(key);
    if (v && *v < 0) {
        fail(key, "must be non-negative");
    }
    return v ? std::optional<std::size_t>(static_cast<std::size_t>(*v)) : std::nullopt;
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
    const auto it = m_entries.find(key);
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    if (it->second.value == "true") return true;
    if (it->second.value == "false") return false;
    fail(key, "must be true or false");
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
    const auto it = m_entries.find(key);
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

std::vector<std::string> KeyValueFile::list_items(const std::string& key) const {
    const std::string& raw = m_entries.at(key).value;
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
        fail(key, "must be a list like [1, 2, 3]");
    }
    std::vector<std::string> items;
    std::string_view body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    if (body.empty()) {
        return items;
    }
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        const auto item = trim(body.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (item.empty()) {
            fail(key, "has an empty list element");
        }
        items.emplace_back(item);
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return items;
}

std::optional<std::vector<std::int64_t>> KeyValueFile::get_int_list(const std::string& key) const {
    if (!has(key)) {
        return std::nullopt;
    }
    std::vector<std::int64_t> out;
    for (const auto& item : list_items(key)) {
        const auto v = parse_number<std::int64_t>(item);
        if (!v) {
            fail(key, "element '" + item + "' is not an integer");
        }
        out.push_back(*v);
    }
    return out;
}

std::optional<std::vector<double>> KeyValueFile::get_double_list(const std::string& key) const {
    if (!has(key)) {
        return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& item : list_items(key)) {
        const auto v = parse_number<double>(item);
        if (!v || !std::isfinite(*v)) {
            fail(key, "element '" + item + "' is not a finite number");
        }
        out.push_back(*v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run config

RunConfig parse_run_config(std::string_view text, std::string origin) {
    const KeyValueFile kv = KeyValueFile::parse(text, std::move(origin));
    kv.require_known({"alpha", "tau_seg", "tau_merge", "retain_ratio", "initial_frames", "merge_passes",
                      "weight_floor", "text_tokens", "encoder_preset", "llm_preset", "pass.*"});
    RunConfig rc;
    CompressionConfig& c = rc.compression;
    c.alpha = kv.get_double("alpha").value_or(c.alpha);
    c.tau_seg = kv.get_double("tau_seg").value_or(c.tau_seg);
    c.tau_merge = kv.get_double("tau_merge").value_or(c.tau_merge);
    c.retain_ratio = kv.get_double("retain_ratio").value_or(c.retain_ratio);
    c.weight_floor = kv.get_double("weight_floor").value_or(c.weight_floor);
    if (const auto b = kv.get_count("initial_frames")) {
        c.initial_frames = *b;
        rc.initial_frames_set = true;
    }
    if (const auto layers = kv.get_int_list("merge_passes")) {
        c.merge_passes.clear();
        for (std::int64_t layer : *layers) {
            if (layer < -1 || layer > 100000) {
                throw Error(ErrorCode::InvalidConfig, kv.origin() + ": merge pass layer " + std::to_string(layer) +
                                                          " out of range (use -1 for an unplaced pass)");
            }
            c.merge_passes.push_back(MergePassConfig{static_cast<int>(layer), std::nullopt, std::nullopt});
        }
    }
    for (const auto& key : kv.keys()) {
        if (key.rfind("pass.", 0) != 0) {
            continue;
        }
        // pass.<index>.tau_seg | pass.<index>.tau_merge
        const auto dot = key.find('.', 5);
        std::optional<std::size_t> index;
        if (dot != std::string::npos) {
            index = parse_number<std::size_t>(std::string_view(key).substr(5, dot - 5));
        }
        const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
        if (!index || *index >= c.merge_passes.size() || (field != "tau_seg" && field != "tau_merge")) {
            throw Error(ErrorCode::InvalidConfig,
                        kv.origin() + ": unknown key '" + key + "' (expected pass.<i>.tau_seg or pass.<i>.tau_merge " +
                            "with i < number of merge passes)");
        }
        auto& pass = c.merge_passes[*index];
        (field == "tau_seg" ? pass.tau_seg : pass.tau_merge) = kv.get_double(key);
    }
    rc.text_tokens = kv.get_count("text_tokens").value_or(rc.text_tokens);
    rc.encoder_preset = kv.get_string("encoder_preset").value_or(rc.encoder_preset);
    rc.llm_preset = kv.get_string("llm_preset").value_or(rc.llm_preset);
    validate(c);
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text(path), path.string());
}

std::string format_run_config(const RunConfig& rc) {
    const CompressionConfig& c = rc.compression;
    std::ostringstream out;
    out << "alpha = " << format_double(c.alpha) << "\n";
    out << "tau_seg = " << format_double(c.tau_seg) << "\n";
    out << "tau_merge = " << format_double(c.tau_merge) << "\n";
    out << "retain_ratio = " << format_double(c.retain_ratio) << "\n";
    if (rc.initial_frames_set) {
        out << "initial_frames = " << c.initial_frames << "\n";
    }
    out << "merge_passes = [";
    for (std::size_t i = 0; i < c.merge_passes.size(); ++i) {
        out << (i ? ", " : "") << c.merge_passes[i].layer;
    }
    out << "]\n";
    for (std::size_t i = 0; i < c.merge_passes.size(); ++i) {
        if (c.merge_passes[i].tau_seg) {
            out << "pass." << i << ".tau_seg = " << format_double(*c.merge_passes[i].tau_seg) << "\n";
        }
        if (c.merge_passes[i].tau_merge) {
            out << "pass." << i << ".tau_merge = " << format_double(*c.merge_passes[i].tau_merge) << "\n";
        }
    }
    out << "weight_floor = " << format_double(c.weight_floor) << "\n";
    out << "text_tokens = " << rc.text_tokens << "\n";
    out << "encoder_preset = " << rc.encoder_preset << "\n";
    out << "llm_preset = " << rc.llm_preset << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Public architecture constants. The copies under presets/ must stay in sync
// (checked by the config tests).
struct BuiltinPreset {
    std::string_view name;
    std::string_view text;
};

constexpr BuiltinPreset kBuiltins[] = {
    {"siglip-so400m",
     "# SigLIP-SO400M/14 at 384px as used by LLaVA-OneVision.\n"
     "# Attention is costed over all frames as one sequence; the projector\n"
     "# pools the 27x27 patch grid to 14x14 tokens per frame for the LLM.\n"
     "kind = encoder\n"
     "name = siglip-so400m\n"
     "layers = 27\n"
     "hidden = 1152\n"
     "ffn = 4304\n"
     "tokens_per_frame = 729\n"
     "attention_scope = joint\n"
     "llm_tokens_per_frame = 196\n"},
    {"siglip-so400m-per-frame",
     "# Same encoder, with attention costed frame by frame.\n"
     "kind = encoder\n"
     "name = siglip-so400m-per-frame\n"
     "layers = 27\n"
     "hidden = 1152\n"
     "ffn = 4304\n"
     "tokens_per_frame = 729\n"
     "attention_scope = per_frame\n"
     "llm_tokens_per_frame = 196\n"},
    {"qwen2-7b",
     "# Qwen2-7B decoder (LLaVA-OneVision-7B language model).\n"
     "kind = llm\n"
     "name = qwen2-7b\n"
     "layers = 28\n"
     "hidden = 3584\n"
     "ffn = 18944\n"},
    {"qwen2-0.5b",
     "# Qwen2-0.5B decoder (LLaVA-OneVision-0.5B language model).\n"
     "kind = llm\n"
     "name = qwen2-0.5b\n"
     "layers = 24\n"
     "hidden = 896\n"
     "ffn = 4864\n"},
};

TransformerShape read_shape(const KeyValueFile& kv) {
    TransformerShape shape;
    for (const char* key : {"layers", "hidden", "ffn"}) {
        if (!kv.has(key)) {
            throw Error(ErrorCode::InvalidConfig, kv.origin() + ": missing required key '" + key + "'");
        }
    }
    shape.layers = *kv.get_count("layers");
    shape.hidden = *kv.get_count("hidden");
    shape.ffn = *kv.get_count("ffn");
    return shape;
}

void expect_kind(const KeyValueFile& kv, std::string_view kind) {
    const auto k = kv.get_string("kind");
    if (!k || *k != kind) {
        throw Error(ErrorCode::InvalidConfig, kv.origin() + ": expected 'kind = " + std::string(kind) + "'");
    }
}

std::string preset_text(const std::string& name_or_path, const std::filesystem::path& base_dir,
                        std::string& origin) {
    if (auto text = builtin_preset_text(name_or_path)) {
        origin = "builtin:" + name_or_path;
        return *text;
    }
    std::filesystem::path path(name_or_path);
    if (path.is_relative() && !base_dir.empty()) {
        path = base_dir / path;
    }
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::InvalidConfig,
                    "unknown preset '" + name_or_path + "' (not a built-in name and no such file)");
    }
    origin = path.string();
    return read_text(path);
}

}  // namespace

std::vector<std::string> builtin_presets() {
    std::vector<std::string> out;
    for (const auto& p : kBuiltins) {
        out.emplace_back(p.name);
    }
    return out;
}

std::optional<std::string> builtin_preset_text(std::string_view name) {
    for (const auto& p : kBuiltins) {
        if (p.name == name) {
            return std::string(p.text);
        }
    }
    return std::nullopt;
}

EncoderPreset parse_encoder_preset(std::string_view text, std::string origin) {
    const KeyValueFile kv = KeyValueFile::parse(text, std::move(origin));
    kv.require_known({"kind", "name", "layers", "hidden", "ffn", "tokens_per_frame", "attention_scope",
                      "llm_tokens_per_frame"});
    expect_kind(kv, "encoder");
    EncoderPreset p;
    p.name = kv.get_string("name").value_or("custom-encoder");
    p.shape = read_shape(kv);
    if (!kv.has("tokens_per_frame")) {
        throw Error(ErrorCode::InvalidConfig, kv.origin() + ": missing required key 'tokens_per_frame'");
    }
    p.tokens_per_frame = *kv.get_count("tokens_per_frame");
    const std::string scope = kv.get_string("attention_scope").value_or("per_frame");
    if (scope == "per_frame") {
        p.scope = AttentionScope::PerFrame;
    } else if (scope == "joint") {
        p.scope = AttentionScope::Joint;
    } else {
        throw Error(ErrorCode::InvalidConfig, kv.origin() + ": attention_scope must be per_frame or joint");
    }
    p.llm_tokens_per_frame = kv.get_count("llm_tokens_per_frame").value_or(p.tokens_per_frame);
    return p;
}

LlmPreset parse_llm_preset(std::string_view text, std::string origin) {
    const KeyValueFile kv = KeyValueFile::parse(text, std::move(origin));
    kv.require_known({"kind", "name", "layers", "hidden", "ffn"});
    expect_kind(kv, "llm");
    return LlmPreset{kv.get_string("name").value_or("custom-llm"), read_shape(kv)};
}

EncoderPreset resolve_encoder_preset(const std::string& name_or_path, const std::filesystem::path& base_dir) {
    std::string origin;
    const std::string text = preset_text(name_or_path, base_dir, origin);
    return parse_encoder_preset(text, origin);
}

LlmPreset resolve_llm_preset(const std::string& name_or_path, const std::filesystem::path& base_dir) {
    std::string origin;
    const std::string text = preset_text(name_or_path, base_dir, origin);
    return parse_llm_preset(text, origin);
}

// ---------------------------------------------------------------------------
// Synthetic fixture specs

synth::SynthSpec parse_synth_spec(std::string_view text, std::string origin) {
    const KeyValueFile kv = KeyValueFile::parse(text, std::move(origin));
    kv.require_known({"seed", "tokens", "dim", "block_lengths", "block_similarity", "sink_columns", "sink_factor"});
    synth::SynthSpec spec;
    if (const auto seed = kv.get_int("seed")) {
        spec.seed = static_cast<std::uint64_t>(*seed);
    }
    spec.tokens = kv.get_count("tokens").value_or(spec.tokens);
    spec.dim = kv.get_count("dim").value_or(spec.dim);
    auto to_counts = [&](const std::string& key, const std::vector<std::int64_t>& v) {
        std::vector<std::size_t> out;
        for (auto x : v) {
            if (x < 0) {
                throw Error(ErrorCode::InvalidSpec, kv.origin() + ": '" + key + "' entries must be non-negative");
            }
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    };
    if (const auto v = kv.get_int_list("block_lengths")) spec.block_lengths = to_counts("block_lengths", *v);
    if (const auto v = kv.get_double_list("block_similarity")) spec.block_similarity = *v;
    if (const auto v = kv.get_int_list("sink_columns")) spec.sink_columns = to_counts("sink_columns", *v);
    spec.sink_factor = kv.get_double("sink_factor").value_or(spec.sink_factor);
    synth::validate(spec);
    return spec;
}

synth::SynthSpec load_synth_spec(const std::filesystem::path& path) {
    return parse_synth_spec(read_text(path), path.string());
}

}  // namespace tokcomp::config

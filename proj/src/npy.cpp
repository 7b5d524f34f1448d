// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "tokcomp/npy.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <string_view>

#include "tokcomp/spatial_select.hpp"

namespace tokcomp::npy {

static_assert(std::endian::native == std::endian::little, "npy I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic{"\x93NUMPY", 6};
constexpr std::size_t kAlign = 64;

[[noreturn]] void corrupt(const std::string& msg) { throw Error(ErrorCode::CorruptHeader, msg); }

// Recursive-descent parser for the Python dict literal in the header.
class DictParser {
public:
    explicit DictParser(std::string_view text) : m_text(text) {}

    Header parse() {
        Header h;
        bool have_descr = false;
        bool have_order = false;
        bool have_shape = false;
        skip_ws();
        expect('{');
        skip_ws();
        while (!peek('}')) {
            const std::string key = parse_string();
            skip_ws();
            expect(':');
            skip_ws();
            if (key == "descr") {
                if (have_descr) corrupt("duplicate key 'descr'");
                h.descr = parse_string();
                have_descr = true;
            } else if (key == "fortran_order") {
                if (have_order) corrupt("duplicate key 'fortran_order'");
                h.fortran_order = parse_bool();
                have_order = true;
            } else if (key == "shape") {
                if (have_shape) corrupt("duplicate key 'shape'");
                h.shape = parse_shape();
                have_shape = true;
            } else {
                corrupt("unexpected header key '" + key + "'");
            }
            skip_ws();
            if (peek(',')) {
                ++m_pos;
                skip_ws();
            } else if (!peek('}')) {
                corrupt("expected ',' or '}' in header dict");
            }
        }
        expect('}');
        skip_ws();
        if (m_pos != m_text.size()) {
            corrupt("trailing characters after header dict");
        }
        if (!have_descr || !have_order || !have_shape) {
            corrupt("header must define 'descr', 'fortran_order' and 'shape'");
        }
        return h;
    }

private:
    bool peek(char c) const { return m_pos < m_text.size() && m_text[m_pos] == c; }

    void expect(char c) {
        if (!peek(c)) {
            corrupt(std::string("expected '") + c + "' at header offset " + std::to_string(m_pos));
        }
        ++m_pos;
    }

    void skip_ws() {
        while (m_pos < m_text.size() && (m_text[m_pos] == ' ' || m_text[m_pos] == '\t' || m_text[m_pos] == '\n')) {
            ++m_pos;
        }
    }

    std::string parse_string() {
        if (!peek('\'') && !peek('"')) {
            corrupt("expected a quoted string at header offset " + std::to_string(m_pos));
        }
        const char quote = m_text[m_pos++];
        const std::size_t end = m_text.find(quote, m_pos);
        if (end == std::string_view::npos) {
            corrupt("unterminated string in header");
        }
        std::string out(m_text.substr(m_pos, end - m_pos));
        m_pos = end + 1;
        return out;
    }

    bool parse_bool() {
        if (m_text.substr(m_pos, 4) == "True") {
            m_pos += 4;
            return true;
        }
        if (m_text.substr(m_pos, 5) == "False") {
            m_pos += 5;
            return false;
        }
        corrupt("fortran_order must be True or False");
    }

    std::size_t parse_uint() {
        const std::size_t start = m_pos;
        std::size_t value = 0;
        while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
            const std::size_t digit = static_cast<std::size_t>(m_text[m_pos] - '0');
            if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10) {
                corrupt("shape dimension overflows");
            }
            value = value * 10 + digit;
            ++m_pos;
        }
        if (m_pos == start) {
            corrupt("expected a non-negative integer in shape at header offset " + std::to_string(start));
        }
        return value;
    }

    std::vector<std::size_t> parse_shape() {
        std::vector<std::size_t> shape;
        expect('(');
        skip_ws();
        while (!peek(')')) {
            shape.push_back(parse_uint());
            skip_ws();
            if (peek(',')) {
                ++m_pos;
                skip_ws();
            } else if (!peek(')')) {
                corrupt("expected ',' or ')' in shape tuple");
            }
        }
        expect(')');
        return shape;
    }

    std::string_view m_text;
    std::size_t m_pos = 0;
};

// Item size implied by a typestr such as '<f4'; nullopt if it is not one.
std::optional<std::size_t> item_size(const std::string& descr) {
    if (descr.size() < 3 || std::string_view("<>|=").find(descr[0]) == std::string_view::npos ||
        !std::isalpha(static_cast<unsigned char>(descr[1]))) {
        return std::nullopt;
    }
    std::size_t n = 0;
    for (std::size_t i = 2; i < descr.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(descr[i])) || n > 1'000'000) {
            return std::nullopt;
        }
        n = n * 10 + static_cast<std::size_t>(descr[i] - '0');
    }
    return descr[1] == 'U' ? n * 4 : n;
}

std::uint32_t read_le(std::span<const std::byte> bytes, std::size_t offset, std::size_t width) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
        v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
    }
    return v;
}

std::string dtype_hint(const std::string& descr, const std::string& wanted) {
    return "dtype '" + descr + "' is not supported; expected '" + wanted +
           "' (convert with numpy: np.ascontiguousarray(a, dtype=np." +
           (wanted == "<f4" ? std::string("float32") : std::string("int32")) + "))";
}

template <typename T>
std::vector<T> copy_as(const Array& array, const std::string& wanted) {
    if (array.header.descr != wanted) {
        throw Error(ErrorCode::UnsupportedDtype, dtype_hint(array.header.descr, wanted));
    }
    if (array.header.fortran_order) {
        throw Error(ErrorCode::UnsupportedShape, "Fortran-ordered arrays are not supported; save a C-order array");
    }
    const std::size_t count = array.header.element_count();
    if (array.data.size() != count * sizeof(T)) {
        corrupt("payload size does not match the header shape");
    }
    std::vector<T> out(count);
    if (count != 0) {
        std::memcpy(out.data(), array.data.data(), array.data.size());
    }
    return out;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) {
            s += shape.size() == 1 ? "," : ", ";
        }
    }
    return s + ")";
}

}  // namespace

std::size_t Header::element_count() const {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
            corrupt("shape element count overflows");
        }
        n *= d;
    }
    return n;
}

Array parse(std::span<const std::byte> bytes) {
    if (bytes.size() < kMagic.size() + 2 ||
        std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        corrupt("missing NPY magic string");
    }
    Array out;
    out.header.major = std::to_integer<std::uint8_t>(bytes[6]);
    out.header.minor = std::to_integer<std::uint8_t>(bytes[7]);
    std::size_t len_width = 0;
    if (out.header.major == 1) {
        len_width = 2;
    } else if (out.header.major == 2) {
        len_width = 4;
    } else {
        corrupt("unsupported NPY format version " + std::to_string(out.header.major) + "." +
                std::to_string(out.header.minor));
    }
    const std::size_t prefix = 8 + len_width;
    if (bytes.size() < prefix) {
        corrupt("file ends inside the header length field");
    }
    const std::size_t header_len = read_le(bytes, 8, len_width);
    if (header_len > bytes.size() - prefix) {
        corrupt("header length " + std::to_string(header_len) + " exceeds the file size");
    }
    const auto* chars = reinterpret_cast<const char*>(bytes.data() + prefix);
    std::string_view text(chars, header_len);
    if (text.empty() || text.back() != '\n') {
        corrupt("header is not newline-terminated");
    }
    for (char c : text) {
        if (static_cast<unsigned char>(c) >= 0x80 || (c != '\n' && c != '\t' && std::iscntrl(static_cast<unsigned char>(c)))) {
            corrupt("header contains non-ASCII or control characters");
        }
    }
    Header parsed = DictParser(text).parse();
    out.header.descr = std::move(parsed.descr);
    out.header.fortran_order = parsed.fortran_order;
    out.header.shape = std::move(parsed.shape);

    const std::size_t payload = bytes.size() - prefix - header_len;
    const std::size_t count = out.header.element_count();
    if (const auto size = item_size(out.header.descr)) {
        if (*size != 0 && count > std::numeric_limits<std::size_t>::max() / *size) {
            corrupt("payload size overflows");
        }
        if (payload != count * *size) {
            corrupt("payload holds " + std::to_string(payload) + " bytes, header " +
                    shape_string(out.header.shape) + " of '" + out.header.descr + "' needs " +
                    std::to_string(count * *size));
        }
    }
    out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(prefix + header_len), bytes.end());
    return out;
}

Array read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
    }
    return parse(std::as_bytes(std::span<const char>(raw)));
}

std::vector<std::byte> serialize(const std::string& descr, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload) {
    std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                       shape_string(std::vector<std::size_t>(shape.begin(), shape.end())) + ", }";
    std::uint8_t major = 1;
    std::size_t prefix = 10;
    std::size_t total = prefix + dict.size() + 1;
    if ((total + kAlign - 1) / kAlign * kAlign - prefix > 0xFFFF) {
        major = 2;
        prefix = 12;
        total = prefix + dict.size() + 1;
    }
    const std::size_t padded = (total + kAlign - 1) / kAlign * kAlign;
    dict.append(padded - total, ' ');
    dict.push_back('\n');
    const std::size_t header_len = dict.size();

    std::vector<std::byte> out;
    out.reserve(prefix + header_len + payload.size());
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    out.push_back(static_cast<std::byte>(major));
    out.push_back(std::byte{0});
    for (std::size_t i = 0; i < prefix - 8; ++i) {
        out.push_back(static_cast<std::byte>((header_len >> (8 * i)) & 0xFF));
    }
    for (char c : dict) out.push_back(static_cast<std::byte>(c));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& descr, std::span<const std::size_t> shape,
                std::span<const std::byte> payload) {
    const auto image = serialize(descr, shape, payload);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot create '" + path.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

void write_float32(const std::filesystem::path& path, std::span<const std::size_t> shape, std::span<const float> data) {
    write_file(path, "<f4", shape, std::as_bytes(data));
}

void write_int32(const std::filesystem::path& path, std::span<const std::size_t> shape,
                 std::span<const std::int32_t> data) {
    write_file(path, "<i4", shape, std::as_bytes(data));
}

std::vector<float> as_float32(const Array& array) { return copy_as<float>(array, "<f4"); }

std::vector<std::int32_t> as_int32(const Array& array) { return copy_as<std::int32_t>(array, "<i4"); }

FeatureTensor features_from(const Array& array) {
    std::vector<float> data = as_float32(array);
    const auto& shape = array.header.shape;
    if (shape.size() != 3) {
        throw Error(ErrorCode::UnsupportedShape,
                    "features must have shape (frames, tokens, dim), got " + shape_string(shape));
    }
    if (shape[0] == 0 || shape[1] == 0 || shape[2] == 0) {
        throw Error(ErrorCode::UnsupportedShape, "features shape " + shape_string(shape) + " has an empty axis");
    }
    return FeatureTensor(shape[0], shape[1], shape[2], std::move(data));
}

FeatureTensor load_features(const std::filesystem::path& path) { return features_from(read_file(path)); }

AttentionScores attention_from(const Array& array) {
    std::vector<float> data = as_float32(array);
    const auto& shape = array.header.shape;
    if (std::any_of(shape.begin(), shape.end(), [](std::size_t d) { return d == 0; })) {
        throw Error(ErrorCode::UnsupportedShape, "attention shape " + shape_string(shape) + " has an empty axis");
    }
    if (shape.size() == 2) {
        return AttentionScores(shape[0], shape[1], std::move(data));
    }
    if (shape.size() == 3 && shape[1] == shape[2]) {
        const std::size_t frames = shape[0];
        const std::size_t tokens = shape[1];
        std::vector<float> scores;
        scores.reserve(frames * tokens);
        for (std::size_t f = 0; f < frames; ++f) {
            const auto reduced = attention_from_matrix(
                std::span<const float>(data).subspan(f * tokens * tokens, tokens * tokens), tokens);
            scores.insert(scores.end(), reduced.begin(), reduced.end());
        }
        return AttentionScores(frames, tokens, std::move(scores));
    }
    throw Error(ErrorCode::UnsupportedShape,
                "attention must have shape (frames, tokens) or (frames, tokens, tokens), got " + shape_string(shape));
}

AttentionScores load_attention(const std::filesystem::path& path) { return attention_from(read_file(path)); }

}  // namespace tokcomp::npy

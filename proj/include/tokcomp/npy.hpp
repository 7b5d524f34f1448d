// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// NumPy .npy reader/writer (format versions 1.0 and 2.0, little-endian,
// C order). Readers only accept the dtypes this project exchanges.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tokcomp/types.hpp"

namespace tokcomp::npy {

struct Header {
    std::uint8_t major = 1;
    std::uint8_t minor = 0;
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;

    std::size_t element_count() const;
};

struct Array {
    Header header;
    std::vector<std::byte> data;
};

/// Parses a complete file image. Throws CorruptHeader for structural
/// problems (magic, version, header dict, payload size). dtype and layout
/// are not checked here.
Array parse(std::span<const std::byte> bytes);

Array read_file(const std::filesystem::path& path);

/// Serializes to a version 1.0 image (2.0 if the header would not fit),
/// padding the header so the payload starts on a 64-byte boundary.
std::vector<std::byte> serialize(const std::string& descr, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload);

void write_file(const std::filesystem::path& path, const std::string& descr, std::span<const std::size_t> shape,
                std::span<const std::byte> payload);

void write_float32(const std::filesystem::path& path, std::span<const std::size_t> shape, std::span<const float> data);
void write_int32(const std::filesystem::path& path, std::span<const std::size_t> shape,
                 std::span<const std::int32_t> data);

/// dtype '<f4' only; throws UnsupportedDtype / UnsupportedShape otherwise.
std::vector<float> as_float32(const Array& array);
std::vector<std::int32_t> as_int32(const Array& array);

/// Shape (N, L, D).
FeatureTensor load_features(const std::filesystem::path& path);
FeatureTensor features_from(const Array& array);

/// Shape (N, L), or (N, L, L) matrices reduced to column means.
AttentionScores load_attention(const std::filesystem::path& path);
AttentionScores attention_from(const Array& array);

}  // namespace tokcomp::npy

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tokcomp/synth.hpp"
#include "tokcomp/types.hpp"

namespace testing {

inline tokcomp::FeatureTensor random_tensor(tokcomp::synth::Rng& rng, std::size_t n, std::size_t l,
                                            std::size_t d) {
    std::vector<float> data(n * l * d);
    for (auto& v : data) {
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return tokcomp::FeatureTensor(n, l, d, std::move(data));
}

inline std::vector<float> random_row(tokcomp::synth::Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<float> row(n);
    for (auto& v : row) {
        v = static_cast<float>(rng.uniform(lo, hi));
    }
    return row;
}

/// Copies frame `src` of `base` n times.
inline tokcomp::FeatureTensor repeat_frame(const tokcomp::FeatureTensor& base, std::size_t src, std::size_t n) {
    std::vector<float> data;
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = base.frame(src);
        data.insert(data.end(), f.begin(), f.end());
    }
    return tokcomp::FeatureTensor(n, base.tokens_per_frame(), base.dim(), std::move(data));
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("tokcomp_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace testing

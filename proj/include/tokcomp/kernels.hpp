// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops behind frame similarity, weighted merging and the
// attention-matrix reduction.
//
// Every variant follows one canonical evaluation order so that results are
// bit-identical across variants:
//  * dot products and squared norms accumulate float32 products in double,
//    striped over kReductionLanes lanes (element d goes to lane d % 8), then
//    folded as s[j] = lane[j] + lane[j+4] followed by (s0 + s1) + (s2 + s3).
//    A float32 x float32 product is exact in double, so fused multiply-add
//    and multiply-then-add give the same bits.
//  * blends compute (wa*a + wb*b) / (wa + wb) in double with no fusion, then
//    round once to float32.
//  * column sums add rows in order, one double accumulator per column.

#pragma once

#include <cstddef>
#include <string_view>

namespace tokcomp::kernels {

inline constexpr std::size_t kReductionLanes = 8;

/// Norms below this are treated as zero vectors; their cosine is defined as 0.
inline constexpr double kZeroNorm = 1e-12;

struct KernelTable {
    std::string_view name;

    /// Mean over `tokens` positions of cos(a_p, b_p); each position spans `dim` floats.
    double (*mean_token_cosine)(const float* a, const float* b, std::size_t tokens, std::size_t dim);

    /// out[i] = float((wa*a[i] + wb*b[i]) / (wa + wb)).
    void (*blend)(const float* a, const float* b, double wa, double wb, float* out, std::size_t n);

    /// out[j] = float(sum_i m[i*cols + j] / rows) with double accumulation.
    void (*column_mean)(const float* m, std::size_t rows, std::size_t cols, float* out);
};

const KernelTable& scalar_kernels();

/// nullptr when the binary was built without AVX2 support or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// nullptr unless built for aarch64.
const KernelTable* neon_kernels();

/// The SIMD table this process can run (AVX2 or NEON), or nullptr.
const KernelTable* wide_kernels();

/// Picks the widest supported variant once per process. Setting the
/// environment variable TOKCOMP_KERNELS=scalar forces the reference path.
const KernelTable& active_kernels();

}  // namespace tokcomp::kernels

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <array>
#include <cstddef>
#include <vector>

#include "kernels_internal.hpp"

namespace tokcomp::kernels {

namespace {

inline __m256d load4_pd(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

struct LaneAcc {
    __m256d lo = _mm256_setzero_pd();  // lanes 0..3
    __m256d hi = _mm256_setzero_pd();  // lanes 4..7

    double fold() const {
        const __m256d s = _mm256_add_pd(lo, hi);
        alignas(32) std::array<double, 4> v;
        _mm256_store_pd(v.data(), s);
        return (v[0] + v[1]) + (v[2] + v[3]);
    }

    void add_tail(std::size_t lane, double value) {
        alignas(32) std::array<double, 8> v;
        _mm256_store_pd(v.data(), lo);
        _mm256_store_pd(v.data() + 4, hi);
        v[lane] += value;
        lo = _mm256_load_pd(v.data());
        hi = _mm256_load_pd(v.data() + 4);
    }
};

double mean_token_cosine_avx2(const float* a, const float* b, std::size_t tokens, std::size_t dim) {
    if (tokens == 0) {
        return 0.0;
    }
    const std::size_t body = dim - dim % kReductionLanes;
    double total = 0.0;
    for (std::size_t p = 0; p < tokens; ++p) {
        const float* x = a + p * dim;
        const float* y = b + p * dim;
        LaneAcc dot;
        LaneAcc aa;
        LaneAcc bb;
        for (std::size_t d = 0; d < body; d += kReductionLanes) {
            const __m256d x0 = load4_pd(x + d);
            const __m256d x1 = load4_pd(x + d + 4);
            const __m256d y0 = load4_pd(y + d);
            const __m256d y1 = load4_pd(y + d + 4);
            dot.lo = _mm256_fmadd_pd(x0, y0, dot.lo);
            dot.hi = _mm256_fmadd_pd(x1, y1, dot.hi);
            aa.lo = _mm256_fmadd_pd(x0, x0, aa.lo);
            aa.hi = _mm256_fmadd_pd(x1, x1, aa.hi);
            bb.lo = _mm256_fmadd_pd(y0, y0, bb.lo);
            bb.hi = _mm256_fmadd_pd(y1, y1, bb.hi);
        }
        for (std::size_t d = body; d < dim; ++d) {
            const double xv = x[d];
            const double yv = y[d];
            const std::size_t lane = d % kReductionLanes;
            dot.add_tail(lane, xv * yv);
            aa.add_tail(lane, xv * xv);
            bb.add_tail(lane, yv * yv);
        }
        total += cosine_from_moments(dot.fold(), aa.fold(), bb.fold());
    }
    return total / static_cast<double>(tokens);
}

void blend_avx2(const float* a, const float* b, double wa, double wb, float* out, std::size_t n) {
    const double denom = wa + wb;
    const __m256d vwa = _mm256_set1_pd(wa);
    const __m256d vwb = _mm256_set1_pd(wb);
    const __m256d vden = _mm256_set1_pd(denom);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d num = _mm256_add_pd(_mm256_mul_pd(vwa, load4_pd(a + i)), _mm256_mul_pd(vwb, load4_pd(b + i)));
        _mm_storeu_ps(out + i, _mm256_cvtpd_ps(_mm256_div_pd(num, vden)));
    }
    for (; i < n; ++i) {
        const double num = wa * static_cast<double>(a[i]) + wb * static_cast<double>(b[i]);
        out[i] = static_cast<float>(num / denom);
    }
}

void column_mean_avx2(const float* m, std::size_t rows, std::size_t cols, float* out) {
    std::vector<double> acc(cols, 0.0);
    const std::size_t body = cols - cols % 4;
    for (std::size_t i = 0; i < rows; ++i) {
        const float* row = m + i * cols;
        std::size_t j = 0;
        for (; j < body; j += 4) {
            _mm256_storeu_pd(acc.data() + j, _mm256_add_pd(_mm256_loadu_pd(acc.data() + j), load4_pd(row + j)));
        }
        for (; j < cols; ++j) {
            acc[j] += static_cast<double>(row[j]);
        }
    }
    const double n = static_cast<double>(rows);
    const __m256d vn = _mm256_set1_pd(n);
    std::size_t j = 0;
    for (; j < body; j += 4) {
        _mm_storeu_ps(out + j, _mm256_cvtpd_ps(_mm256_div_pd(_mm256_loadu_pd(acc.data() + j), vn)));
    }
    for (; j < cols; ++j) {
        out[j] = static_cast<float>(acc[j] / n);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{"avx2", &mean_token_cosine_avx2, &blend_avx2, &column_mean_avx2};
    return table;
}

}  // namespace tokcomp::kernels

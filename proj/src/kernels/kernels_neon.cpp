// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Advanced SIMD is baseline on aarch64; no runtime check needed.

#include <arm_neon.h>

#include <array>
#include <cstddef>
#include <vector>

#include "kernels_internal.hpp"

namespace tokcomp::kernels {

namespace {

// Two float64x2 halves of four floats.
struct Pair {
    float64x2_t lo;
    float64x2_t hi;
};

inline Pair load4(const float* p) {
    const float32x4_t v = vld1q_f32(p);
    return {vcvt_f64_f32(vget_low_f32(v)), vcvt_high_f64_f32(v)};
}

// Lanes 0..7 as four float64x2 registers.
struct LaneAcc {
    std::array<float64x2_t, 4> v{vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};

    double fold() const {
        const float64x2_t s01 = vaddq_f64(v[0], v[2]);  // lane[j] + lane[j+4], j = 0, 1
        const float64x2_t s23 = vaddq_f64(v[1], v[3]);  // j = 2, 3
        return (vgetq_lane_f64(s01, 0) + vgetq_lane_f64(s01, 1)) + (vgetq_lane_f64(s23, 0) + vgetq_lane_f64(s23, 1));
    }

    void add_tail(std::size_t lane, double value) {
        std::array<double, 8> t;
        for (std::size_t i = 0; i < 4; ++i) vst1q_f64(t.data() + 2 * i, v[i]);
        t[lane] += value;
        for (std::size_t i = 0; i < 4; ++i) v[i] = vld1q_f64(t.data() + 2 * i);
    }
};

double mean_token_cosine_neon(const float* a, const float* b, std::size_t tokens, std::size_t dim) {
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
            const Pair x0 = load4(x + d), x1 = load4(x + d + 4);
            const Pair y0 = load4(y + d), y1 = load4(y + d + 4);
            const float64x2_t xs[4] = {x0.lo, x0.hi, x1.lo, x1.hi};
            const float64x2_t ys[4] = {y0.lo, y0.hi, y1.lo, y1.hi};
            for (std::size_t i = 0; i < 4; ++i) {
                dot.v[i] = vfmaq_f64(dot.v[i], xs[i], ys[i]);
                aa.v[i] = vfmaq_f64(aa.v[i], xs[i], xs[i]);
                bb.v[i] = vfmaq_f64(bb.v[i], ys[i], ys[i]);
            }
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

void blend_neon(const float* a, const float* b, double wa, double wb, float* out, std::size_t n) {
    const double denom = wa + wb;
    const float64x2_t vwa = vdupq_n_f64(wa);
    const float64x2_t vwb = vdupq_n_f64(wb);
    const float64x2_t vden = vdupq_n_f64(denom);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const Pair pa = load4(a + i), pb = load4(b + i);
        const float64x2_t lo = vdivq_f64(vaddq_f64(vmulq_f64(vwa, pa.lo), vmulq_f64(vwb, pb.lo)), vden);
        const float64x2_t hi = vdivq_f64(vaddq_f64(vmulq_f64(vwa, pa.hi), vmulq_f64(vwb, pb.hi)), vden);
        vst1q_f32(out + i, vcvt_high_f32_f64(vcvt_f32_f64(lo), hi));
    }
    for (; i < n; ++i) {
        const double num = wa * static_cast<double>(a[i]) + wb * static_cast<double>(b[i]);
        out[i] = static_cast<float>(num / denom);
    }
}

void column_mean_neon(const float* m, std::size_t rows, std::size_t cols, float* out) {
    std::vector<double> acc(cols, 0.0);
    const std::size_t body = cols - cols % 4;
    for (std::size_t i = 0; i < rows; ++i) {
        const float* row = m + i * cols;
        std::size_t j = 0;
        for (; j < body; j += 4) {
            const Pair r = load4(row + j);
            vst1q_f64(acc.data() + j, vaddq_f64(vld1q_f64(acc.data() + j), r.lo));
            vst1q_f64(acc.data() + j + 2, vaddq_f64(vld1q_f64(acc.data() + j + 2), r.hi));
        }
        for (; j < cols; ++j) {
            acc[j] += static_cast<double>(row[j]);
        }
    }
    const double n = static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        out[j] = static_cast<float>(acc[j] / n);
    }
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{"neon", &mean_token_cosine_neon, &blend_neon, &column_mean_neon};
    return table;
}

}  // namespace tokcomp::kernels

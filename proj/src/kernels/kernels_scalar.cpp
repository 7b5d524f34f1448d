// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>

#include "kernels_internal.hpp"

namespace tokcomp::kernels {

namespace {

struct Moments {
    double dot;
    double aa;
    double bb;
};

double fold_lanes(const std::array<double, kReductionLanes>& lane) {
    const double s0 = lane[0] + lane[4];
    const double s1 = lane[1] + lane[5];
    const double s2 = lane[2] + lane[6];
    const double s3 = lane[3] + lane[7];
    return (s0 + s1) + (s2 + s3);
}

Moments token_moments(const float* a, const float* b, std::size_t dim) {
    std::array<double, kReductionLanes> dot{};
    std::array<double, kReductionLanes> aa{};
    std::array<double, kReductionLanes> bb{};
    for (std::size_t d = 0; d < dim; ++d) {
        const double x = a[d];
        const double y = b[d];
        const std::size_t lane = d % kReductionLanes;
        dot[lane] += x * y;
        aa[lane] += x * x;
        bb[lane] += y * y;
    }
    return {fold_lanes(dot), fold_lanes(aa), fold_lanes(bb)};
}

double mean_token_cosine_scalar(const float* a, const float* b, std::size_t tokens, std::size_t dim) {
    if (tokens == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t p = 0; p < tokens; ++p) {
        const Moments m = token_moments(a + p * dim, b + p * dim, dim);
        total += cosine_from_moments(m.dot, m.aa, m.bb);
    }
    return total / static_cast<double>(tokens);
}

void blend_scalar(const float* a, const float* b, double wa, double wb, float* out, std::size_t n) {
    const double denom = wa + wb;
    for (std::size_t i = 0; i < n; ++i) {
        const double num = wa * static_cast<double>(a[i]) + wb * static_cast<double>(b[i]);
        out[i] = static_cast<float>(num / denom);
    }
}

void column_mean_scalar(const float* m, std::size_t rows, std::size_t cols, float* out) {
    std::vector<double> acc(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const float* row = m + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            acc[j] += static_cast<double>(row[j]);
        }
    }
    const double n = static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        out[j] = static_cast<float>(acc[j] / n);
    }
}

}  // namespace

double cosine_from_moments(double dot, double aa, double bb) {
    const double na = std::sqrt(aa);
    const double nb = std::sqrt(bb);
    if (na < kZeroNorm || nb < kZeroNorm) {
        return 0.0;
    }
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", &mean_token_cosine_scalar, &blend_scalar, &column_mean_scalar};
    return table;
}

}  // namespace tokcomp::kernels

// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string_view>
#include <vector>

#include "helpers.hpp"
#include "tokcomp/kernels.hpp"

using namespace tokcomp;
using namespace tokcomp::kernels;

namespace {

// Plain long-double cosine, no lane structure.
long double naive_mean_cosine(const std::vector<float>& a, const std::vector<float>& b, std::size_t tokens,
                              std::size_t dim) {
    long double total = 0;
    for (std::size_t p = 0; p < tokens; ++p) {
        long double dot = 0, aa = 0, bb = 0;
        for (std::size_t d = 0; d < dim; ++d) {
            const long double x = a[p * dim + d];
            const long double y = b[p * dim + d];
            dot += x * y;
            aa += x * x;
            bb += y * y;
        }
        if (std::sqrt(aa) < 1e-12L || std::sqrt(bb) < 1e-12L) continue;
        total += dot / (std::sqrt(aa) * std::sqrt(bb));
    }
    return total / static_cast<long double>(tokens);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<const KernelTable*> tables() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
    if (const auto* wide = wide_kernels()) out.push_back(wide);
    return out;
}

}  // namespace

TEST_CASE("active table honours the environment override") {
    const char* forced = std::getenv("TOKCOMP_KERNELS");
    if (forced && std::string_view(forced) == "scalar") {
        CHECK(active_kernels().name == "scalar");
    } else if (wide_kernels()) {
        CHECK(active_kernels().name == wide_kernels()->name);
    } else {
        CHECK(active_kernels().name == "scalar");
    }
}

TEST_CASE("mean token cosine matches a long double oracle") {
    synth::Rng rng(11);
    for (const auto* k : tables()) {
        CAPTURE(k->name);
        for (std::size_t dim : {1u, 3u, 7u, 8u, 9u, 16u, 31u, 64u, 129u}) {
            const std::size_t tokens = 5;
            auto a = testing::random_row(rng, tokens * dim, -1, 1);
            auto b = testing::random_row(rng, tokens * dim, -1, 1);
            const double got = k->mean_token_cosine(a.data(), b.data(), tokens, dim);
            CHECK(got == doctest::Approx(static_cast<double>(naive_mean_cosine(a, b, tokens, dim))).epsilon(1e-12));
        }
    }
}

TEST_CASE("cosine edge cases") {
    for (const auto* k : tables()) {
        CAPTURE(k->name);
        // L=2, D=2: cos((1,0),(0,1)) = 0 and cos((0,1),(0,1)) = 1.
        const std::vector<float> a{1, 0, 0, 1};
        const std::vector<float> b{0, 1, 0, 1};
        CHECK(k->mean_token_cosine(a.data(), b.data(), 2, 2) == doctest::Approx(0.5).epsilon(1e-15));

        std::vector<float> x(40), neg(40), zero(40, 0.f);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = static_cast<float>(i % 7) + 0.25f;
            neg[i] = -x[i];
        }
        CHECK(k->mean_token_cosine(x.data(), x.data(), 4, 10) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(k->mean_token_cosine(x.data(), neg.data(), 4, 10) == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(k->mean_token_cosine(x.data(), zero.data(), 4, 10) == 0.0);
        CHECK(k->mean_token_cosine(x.data(), x.data(), 0, 10) == 0.0);
    }
}

TEST_CASE("wide kernels are bit-identical to the scalar reference") {
    const KernelTable* wide = wide_kernels();
    if (!wide) {
        MESSAGE("no wide kernel table on this CPU");
        return;
    }
    const KernelTable& ref = scalar_kernels();
    synth::Rng rng(2026);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t tokens = 1 + rng.below(12);
        const std::size_t dim = 1 + rng.below(150);
        auto a = testing::random_row(rng, tokens * dim, -3, 3);
        auto b = testing::random_row(rng, tokens * dim, -3, 3);
        if (trial % 10 == 0) {
            std::fill(b.begin(), b.begin() + dim, 0.f);  // zero-norm token
        }
        const double r = ref.mean_token_cosine(a.data(), b.data(), tokens, dim);
        const double w = wide->mean_token_cosine(a.data(), b.data(), tokens, dim);
        REQUIRE(same_bits(r, w));

        const std::size_t n = tokens * dim;
        const double wa = rng.uniform(1e-6, 1.0);
        const double wb = rng.uniform(1e-6, 1.0);
        std::vector<float> out_ref(n), out_wide(n);
        ref.blend(a.data(), b.data(), wa, wb, out_ref.data(), n);
        wide->blend(a.data(), b.data(), wa, wb, out_wide.data(), n);
        REQUIRE(std::memcmp(out_ref.data(), out_wide.data(), n * sizeof(float)) == 0);

        const std::size_t rows = 1 + rng.below(40);
        const std::size_t cols = 1 + rng.below(70);
        auto m = testing::random_row(rng, rows * cols);
        std::vector<float> cm_ref(cols), cm_wide(cols);
        ref.column_mean(m.data(), rows, cols, cm_ref.data());
        wide->column_mean(m.data(), rows, cols, cm_wide.data());
        REQUIRE(std::memcmp(cm_ref.data(), cm_wide.data(), cols * sizeof(float)) == 0);
    }
}

TEST_CASE("blend and column mean match direct formulas") {
    synth::Rng rng(5);
    for (const auto* k : tables()) {
        CAPTURE(k->name);
        auto a = testing::random_row(rng, 37, -2, 2);
        auto b = testing::random_row(rng, 37, -2, 2);
        std::vector<float> out(37);
        k->blend(a.data(), b.data(), 0.95, 0.9, out.data(), out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double expect = (0.95 * double(a[i]) + 0.9 * double(b[i])) / (0.95 + 0.9);
            CHECK(out[i] == static_cast<float>(expect));
        }
        k->blend(a.data(), a.data(), 0.3, 0.7, out.data(), out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(std::fabs(out[i] - a[i]) <= 1e-6f);
        }

        // 3x4 matrix; column j holds j in every row.
        std::vector<float> m{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3};
        std::vector<float> cm(4);
        k->column_mean(m.data(), 3, 4, cm.data());
        CHECK(cm == std::vector<float>{0, 1, 2, 3});
    }
}

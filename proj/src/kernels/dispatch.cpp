// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace tokcomp::kernels {

namespace {

#if defined(TOKCOMP_HAVE_AVX2)
bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable& select_kernels() {
    if (const char* forced = std::getenv("TOKCOMP_KERNELS")) {
        if (std::string_view(forced) == "scalar") {
            return scalar_kernels();
        }
    }
    if (const KernelTable* wide = wide_kernels()) {
        return *wide;
    }
    return scalar_kernels();
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(TOKCOMP_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(TOKCOMP_HAVE_NEON)
    return &neon_table();
#else
    return nullptr;
#endif
}

const KernelTable* wide_kernels() {
    if (const KernelTable* t = avx2_kernels()) {
        return t;
    }
    return neon_kernels();
}

const KernelTable& active_kernels() {
    static const KernelTable& chosen = select_kernels();
    return chosen;
}

}  // namespace tokcomp::kernels

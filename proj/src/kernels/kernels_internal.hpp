// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tokcomp/kernels.hpp"

namespace tokcomp::kernels {

// Shared epilogue: both variants must turn the folded moments into a cosine
// the same way.
double cosine_from_moments(double dot, double aa, double bb);

#if defined(TOKCOMP_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

#if defined(TOKCOMP_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace tokcomp::kernels

// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Flat-array arithmetic kernels used by the raster operations. Every kernel
/// has a scalar reference implementation; vector variants are selected once
/// at startup from the running CPU and must agree with the reference (see
/// tests/unit/test_simd.cpp). Set NIGHTFLARE_ISA=scalar to force the
/// reference path.

#pragma once

#include <cstddef>
#include <string_view>

namespace nightflare::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    /// out = 1 - (1 - a)(1 - b), evaluated as hi + lo * (1 - hi)
    void (*screen)(const float* a, const float* b, float* out, std::size_t n);
    /// out = clamp(a + b, 0, 1)
    void (*add_clip)(const float* a, const float* b, float* out, std::size_t n);
    /// out = max(a - b, 0)
    void (*sub_floor)(const float* a, const float* b, float* out, std::size_t n);
    /// out = max(a, b)
    void (*maximum)(const float* a, const float* b, float* out, std::size_t n);
    /// out = a * b
    void (*multiply)(const float* a, const float* b, float* out, std::size_t n);
    /// acc += weight * x
    void (*axpy)(const float* x, float* acc, std::size_t n, float weight);
    /// out = max(x * gain + offset, 0)
    void (*gain_offset_floor)(const float* x, float* out, std::size_t n, float gain, float offset);
    /// sum (a - b)^2, accumulated in double
    double (*sum_sq_diff)(const float* a, const float* b, std::size_t n);
    /// sum |a - b|, accumulated in double
    double (*sum_abs_diff)(const float* a, const float* b, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_kernels() noexcept;

bool cpu_supports(Isa isa) noexcept;

/// The table chosen for this process.
const KernelTable& active() noexcept;

/// Overrides the selection; returns false (and changes nothing) when the
/// requested ISA is unavailable. Intended for tests and benchmarks.
bool select(Isa isa) noexcept;

}  // namespace nightflare::simd

// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "nightflare/simd.hpp"

namespace nightflare::simd {
namespace {

void screen(const float* a, const float* b, float* out, std::size_t n)
{
    // hi + lo*(1-hi) equals 1-(1-a)(1-b) and keeps the identity (0),
    // absorber (1) and commutativity exact in floating point.
    for (std::size_t i = 0; i < n; ++i) {
        const float hi = std::max(a[i], b[i]), lo = std::min(a[i], b[i]);
        out[i] = hi + lo * (1.0f - hi);
    }
}

void add_clip(const float* a, const float* b, float* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::min(std::max(a[i] + b[i], 0.0f), 1.0f);
}

void sub_floor(const float* a, const float* b, float* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::max(a[i] - b[i], 0.0f);
}

void maximum(const float* a, const float* b, float* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::max(a[i], b[i]);
}

void multiply(const float* a, const float* b, float* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] * b[i];
}

void axpy(const float* x, float* acc, std::size_t n, float weight)
{
    for (std::size_t i = 0; i < n; ++i)
        acc[i] += weight * x[i];
}

void gain_offset_floor(const float* x, float* out, std::size_t n, float gain, float offset)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::max(x[i] * gain + offset, 0.0f);
}

double sum_sq_diff(const float* a, const float* b, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double sum_abs_diff(const float* a, const float* b, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return acc;
}

constexpr KernelTable kScalar{
    Isa::scalar, screen, add_clip, sub_floor, maximum, multiply, axpy, gain_offset_floor, sum_sq_diff, sum_abs_diff,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace nightflare::simd

// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only. FMA is left off so the element-wise kernels
// round exactly like the scalar reference.

#include <algorithm>
#include <cmath>

#include <immintrin.h>

#include "nightflare/simd.hpp"

namespace nightflare::simd {
namespace {

constexpr std::size_t kLanes = 8;

void screen(const float* a, const float* b, float* out, std::size_t n)
{
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 va = _mm256_loadu_ps(a + i), vb = _mm256_loadu_ps(b + i);
        const __m256 hi = _mm256_max_ps(va, vb), lo = _mm256_min_ps(va, vb);
        _mm256_storeu_ps(out + i, _mm256_add_ps(hi, _mm256_mul_ps(lo, _mm256_sub_ps(one, hi))));
    }
    for (; i < n; ++i) {
        const float hi = std::max(a[i], b[i]), lo = std::min(a[i], b[i]);
        out[i] = hi + lo * (1.0f - hi);
    }
}

void add_clip(const float* a, const float* b, float* out, std::size_t n)
{
    const __m256 zero = _mm256_setzero_ps();
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 s = _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        _mm256_storeu_ps(out + i, _mm256_min_ps(_mm256_max_ps(s, zero), one));
    }
    for (; i < n; ++i)
        out[i] = std::min(std::max(a[i] + b[i], 0.0f), 1.0f);
}

void sub_floor(const float* a, const float* b, float* out, std::size_t n)
{
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        _mm256_storeu_ps(out + i, _mm256_max_ps(d, zero));
    }
    for (; i < n; ++i)
        out[i] = std::max(a[i] - b[i], 0.0f);
}

void maximum(const float* a, const float* b, float* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_ps(out + i, _mm256_max_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i)
        out[i] = std::max(a[i], b[i]);
}

void multiply(const float* a, const float* b, float* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

void axpy(const float* x, float* acc, std::size_t n, float weight)
{
    const __m256 w = _mm256_set1_ps(weight);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 prod = _mm256_mul_ps(w, _mm256_loadu_ps(x + i));
        _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), prod));
    }
    for (; i < n; ++i)
        acc[i] += weight * x[i];
}

void gain_offset_floor(const float* x, float* out, std::size_t n, float gain, float offset)
{
    const __m256 g = _mm256_set1_ps(gain);
    const __m256 o = _mm256_set1_ps(offset);
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 v = _mm256_add_ps(_mm256_mul_ps(_mm256_loadu_ps(x + i), g), o);
        _mm256_storeu_ps(out + i, _mm256_max_ps(v, zero));
    }
    for (; i < n; ++i)
        out[i] = std::max(x[i] * gain + offset, 0.0f);
}

double horizontal_sum(__m256d v)
{
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_sq_diff(const float* a, const float* b, std::size_t n)
{
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d d_lo = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d d_hi = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc_lo = _mm256_add_pd(acc_lo, _mm256_mul_pd(d_lo, d_lo));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_mul_pd(d_hi, d_hi));
    }
    double acc = horizontal_sum(_mm256_add_pd(acc_lo, acc_hi));
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double sum_abs_diff(const float* a, const float* b, std::size_t n)
{
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d d_lo = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                           _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d d_hi = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                           _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc_lo = _mm256_add_pd(acc_lo, _mm256_andnot_pd(sign, d_lo));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_andnot_pd(sign, d_hi));
    }
    double acc = horizontal_sum(_mm256_add_pd(acc_lo, acc_hi));
    for (; i < n; ++i)
        acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return acc;
}

constexpr KernelTable kAvx2{
    Isa::avx2, screen, add_clip, sub_floor, maximum, multiply, axpy, gain_offset_floor, sum_sq_diff, sum_abs_diff,
};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace nightflare::simd

// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

// Every vector kernel against the scalar reference, over lengths that
// exercise both the vector body and the scalar tail.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nightflare/imagecore.hpp"
#include "nightflare/simd.hpp"
#include "support/fixtures.hpp"

using namespace nightflare;

namespace {

std::vector<float> random_vector(std::size_t n, std::uint64_t seed, float lo, float hi)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> d(lo, hi);
    std::vector<float> v(n);
    for (float& x : v)
        x = d(rng);
    return v;
}

const std::size_t kLengths[] = {0, 1, 7, 8, 9, 31, 64, 1000, 4099};

}  // namespace

TEST_CASE("scalar table is always available")
{
    CHECK(simd::scalar_kernels().isa == simd::Isa::scalar);
    CHECK(simd::cpu_supports(simd::Isa::scalar));
    const simd::Isa before = simd::active().isa;
    CHECK(simd::select(simd::Isa::scalar));
    CHECK(simd::active().isa == simd::Isa::scalar);
    simd::select(before);
}

TEST_CASE("vector kernels match the scalar reference")
{
    const simd::KernelTable* vec = simd::avx2_kernels();
    if (vec == nullptr || !simd::cpu_supports(simd::Isa::avx2)) {
        MESSAGE("AVX2 variant not available on this host; skipping");
        return;
    }
    const simd::KernelTable& ref = simd::scalar_kernels();
    for (std::size_t n : kLengths) {
        CAPTURE(n);
        const auto a = random_vector(n, 10 + n, 0.0f, 1.0f);
        const auto b = random_vector(n, 20 + n, 0.0f, 1.0f);
        const auto s = random_vector(n, 30 + n, -1.0f, 1.5f);
        std::vector<float> r1(n), r2(n);

        using Binary = void (*)(const float*, const float*, float*, std::size_t);
        for (auto pick : {+[](const simd::KernelTable& t) -> Binary { return t.screen; },
                          +[](const simd::KernelTable& t) -> Binary { return t.add_clip; },
                          +[](const simd::KernelTable& t) -> Binary { return t.sub_floor; },
                          +[](const simd::KernelTable& t) -> Binary { return t.maximum; },
                          +[](const simd::KernelTable& t) -> Binary { return t.multiply; }}) {
            pick(ref)(a.data(), s.data(), r1.data(), n);
            pick(*vec)(a.data(), s.data(), r2.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                REQUIRE(r1[i] == r2[i]);
        }

        r1 = b;
        r2 = b;
        ref.axpy(a.data(), r1.data(), n, 0.37f);
        vec->axpy(a.data(), r2.data(), n, 0.37f);
        CHECK(r1 == r2);

        ref.gain_offset_floor(s.data(), r1.data(), n, 0.85f, -0.01f);
        vec->gain_offset_floor(s.data(), r2.data(), n, 0.85f, -0.01f);
        CHECK(r1 == r2);

        const double sq_ref = ref.sum_sq_diff(a.data(), b.data(), n);
        const double sq_vec = vec->sum_sq_diff(a.data(), b.data(), n);
        CHECK(std::abs(sq_ref - sq_vec) <= 1e-12 * std::max(1.0, sq_ref));
        const double ab_ref = ref.sum_abs_diff(a.data(), s.data(), n);
        const double ab_vec = vec->sum_abs_diff(a.data(), s.data(), n);
        CHECK(std::abs(ab_ref - ab_vec) <= 1e-12 * std::max(1.0, ab_ref));
    }
}

TEST_CASE("raster operations agree across instruction sets")
{
    if (!simd::cpu_supports(simd::Isa::avx2) || simd::avx2_kernels() == nullptr) {
        MESSAGE("AVX2 variant not available on this host; skipping");
        return;
    }
    using testing::random_raster;
    const auto a = random_raster<EncodedDomain>(67, 41, 3, 1);
    const auto b = random_raster<EncodedDomain>(67, 41, 3, 2);
    const auto la = random_raster<LinearDomain>(67, 41, 3, 3);

    const simd::Isa before = simd::active().isa;
    REQUIRE(simd::select(simd::Isa::scalar));
    const auto screen_s = screen_blend(a, b);
    const auto blur_s = gaussian_blur(la, 2.3);
    REQUIRE(simd::select(simd::Isa::avx2));
    const auto screen_v = screen_blend(a, b);
    const auto blur_v = gaussian_blur(la, 2.3);
    simd::select(before);
    CHECK(screen_s == screen_v);
    CHECK(blur_s == blur_v);
}

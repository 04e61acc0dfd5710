// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nightflare/simd.hpp"

namespace nightflare::simd {

#if !NIGHTFLARE_HAVE_AVX2
const KernelTable* avx2_kernels() noexcept { return nullptr; }
#endif

std::string_view isa_name(Isa isa) noexcept
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool cpu_supports(Isa isa) noexcept
{
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if NIGHTFLARE_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

namespace {

const KernelTable* table_for(Isa isa) noexcept
{
    if (!cpu_supports(isa))
        return nullptr;
    return isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
}

const KernelTable* initial_selection() noexcept
{
    if (const char* env = std::getenv("NIGHTFLARE_ISA")) {
        const std::string_view want(env);
        if (want == "scalar")
            return &scalar_kernels();
        if (want == "avx2")
            if (const KernelTable* t = table_for(Isa::avx2))
                return t;
    }
    if (const KernelTable* t = table_for(Isa::avx2))
        return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept
{
    static std::atomic<const KernelTable*> table{initial_selection()};
    return table;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept
{
    const KernelTable* t = table_for(isa);
    if (t == nullptr)
        return false;
    current().store(t, std::memory_order_release);
    return true;
}

}  // namespace nightflare::simd

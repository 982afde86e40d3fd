#include "lamex/f2_kernels.hpp"

#include "lamex/common.hpp"

#include <bit>
#include <cstdlib>

#if defined(__x86_64__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace lamex::f2 {

void xor_into_scalar(uint64_t* dst, const uint64_t* src, size_t n)
{
    for (size_t i = 0; i < n; ++i)
        dst[i] ^= src[i];
}

void xor3_scalar(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n)
{
    for (size_t i = 0; i < n; ++i)
        dst[i] = a[i] ^ b[i];
}

#if defined(__x86_64__)
__attribute__((target("avx2"))) void xor_into_avx2(uint64_t* dst, const uint64_t* src, size_t n)
{
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i d0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i d1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i + 4));
        __m256i s0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        __m256i s1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i + 4));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d0, s0));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i + 4), _mm256_xor_si256(d1, s1));
    }
    for (; i < n; ++i)
        dst[i] ^= src[i];
}

__attribute__((target("avx2"))) void xor3_avx2(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n)
{
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i a0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i a1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i + 4));
        __m256i b0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i b1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i + 4));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(a0, b0));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i + 4), _mm256_xor_si256(a1, b1));
    }
    for (; i < n; ++i)
        dst[i] = a[i] ^ b[i];
}
#endif

#if defined(__aarch64__)
void xor_into_neon(uint64_t* dst, const uint64_t* src, size_t n)
{
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        uint64x2_t d0 = vld1q_u64(dst + i), d1 = vld1q_u64(dst + i + 2);
        uint64x2_t s0 = vld1q_u64(src + i), s1 = vld1q_u64(src + i + 2);
        vst1q_u64(dst + i, veorq_u64(d0, s0));
        vst1q_u64(dst + i + 2, veorq_u64(d1, s1));
    }
    for (; i < n; ++i)
        dst[i] ^= src[i];
}

void xor3_neon(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n)
{
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_u64(dst + i, veorq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
        vst1q_u64(dst + i + 2, veorq_u64(vld1q_u64(a + i + 2), vld1q_u64(b + i + 2)));
    }
    for (; i < n; ++i)
        dst[i] = a[i] ^ b[i];
}
#endif

namespace {
    Kernels g_kernels = {nullptr, nullptr, nullptr};

    Kernels pick(const std::string& name)
    {
        if (name == "scalar")
            return {xor_into_scalar, xor3_scalar, "scalar"};
#if defined(__x86_64__)
        if (name == "avx2") {
            if (!__builtin_cpu_supports("avx2"))
                throw ConfigError("LAMEX_SIMD=avx2 requested but CPU lacks AVX2");
            return {xor_into_avx2, xor3_avx2, "avx2"};
        }
#endif
#if defined(__aarch64__)
        if (name == "neon")
            return {xor_into_neon, xor3_neon, "neon"};
#endif
        throw ConfigError("unknown SIMD kernel variant: " + name);
    }

    Kernels autodetect()
    {
        if (const char* env = std::getenv("LAMEX_SIMD"))
            return pick(env);
#if defined(__x86_64__)
        if (__builtin_cpu_supports("avx2"))
            return {xor_into_avx2, xor3_avx2, "avx2"};
#endif
#if defined(__aarch64__)
        return {xor_into_neon, xor3_neon, "neon"};
#endif
        return {xor_into_scalar, xor3_scalar, "scalar"};
    }
}  // namespace

const Kernels& kernels()
{
    if (!g_kernels.xor_into)
        g_kernels = autodetect();
    return g_kernels;
}

void select_kernels(const std::string& name)
{
    g_kernels = pick(name);
}

size_t popcount_words(const uint64_t* p, size_t n)
{
    size_t c = 0;
    for (size_t i = 0; i < n; ++i)
        c += static_cast<size_t>(std::popcount(p[i]));
    return c;
}

bool is_zero_words(const uint64_t* p, size_t n)
{
    for (size_t i = 0; i < n; ++i)
        if (p[i])
            return false;
    return true;
}

}  // namespace lamex::f2

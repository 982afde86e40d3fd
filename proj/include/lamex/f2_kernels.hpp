#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace lamex::f2 {

/* Word-level GF(2) kernels. Scalar reference implementations plus SIMD
 * variants (AVX2 on x86-64, NEON on aarch64) selected once at startup.
 * The active variant can be forced with the LAMEX_SIMD environment
 * variable ("scalar", "avx2", "neon") before first use. */

using xor_fn = void (*)(uint64_t*, const uint64_t*, size_t);
using xor3_fn = void (*)(uint64_t*, const uint64_t*, const uint64_t*, size_t);

void xor_into_scalar(uint64_t* dst, const uint64_t* src, size_t n);
void xor3_scalar(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n);

#if defined(__x86_64__)
void xor_into_avx2(uint64_t* dst, const uint64_t* src, size_t n);
void xor3_avx2(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n);
#endif
#if defined(__aarch64__)
void xor_into_neon(uint64_t* dst, const uint64_t* src, size_t n);
void xor3_neon(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n);
#endif

struct Kernels {
    xor_fn xor_into;
    xor3_fn xor3;
    const char* name;
};

/* Active kernel set (initialized on first call). */
const Kernels& kernels();

/* Force a specific variant by name; throws ConfigError on unknown or
 * unsupported names. Intended for tests and the CLI. */
void select_kernels(const std::string& name);

inline void xor_into(uint64_t* dst, const uint64_t* src, size_t n)
{
    kernels().xor_into(dst, src, n);
}

inline void xor3(uint64_t* dst, const uint64_t* a, const uint64_t* b, size_t n)
{
    kernels().xor3(dst, a, b, n);
}

size_t popcount_words(const uint64_t* p, size_t n);
bool is_zero_words(const uint64_t* p, size_t n);

}  // namespace lamex::f2

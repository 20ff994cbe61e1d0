#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace vlab::detail {

// Lane abstraction shared by the scalar reference kernels and the SIMD
// variants. Every operation is a correctly rounded IEEE-754 primitive, so a
// kernel written once against this interface produces bitwise-identical
// results per element on every pack type.
struct PackScalar {
    static constexpr std::size_t width = 1;
    using pd = double;
    using pi = std::uint64_t;
    using mask = bool;

    static pd load(const double* p) { return *p; }
    static void store(double* p, pd v) { *p = v; }
    static pd set1(double v) { return v; }

    static pd add(pd a, pd b) { return a + b; }
    static pd sub(pd a, pd b) { return a - b; }
    static pd mul(pd a, pd b) { return a * b; }
    static pd div(pd a, pd b) { return a / b; }
    static pd fma(pd a, pd b, pd c) { return std::fma(a, b, c); }
    static pd round_nearest(pd a) { return std::rint(a); }
    static pd floor_(pd a) { return std::floor(a); }
    static pd abs_(pd a) { return std::fabs(a); }
    static pd max_(pd a, pd b) { return a > b ? a : b; }

    static mask cmp_lt(pd a, pd b) { return a < b; }
    static mask cmp_le(pd a, pd b) { return a <= b; }
    static mask cmp_gt(pd a, pd b) { return a > b; }
    static mask cmp_ge(pd a, pd b) { return a >= b; }
    static mask mor(mask a, mask b) { return a || b; }
    static mask mand(mask a, mask b) { return a && b; }
    static mask mnot(mask a) { return !a; }
    // blend(m, t, f) selects t where m holds.
    static pd blend(mask m, pd t, pd f) { return m ? t : f; }

    static pi castu(pd a) { return std::bit_cast<std::uint64_t>(a); }
    static pd castd(pi a) { return std::bit_cast<double>(a); }
    static pi set1_u(std::uint64_t v) { return v; }
    static pi and_u(pi a, pi b) { return a & b; }
    static pi or_u(pi a, pi b) { return a | b; }
    static pi xor_u(pi a, pi b) { return a ^ b; }
    static pi add_u(pi a, pi b) { return a + b; }
    static pi sub_u(pi a, pi b) { return a - b; }
    static pi srl(pi a, int s) { return a >> s; }
    static pi sll(pi a, int s) { return a << s; }
    // Signed comparisons; all call sites keep operands below 2^63.
    static mask cmp_eq_i(pi a, pi b) { return a == b; }
    static mask cmp_gt_i(pi a, pi b) {
        return static_cast<std::int64_t>(a) > static_cast<std::int64_t>(b);
    }
    static pi blend_u(mask m, pi t, pi f) { return m ? t : f; }
    // Exact for |k| < 2^51; k arrives as a signed value in a u64 lane.
    static pd i64_to_pd(pi k) { return static_cast<double>(static_cast<std::int64_t>(k)); }
};

#if defined(__AVX2__)
struct PackAvx2 {
    static constexpr std::size_t width = 4;
    using pd = __m256d;
    using pi = __m256i;
    using mask = __m256d; // all-ones lanes where true

    static pd load(const double* p) { return _mm256_loadu_pd(p); }
    static void store(double* p, pd v) { _mm256_storeu_pd(p, v); }
    static pd set1(double v) { return _mm256_set1_pd(v); }

    static pd add(pd a, pd b) { return _mm256_add_pd(a, b); }
    static pd sub(pd a, pd b) { return _mm256_sub_pd(a, b); }
    static pd mul(pd a, pd b) { return _mm256_mul_pd(a, b); }
    static pd div(pd a, pd b) { return _mm256_div_pd(a, b); }
    static pd fma(pd a, pd b, pd c) { return _mm256_fmadd_pd(a, b, c); }
    static pd round_nearest(pd a) {
        return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    }
    static pd floor_(pd a) { return _mm256_floor_pd(a); }
    static pd abs_(pd a) {
        return _mm256_and_pd(a, _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll)));
    }
    static pd max_(pd a, pd b) { return _mm256_max_pd(a, b); } // (a > b) ? a : b, as scalar

    static mask cmp_lt(pd a, pd b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
    static mask cmp_le(pd a, pd b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
    static mask cmp_gt(pd a, pd b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
    static mask cmp_ge(pd a, pd b) { return _mm256_cmp_pd(a, b, _CMP_GE_OQ); }
    static mask mor(mask a, mask b) { return _mm256_or_pd(a, b); }
    static mask mand(mask a, mask b) { return _mm256_and_pd(a, b); }
    static mask mnot(mask a) {
        return _mm256_xor_pd(a, _mm256_castsi256_pd(_mm256_set1_epi64x(-1ll)));
    }
    static pd blend(mask m, pd t, pd f) { return _mm256_blendv_pd(f, t, m); }

    static pi castu(pd a) { return _mm256_castpd_si256(a); }
    static pd castd(pi a) { return _mm256_castsi256_pd(a); }
    static pi set1_u(std::uint64_t v) { return _mm256_set1_epi64x(static_cast<long long>(v)); }
    static pi and_u(pi a, pi b) { return _mm256_and_si256(a, b); }
    static pi or_u(pi a, pi b) { return _mm256_or_si256(a, b); }
    static pi xor_u(pi a, pi b) { return _mm256_xor_si256(a, b); }
    static pi add_u(pi a, pi b) { return _mm256_add_epi64(a, b); }
    static pi sub_u(pi a, pi b) { return _mm256_sub_epi64(a, b); }
    static pi srl(pi a, int s) { return _mm256_srli_epi64(a, s); }
    static pi sll(pi a, int s) { return _mm256_slli_epi64(a, s); }
    static mask cmp_eq_i(pi a, pi b) {
        return _mm256_castsi256_pd(_mm256_cmpeq_epi64(a, b));
    }
    static mask cmp_gt_i(pi a, pi b) {
        return _mm256_castsi256_pd(_mm256_cmpgt_epi64(a, b));
    }
    static pi blend_u(mask m, pi t, pi f) {
        return _mm256_castpd_si256(_mm256_blendv_pd(castd(f), castd(t), m));
    }
    static pd i64_to_pd(pi k) {
        // Magic-constant conversion, exact for |k| < 2^51.
        const pi magic = set1_u(0x4338000000000000ull); // bits of 2^52 * 1.5
        pd shifted = castd(add_u(k, magic));
        return sub(shifted, set1(6755399441055744.0)); // 2^52 * 1.5
    }
};
#endif

} // namespace vlab::detail

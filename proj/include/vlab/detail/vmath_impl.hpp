#pragma once

#include <cstddef>
#include <cstdint>

#include "vlab/detail/packs.hpp"

namespace vlab::detail {

// sin(2*pi*x) and cos(2*pi*x) by argument folding to [0, 1/4] plus a Taylor
// polynomial on y = 2*pi*t in [0, pi/2]. The fold 0.5 - t is Sterbenz-exact,
// so integers map to +0 (sin) and 1 (cos) exactly and half integers to +0 / -1
// (the r = -0.5 rounding tie is normalized so the kernel is bitwise
// 1-periodic); truncation error of the degree-21/20 tails is below 1.3e-18
// and total absolute error < 1e-15.
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline constexpr double kSin[10] = {
    -1.0 / 6,
    1.0 / 120,
    -1.0 / 5040,
    1.0 / 362880,
    -1.0 / 39916800,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
    -1.0 / 121645100408832000.0,
    1.0 / 51090942171709440000.0,
};

inline constexpr double kCos[10] = {
    -1.0 / 2,
    1.0 / 24,
    -1.0 / 720,
    1.0 / 40320,
    -1.0 / 3628800,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
    -1.0 / 6402373705728000.0,
    1.0 / 2432902008176640000.0,
};

template <class P>
inline typename P::pd sin2pi_core(typename P::pd x) {
    using pd = typename P::pd;
    pd r = P::sub(x, P::round_nearest(x)); // [-0.5, 0.5]
    // Round-to-even leaves r = -0.5 at odd half integers; fold it to +0.5 so
    // sin2pi(k + 1/2) is +0 for every k.
    auto tie = P::cmp_eq_i(P::castu(r), P::set1_u(0xBFE0000000000000ull));
    r = P::blend(tie, P::set1(0.5), r);
    pd t = P::abs_(r);
    auto fold = P::cmp_gt(t, P::set1(0.25));
    pd tf = P::blend(fold, P::sub(P::set1(0.5), t), t);
    pd y = P::mul(tf, P::set1(kTwoPi));
    pd z = P::mul(y, y);
    pd p = P::set1(kSin[9]);
    for (int i = 8; i >= 0; --i) p = P::fma(p, z, P::set1(kSin[i]));
    pd s = P::fma(P::mul(y, z), p, y);
    // Restore the sign of r; s itself is nonnegative.
    auto sign = P::and_u(P::castu(r), P::set1_u(0x8000000000000000ull));
    return P::castd(P::or_u(P::castu(s), sign));
}

template <class P>
inline typename P::pd cos2pi_core(typename P::pd x) {
    using pd = typename P::pd;
    pd r = P::sub(x, P::round_nearest(x));
    pd t = P::abs_(r);
    auto fold = P::cmp_gt(t, P::set1(0.25));
    pd tf = P::blend(fold, P::sub(P::set1(0.5), t), t);
    pd y = P::mul(tf, P::set1(kTwoPi));
    pd z = P::mul(y, y);
    pd p = P::set1(kCos[9]);
    for (int i = 8; i >= 0; --i) p = P::fma(p, z, P::set1(kCos[i]));
    pd c = P::fma(p, z, P::set1(1.0));
    // Quadrant fold flips the sign.
    auto signmask = P::set1_u(0x8000000000000000ull);
    pd cneg = P::castd(P::xor_u(P::castu(c), signmask));
    return P::blend(fold, cneg, c);
}

// log|x|, classic fdlibm reduction: |x| = 2^k * m with m in [sqrt(2)/2,
// sqrt(2)), f = m - 1, s = f/(2+f), R the standard degree-7 remainder
// polynomial in s^2. Error < 1 ulp. log_abs(0) = -inf, log_abs(+-inf) = +inf,
// NaN propagates.
inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

template <class P>
inline typename P::pd log_abs_core(typename P::pd x) {
    using pd = typename P::pd;
    using pi = typename P::pi;
    const pi absMask = P::set1_u(0x7FFFFFFFFFFFFFFFull);
    pi ix = P::and_u(P::castu(x), absMask);
    auto zero = P::cmp_eq_i(ix, P::set1_u(0));
    auto special = P::cmp_gt_i(ix, P::set1_u(0x7FEFFFFFFFFFFFFFull)); // inf or nan

    // Rescale denormals by 2^54 so the exponent field is usable.
    auto denorm = P::cmp_gt_i(P::set1_u(0x0010000000000000ull), ix);
    pd xs = P::mul(P::castd(ix), P::set1(18014398509481984.0)); // 2^54
    pi ix2 = P::blend_u(denorm, P::castu(xs), ix);
    pd kBias = P::blend(denorm, P::set1(-54.0), P::set1(0.0));

    pi e = P::srl(ix2, 52);
    pi frac = P::and_u(ix2, P::set1_u(0x000FFFFFFFFFFFFFull));
    // Fold at sqrt(2): mantissa >= mantissa(sqrt(2)) halves m and bumps k.
    auto fold = P::cmp_gt_i(frac, P::set1_u(0x0006A09E667F3BCCull));
    pi kInt = P::sub_u(e, P::set1_u(1023));
    kInt = P::add_u(kInt, P::blend_u(fold, P::set1_u(1), P::set1_u(0)));
    pi mbits = P::or_u(frac, P::blend_u(fold, P::set1_u(0x3FE0000000000000ull),
                                        P::set1_u(0x3FF0000000000000ull)));
    pd m = P::castd(mbits);
    pd dk = P::add(P::i64_to_pd(kInt), kBias);

    pd f = P::sub(m, P::set1(1.0));
    pd hfsq = P::mul(P::mul(P::set1(0.5), f), f);
    pd s = P::div(f, P::add(P::set1(2.0), f));
    pd z = P::mul(s, s);
    pd w = P::mul(z, z);
    pd t1 = P::mul(w, P::add(P::set1(kLg2),
                             P::mul(w, P::add(P::set1(kLg4), P::mul(w, P::set1(kLg6))))));
    pd t2 = P::mul(z, P::add(P::set1(kLg1),
                             P::mul(w, P::add(P::set1(kLg3),
                                              P::mul(w, P::add(P::set1(kLg5),
                                                               P::mul(w, P::set1(kLg7))))))));
    pd R = P::add(t2, t1);
    pd res = P::sub(P::mul(dk, P::set1(kLn2Hi)),
                    P::sub(P::sub(hfsq,
                                  P::add(P::mul(s, P::add(hfsq, R)),
                                         P::mul(dk, P::set1(kLn2Lo)))),
                           f));

    const pd negInf = P::castd(P::set1_u(0xFFF0000000000000ull));
    res = P::blend(special, P::castd(ix), res); // +inf stays, nan propagates
    res = P::blend(zero, negInf, res);
    return res;
}

// Array drivers: main loop on pack P, tail elements on the scalar pack (which
// computes the identical algorithm, so grouping never changes results).
template <class P, typename P::pd (*Core)(typename P::pd),
          typename PackScalar::pd (*CoreS)(typename PackScalar::pd)>
inline void map_array(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    if constexpr (P::width > 1) {
        for (; i + P::width <= n; i += P::width) P::store(out + i, Core(P::load(in + i)));
    }
    for (; i < n; ++i) out[i] = CoreS(in[i]);
}

} // namespace vlab::detail

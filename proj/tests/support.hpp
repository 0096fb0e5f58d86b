#pragma once

// Independent oracles and random generators shared by the tests.

#include <random>

#include <thetacert/dwork.hpp>

namespace thetacert::testing {

// u(s) = sum c_n s^n solving u^(2g) - u^(2g-1) + s = 0, one coefficient at a time: the
// coefficient of s^n is linear in c_n with slope 2g - (2g-1) = 1.
inline std::vector<mpz_class> u_by_undetermined_coefficients(int g, long n)
{
    auto mul = [n](const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
        std::vector<mpz_class> r(static_cast<size_t>(n + 1), 0);
        for (long i = 0; i <= n; ++i) {
            if (sgn(a[static_cast<size_t>(i)]) == 0) continue;
            for (long j = 0; i + j <= n; ++j) r[static_cast<size_t>(i + j)] += a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)];
        }
        return r;
    };
    std::vector<mpz_class> c(static_cast<size_t>(n + 1), 0);
    c[0] = 1;
    for (long m = 1; m <= n; ++m) {
        std::vector<mpz_class> pw(static_cast<size_t>(n + 1), 0), prev;
        pw[0] = 1;
        for (int e = 1; e <= 2 * g; ++e) {
            prev = pw;
            pw = mul(pw, c);
        }
        mpz_class val = pw[static_cast<size_t>(m)] - prev[static_cast<size_t>(m)] + (m == 1 ? 1 : 0);
        c[static_cast<size_t>(m)] = -val;
    }
    return c;
}

// C(n, r) by the product formula.
inline mpz_class binomial(long n, long r)
{
    mpz_class num = 1, den = 1;
    for (long i = 0; i < r; ++i) {
        num *= n - i;
        den *= i + 1;
    }
    return num / den;
}

inline Scalar random_scalar(std::mt19937_64& rng, const CtxPtr& ctx)
{
    Scalar s(ctx);
    std::uniform_int_distribution<u64> d(0, ctx->modulus - 1);
    for (auto& c : s.coords()) c = d(rng);
    return s;
}

// Random integral Laurent polynomial on [lo, hi], exact on both ends.
inline TSeries random_series(std::mt19937_64& rng, const CtxPtr& ctx, long lo, long hi)
{
    TSeries s(Scalar(ctx), lo, hi, true, false);
    for (long i = lo; i <= hi; ++i) s[i] = random_scalar(rng, ctx);
    return s;
}

inline bool same_on_window(const TSeries& a, const TSeries& b)
{
    auto [lo, hi] = common_window(a, b);
    return lo <= hi && equal_on_window(a, b, lo, hi);
}

} // namespace thetacert::testing

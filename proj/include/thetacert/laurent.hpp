#pragma once

#include <utility>

#include "series.hpp"

namespace thetacert {

using TSeries = Series<Scalar>;
using ZSeries = Series<mpz_class>;

// n! = p^v * unit; unit parts kept mod p^k.
class FactorialTable {
public:
    FactorialTable(const CtxPtr& ctx, long nmax) : p_(ctx->p), m_(ctx->modulus)
    {
        v_.assign(static_cast<size_t>(nmax + 1), 0);
        u_.assign(static_cast<size_t>(nmax + 1), 1 % m_);
        for (long n = 1; n <= nmax; ++n) {
            u64 q = static_cast<u64>(n);
            long v = 0;
            while (q % p_ == 0) {
                q /= p_;
                ++v;
            }
            v_[static_cast<size_t>(n)] = v_[static_cast<size_t>(n - 1)] + v;
            u_[static_cast<size_t>(n)] = modarith::mulmod(u_[static_cast<size_t>(n - 1)], q % m_, m_);
        }
    }
    long vp(long n) const { return v_.at(static_cast<size_t>(n)); }
    u64 unit(long n) const { return u_.at(static_cast<size_t>(n)); }

private:
    u64 p_, m_;
    std::vector<long> v_;
    std::vector<u64> u_;
};

inline Valuation series_min_valuation(const TSeries& s)
{
    Valuation best;
    const PrimeCtx& c = *s.zero().ctx();
    best.e = c.e;
    best.units = static_cast<i64>(c.e) * c.k;
    best.capped = true;
    for (long i = s.lo(); i <= s.hi(); ++i) {
        Valuation v = valuation(s[i]);
        if (v.units < best.units) best = v;
    }
    return best;
}

// Every stored coefficient vanishes modulo p^k.
inline bool is_zero_mod(const TSeries& s)
{
    for (long i = s.lo(); i <= s.hi(); ++i)
        if (!s[i].is_zero()) return false;
    return true;
}

// Sup norm reported additively: min over the window combined with the stored floors.
inline Rational sup_norm(const TSeries& s)
{
    Valuation v = series_min_valuation(s);
    Rational r = v.capped ? Rational(s.zero().ctx()->k) : v.value();
    if (s.tail_truncated() || !s.head_exact()) r = std::min(r, s.floor());
    return r;
}

// s(lambda T): coefficient i picks up lambda^i; lambda must be a unit when the window
// reaches negative degrees.
inline TSeries scale_variable(const TSeries& s, const Scalar& lambda)
{
    TSeries r = lambda.ctx()->dim() > s.zero().ctx()->dim() ? embed(s, lambda.ctx()) : s;
    const Scalar one = Scalar::from_int(lambda.ctx(), 1);
    Scalar inv = s.lo() < 0 ? inverse(lambda) : one;
    for (long i = s.lo(); i <= s.hi(); ++i) {
        Scalar f = i >= 0 ? lambda.pow(static_cast<u64>(i)) : inv.pow(static_cast<u64>(-i));
        r[i] = s[i] * f;
    }
    return r;
}

// Coefficient-wise a_i -> a_i zeta^i with zeta of exact order 4g.
inline TSeries zeta_twist(const TSeries& s, const CtxPtr& ctx)
{
    const long n = 4L * ctx->g;
    std::vector<Scalar> zp;
    Scalar z = zeta(integers_of(ctx));
    Scalar acc = Scalar::from_int(z.ctx(), 1);
    for (long i = 0; i < n; ++i) {
        zp.push_back(acc);
        acc *= z;
    }
    TSeries r = s;
    for (long i = s.lo(); i <= s.hi(); ++i) {
        long m = ((i % n) + n) % n;
        r[i] = s[i] * zp[static_cast<size_t>(m)];
    }
    return r;
}

// exp(pi^m * b). Needs m >= 1 and b integral. When b has positive support only the
// expansion is formal and computed through degree `top`; otherwise the terms must
// decay p-adically (m >= 2 or floor(b) > 0).
inline TSeries exp_series(const TSeries& b, int m, std::optional<long> top = std::nullopt)
{
    const CtxPtr ctx = b.zero().ctx()->ramified ? b.zero().ctx() : ramified_of(b.zero().ctx());
    if (m < 1) throw std::domain_error("exp_series: argument must be divisible by pi");
    if (b.floor() < Rational(0)) throw std::domain_error("exp_series: argument must be integral");
    if (!b.tail_truncated() && b.head_exact() && !b.top_nonzero())
        return TSeries::monomial(Scalar::from_int(ctx, 1), 0);
    const PrimeCtx& c = *ctx;
    const Rational growth = Rational(m - 1, static_cast<i64>(c.p - 1)) + b.floor();
    const bool formal = !b.tail_truncated() && b.lo() >= 1;
    if (!formal && growth <= 0) throw std::domain_error("exp_series: argument outside the convergence disc");

    long nmax;
    if (growth > 0) {
        nmax = 0;
        while (Rational(nmax) * growth < Rational(c.k)) ++nmax;
        nmax -= 1;  // terms n with n*growth >= k vanish
    } else {
        nmax = LONG_MAX / 8;
    }
    if (formal) {
        long limit = top ? *top : (b.head_exact() ? b.hi() * nmax : 0);
        if (!top && growth <= 0) throw std::invalid_argument("exp_series: formal expansion needs a top degree");
        nmax = std::min(nmax, limit / std::max(1L, b.lo()));
    }
    FactorialTable fact(ctx, std::max(1L, nmax));

    TSeries bb = embed(b, ctx);
    TSeries result = TSeries::monomial(Scalar::from_int(ctx, 1), 0);
    TSeries term = result;
    for (long n = 1; n <= nmax; ++n) {
        term = mul(term, bb);
        if (formal && top) term = term.truncate_head(*top, false);
        Scalar coef = pi_power_over(ctx, static_cast<i64>(m) * n, fact.vp(n), fact.unit(n));
        result = add(result, scale(term, coef));
    }
    if (formal && top) {
        result = result.truncate_head(*top, false);
    }
    result.set_floor(Rational(0));
    if (b.head_exact() && b.hi() >= 1 && growth > 0) {
        result.set_decay(Decay{growth / Rational(b.hi()), Rational(0)});
        result.set_head_exact(true);
        apply_decay_cut(result);
    } else if (b.head_exact() && b.hi() <= 0) {
        result.set_decay(std::nullopt);
    }
    return result;
}

// Inverse of a power series in T with unit constant term; decay metadata bounds the
// expansion when present.
inline TSeries invert_plus(const TSeries& s, std::optional<long> top = std::nullopt)
{
    if (s.tail_truncated() || s.lo() < 0) throw std::domain_error("invert_plus: support must be in degrees >= 0");
    const Scalar s0 = s.coeff(0);
    if (!is_unit(s0)) throw std::domain_error("invert_plus: constant term must be a unit");
    long n0;
    if (top) {
        n0 = *top;
    } else {
        if (!s.decay() || s.decay()->slope <= 0 || s.decay()->intercept < 0)
            throw std::invalid_argument("invert_plus: decay bound required");
        const Decay& d = *s.decay();
        n0 = 0;
        while (Rational(n0) * d.slope + d.intercept < Rational(s.zero().ctx()->k)) ++n0;
        n0 -= 1;
    }
    const Scalar inv0 = inverse(s0);
    TSeries y(s.zero(), 0, n0, true, false);
    y[0] = inv0;
    for (long n = 1; n <= n0; ++n) {
        Scalar acc(s.zero().ctx());
        for (long i = 1; i <= n; ++i) {
            if (!s.stored(i)) {
                if (i > s.hi() && !s.head_exact()) throw PrecisionError("invert_plus: head unknown");
                continue;
            }
            acc.add_product(s[i], y[n - i]);
        }
        y[n] = -(acc * inv0);
    }
    if (s.decay() && !top) y.set_decay(Decay{s.decay()->slope, Rational(0)});
    y.trim_head();
    return y;
}

// Loop-group predicates, checked from stored data and floors.
inline bool gamma_minus(const TSeries& h)
{
    if (!h.head_exact()) return false;
    auto t = h.top_nonzero();
    if (t && *t > 0) return false;
    if (h.floor() < Rational(0)) return false;
    Valuation v0 = valuation(h.coeff(0));
    return !v0.capped && v0.units == 0 && series_min_valuation(h).units >= 0;
}

inline bool gamma_general(const TSeries& h)
{
    if (h.floor() < Rational(0)) return false;
    Valuation v0 = valuation(h.coeff(0));
    if (v0.capped || v0.units != 0) return false;
    for (long i = h.lo(); i <= h.hi(); ++i)
        if (i > 0 && valuation(h[i]).units <= 0) return false;
    if (h.head_exact()) return true;
    return h.decay() && h.decay()->slope > 0;
}

inline bool gamma_plus(const TSeries& h)
{
    if (h.tail_truncated() || h.lo() < 0) return false;
    if (!(h.coeff(0) == Scalar::from_int(h.zero().ctx(), 1))) return false;
    return gamma_general(h);
}

} // namespace thetacert

#pragma once

// Coefficient tower Z_p c O1 = Z_p[pi]/(pi^(p-1)+p) c O2 = O1[eps]/(eps^(p-1) - 1/e0),
// all coordinates kept modulo p^k.

#include <algorithm>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <gmpxx.h>

#include "modular.hpp"

namespace thetacert {

using Rational = boost::rational<i64>;

inline std::string to_string(const Rational& r)
{
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Raised when an answer would depend on digits below the working precision.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PrimeCtx {
    u64 p = 0;
    int g = 0;
    int k = 0;
    u64 modulus = 0;      // p^k
    bool ramified = false;
    int e = 1;            // number of pi-coordinates (p-1 when ramified)
    int d = 1;            // number of eps-coordinates (p-1 when eps is adjoined)
    std::optional<u64> e0;
    u64 eps_power = 1;    // eps^d = e0^{-1} mod p^k
    u64 s0 = 0;           // least residue of order 4g
    u64 zeta = 0;         // Teichmuller lift of s0 mod p^k

    int dim() const { return e * d; }
    bool has_epsilon() const { return e0.has_value(); }
    // Valuation units are 1/e; precision in those units.
    int precision_units() const { return e * k; }
};

using CtxPtr = std::shared_ptr<const PrimeCtx>;

inline CtxPtr make_context(int g, u64 p, int k, bool ramified = true)
{
    using namespace modarith;
    if (g < 2) throw std::invalid_argument("genus must be at least 2");
    if (k < 1) throw std::invalid_argument("precision k must be at least 1");
    if (!is_prime(p)) throw std::invalid_argument("p must be prime");
    if (p < 7) throw std::invalid_argument("p must be at least 7");
    if (p % (4 * static_cast<u64>(g)) != 1)
        throw std::invalid_argument("p must be congruent to 1 mod 4g");
    u64 m = checked_pow(p, k, 56);
    if (m == 0) throw std::invalid_argument("p^k must stay below 2^56");
    if (checked_pow(p, k + 1, 63) == 0) throw std::invalid_argument("p^(k+1) must stay below 2^63");

    auto ctx = std::make_shared<PrimeCtx>();
    ctx->p = p;
    ctx->g = g;
    ctx->k = k;
    ctx->modulus = m;
    ctx->ramified = ramified;
    ctx->e = ramified ? static_cast<int>(p - 1) : 1;
    u64 want = 4 * static_cast<u64>(g);
    for (u64 s = 2; s < p; ++s) {
        if (order_mod(s, p) == want) {
            ctx->s0 = s;
            break;
        }
    }
    ctx->zeta = teichmuller_int(p, static_cast<i64>(ctx->s0), k);
    return ctx;
}

// Same (g, p, k) with a different coordinate layout.
inline CtxPtr with_layout(const CtxPtr& ctx, bool ramified, std::optional<u64> e0)
{
    auto c = std::make_shared<PrimeCtx>(*ctx);
    c->ramified = ramified;
    c->e = ramified ? static_cast<int>(c->p - 1) : 1;
    c->e0 = e0;
    if (e0) {
        c->d = static_cast<int>(c->p - 1);
        c->eps_power = modarith::invmod(*e0 % c->modulus, c->modulus);
    } else {
        c->d = 1;
        c->eps_power = 1;
    }
    return c;
}

inline CtxPtr integers_of(const CtxPtr& ctx) { return with_layout(ctx, false, std::nullopt); }

inline CtxPtr ramified_of(const CtxPtr& ctx) { return with_layout(ctx, true, std::nullopt); }

inline bool same_prime_data(const PrimeCtx& a, const PrimeCtx& b)
{
    return a.p == b.p && a.k == b.k && a.g == b.g;
}

// True when every element of `small` is naturally an element of `big`.
inline bool embeds_into(const PrimeCtx& small, const PrimeCtx& big)
{
    if (!same_prime_data(small, big)) return false;
    if (small.e != 1 && small.e != big.e) return false;
    if (small.d != 1 && (small.d != big.d || small.eps_power != big.eps_power)) return false;
    return true;
}

struct Valuation {
    i64 units = 0;   // in multiples of 1/e
    int e = 1;
    bool capped = false;  // indistinguishable from zero: the value is only a lower bound k

    Rational value() const { return Rational(units, e); }
    std::string str() const { return capped ? ">=" + to_string(value()) : to_string(value()); }
};

class Scalar {
public:
    Scalar() = default;
    explicit Scalar(CtxPtr ctx) : ctx_(std::move(ctx)), c_(static_cast<size_t>(ctx_->dim()), 0) {}

    static Scalar from_int(const CtxPtr& ctx, i64 n)
    {
        Scalar s(ctx);
        s.c_[0] = modarith::reduce(n, ctx->modulus);
        return s;
    }

    static Scalar from_residue(const CtxPtr& ctx, u64 n)
    {
        Scalar s(ctx);
        s.c_[0] = n % ctx->modulus;
        return s;
    }

    static Scalar from_mpz(const CtxPtr& ctx, const mpz_class& n)
    {
        Scalar s(ctx);
        s.c_[0] = mpz_fdiv_ui(n.get_mpz_t(), ctx->modulus);
        return s;
    }

    static Scalar pi(const CtxPtr& ctx)
    {
        if (!ctx->ramified) throw std::logic_error("pi is not adjoined in this context");
        Scalar s(ctx);
        s.c_[1] = 1;
        return s;
    }

    static Scalar epsilon(const CtxPtr& ctx)
    {
        if (!ctx->has_epsilon()) throw std::logic_error("epsilon is not adjoined in this context");
        Scalar s(ctx);
        s.c_[static_cast<size_t>(ctx->e)] = 1;
        return s;
    }

    bool valid() const { return static_cast<bool>(ctx_); }
    const CtxPtr& ctx() const { return ctx_; }
    const std::vector<u64>& coords() const { return c_; }
    std::vector<u64>& coords() { return c_; }

    u64 coord(int i, int b = 0) const { return c_[static_cast<size_t>(b * ctx_->e + i)]; }
    void set_coord(int i, int b, u64 v) { c_[static_cast<size_t>(b * ctx_->e + i)] = v % ctx_->modulus; }

    bool is_zero() const
    {
        return std::all_of(c_.begin(), c_.end(), [](u64 x) { return x == 0; });
    }

    // Only the constant coordinate may be nonzero.
    bool is_integer() const
    {
        return std::all_of(c_.begin() + 1, c_.end(), [](u64 x) { return x == 0; });
    }

    Scalar embed(const CtxPtr& target) const
    {
        if (ctx_.get() == target.get()
            || (ctx_->e == target->e && ctx_->d == target->d && embeds_into(*ctx_, *target))) {
            Scalar r(*this);
            r.ctx_ = target;
            return r;
        }
        if (!embeds_into(*ctx_, *target)) throw std::logic_error("incompatible scalar contexts");
        Scalar r(target);
        for (int b = 0; b < ctx_->d; ++b)
            for (int i = 0; i < ctx_->e; ++i)
                r.c_[static_cast<size_t>(b * target->e + i)] = c_[static_cast<size_t>(b * ctx_->e + i)];
        return r;
    }

    Scalar operator-() const
    {
        Scalar r(*this);
        for (auto& x : r.c_) x = modarith::negmod(x, ctx_->modulus);
        return r;
    }

    Scalar& operator+=(const Scalar& o) { return accumulate(o, false); }
    Scalar& operator-=(const Scalar& o) { return accumulate(o, true); }

    Scalar& operator*=(const Scalar& o)
    {
        Scalar r;
        r.add_product(*this, o);
        *this = std::move(r);
        return *this;
    }

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(const Scalar& a, const Scalar& b)
    {
        Scalar r;
        r.add_product(a, b);
        return r;
    }

    friend bool operator==(const Scalar& a, const Scalar& b)
    {
        if (a.ctx_->dim() == b.ctx_->dim()) return a.c_ == b.c_;
        const CtxPtr& big = a.ctx_->dim() > b.ctx_->dim() ? a.ctx_ : b.ctx_;
        return a.embed(big).c_ == b.embed(big).c_;
    }

    Scalar mul_int(u64 s) const
    {
        Scalar r(*this);
        for (auto& x : r.c_) x = modarith::mulmod(x, s, ctx_->modulus);
        return r;
    }

    // *this += a*b; the result lives in the larger of the two contexts.
    void add_product(const Scalar& a, const Scalar& b);

    Scalar pow(u64 n) const
    {
        Scalar r = Scalar::from_int(ctx_, 1);
        Scalar base = *this;
        while (n) {
            if (n & 1) r *= base;
            n >>= 1;
            if (n) base *= base;
        }
        return r;
    }

private:
    Scalar& accumulate(const Scalar& o, bool subtract)
    {
        if (!valid()) {
            *this = subtract ? -o : o;
            return *this;
        }
        if (o.ctx_->dim() > ctx_->dim()) *this = embed(o.ctx_);
        const u64 m = ctx_->modulus;
        if (o.ctx_->dim() == ctx_->dim()) {
            for (size_t i = 0; i < c_.size(); ++i)
                c_[i] = subtract ? modarith::submod(c_[i], o.c_[i], m) : modarith::addmod(c_[i], o.c_[i], m);
        } else {
            Scalar oe = o.embed(ctx_);
            for (size_t i = 0; i < c_.size(); ++i)
                c_[i] = subtract ? modarith::submod(c_[i], oe.c_[i], m) : modarith::addmod(c_[i], oe.c_[i], m);
        }
        return *this;
    }

    CtxPtr ctx_;
    std::vector<u64> c_;
};

inline void Scalar::add_product(const Scalar& a, const Scalar& b)
{
    const CtxPtr& big = a.ctx_->dim() >= b.ctx_->dim() ? a.ctx_ : b.ctx_;
    if (!valid())
        *this = Scalar(big);
    else if (ctx_->dim() < big->dim())
        *this = embed(big);
    const PrimeCtx& T = *ctx_;
    if (!embeds_into(*a.ctx_, T) || !embeds_into(*b.ctx_, T)) throw std::logic_error("incompatible scalar contexts");
    const u64 m = T.modulus;

    if (a.is_integer() || b.is_integer()) {
        const Scalar& s = a.is_integer() ? a : b;
        const Scalar& v = a.is_integer() ? b : a;
        u64 f = s.c_[0];
        if (f == 0) return;
        const int ve = v.ctx_->e;
        for (int bb = 0; bb < v.ctx_->d; ++bb)
            for (int i = 0; i < ve; ++i) {
                u64 x = v.c_[static_cast<size_t>(bb * ve + i)];
                if (x == 0) continue;
                u64& dst = c_[static_cast<size_t>(bb * T.e + i)];
                dst = modarith::addmod(dst, modarith::mulmod(x, f, m), m);
            }
        return;
    }

    const int ea = a.ctx_->e, eb = b.ctx_->e, da = a.ctx_->d, db = b.ctx_->d;
    auto block_nonzero = [](const Scalar& s, int blk, int len) {
        const u64* q = s.c_.data() + blk * len;
        for (int i = 0; i < len; ++i)
            if (q[i]) return true;
        return false;
    };
    std::vector<int> ba, bb;
    for (int i = 0; i < da; ++i)
        if (block_nonzero(a, i, ea)) ba.push_back(i);
    for (int i = 0; i < db; ++i)
        if (block_nonzero(b, i, eb)) bb.push_back(i);
    if (ba.empty() || bb.empty()) return;

    thread_local std::vector<u128> acc;
    thread_local std::vector<u64> red;
    const int len = ea + eb - 1;
    acc.assign(static_cast<size_t>(len), 0);
    red.assign(static_cast<size_t>(len), 0);
    const u64 negp = modarith::negmod(T.p % m, m);

    for (int x : ba) {
        const u64* pa = a.c_.data() + x * ea;
        for (int y : bb) {
            const u64* pb = b.c_.data() + y * eb;
            std::fill(acc.begin(), acc.end(), 0);
            for (int i = 0; i < ea; ++i) {
                if (!pa[i]) continue;
                const u128 ai = pa[i];
                for (int j = 0; j < eb; ++j) acc[static_cast<size_t>(i + j)] += ai * pb[j];
            }
            for (int t = 0; t < len; ++t) red[static_cast<size_t>(t)] = static_cast<u64>(acc[static_cast<size_t>(t)] % m);
            // fold pi^(e+t) = -p pi^t
            for (int t = T.e; t < len; ++t) {
                u64 hi = red[static_cast<size_t>(t)];
                if (!hi) continue;
                u64& lo = red[static_cast<size_t>(t - T.e)];
                lo = modarith::addmod(lo, modarith::mulmod(hi, negp, m), m);
            }
            int blk = x + y;
            u64 twist = 1;
            if (blk >= T.d) {
                blk -= T.d;
                twist = T.eps_power;
            }
            u64* dst = c_.data() + blk * T.e;
            const int top = std::min(len, T.e);
            for (int t = 0; t < top; ++t) {
                u64 v = red[static_cast<size_t>(t)];
                if (!v) continue;
                if (twist != 1) v = modarith::mulmod(v, twist, m);
                dst[t] = modarith::addmod(dst[t], v, m);
            }
        }
    }
}

// Floor valuation: minimum over tower coordinates, exact when the algebra is a field.
inline Valuation valuation(const Scalar& x)
{
    const PrimeCtx& c = *x.ctx();
    Valuation v;
    v.e = c.e;
    i64 best = static_cast<i64>(c.e) * c.k;
    for (int b = 0; b < c.d; ++b)
        for (int i = 0; i < c.e; ++i) {
            u64 a = x.coord(i, b);
            if (a == 0) continue;
            best = std::min<i64>(best, static_cast<i64>(c.e) * modarith::vp(a, c.p) + i);
        }
    v.units = best;
    v.capped = best >= static_cast<i64>(c.e) * c.k;
    return v;
}

namespace detail {

// Solve for the inverse of the reduction of x in F_p[eps]/(eps^d - c).
inline std::optional<std::vector<u64>> residue_inverse(const Scalar& x)
{
    const PrimeCtx& c = *x.ctx();
    const u64 p = c.p;
    const int d = c.d;
    const u64 cbar = c.eps_power % p;
    std::vector<u64> r(static_cast<size_t>(d));
    for (int b = 0; b < d; ++b) r[static_cast<size_t>(b)] = x.coord(0, b) % p;
    // column j holds r * eps^j
    std::vector<std::vector<u64>> M(static_cast<size_t>(d), std::vector<u64>(static_cast<size_t>(d) + 1, 0));
    std::vector<u64> col = r;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) M[static_cast<size_t>(i)][static_cast<size_t>(j)] = col[static_cast<size_t>(i)];
        std::vector<u64> next(static_cast<size_t>(d), 0);
        for (int i = 0; i < d; ++i) {
            if (i + 1 < d)
                next[static_cast<size_t>(i + 1)] = col[static_cast<size_t>(i)];
            else
                next[0] = modarith::mulmod(col[static_cast<size_t>(i)], cbar, p);
        }
        col = next;
    }
    M[0][static_cast<size_t>(d)] = 1;
    for (int j = 0; j < d; ++j) {
        int piv = -1;
        for (int i = j; i < d; ++i)
            if (M[static_cast<size_t>(i)][static_cast<size_t>(j)]) {
                piv = i;
                break;
            }
        if (piv < 0) return std::nullopt;
        std::swap(M[static_cast<size_t>(piv)], M[static_cast<size_t>(j)]);
        u64 inv = modarith::invmod(M[static_cast<size_t>(j)][static_cast<size_t>(j)], p);
        for (auto& v : M[static_cast<size_t>(j)]) v = modarith::mulmod(v, inv, p);
        for (int i = 0; i < d; ++i) {
            if (i == j) continue;
            u64 f = M[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (!f) continue;
            for (int t = j; t <= d; ++t)
                M[static_cast<size_t>(i)][static_cast<size_t>(t)] = modarith::submod(
                    M[static_cast<size_t>(i)][static_cast<size_t>(t)],
                    modarith::mulmod(f, M[static_cast<size_t>(j)][static_cast<size_t>(t)], p), p);
        }
    }
    std::vector<u64> y(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) y[static_cast<size_t>(i)] = M[static_cast<size_t>(i)][static_cast<size_t>(d)];
    return y;
}

} // namespace detail

// A unit of the tower: invertible modulo the uniformizer in every component.
inline bool is_unit(const Scalar& x)
{
    if (x.ctx()->d == 1) return x.coord(0, 0) % x.ctx()->p != 0;
    return detail::residue_inverse(x).has_value();
}

inline Scalar inverse(const Scalar& x)
{
    const CtxPtr& ctx = x.ctx();
    auto r = detail::residue_inverse(x);
    if (!r) throw std::domain_error("inverse: scalar is not a unit");
    Scalar y(ctx);
    for (int b = 0; b < ctx->d; ++b) y.set_coord(0, b, (*r)[static_cast<size_t>(b)]);
    const Scalar two = Scalar::from_int(ctx, 2);
    int prec = 1;
    while (prec < ctx->precision_units()) {
        y = y * (two - x * y);
        prec *= 2;
    }
    return y;
}

// x / uniformizer^v. The top digit of the lowered coordinates is unknown; callers
// account for the precision drop.
inline Scalar divide_uniformizer(const Scalar& x, int v)
{
    const PrimeCtx& c = *x.ctx();
    const u64 m = c.modulus;
    Scalar r = x;
    for (int step = 0; step < v; ++step) {
        Scalar t(x.ctx());
        for (int b = 0; b < c.d; ++b) {
            if (c.e == 1) {
                u64 a = r.coord(0, b);
                if (a % c.p) throw std::domain_error("divide_uniformizer: not divisible");
                t.set_coord(0, b, a / c.p);
                continue;
            }
            u64 a0 = r.coord(0, b);
            if (a0 % c.p) throw std::domain_error("divide_uniformizer: not divisible");
            for (int i = 0; i + 1 < c.e; ++i) t.set_coord(i, b, r.coord(i + 1, b));
            // a0/pi = (a0/p) * p/pi = -(a0/p) pi^(e-1)
            t.set_coord(c.e - 1, b, modarith::negmod((a0 / c.p) % m, m));
        }
        r = std::move(t);
    }
    return r;
}

// pi^m / (p^vden * uden) with uden a unit integer; requires vden <= m/(p-1).
inline Scalar pi_power_over(const CtxPtr& ctx, i64 m, i64 vden, u64 uden)
{
    if (!ctx->ramified) throw std::logic_error("pi is not adjoined in this context");
    const i64 e = ctx->e;
    const i64 q = m / e, r = m % e;
    if (q < vden) throw std::domain_error("pi_power_over: result is not integral");
    Scalar s(ctx);
    const i64 shift = q - vden;
    if (shift >= ctx->k) return s;
    u64 val = modarith::checked_pow(ctx->p, static_cast<int>(shift), 63) % ctx->modulus;
    if (q % 2) val = modarith::negmod(val, ctx->modulus);
    val = modarith::mulmod(val, modarith::invmod(uden % ctx->modulus, ctx->modulus), ctx->modulus);
    s.set_coord(static_cast<int>(r), 0, val);
    return s;
}

inline Scalar teichmuller(const CtxPtr& ctx, i64 i)
{
    return Scalar::from_residue(ctx, modarith::teichmuller_int(ctx->p, i, ctx->k));
}

inline Scalar zeta(const CtxPtr& ctx) { return Scalar::from_residue(ctx, ctx->zeta); }

inline CtxPtr adjoin_epsilon(const CtxPtr& ctx, const Scalar& e0)
{
    if (!e0.is_integer()) throw std::invalid_argument("e0 must lie in Z_p");
    u64 v = e0.coord(0, 0);
    if (v % ctx->p == 0) throw std::invalid_argument("e0 must be a p-adic unit");
    return with_layout(ctx, ctx->ramified, v);
}

inline std::string to_string(const Scalar& s)
{
    if (!s.valid()) return "<invalid>";
    if (s.is_integer()) return std::to_string(s.coord(0, 0));
    std::ostringstream os;
    bool first = true;
    const PrimeCtx& c = *s.ctx();
    for (int b = 0; b < c.d; ++b)
        for (int i = 0; i < c.e; ++i) {
            u64 a = s.coord(i, b);
            if (!a) continue;
            if (!first) os << " + ";
            first = false;
            os << a;
            if (i) os << "*pi^" << i;
            if (b) os << "*eps^" << b;
        }
    if (first) os << "0";
    return os.str();
}

} // namespace thetacert

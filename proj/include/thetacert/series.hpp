#pragma once

// Windowed Laurent series sum_i c_i T^i. Coefficients are stored for lo <= i <= hi.
// head_exact: every coefficient above hi is zero (modulo p^k for tower coefficients).
// tail_truncated: coefficients below lo are unknown; otherwise they are zero.

#include <climits>
#include <optional>
#include <vector>

#include "padic.hpp"

namespace thetacert {

template <class C>
struct coeff_traits;

template <>
struct coeff_traits<mpz_class> {
    static mpz_class zero_like(const mpz_class&) { return 0; }
    static bool is_zero(const mpz_class& a) { return sgn(a) == 0; }
    static void add_product(mpz_class& acc, const mpz_class& a, const mpz_class& b)
    {
        mpz_addmul(acc.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    }
};

template <>
struct coeff_traits<Scalar> {
    static Scalar zero_like(const Scalar& a) { return Scalar(a.ctx()); }
    static bool is_zero(const Scalar& a) { return a.is_zero(); }
    static void add_product(Scalar& acc, const Scalar& a, const Scalar& b) { acc.add_product(a, b); }
};

// v(c_i) >= slope * i + intercept for every degree i.
struct Decay {
    Rational slope;
    Rational intercept;
};

template <class C>
class Series {
public:
    using traits = coeff_traits<C>;

    Series() = default;

    Series(C zero, long lo, long hi, bool head_exact = true, bool tail_truncated = true)
        : zero_(std::move(zero)), lo_(lo), hi_(hi), head_exact_(head_exact), tail_truncated_(tail_truncated)
    {
        if (hi < lo - 1) throw std::invalid_argument("series window is inverted");
        c_.assign(static_cast<size_t>(hi - lo + 1), zero_);
    }

    // c * T^deg, exact in every degree.
    static Series monomial(const C& c, long deg)
    {
        Series s(traits::zero_like(c), deg, deg, true, false);
        s.c_[0] = c;
        return s;
    }

    long lo() const { return lo_; }
    long hi() const { return hi_; }
    bool head_exact() const { return head_exact_; }
    bool tail_truncated() const { return tail_truncated_; }
    void set_head_exact(bool v) { head_exact_ = v; }
    void set_tail_truncated(bool v) { tail_truncated_ = v; }
    const C& zero() const { return zero_; }
    long size() const { return hi_ - lo_ + 1; }

    bool stored(long i) const { return i >= lo_ && i <= hi_; }
    bool known(long i) const
    {
        if (stored(i)) return true;
        if (i > hi_) return head_exact_;
        return !tail_truncated_;
    }

    const C& operator[](long i) const { return c_[static_cast<size_t>(i - lo_)]; }
    C& operator[](long i) { return c_[static_cast<size_t>(i - lo_)]; }

    C coeff(long i) const
    {
        if (stored(i)) return (*this)[i];
        if (!known(i)) throw PrecisionError("coefficient outside the known window");
        return zero_;
    }

    Rational floor() const { return floor_; }
    void set_floor(Rational f) { floor_ = f; }
    const std::optional<Decay>& decay() const { return decay_; }
    void set_decay(std::optional<Decay> d) { decay_ = std::move(d); }

    // Support is contained in degrees >= lo with nothing unknown below.
    bool support_nonneg() const { return !tail_truncated_ && lo_ >= 0; }

    // Highest stored nonzero coefficient, or nullopt.
    std::optional<long> top_nonzero() const
    {
        for (long i = hi_; i >= lo_; --i)
            if (!traits::is_zero((*this)[i])) return i;
        return std::nullopt;
    }

    // Drop zero coefficients at the top of a head-exact series.
    void trim_head()
    {
        if (!head_exact_) return;
        while (hi_ >= lo_ && traits::is_zero(c_.back())) {
            c_.pop_back();
            --hi_;
        }
        if (hi_ < lo_) {
            // keep a valid empty window
            hi_ = lo_ - 1;
        }
    }

    // Forget coefficients below new_lo.
    Series truncate_tail(long new_lo) const
    {
        if (new_lo <= lo_) return *this;
        Series r = *this;
        if (new_lo > hi_ + 1) new_lo = hi_ + 1;
        r.c_.erase(r.c_.begin(), r.c_.begin() + (new_lo - lo_));
        r.lo_ = new_lo;
        r.tail_truncated_ = true;
        return r;
    }

    // Keep only degrees <= new_hi; the dropped head becomes unknown unless it was zero.
    Series truncate_head(long new_hi, bool dropped_are_zero) const
    {
        Series r = *this;
        if (new_hi >= hi_) return r;
        if (new_hi < lo_ - 1) new_hi = lo_ - 1;
        r.c_.resize(static_cast<size_t>(new_hi - lo_ + 1));
        r.hi_ = new_hi;
        r.head_exact_ = head_exact_ && dropped_are_zero;
        return r;
    }

    // Grow the stored window with explicit zeros where the series is known to vanish.
    void extend_to(long new_lo, long new_hi)
    {
        if (new_lo < lo_) {
            if (tail_truncated_) throw PrecisionError("cannot extend a truncated tail");
            c_.insert(c_.begin(), static_cast<size_t>(lo_ - new_lo), zero_);
            lo_ = new_lo;
        }
        if (new_hi > hi_) {
            if (!head_exact_) throw PrecisionError("cannot extend an unknown head");
            c_.insert(c_.end(), static_cast<size_t>(new_hi - hi_), zero_);
            hi_ = new_hi;
        }
    }

    template <class F>
    Series map(F f) const
    {
        Series r = *this;
        for (long i = lo_; i <= hi_; ++i) r[i] = f(i, (*this)[i]);
        return r;
    }

private:
    C zero_{};
    long lo_ = 0;
    long hi_ = -1;
    bool head_exact_ = true;
    bool tail_truncated_ = false;
    std::vector<C> c_;
    Rational floor_{0};
    std::optional<Decay> decay_;
};

inline mpz_class one_like(const mpz_class&) { return 1; }
inline Scalar one_like(const Scalar& z) { return Scalar::from_int(z.ctx(), 1); }

namespace detail {

constexpr long kInf = LONG_MAX / 4;

template <class C>
long min_support(const Series<C>& s) { return s.tail_truncated() ? -kInf : s.lo(); }

template <class C>
long max_support(const Series<C>& s) { return s.head_exact() ? s.hi() : kInf; }

template <class C>
C result_zero(const Series<C>& a, const Series<C>& b)
{
    if constexpr (std::is_same_v<C, Scalar>)
        return a.zero().ctx()->dim() >= b.zero().ctx()->dim() ? a.zero() : b.zero();
    else
        return a.zero();
}

inline std::optional<Decay> combine_sum_decay(const std::optional<Decay>& a, bool a_nonneg,
                                              const std::optional<Decay>& b, bool b_nonneg)
{
    if (!a || !b) return std::nullopt;
    if (a->slope == b->slope) return Decay{a->slope, std::min(a->intercept, b->intercept)};
    if (a_nonneg && b_nonneg) return Decay{std::min(a->slope, b->slope), std::min(a->intercept, b->intercept)};
    return std::nullopt;
}

} // namespace detail

// Coefficient-wise sum on the window where both operands are known.
template <class C>
Series<C> add(const Series<C>& a, const Series<C>& b, bool subtract = false)
{
    const bool tail = a.tail_truncated() || b.tail_truncated();
    const bool head = a.head_exact() && b.head_exact();
    long lo = std::min(a.lo(), b.lo());
    long hi = std::max(a.hi(), b.hi());
    if (tail) {
        lo = LONG_MIN / 4;
        if (a.tail_truncated()) lo = std::max(lo, a.lo());
        if (b.tail_truncated()) lo = std::max(lo, b.lo());
    }
    if (!head) {
        hi = LONG_MAX / 4;
        if (!a.head_exact()) hi = std::min(hi, a.hi());
        if (!b.head_exact()) hi = std::min(hi, b.hi());
    }
    if (hi < lo - 1) throw PrecisionError("sum window is empty");
    Series<C> r(detail::result_zero(a, b), lo, hi, head, tail);
    for (long i = lo; i <= hi; ++i) {
        C v = r.zero();
        if (a.stored(i)) v += a[i];
        if (b.stored(i)) {
            if (subtract)
                v -= b[i];
            else
                v += b[i];
        }
        r[i] = std::move(v);
    }
    r.set_floor(std::min(a.floor(), b.floor()));
    r.set_decay(detail::combine_sum_decay(a.decay(), a.support_nonneg(), b.decay(), b.support_nonneg()));
    return r;
}

template <class C>
Series<C> sub(const Series<C>& a, const Series<C>& b) { return add(a, b, true); }

template <class C>
Series<C> neg(const Series<C>& a)
{
    Series<C> r = a;
    for (long i = a.lo(); i <= a.hi(); ++i) r[i] = -a[i];
    return r;
}

template <class C>
Series<C> shift(const Series<C>& a, long n)
{
    Series<C> r(a.zero(), a.lo() + n, a.hi() + n, a.head_exact(), a.tail_truncated());
    for (long i = a.lo(); i <= a.hi(); ++i) r[i + n] = a[i];
    r.set_floor(a.floor());
    if (a.decay()) r.set_decay(Decay{a.decay()->slope, a.decay()->intercept - a.decay()->slope * Rational(n)});
    return r;
}

template <class C>
Series<C> scale(const Series<C>& a, const C& s)
{
    Series<C> r(detail::result_zero(a, Series<C>::monomial(s, 0)), a.lo(), a.hi(), a.head_exact(), a.tail_truncated());
    for (long i = a.lo(); i <= a.hi(); ++i) {
        C v = r.zero();
        coeff_traits<C>::add_product(v, a[i], s);
        r[i] = std::move(v);
    }
    if constexpr (std::is_same_v<C, Scalar>) {
        Valuation vs = valuation(s);
        Rational add = vs.capped ? Rational(0) : vs.value();
        r.set_floor(a.floor() + add);
        if (a.decay()) r.set_decay(Decay{a.decay()->slope, a.decay()->intercept + add});
    }
    return r;
}

// Drop coefficients that the decay bound forces to vanish modulo p^k.
inline void apply_decay_cut(Series<Scalar>& s)
{
    if (!s.decay() || s.decay()->slope <= 0) return;
    const Decay& d = *s.decay();
    const Rational k(s.zero().ctx()->k);
    // smallest n with slope*n + intercept >= k
    Rational need = (k - d.intercept) / d.slope;
    long n0 = static_cast<long>(boost::rational_cast<long double>(need));
    while (Rational(n0) * d.slope + d.intercept < k) ++n0;
    while (Rational(n0 - 1) * d.slope + d.intercept >= k) --n0;
    if (s.head_exact()) {
        if (s.hi() >= n0) s = s.truncate_head(n0 - 1, true);
    } else if (n0 <= s.hi() + 1) {
        s = s.truncate_head(n0 - 1, true);
        s.set_head_exact(true);
    }
}

template <class C>
Series<C> mul(const Series<C>& a, const Series<C>& b)
{
    using detail::kInf;
    const long amin = detail::min_support(a), amax = detail::max_support(a);
    const long bmin = detail::min_support(b), bmax = detail::max_support(b);
    long lo = (amin == -kInf || bmin == -kInf) ? -kInf : amin + bmin;
    long hi = (amax == kInf || bmax == kInf) ? kInf : amax + bmax;
    bool tail = false, head = true;
    if (a.tail_truncated()) {
        if (bmax == kInf) throw PrecisionError("product of unknown tail and unknown head");
        lo = std::max(lo, a.lo() + bmax);
        tail = true;
    }
    if (b.tail_truncated()) {
        if (amax == kInf) throw PrecisionError("product of unknown tail and unknown head");
        lo = std::max(lo, b.lo() + amax);
        tail = true;
    }
    if (!a.head_exact()) {
        if (bmin == -kInf) throw PrecisionError("product of unknown head and unknown tail");
        hi = std::min(hi, a.hi() + bmin);
        head = false;
    }
    if (!b.head_exact()) {
        if (amin == -kInf) throw PrecisionError("product of unknown head and unknown tail");
        hi = std::min(hi, b.hi() + amin);
        head = false;
    }
    if (lo == -kInf || hi == kInf) throw PrecisionError("product window is unbounded");
    if (hi < lo - 1) throw PrecisionError("product window is empty");

    Series<C> r(detail::result_zero(a, b), lo, hi, head, tail);
    for (long j = a.lo(); j <= a.hi(); ++j) {
        const C& aj = a[j];
        if (coeff_traits<C>::is_zero(aj)) continue;
        long ilo = std::max(b.lo(), lo - j), ihi = std::min(b.hi(), hi - j);
        for (long i = ilo; i <= ihi; ++i) coeff_traits<C>::add_product(r[i + j], aj, b[i]);
    }
    if constexpr (std::is_same_v<C, Scalar>) {
        r.set_floor(a.floor() + b.floor());
        std::optional<Decay> dec;
        if (a.decay() && b.decay()) {
            if (a.decay()->slope == b.decay()->slope)
                dec = Decay{a.decay()->slope, a.decay()->intercept + b.decay()->intercept};
            else if (a.support_nonneg() && b.support_nonneg())
                dec = Decay{std::min(a.decay()->slope, b.decay()->slope),
                            a.decay()->intercept + b.decay()->intercept};
        } else if (a.decay() && b.head_exact()) {
            dec = Decay{a.decay()->slope, a.decay()->intercept + b.floor() - a.decay()->slope * Rational(b.hi())};
        } else if (b.decay() && a.head_exact()) {
            dec = Decay{b.decay()->slope, b.decay()->intercept + a.floor() - b.decay()->slope * Rational(a.hi())};
        }
        r.set_decay(dec);
        apply_decay_cut(r);
    }
    return r;
}

template <class C>
Series<C> pow(const Series<C>& a, unsigned n)
{
    Series<C> r = Series<C>::monomial(one_like(a.zero()), 0);
    Series<C> base = a;
    while (n) {
        if (n & 1) r = mul(r, base);
        n >>= 1;
        if (n) base = mul(base, base);
    }
    return r;
}


// Leading degree and monic flag of a head-exact series; a coefficient counts as
// nonzero only when it is nonzero at the working precision.
template <class C>
std::pair<long, bool> degree_monic(const Series<C>& s)
{
    if (!s.head_exact()) throw PrecisionError("degree of a series with unknown head");
    auto t = s.top_nonzero();
    if (!t) throw PrecisionError("series is indistinguishable from zero");
    const C& lead = s[*t];
    return {*t, lead == one_like(lead)};
}

template <class C>
long degree(const Series<C>& s) { return degree_monic(s).first; }

namespace detail {

inline mpz_class unit_inverse(const mpz_class& a)
{
    if (a == 1 || a == -1) return a;
    throw std::domain_error("integer leading coefficient must be +-1");
}

inline Scalar unit_inverse(const Scalar& a)
{
    if (!is_unit(a)) throw std::domain_error("leading coefficient is not a unit");
    return inverse(a);
}

} // namespace detail

// Inverse in K((1/T)) of a head-exact series with unit leading coefficient. The result
// is known to `depth` degrees below its top (default: the operand's own depth).
template <class C>
Series<C> invert(const Series<C>& s, std::optional<long> depth = std::nullopt)
{
    auto [d, monic] = degree_monic(s);
    (void)monic;
    long dep;
    if (depth)
        dep = *depth;
    else if (s.tail_truncated())
        dep = d - s.lo();
    else
        throw std::invalid_argument("invert: depth required for an exact operand");
    if (s.tail_truncated()) dep = std::min(dep, d - s.lo());
    const C inv_lead = detail::unit_inverse(s[d]);
    // r_j = s_{d-j}/s_d, y_0 = 1, y_j = -sum_{i=1..j} r_i y_{j-i}
    std::vector<C> r(static_cast<size_t>(dep + 1), s.zero()), y(static_cast<size_t>(dep + 1), s.zero());
    for (long j = 0; j <= dep; ++j) {
        if (s.stored(d - j)) {
            C v = s.zero();
            coeff_traits<C>::add_product(v, s[d - j], inv_lead);
            r[static_cast<size_t>(j)] = v;
        }
    }
    y[0] = one_like(s.zero());
    for (long j = 1; j <= dep; ++j) {
        C acc = s.zero();
        for (long i = 1; i <= j; ++i) {
            if (coeff_traits<C>::is_zero(r[static_cast<size_t>(i)])) continue;
            coeff_traits<C>::add_product(acc, r[static_cast<size_t>(i)], y[static_cast<size_t>(j - i)]);
        }
        y[static_cast<size_t>(j)] = -acc;
    }
    Series<C> out(s.zero(), -d - dep, -d, true, true);
    for (long j = 0; j <= dep; ++j) {
        C v = s.zero();
        coeff_traits<C>::add_product(v, y[static_cast<size_t>(j)], inv_lead);
        out[-d - j] = v;
    }
    return out;
}

// Exact integer Laurent series to tower series.
inline Series<Scalar> reduce(const Series<mpz_class>& s, const CtxPtr& ctx)
{
    Series<Scalar> r(Scalar(ctx), s.lo(), s.hi(), s.head_exact(), s.tail_truncated());
    for (long i = s.lo(); i <= s.hi(); ++i)
        if (sgn(s[i])) r[i] = Scalar::from_mpz(ctx, s[i]);
    return r;
}

// Same series with coefficients moved into a larger context.
inline Series<Scalar> embed(const Series<Scalar>& s, const CtxPtr& ctx)
{
    Series<Scalar> r(Scalar(ctx), s.lo(), s.hi(), s.head_exact(), s.tail_truncated());
    for (long i = s.lo(); i <= s.hi(); ++i) r[i] = s[i].embed(ctx);
    r.set_floor(s.floor());
    r.set_decay(s.decay());
    return r;
}

// Equality on the common known window; returns false on any certified difference.
template <class C>
bool equal_on_window(const Series<C>& a, const Series<C>& b, long lo, long hi)
{
    for (long i = lo; i <= hi; ++i)
        if (!(a.coeff(i) == b.coeff(i))) return false;
    return true;
}

template <class C>
std::pair<long, long> common_window(const Series<C>& a, const Series<C>& b)
{
    long lo = std::max(a.tail_truncated() ? a.lo() : LONG_MIN / 4, b.tail_truncated() ? b.lo() : LONG_MIN / 4);
    long hi = std::min(a.head_exact() ? LONG_MAX / 4 : a.hi(), b.head_exact() ? LONG_MAX / 4 : b.hi());
    if (lo == LONG_MIN / 4) lo = std::min(a.lo(), b.lo());
    if (hi == LONG_MAX / 4) hi = std::max(a.hi(), b.hi());
    return {lo, hi};
}

} // namespace thetacert

#pragma once

// Series model of y^2 = x^(2g+1) + x at infinity, bases of A = K[x, y] and of the
// spaces attached to two-torsion divisors and to a point Q.

#include <map>
#include <set>
#include <string>

#include "laurent.hpp"

namespace thetacert {

// Power series in s truncated to n terms.
namespace detail {

inline std::vector<mpz_class> ps_mul(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b, size_t n)
{
    std::vector<mpz_class> r(n, 0);
    for (size_t i = 0; i < a.size() && i < n; ++i) {
        if (sgn(a[i]) == 0) continue;
        for (size_t j = 0; j < b.size() && i + j < n; ++j)
            mpz_addmul(r[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
    return r;
}

inline std::vector<mpz_class> ps_pow(const std::vector<mpz_class>& a, unsigned e, size_t n)
{
    std::vector<mpz_class> r(n, 0);
    r[0] = 1;
    std::vector<mpz_class> b = a;
    b.resize(n, 0);
    while (e) {
        if (e & 1) r = ps_mul(r, b, n);
        e >>= 1;
        if (e) b = ps_mul(b, b, n);
    }
    return r;
}

// Inverse of a series with constant term +-1.
inline std::vector<mpz_class> ps_inv(const std::vector<mpz_class>& a, size_t n)
{
    if (a.empty() || (a[0] != 1 && a[0] != -1)) throw std::domain_error("ps_inv: constant term must be +-1");
    std::vector<mpz_class> y(n, 0);
    y[0] = a[0];
    for (size_t m = 1; m < n; ++m) {
        mpz_class acc = 0;
        for (size_t i = 1; i <= m && i < a.size(); ++i) acc += a[i] * y[m - i];
        y[m] = -acc * a[0];
    }
    return y;
}

} // namespace detail

// u(t) in 1 + tZ[[t]] with u^(2g) - u^(2g-1) + t^(4g) = 0, stored in degrees T^0 .. T^-depth
// (t = 1/T). Only powers t^(4g j) occur, so Newton runs on U(s), s = t^(4g).
inline ZSeries build_u(int g, long depth)
{
    if (g < 1) throw std::invalid_argument("build_u: genus must be positive");
    if (depth < 1) throw std::invalid_argument("build_u: depth must be at least 1");
    const long step = 4L * g;
    const size_t n = static_cast<size_t>(depth / step + 1);
    std::vector<mpz_class> U(1, 1);
    size_t prec = 1;
    while (prec < n) {
        prec = std::min(n, 2 * prec);
        U.resize(prec, 0);
        auto U2g1 = detail::ps_pow(U, static_cast<unsigned>(2 * g - 1), prec);
        auto U2g2 = detail::ps_pow(U, static_cast<unsigned>(2 * g - 2), prec);
        auto U2g = detail::ps_mul(U2g1, U, prec);
        std::vector<mpz_class> F(prec, 0), dF(prec, 0);
        for (size_t i = 0; i < prec; ++i) {
            F[i] = U2g[i] - U2g1[i];
            dF[i] = mpz_class(2 * g) * U2g1[i] - mpz_class(2 * g - 1) * U2g2[i];
        }
        if (prec > 1) F[1] += 1;
        auto q = detail::ps_mul(F, detail::ps_inv(dF, prec), prec);
        for (size_t i = 0; i < prec; ++i) U[i] -= q[i];
    }
    ZSeries u(mpz_class(0), -depth, 0, true, true);
    for (size_t j = 0; j < n; ++j) {
        long deg = -static_cast<long>(j) * step;
        if (deg >= -depth) u[deg] = U[j];
    }
    return u;
}

// Series data shared by the exact and the reduced models.
template <class C>
struct CurveSeries {
    int g = 0;
    long depth = 0;
    Series<C> x;
    Series<C> y;
};

inline CurveSeries<mpz_class> build_xy(int g, long depth)
{
    CurveSeries<mpz_class> cs;
    cs.g = g;
    cs.depth = depth;
    ZSeries u = build_u(g, depth);
    cs.x = shift(u, 2);
    cs.y = neg(shift(pow(cs.x, static_cast<unsigned>(g)), 1));
    return cs;
}

// y^2 - x^(2g+1) - x on its known window; every stored coefficient must vanish.
inline ZSeries curve_residual(const CurveSeries<mpz_class>& cs)
{
    ZSeries lhs = mul(cs.y, cs.y);
    ZSeries rhs = add(pow(cs.x, static_cast<unsigned>(2 * cs.g + 1)), cs.x);
    return sub(lhs, rhs);
}

inline bool is_zero_exact(const ZSeries& s)
{
    for (long i = s.lo(); i <= s.hi(); ++i)
        if (sgn(s[i]) != 0) return false;
    return true;
}

inline CurveSeries<Scalar> reduce_curve(const CurveSeries<mpz_class>& cs, const CtxPtr& ctx)
{
    CurveSeries<Scalar> r;
    r.g = cs.g;
    r.depth = cs.depth;
    r.x = reduce(cs.x, ctx);
    r.y = reduce(cs.y, ctx);
    return r;
}

inline long default_depth(int g, int m) { return std::max(400L, 4L * m * g); }

struct WeierstrassPoint {
    bool infinity = false;
    int index = -1;  // -1 for infinity, otherwise i for P_i
    Scalar x;
    Scalar y;
};

class CurveCtx {
public:
    CurveCtx(const CtxPtr& prime, long depth)
        : prime_(integers_of(prime)), exact_(build_xy(prime->g, depth)), reduced_(reduce_curve(exact_, prime_))
    {
    }

    const CtxPtr& prime() const { return prime_; }
    int g() const { return exact_.g; }
    long depth() const { return exact_.depth; }
    const CurveSeries<mpz_class>& exact() const { return exact_; }
    const CurveSeries<Scalar>& reduced() const { return reduced_; }
    Scalar zeta() const { return thetacert::zeta(prime_); }

    std::vector<WeierstrassPoint> weierstrass_points() const
    {
        std::vector<WeierstrassPoint> pts;
        WeierstrassPoint inf;
        inf.infinity = true;
        pts.push_back(inf);
        const Scalar zero(prime_);
        WeierstrassPoint p0;
        p0.index = 0;
        p0.x = zero;
        p0.y = zero;
        pts.push_back(p0);
        const Scalar z = zeta();
        for (int i = 1; i <= 2 * g(); ++i) {
            WeierstrassPoint pi;
            pi.index = i;
            pi.x = z.pow(static_cast<u64>(2 * i - 1));
            pi.y = zero;
            pts.push_back(pi);
        }
        return pts;
    }

private:
    CtxPtr prime_;
    CurveSeries<mpz_class> exact_;
    CurveSeries<Scalar> reduced_;
};

using CurvePtr = std::shared_ptr<const CurveCtx>;

inline CurvePtr make_curve(const CtxPtr& prime, long depth)
{
    return std::make_shared<const CurveCtx>(prime, depth);
}

// Root of r^2 = n modulo p^k with the least residue mod p; nullopt when n is not a square unit.
inline std::optional<u64> sqrt_mod(const PrimeCtx& c, i64 n)
{
    using namespace modarith;
    const u64 p = c.p, m = c.modulus;
    u64 np = reduce(n, p);
    if (np == 0) return std::nullopt;
    u64 r0 = 0;
    for (u64 r = 1; r < p; ++r)
        if (mulmod(r, r, p) == np) {
            r0 = r;
            break;
        }
    if (!r0) return std::nullopt;
    u64 nm = reduce(n, m), r = r0;
    for (int it = 0; it < 8 * c.k; ++it) {
        u64 f = submod(mulmod(r, r, m), nm, m);
        if (!f) break;
        r = submod(r, mulmod(f, invmod(mulmod(2, r, m), m), m), m);
    }
    return r;
}

struct PointCoord {
    i64 value = 0;
    bool sqrt = false;
};

struct DivisorSpec {
    enum class Kind { Trivial, TwoTorsion, Point };
    Kind kind = Kind::Trivial;
    std::vector<int> I;
    PointCoord xq, yq;

    static DivisorSpec trivial() { return DivisorSpec{}; }
    static DivisorSpec two_torsion(std::vector<int> I)
    {
        DivisorSpec d;
        d.kind = Kind::TwoTorsion;
        std::sort(I.begin(), I.end());
        d.I = std::move(I);
        return d;
    }
    static DivisorSpec point(PointCoord x, PointCoord y)
    {
        DivisorSpec d;
        d.kind = Kind::Point;
        d.xq = x;
        d.yq = y;
        return d;
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline PointCoord parse_coord(const std::string& s0)
{
    std::string s = trim(s0);
    PointCoord c;
    if (s.rfind("sqrt", 0) == 0) {
        c.sqrt = true;
        s = s.substr(4);
    }
    size_t pos = 0;
    c.value = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad coordinate: " + s0);
    return c;
}

inline std::string coord_str(const PointCoord& c) { return (c.sqrt ? "sqrt" : "") + std::to_string(c.value); }

} // namespace detail

// "A", "I=0,3" or "Q=(1,sqrt2)".
inline DivisorSpec parse_divisor(const std::string& text)
{
    std::string t = detail::trim(text);
    if (t == "A" || t == "I=" || t.empty()) return DivisorSpec::trivial();
    if (t.rfind("I=", 0) == 0) {
        std::vector<int> I;
        std::stringstream ss(t.substr(2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            size_t pos = 0;
            std::string it = detail::trim(item);
            int v = std::stoi(it, &pos);
            if (pos != it.size()) throw std::invalid_argument("bad index in divisor spec: " + item);
            I.push_back(v);
        }
        std::set<int> uniq(I.begin(), I.end());
        if (uniq.size() != I.size()) throw std::invalid_argument("repeated index in divisor spec");
        return DivisorSpec::two_torsion(I);
    }
    if (t.rfind("Q=", 0) == 0) {
        std::string body = detail::trim(t.substr(2));
        if (body.size() < 5 || body.front() != '(' || body.back() != ')')
            throw std::invalid_argument("point spec must look like Q=(x,y)");
        body = body.substr(1, body.size() - 2);
        size_t comma = body.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("point spec needs two coordinates");
        return DivisorSpec::point(detail::parse_coord(body.substr(0, comma)), detail::parse_coord(body.substr(comma + 1)));
    }
    throw std::invalid_argument("unknown divisor spec: " + text);
}

inline std::string to_string(const DivisorSpec& d)
{
    switch (d.kind) {
    case DivisorSpec::Kind::Trivial:
        return "A";
    case DivisorSpec::Kind::TwoTorsion: {
        std::string s = "I=";
        for (size_t i = 0; i < d.I.size(); ++i) s += (i ? "," : "") + std::to_string(d.I[i]);
        return s;
    }
    case DivisorSpec::Kind::Point:
        return "Q=(" + detail::coord_str(d.xq) + "," + detail::coord_str(d.yq) + ")";
    }
    return "";
}

// Point coordinates modulo p^k, validated against the curve equation.
inline std::pair<Scalar, Scalar> resolve_point(const DivisorSpec& d, const CtxPtr& ctx)
{
    if (d.kind != DivisorSpec::Kind::Point) throw std::logic_error("resolve_point: not a point spec");
    auto value = [&](const PointCoord& c) {
        if (!c.sqrt) return Scalar::from_int(ctx, c.value);
        auto r = sqrt_mod(*ctx, c.value);
        if (!r) throw std::invalid_argument("sqrt" + std::to_string(c.value) + " has no root in Z_p");
        return Scalar::from_residue(ctx, *r);
    };
    Scalar x = value(d.xq), y = value(d.yq);
    Scalar rhs = x.pow(static_cast<u64>(2 * ctx->g + 1)) + x;
    if (!(y * y == rhs)) throw std::invalid_argument("point is not on the curve modulo p^k");
    if (y.is_zero()) throw std::invalid_argument("point must not be a Weierstrass point");
    return {x, y};
}

namespace detail {

template <class C>
class PowerCache {
public:
    explicit PowerCache(const Series<C>& x) : x_(x) {}
    const Series<C>& operator()(long j)
    {
        if (pw_.empty()) pw_.push_back(Series<C>::monomial(one_like(x_.zero()), 0));
        while (static_cast<long>(pw_.size()) <= j) pw_.push_back(mul(pw_.back(), x_));
        return pw_[static_cast<size_t>(j)];
    }

private:
    Series<C> x_;
    std::vector<Series<C>> pw_;
};

template <class C>
Series<C> make_monic(Series<C> s)
{
    auto [d, monic] = degree_monic(s);
    if (monic) return s;
    if (s[d] == -one_like(s.zero())) return neg(s);
    throw std::domain_error("leading coefficient is not +-1");
}

// Start of the final run of consecutive degrees.
inline long contiguous_start(const std::vector<long>& deg)
{
    if (deg.empty()) return 0;
    size_t i = deg.size() - 1;
    while (i > 0 && deg[i - 1] == deg[i] - 1) --i;
    return deg[i];
}

} // namespace detail

// Clear coefficients of w_i at degrees [c, deg(w_i) - 1], c the start of the consecutive
// degree run, using earlier monic elements; top degree first.
template <class C>
std::vector<Series<C>> admissible_reduce(std::vector<Series<C>> v)
{
    std::vector<long> deg;
    for (auto& s : v) {
        auto [d, monic] = degree_monic(s);
        if (!monic) throw std::domain_error("admissible_reduce: generator is not monic");
        if (!deg.empty() && d <= deg.back()) throw std::domain_error("admissible_reduce: degrees must increase");
        deg.push_back(d);
    }
    const long c = detail::contiguous_start(deg);
    std::map<long, size_t> at;
    for (size_t i = 0; i < v.size(); ++i) {
        for (long t = deg[i] - 1; t >= c; --t) {
            if (!v[i].stored(t)) break;
            const C coef = v[i][t];
            if (coeff_traits<C>::is_zero(coef)) continue;
            auto it = at.find(t);
            if (it == at.end()) throw std::logic_error("admissible_reduce: missing degree in consecutive run");
            v[i] = sub(v[i], scale(v[it->second], coef));
            v[i].trim_head();
        }
        at[deg[i]] = i;
    }
    return v;
}

// Basis u_1, u_2, ... of A before reduction.
template <class C>
std::vector<Series<C>> raw_basis_A(const CurveSeries<C>& cs, int m)
{
    const int g = cs.g;
    detail::PowerCache<C> xp(cs.x);
    const Series<C> my = neg(cs.y);
    std::vector<Series<C>> out;
    for (int i = 1; i <= m; ++i) {
        if (i <= g)
            out.push_back(xp(i - 1));
        else if ((i - g) % 2 != 0)
            out.push_back(xp(g + (i - g - 1) / 2));
        else
            out.push_back(mul(my, xp((i - g - 2) / 2)));
    }
    return out;
}

template <class C>
std::vector<Series<C>> basis_A(const CurveSeries<C>& cs, int m)
{
    if (m < 1) throw std::invalid_argument("basis_A: count must be positive");
    return admissible_reduce(raw_basis_A(cs, m));
}

// Degrees of the admissible basis of A: 0, 2, ..., 2g, then every integer.
inline long basis_A_degree(int g, int i) { return i <= g + 1 ? 2L * i - 2 : static_cast<long>(i) - 1 + g; }

// Number of A-basis elements needed to reach degree d.
inline int basis_A_count_for(int g, long d)
{
    if (d <= 2L * g) return static_cast<int>(std::max(0L, d) / 2 + 1);
    return static_cast<int>(d - g + 1);
}

inline std::vector<TSeries> raw_basis_divisor(const CurveCtx& cc, const DivisorSpec& spec, int m)
{
    const CurveSeries<Scalar>& cs = cc.reduced();
    const int g = cs.g;
    const CtxPtr& ctx = cc.prime();
    if (spec.kind == DivisorSpec::Kind::Trivial) return raw_basis_A(cs, m);
    detail::PowerCache<Scalar> xp(cs.x);
    std::vector<TSeries> out;
    if (spec.kind == DivisorSpec::Kind::TwoTorsion) {
        const int s = static_cast<int>(spec.I.size());
        if (s > g) throw std::invalid_argument("two-torsion spec needs |I| <= g");
        auto pts = cc.weierstrass_points();
        TSeries f = cs.y;
        for (int j : spec.I) {
            if (j < 0 || j > 2 * g) throw std::invalid_argument("two-torsion index out of range 0..2g");
            const Scalar& xj = pts[static_cast<size_t>(j + 1)].x;
            TSeries lin = sub(cs.x, TSeries::monomial(xj, 0));
            f = mul(f, invert(lin, cs.depth));
        }
        f = detail::make_monic(f);
        for (int i = 1; i <= m; ++i) {
            if (i <= g - s) {
                out.push_back(shift(xp(i - 1), s));
                continue;
            }
            const int r = i - (g - s);
            if (r % 2)
                out.push_back(shift(xp(g - s + (r - 1) / 2), s));
            else
                out.push_back(shift(mul(f, xp((r - 2) / 2)), s));
        }
        return out;
    }
    auto [xq, yq] = resolve_point(spec, ctx);
    TSeries lq = add(sub(cs.y, cs.x), TSeries::monomial(yq + xq, 0));
    TSeries f = detail::make_monic(mul(lq, invert(sub(cs.x, TSeries::monomial(xq, 0)), cs.depth)));
    for (int i = 1; i <= m; ++i) {
        if (i <= g) {
            out.push_back(shift(xp(i - 1), 1));
            continue;
        }
        const int r = i - g;
        if (r % 2)
            out.push_back(shift(mul(f, xp((r - 1) / 2)), 1));
        else
            out.push_back(shift(xp(g + (r - 2) / 2), 1));
    }
    return out;
}

inline std::vector<TSeries> basis_divisor(const CurveCtx& cc, const DivisorSpec& spec, int m)
{
    if (m < 1) throw std::invalid_argument("basis_divisor: count must be positive");
    return admissible_reduce(raw_basis_divisor(cc, spec, m));
}

// Degree table of the unreduced basis, for checks.
inline long basis_divisor_degree(int g, const DivisorSpec& spec, int i)
{
    switch (spec.kind) {
    case DivisorSpec::Kind::Trivial:
        return basis_A_degree(g, i);
    case DivisorSpec::Kind::TwoTorsion: {
        const int s = static_cast<int>(spec.I.size());
        return i <= g - s ? 2L * i - 2 + s : static_cast<long>(i) + g - 1;
    }
    case DivisorSpec::Kind::Point:
        return i <= g ? 2L * i - 1 : static_cast<long>(i) + g - 1;
    }
    return 0;
}

// f = a_part + tail + sum gap_j T^(2j+1): a_part in A, tail in degrees <= -1.
template <class C>
struct GapDecomposition {
    Series<C> a_part;
    std::map<long, C> a_coords;  // keyed by the degree of the A-basis element
    Series<C> tail;
    std::vector<C> gap;          // coefficients at T^1, T^3, ..., T^(2g-1)
};

// Decomposition against a supplied admissible basis of A (degrees 0,2,..,2g,2g+1,...).
template <class C>
GapDecomposition<C> decompose_gap(const std::vector<Series<C>>& basisA, int g, const Series<C>& f)
{
    if (!f.head_exact()) throw PrecisionError("decompose_gap: head of the input is unknown");
    std::map<long, size_t> at;
    for (size_t i = 0; i < basisA.size(); ++i) at[degree(basisA[i])] = i;
    GapDecomposition<C> out;
    out.gap.assign(static_cast<size_t>(g), f.zero());
    Series<C> cur = f;
    Series<C> apart(f.zero(), 0, -1, true, false);
    auto top = cur.top_nonzero();
    for (long d = top ? *top : -1; d >= 0; --d) {
        if (!cur.stored(d)) {
            if (cur.known(d)) continue;
            throw PrecisionError("decompose_gap: window too shallow");
        }
        C c = cur[d];
        if (coeff_traits<C>::is_zero(c)) continue;
        if (d < 2L * g && d % 2 == 1) {
            out.gap[static_cast<size_t>(d / 2)] = c;
            cur[d] = cur.zero();
            continue;
        }
        auto it = at.find(d);
        if (it == at.end()) throw PrecisionError("decompose_gap: A-basis does not reach degree " + std::to_string(d));
        Series<C> part = scale(basisA[it->second], c);
        cur = sub(cur, part);
        apart = add(apart, part);
        out.a_coords[d] = c;
    }
    // everything at degrees >= 0 is now zero; keep the tail
    Series<C> tail = cur.truncate_head(-1, true);
    tail.trim_head();
    out.tail = tail;
    apart.trim_head();
    out.a_part = apart;
    return out;
}

template <class C>
bool gap_is_zero(const GapDecomposition<C>& d)
{
    for (auto& c : d.gap)
        if (!coeff_traits<C>::is_zero(c)) return false;
    return true;
}

template <class C>
bool tail_is_zero(const GapDecomposition<C>& d)
{
    for (long i = d.tail.lo(); i <= d.tail.hi(); ++i)
        if (!coeff_traits<C>::is_zero(d.tail[i])) return false;
    return true;
}

} // namespace thetacert

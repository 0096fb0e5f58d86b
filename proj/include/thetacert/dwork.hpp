#pragma once

// Dwork loops exp(pi(uT - (uT)^p)), the splitting T^p - e0 T = a(T) + g(T), the
// factorizations of h^p and of the twisted quotient, and the certificates built on them.

#include <gmpxx.h>

#include "grassmann.hpp"

namespace thetacert {

// Decay slope (p-1)/p^2 of Dwork loop coefficients.
inline Rational dwork_slope(u64 p) { return Rational(static_cast<i64>(p - 1), static_cast<i64>(p * p)); }

// Smallest n with n(p-1)/p^2 >= k: coefficients from there on vanish mod p^k.
inline long dwork_cut(u64 p, int k)
{
    const Rational s = dwork_slope(p);
    long n = 0;
    while (Rational(n) * s < Rational(k)) ++n;
    return n;
}

struct DworkLoop {
    Scalar u;
    TSeries h;
    bool head_complete = true;  // false when M stops before the decay cut
};

// exp(sign * pi * (T - T^p)) in O1, coefficients through degree min(M, cut - 1).
inline TSeries dwork_unit_loop(const CtxPtr& ctx, std::optional<long> M = std::nullopt, int sign = 1)
{
    const CtxPtr r = ramified_of(ctx);
    const u64 p = r->p;
    const long cut = dwork_cut(p, r->k);
    const long top = M ? std::min(*M, cut - 1) : cut - 1;
    const bool complete = !M || *M >= cut - 1;
    FactorialTable fact(r, std::max(1L, top));
    TSeries h(Scalar(r), 0, top, complete, false);
    for (long n = 0; n <= top; ++n) {
        Scalar acc(r);
        for (long b = 0; b * static_cast<long>(p) <= n; ++b) {
            const long a = n - b * static_cast<long>(p);
            const u64 unit = modarith::mulmod(fact.unit(a), fact.unit(b), r->modulus);
            Scalar t = pi_power_over(r, a + b, fact.vp(a) + fact.vp(b), unit);
            bool negate = (b % 2 == 1) != (sign < 0 && (a + b) % 2 == 1);
            if (negate)
                acc -= t;
            else
                acc += t;
        }
        h[n] = std::move(acc);
    }
    h.set_decay(Decay{dwork_slope(p), Rational(0)});
    return h;
}

// h(T) = exp(pi(uT - (uT)^p)) for a unit u; sign = -1 gives the inverse loop.
inline DworkLoop dwork_loop(const Scalar& u, std::optional<long> M = std::nullopt, int sign = 1)
{
    if (!is_unit(u)) throw std::domain_error("dwork_loop: u must be a unit");
    DworkLoop L;
    L.u = u;
    TSeries h1 = dwork_unit_loop(u.ctx(), M, sign);
    L.head_complete = h1.head_exact();
    CtxPtr target = u.ctx()->ramified ? u.ctx() : ramified_of(u.ctx());
    L.h = scale_variable(h1, u.embed(target));
    return L;
}

// Exact valuations of the coefficients of exp(pi(T - T^p)) over Q_p(pi), independent of
// the working precision: coordinate r collects the terms with a+b = r mod (p-1).
inline std::vector<Rational> exact_loop_valuations(u64 p, long nmax)
{
    std::vector<mpz_class> fact(static_cast<size_t>(nmax + 1));
    fact[0] = 1;
    for (long n = 1; n <= nmax; ++n) fact[static_cast<size_t>(n)] = fact[static_cast<size_t>(n - 1)] * n;
    const mpz_class P(static_cast<unsigned long>(p));
    auto vp = [&](mpz_class x) {
        long v = 0;
        while (x % P == 0) {
            x /= P;
            ++v;
        }
        return v;
    };
    std::vector<Rational> out;
    const long e = static_cast<long>(p - 1);
    for (long n = 0; n <= nmax; ++n) {
        std::vector<mpq_class> coord(static_cast<size_t>(e), mpq_class(0));
        for (long b = 0; b * static_cast<long>(p) <= n; ++b) {
            const long a = n - b * static_cast<long>(p);
            const long q = (a + b) / e, r = (a + b) % e;
            mpz_class num;
            mpz_pow_ui(num.get_mpz_t(), P.get_mpz_t(), static_cast<unsigned long>(q));
            if ((q + b) % 2) num = -num;  // (-p)^q (-1)^b
            mpq_class t(num, fact[static_cast<size_t>(a)] * fact[static_cast<size_t>(b)]);
            t.canonicalize();
            coord[static_cast<size_t>(r)] += t;
        }
        Rational best(LONG_MAX / 4);
        bool any = false;
        for (long r = 0; r < e; ++r) {
            const mpq_class& c = coord[static_cast<size_t>(r)];
            if (sgn(c) == 0) continue;
            Rational v = Rational(vp(c.get_num()) - vp(c.get_den())) + Rational(r, e);
            if (!any || v < best) best = v;
            any = true;
        }
        if (!any) throw std::logic_error("exact_loop_valuations: vanishing coefficient");
        out.push_back(best);
    }
    return out;
}

struct SplitResult {
    mpz_class e0;
    ZSeries a;          // element of A
    ZSeries gpart;      // support in degrees <= -1
    ZSeries residual;   // T^p - e0 T - a - gpart
    GapDecomposition<mpz_class> direct;  // decompose_gap(T^p)
    bool residual_zero = false;
    bool routes_agree = false;
    bool e0_unit = false;
};

// Binomial splitting of T^(p-1) = (x + x^(1-2g))^(2gp'), cross-checked against the
// decomposition of T^p along A + gaps + T^(-1)Z[[1/T]].
inline SplitResult split_Tp(const CurveCtx& cc)
{
    const CurveSeries<mpz_class>& cs = cc.exact();
    const int g = cs.g;
    const u64 p = cc.prime()->p;
    const unsigned long pp = static_cast<unsigned long>((p - 1) / (4 * static_cast<u64>(g)));
    const unsigned long n = 2UL * g * pp;
    auto binom = [](unsigned long a, unsigned long b) {
        mpz_class r;
        mpz_bin_uiui(r.get_mpz_t(), a, b);
        return r;
    };
    SplitResult out;
    out.e0 = binom(n, pp);
    out.e0_unit = out.e0 % mpz_class(static_cast<unsigned long>(p)) != 0;

    detail::PowerCache<mpz_class> xp(cs.x);
    ZSeries eplus_over(mpz_class(0), 0, -1, true, false);  // e_+(x) / x^g
    for (unsigned long j = 0; j < pp; ++j)
        eplus_over = add(eplus_over, scale(xp(static_cast<long>(2 * g * (pp - j) - g)), binom(n, j)));
    out.a = mul(neg(cs.y), eplus_over);

    ZSeries xinv = invert(cs.x);
    detail::PowerCache<mpz_class> xi(xinv);
    ZSeries eminus(mpz_class(0), 0, -1, true, false);
    for (unsigned long j = pp + 1; j <= n; ++j)
        eminus = add(eminus, scale(xi(static_cast<long>(2 * g * (j - pp))), binom(n, j)));
    out.gpart = shift(eminus, 1);

    ZSeries lhs = sub(ZSeries::monomial(mpz_class(1), static_cast<long>(p)), ZSeries::monomial(out.e0, 1));
    out.residual = sub(sub(lhs, out.a), out.gpart);
    out.residual_zero = is_zero_exact(out.residual);

    auto basis = basis_A(cs, basis_A_count_for(g, static_cast<long>(p)));
    out.direct = decompose_gap(basis, g, ZSeries::monomial(mpz_class(1), static_cast<long>(p)));
    bool agree = out.direct.gap[0] == out.e0;
    for (size_t i = 1; i < out.direct.gap.size(); ++i) agree = agree && sgn(out.direct.gap[i]) == 0;
    auto [alo, ahi] = common_window(out.a, out.direct.a_part);
    agree = agree && equal_on_window(out.a, out.direct.a_part, alo, ahi);
    auto [glo, ghi] = common_window(out.gpart, out.direct.tail);
    agree = agree && equal_on_window(out.gpart, out.direct.tail, glo, ghi);
    out.routes_agree = agree;
    return out;
}

struct Factorization {
    TSeries lhs;      // assembled from Dwork loops
    TSeries h_A;
    TSeries h_A_inv;
    TSeries h_minus;
    TSeries product;  // h_A * h_minus
    long window_lo = 0, window_hi = 0;
    Verdict reassembly = Verdict::Unknown;
    Verdict a_member = Verdict::Unknown;
    Verdict minus_member = Verdict::Unknown;
    std::string note;
};

namespace detail {

inline Verdict in_A_bar(const std::vector<TSeries>& basisA, int g, const TSeries& f, std::string& note)
{
    try {
        auto d = decompose_gap(basisA, g, f);
        if (!gap_is_zero(d)) {
            note = "nonzero gap vector";
            return Verdict::Fail;
        }
        if (!tail_is_zero(d)) {
            note = "nonzero tail";
            return Verdict::Fail;
        }
        return Verdict::Pass;
    } catch (const PrecisionError& e) {
        note = e.what();
        return Verdict::Unknown;
    }
}

// exp(pi^p * c * a) and exp(pi^p * c * g), checked against lhs.
inline Factorization factor_with(const CurveCtx& cc, const SplitResult& sp, const Scalar& c, TSeries lhs,
                                 const std::vector<TSeries>& basisA)
{
    const int p = static_cast<int>(cc.prime()->p);
    Factorization F;
    F.lhs = std::move(lhs);
    const CtxPtr ctx = c.ctx();
    TSeries a = scale(reduce(sp.a, ctx), c);
    TSeries gp = scale(reduce(sp.gpart, ctx), c);
    F.h_A = exp_series(a, p);
    F.h_A_inv = exp_series(neg(a), p);
    F.h_minus = exp_series(gp, p);
    F.product = mul(F.h_A, F.h_minus);
    auto [lo, hi] = common_window(F.lhs, F.product);
    F.window_lo = lo;
    F.window_hi = hi;
    try {
        F.reassembly = equal_on_window(F.lhs, F.product, lo, hi) ? Verdict::Pass : Verdict::Fail;
        if (F.reassembly == Verdict::Fail) F.note = "h_A * h_minus differs from the loop side";
    } catch (const PrecisionError& e) {
        F.note = e.what();
    }
    std::string n1, n2;
    Verdict v1 = in_A_bar(basisA, cc.g(), F.h_A, n1);
    Verdict v2 = in_A_bar(basisA, cc.g(), F.h_A_inv, n2);
    if (v1 == Verdict::Pass && v2 == Verdict::Pass)
        F.a_member = gamma_general(F.h_A) ? Verdict::Pass : Verdict::Fail;
    else
        F.a_member = v1 == Verdict::Fail || v2 == Verdict::Fail ? Verdict::Fail : Verdict::Unknown;
    if (F.a_member != Verdict::Pass && F.note.empty()) F.note = "h_A: " + n1 + " " + n2;
    F.minus_member = gamma_minus(F.h_minus) ? Verdict::Pass : Verdict::Fail;
    return F;
}

} // namespace detail

inline std::vector<TSeries> basis_A_through(const CurveCtx& cc, long degree)
{
    return basis_A(cc.reduced(), basis_A_count_for(cc.g(), degree));
}

// Exact-epsilon context: pi adjoined and eps^(p-1) = 1/e0.
inline CtxPtr epsilon_context(const CurveCtx& cc, const SplitResult& sp)
{
    const CtxPtr base = ramified_of(cc.prime());
    return adjoin_epsilon(base, Scalar::from_mpz(base, sp.e0));
}

// h_D^p = h_A h_minus with h_D the loop at u = eps, or at u = 1 when `wrong_scalar` is set
// (eps^p then replaced by 1).
inline Factorization factor_hp(const CurveCtx& cc, const SplitResult& sp, bool wrong_scalar = false)
{
    const u64 p = cc.prime()->p;
    CtxPtr ctx = wrong_scalar ? ramified_of(cc.prime()) : epsilon_context(cc, sp);
    Scalar u = wrong_scalar ? Scalar::from_int(ctx, 1) : Scalar::epsilon(ctx);
    DworkLoop L = dwork_loop(u);
    TSeries lhs = pow(L.h, static_cast<unsigned>(p));
    const Scalar c = u.pow(p);
    auto basis = basis_A_through(cc, static_cast<long>(p) * ctx->k + 2L * cc.g());
    return detail::factor_with(cc, sp, c, lhs, basis);
}

// h_D(omega(i)T) h_D(T)^(-i) = h_{A,i} h_{-,i}, with exponent factor ((omega(i)-i)/p) eps^p.
inline Factorization factor_twist(const CurveCtx& cc, const SplitResult& sp, i64 i)
{
    const PrimeCtx& pc = *cc.prime();
    const u64 p = pc.p;
    if (modarith::reduce(i, p) == 0) throw std::domain_error("factor_twist: i must be prime to p");
    if (i < 1) throw std::domain_error("factor_twist: i must be positive");
    CtxPtr ctx = epsilon_context(cc, sp);
    Scalar eps = Scalar::epsilon(ctx);
    // (omega(i) - i)/p from a lift modulo p^(k+1)
    const u64 big = modarith::checked_pow(p, pc.k + 1, 63);
    u64 w1 = modarith::teichmuller_int(p, i, pc.k + 1);
    u64 diff = modarith::submod(w1, modarith::reduce(i, big), big);
    if (diff % p) throw std::logic_error("factor_twist: Teichmuller congruence failed");
    Scalar q = Scalar::from_residue(ctx, diff / p);
    Scalar omega = teichmuller(integers_of(cc.prime()), i);

    DworkLoop L = dwork_loop(eps);
    DworkLoop Linv = dwork_loop(eps, std::nullopt, -1);
    TSeries lhs = mul(scale_variable(L.h, omega), pow(Linv.h, static_cast<unsigned>(i)));
    const Scalar c = q * eps.pow(p);
    auto basis = basis_A_through(cc, static_cast<long>(p) * ctx->k + 2L * cc.g());
    return detail::factor_with(cc, sp, c, lhs, basis);
}

// Number of A-style basis elements needed for the theta certificate of a degree-0 space.
inline int theta_basis_count(int g, u64 p, int k)
{
    (void)g;
    return static_cast<int>(dwork_cut(p, k)) + 2;
}

// Runs the Dwork loop at u on W and certifies the theta verdict of the image.
inline Certificate theta_avoid(const WSpace& W, const Scalar& u, std::optional<long> M = std::nullopt)
{
    Certificate cert;
    cert.name = "theta_avoid:" + W.label;
    const PrimeCtx& c = *u.ctx();
    if (c.p < 7) throw std::domain_error("theta_avoid: needs p >= 7");
    if (!W.certified || W.analytic) throw std::invalid_argument("theta_avoid: needs a certified algebraic space");
    if (W.index != 1 - W.g) throw std::domain_error("theta_avoid: index must be 1-g");
    for (const auto& w : W.basis) {
        auto [d, monic] = degree_monic(w);
        (void)d;
        if (!monic || series_min_valuation(w).units < 0)
            throw std::domain_error("theta_avoid: basis elements must be monic and integral");
    }
    const long bound = std::max(W.kappa1(), W.length());
    if (4 * bound >= static_cast<long>(c.p)) throw std::domain_error("theta_avoid: max(kappa_1, length) must be < p/4");
    cert.fact("kappa1", std::to_string(W.kappa1()));
    cert.fact("length", std::to_string(W.length()));
    DworkLoop L = dwork_loop(u, M);
    if (!L.head_complete) {
        cert.reason = "loop expansion stops before the decay cut";
        return cert;
    }
    try {
        WSpace V = loop_act(L.h, W, L.h.hi() + 8);
        Certificate t = theta_member(V);
        t.name = cert.name;
        t.partition = W.partition;
        for (auto& f : cert.facts) t.facts.insert(t.facts.begin(), f);
        return t;
    } catch (const PrecisionError& e) {
        cert.reason = e.what();
        return cert;
    }
}

namespace detail {

inline Verdict combine(std::initializer_list<Verdict> vs)
{
    bool unknown = false;
    for (Verdict v : vs) {
        if (v == Verdict::Fail) return Verdict::Fail;
        if (v != Verdict::Pass) unknown = true;
    }
    return unknown ? Verdict::Unknown : Verdict::Pass;
}

inline Verdict from_bool(bool b) { return b ? Verdict::Pass : Verdict::Fail; }

} // namespace detail

// A nontrivial p-torsion class in the chi-eigenspace: index of h_D A, triviality of its
// p-th power, the eigen-relation under the twist, and avoidance of Theta.
inline Certificate certify_ptorsion(const CurveCtx& cc, bool wrong_scalar = false)
{
    using detail::combine;
    using detail::from_bool;
    Certificate cert;
    cert.name = wrong_scalar ? "ptorsion:wrong-scalar" : "ptorsion";
    const int g = cc.g();
    const PrimeCtx& pc = *cc.prime();
    SplitResult sp = split_Tp(cc);
    cert.fact("e0", sp.e0.get_str());
    {
        Stage s{"split", combine({from_bool(sp.e0_unit), from_bool(sp.residual_zero), from_bool(sp.routes_agree)}), ""};
        s.detail = "e0=" + sp.e0.get_str();
        cert.stages.push_back(s);
        if (s.verdict != Verdict::Pass) {
            cert.verdict = s.verdict;
            cert.reason = "split";
            return cert;
        }
    }
    CtxPtr ctx = wrong_scalar ? ramified_of(cc.prime()) : epsilon_context(cc, sp);
    Scalar u = wrong_scalar ? Scalar::from_int(ctx, 1) : Scalar::epsilon(ctx);
    const int msmall = 4 * g + 8;
    WSpace A = make_space(cc, DivisorSpec::trivial(), msmall);

    // (i) index of V = h_D A
    DworkLoop L = dwork_loop(u);
    {
        Stage s{"index", Verdict::Unknown, ""};
        try {
            WSpace V = loop_act(L.h, A, L.h.hi() + 8);
            s.verdict = from_bool(V.index == 1 - g);
            s.detail = "i(V)=" + std::to_string(V.index);
        } catch (const PrecisionError& e) {
            s.detail = e.what();
        }
        cert.stages.push_back(s);
    }
    // (ii) h_D^p = h_A h_minus with h_A in A-bar and h_minus in Gamma_-
    {
        Stage s{"p-power", Verdict::Unknown, ""};
        Factorization F = factor_hp(cc, sp, wrong_scalar);
        Verdict sb = Verdict::Unknown;
        std::string sbr;
        if (F.minus_member == Verdict::Pass) {
            try {
                auto r = same_bundle(loop_act(F.h_minus, A), A);
                sb = r.verdict;
                sbr = r.reason;
            } catch (const PrecisionError& e) {
                sbr = e.what();
            }
        }
        s.verdict = combine({F.reassembly, F.a_member, F.minus_member, sb});
        s.detail = "reassembly=" + to_string(F.reassembly) + " A-bar=" + to_string(F.a_member)
                   + " Gamma_-=" + to_string(F.minus_member) + " same_bundle=" + to_string(sb);
        if (!F.note.empty()) s.detail += " (" + F.note + ")";
        if (!sbr.empty()) s.detail += " [" + sbr + "]";
        cert.stages.push_back(s);
    }
    // (iii) twist: r(A) = A and h_D(zeta T) = h_D^s h_{A,s} h_{-,s}
    if (!wrong_scalar) {
        Stage s{"eigen", Verdict::Unknown, ""};
        const Scalar zeta = cc.zeta();
        bool twistA = true;
        for (size_t i = 0; i < A.basis.size(); ++i) {
            TSeries lhs = zeta_twist(A.basis[i], cc.prime());
            TSeries rhs = scale(A.basis[i], zeta.pow(static_cast<u64>(((A.degrees[i] % (4 * g)) + 4 * g) % (4 * g))));
            auto [lo, hi] = common_window(lhs, rhs);
            twistA = twistA && equal_on_window(lhs, rhs, lo, hi);
        }
        TSeries tw = zeta_twist(L.h, cc.prime());
        TSeries sc = scale_variable(L.h, teichmuller(cc.prime(), static_cast<i64>(pc.s0)));
        bool loop_twist = equal_on_window(tw, sc, tw.lo(), tw.hi());
        Factorization F = factor_twist(cc, sp, static_cast<i64>(pc.s0));
        Verdict sb = Verdict::Unknown;
        std::string sbr;
        if (F.minus_member == Verdict::Pass) {
            try {
                auto r = same_bundle(loop_act(F.h_minus, A), A);
                sb = r.verdict;
                sbr = r.reason;
            } catch (const PrecisionError& e) {
                sbr = e.what();
            }
        }
        s.verdict = combine({from_bool(twistA), from_bool(loop_twist), F.reassembly, F.a_member, F.minus_member, sb});
        s.detail = "s=" + std::to_string(pc.s0) + " twist(A)=A:" + (twistA ? "yes" : "no")
                   + " reassembly=" + to_string(F.reassembly) + " A-bar=" + to_string(F.a_member)
                   + " Gamma_-=" + to_string(F.minus_member) + " same_bundle=" + to_string(sb);
        if (!F.note.empty()) s.detail += " (" + F.note + ")";
        if (!sbr.empty()) s.detail += " [" + sbr + "]";
        cert.stages.push_back(s);
    }
    // (iv) nontriviality: h_D A avoids Theta while A itself lies on it
    {
        Stage s{"nontrivial", Verdict::Unknown, ""};
        Certificate a_in = theta_member(A);
        WSpace Abig = make_space(cc, DivisorSpec::trivial(), theta_basis_count(g, pc.p, pc.k));
        Certificate out = theta_avoid(Abig, u);
        s.verdict = combine({from_bool(a_in.verdict == Verdict::In),
                             out.verdict == Verdict::Out ? Verdict::Pass
                                                         : (out.verdict == Verdict::Unknown ? Verdict::Unknown : Verdict::Fail)});
        s.detail = "theta(A)=" + to_string(a_in.verdict) + " theta(h_D A)=" + to_string(out.verdict);
        for (auto& f : out.facts)
            if (f.first == "determinant_valuation") s.detail += " det_valuation=" + f.second;
        if (!out.reason.empty()) s.detail += " (" + out.reason + ")";
        cert.pivots = out.pivots;
        cert.stages.push_back(s);
    }
    Verdict total = Verdict::Pass;
    for (auto& s : cert.stages) {
        if (s.verdict == Verdict::Fail) {
            total = Verdict::Fail;
            if (cert.reason.empty()) cert.reason = s.name;
        } else if (s.verdict == Verdict::Unknown && total == Verdict::Pass) {
            total = Verdict::Unknown;
            cert.reason = s.name;
        }
    }
    cert.verdict = total;
    cert.index = 1 - g;
    return cert;
}

} // namespace thetacert

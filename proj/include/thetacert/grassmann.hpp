#pragma once

// Truncated Sato Grassmannian: admissible bases, index, partition, theta membership,
// products and the loop-group action.

#include <memory>

#include "curve.hpp"
#include "linalg.hpp"

namespace thetacert {

enum class Verdict { Pass, Fail, Unknown, In, Out };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Unknown: return "Unknown";
    case Verdict::In: return "In";
    case Verdict::Out: return "Out";
    }
    return "Unknown";
}

struct PivotRecord {
    long degree = 0;
    Valuation valuation;
};

struct Stage {
    std::string name;
    Verdict verdict = Verdict::Unknown;
    std::string detail;
};

struct Certificate {
    std::string name;
    Verdict verdict = Verdict::Unknown;
    std::optional<long> index;
    std::vector<long> partition;
    std::vector<PivotRecord> pivots;
    std::optional<TSeries> witness;
    std::vector<Stage> stages;
    std::vector<std::pair<std::string, std::string>> facts;
    std::string reason;

    void fact(std::string k, std::string v) { facts.emplace_back(std::move(k), std::move(v)); }
};

struct WSpace {
    std::string label;
    int g = 0;
    std::vector<TSeries> generators;

    bool certified = false;
    bool analytic = false;
    bool partition_certified = true;
    std::vector<TSeries> basis;
    std::vector<long> degrees;
    long index = 0;
    std::vector<long> partition;  // nonzero parts of kappa
    std::vector<PivotRecord> pivots;

    // set for spaces produced by the loop action
    std::shared_ptr<const WSpace> base;
    std::optional<TSeries> loop;

    long length() const { return static_cast<long>(partition.size()); }
    long kappa1() const { return partition.empty() ? 0 : partition.front(); }
};

namespace detail {

// Index and partition from a strictly increasing degree sequence.
inline void fill_index(WSpace& W)
{
    const auto& d = W.degrees;
    const long m = static_cast<long>(d.size());
    if (m < 2) throw PrecisionError("too few basis elements to read off the index");
    for (long i = 1; i < m; ++i)
        if (d[static_cast<size_t>(i)] <= d[static_cast<size_t>(i - 1)])
            throw std::logic_error("degrees must be strictly increasing");
    if (d[static_cast<size_t>(m - 1)] != d[static_cast<size_t>(m - 2)] + 1)
        throw PrecisionError("degrees have not stabilized inside the window");
    W.index = m - d[static_cast<size_t>(m - 1)];
    W.partition.clear();
    for (long i = 1; i <= m; ++i) {
        long kappa = i - W.index - d[static_cast<size_t>(i - 1)];
        if (kappa < 0) throw std::logic_error("negative partition entry");
        if (kappa > 0) W.partition.push_back(kappa);
    }
}

inline long top_degree(const TSeries& s)
{
    auto t = s.top_nonzero();
    if (!t) throw PrecisionError("series is indistinguishable from zero");
    return *t;
}

} // namespace detail

// Echelon form by leading degree with unit pivots, followed by clearing every pivot
// degree in the later elements. Generators that vanish on their window are dropped.
inline WSpace reduce_admissible(const std::vector<TSeries>& vs, int g, std::string label = "W")
{
    std::vector<TSeries> pool;
    for (const auto& v : vs) {
        if (!v.head_exact()) throw std::invalid_argument("reduce_admissible: generators need exact heads");
        TSeries t = v;
        t.trim_head();
        if (t.top_nonzero()) pool.push_back(std::move(t));
    }
    std::vector<TSeries> piv;
    std::vector<PivotRecord> recs;
    while (!pool.empty()) {
        long D = LONG_MIN;
        for (auto& v : pool) D = std::max(D, *v.top_nonzero());
        size_t best = pool.size();
        Valuation bv;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (*pool[i].top_nonzero() != D) continue;
            Valuation v = valuation(pool[i][D]);
            if (best == pool.size() || v.units < bv.units) {
                best = i;
                bv = v;
            }
        }
        if (bv.units > 0 || !is_unit(pool[best][D]))
            throw PrecisionError("pivot at degree " + std::to_string(D) + " is not a unit");
        TSeries pv = scale(pool[best], inverse(pool[best][D]));
        std::vector<TSeries> next;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (i == best) continue;
            if (*pool[i].top_nonzero() != D) {
                next.push_back(std::move(pool[i]));
                continue;
            }
            TSeries r = sub(pool[i], scale(pv, pool[i][D]));
            r.trim_head();
            if (r.top_nonzero()) next.push_back(std::move(r));
        }
        pool = std::move(next);
        piv.push_back(std::move(pv));
        recs.push_back(PivotRecord{D, bv});
    }
    std::reverse(piv.begin(), piv.end());
    std::reverse(recs.begin(), recs.end());

    WSpace W;
    W.label = std::move(label);
    W.g = g;
    W.generators = vs;
    for (auto& r : recs) W.degrees.push_back(r.degree);
    for (size_t i = 0; i < piv.size(); ++i) {
        for (size_t j = i; j-- > 0;) {
            const long dj = W.degrees[j];
            if (!piv[i].stored(dj)) {
                if (piv[i].known(dj)) continue;
                throw PrecisionError("window too shallow to clear degree " + std::to_string(dj));
            }
            Scalar c = piv[i][dj];
            if (c.is_zero()) continue;
            piv[i] = sub(piv[i], scale(piv[j], c));
        }
    }
    W.basis = std::move(piv);
    W.pivots = std::move(recs);
    detail::fill_index(W);
    W.certified = true;
    return W;
}

// Space generated by an admissible basis produced by the curve module.
inline WSpace make_space(const CurveCtx& cc, const DivisorSpec& spec, int m)
{
    return reduce_admissible(basis_divisor(cc, spec, m), cc.g(), to_string(spec));
}

// Membership by top-down elimination against a reduced basis: Pass when the residual
// vanishes on the window, Fail on a certified nonzero coefficient at a degree outside
// the degree set, Unknown when the basis does not reach the input's degree.
inline Verdict member_of(const WSpace& W, TSeries f, std::string* why = nullptr)
{
    auto say = [&](const std::string& s) {
        if (why) *why = s;
    };
    if (!W.certified || W.analytic) {
        say("membership needs a certified algebraic space");
        return Verdict::Unknown;
    }
    if (!f.head_exact()) {
        say("input head unknown");
        return Verdict::Unknown;
    }
    std::map<long, size_t> at;
    for (size_t i = 0; i < W.degrees.size(); ++i) at[W.degrees[i]] = i;
    f.trim_head();
    auto t = f.top_nonzero();
    if (!t) return Verdict::Pass;
    if (*t > W.degrees.back()) {
        say("basis does not reach degree " + std::to_string(*t));
        return Verdict::Unknown;
    }
    for (long d = *t; d >= f.lo(); --d) {
        if (!f.stored(d)) break;
        Scalar c = f[d];
        if (c.is_zero()) continue;
        auto it = at.find(d);
        if (it == at.end()) {
            say("nonzero residual at degree " + std::to_string(d));
            return Verdict::Fail;
        }
        f = sub(f, scale(W.basis[it->second], c));
    }
    return Verdict::Pass;
}

struct FvIndex {
    Verdict verdict = Verdict::Unknown;
    long ker = 0;
    long coker = 0;
    long index = 0;
    std::string note;
};

// dim ker - dim coker of the projection onto positive degrees, from the generators.
inline FvIndex index_via_fV(const WSpace& W)
{
    FvIndex out;
    if (!W.certified || W.analytic) {
        out.note = "needs a certified algebraic space";
        return out;
    }
    const long dtop = W.degrees.back();
    const long c0 = std::min(0L, W.degrees.front());
    Matrix full, plus;
    for (const auto& gsrc : W.generators) {
        TSeries s = gsrc;
        s.trim_head();
        auto t = s.top_nonzero();
        if (!t || *t > dtop) continue;
        std::vector<Scalar> row, prow;
        try {
            for (long d = c0; d <= dtop; ++d) {
                Scalar v = s.coeff(d);
                if (!v.valid()) v = Scalar(s.zero().ctx());
                row.push_back(v);
                if (d >= 1) prow.push_back(v);
            }
        } catch (const PrecisionError&) {
            out.note = "generator window does not reach degree " + std::to_string(c0);
            return out;
        }
        full.push_back(std::move(row));
        plus.push_back(std::move(prow));
    }
    EliminationResult rf = eliminate(full);
    EliminationResult rp = dtop >= 1 ? eliminate(plus) : EliminationResult{};
    if (dtop < 1) rp.complete = true;
    if (!rf.complete || !rp.complete) {
        out.note = "rank not certified: " + (rf.note.empty() ? rp.note : rf.note);
        return out;
    }
    const long r_full = static_cast<long>(rf.rank()), r_plus = static_cast<long>(rp.rank());
    out.ker = r_full - r_plus;
    out.coker = dtop - r_plus;
    out.index = out.ker - out.coker;
    out.verdict = Verdict::Pass;
    return out;
}

// Span of the products of two bases, cut at the lower of the two top degrees.
inline WSpace product_space(const WSpace& W1, const WSpace& W2, std::string label = "")
{
    if (!W1.certified || !W2.certified || W1.analytic || W2.analytic)
        throw std::invalid_argument("product_space: needs certified algebraic spaces");
    const long dcut = std::min(W1.degrees.back(), W2.degrees.back());
    const long keep = dcut + 8;
    std::vector<TSeries> a, b;
    for (auto& w : W1.basis) a.push_back(w.truncate_tail(detail::top_degree(w) - keep));
    for (auto& w : W2.basis) b.push_back(w.truncate_tail(detail::top_degree(w) - keep));
    std::vector<TSeries> gens;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            if (W1.degrees[i] + W2.degrees[j] <= dcut) gens.push_back(mul(a[i], b[j]));
    if (label.empty()) label = "(" + W1.label + ")*(" + W2.label + ")";
    return reduce_admissible(gens, W1.g, label);
}

// Multiplication by a loop-group element. When every product keeps its leading term
// as the dominant one the result is re-reduced algebraically; otherwise the index is
// read from dominant degrees and the partition is marked uncertified.
inline WSpace loop_act(const TSeries& h, const WSpace& W, std::optional<long> keep = std::nullopt)
{
    if (!W.certified) throw std::invalid_argument("loop_act: space must be certified");
    if (!(gamma_general(h) || gamma_minus(h))) throw std::domain_error("loop_act: series fails the loop-group predicate");
    std::vector<TSeries> gens;
    for (const auto& w : W.basis) {
        TSeries wt = keep ? w.truncate_tail(detail::top_degree(w) - *keep) : w;
        gens.push_back(mul(h, wt));
    }
    const std::string label = "h*" + W.label;
    std::vector<long> dom;
    bool algebraic = true;
    for (auto& s : gens) {
        s.trim_head();
        Valuation vmin = series_min_valuation(s);
        if (vmin.capped || vmin.units != 0) throw PrecisionError("loop_act: product does not have norm 1");
        long d = LONG_MIN;
        for (long i = s.hi(); i >= s.lo(); --i)
            if (valuation(s[i]).units == 0 && !valuation(s[i]).capped) {
                d = i;
                break;
            }
        if (d != detail::top_degree(s)) algebraic = false;
        dom.push_back(d);
    }
    auto base = std::make_shared<const WSpace>(W);
    if (algebraic) {
        WSpace r = reduce_admissible(gens, W.g, label);
        r.base = base;
        r.loop = h;
        return r;
    }
    WSpace r;
    r.label = label;
    r.g = W.g;
    r.generators = gens;
    r.basis = gens;
    r.degrees = dom;
    r.analytic = true;
    r.partition_certified = false;
    for (long d : dom) r.pivots.push_back(PivotRecord{d, Valuation{0, h.zero().ctx()->e, false}});
    detail::fill_index(r);
    r.base = base;
    r.loop = h;
    r.certified = true;
    return r;
}

struct SameBundle {
    Verdict verdict = Verdict::Unknown;  // Pass = same class, Fail = different
    std::optional<TSeries> u;
    std::string reason;
};

// W = u W' with u in K[[1/T]]^*, u taken as w_1 / w'_1.
inline SameBundle same_bundle(const WSpace& W, const WSpace& Wp)
{
    SameBundle out;
    if (!W.certified || !Wp.certified) throw std::invalid_argument("same_bundle: spaces must be certified");
    if (W.index != Wp.index) {
        out.verdict = Verdict::Fail;
        out.reason = "indices differ";
        return out;
    }
    if (W.partition_certified && Wp.partition_certified && W.partition != Wp.partition) {
        out.verdict = Verdict::Fail;
        out.reason = "partitions differ";
        return out;
    }
    if (W.analytic || Wp.analytic) {
        out.reason = "analytic spaces are compared only through their partitions";
        return out;
    }
    try {
        const TSeries& w1 = W.basis.front();
        const TSeries& v1 = Wp.basis.front();
        std::optional<long> depth;
        if (!v1.tail_truncated()) depth = w1.tail_truncated() ? detail::top_degree(w1) - w1.lo() : 0L;
        TSeries u = mul(w1, invert(v1, depth));
        u.trim_head();
        auto [d, monic] = degree_monic(u);
        if (d != 0 || !is_unit(u[0])) {
            out.verdict = Verdict::Fail;
            out.reason = "w1/w1' is not a unit of K[[1/T]]";
            return out;
        }
        (void)monic;
        for (size_t i = 0; i < Wp.basis.size(); ++i) {
            if (Wp.degrees[i] > W.degrees.back()) break;
            std::string why;
            Verdict v = member_of(W, mul(u, Wp.basis[i]), &why);
            if (v == Verdict::Fail) {
                out.verdict = Verdict::Fail;
                out.reason = "u*w'_" + std::to_string(i + 1) + ": " + why;
                return out;
            }
            if (v == Verdict::Unknown) {
                out.reason = why;
                return out;
            }
        }
        out.u = u;
        out.verdict = Verdict::Pass;
    } catch (const PrecisionError& e) {
        out.reason = e.what();
    }
    return out;
}

namespace detail {

// Determinant certificate for h*W missing T^(g-1)K[[1/T]]: rows are degrees g..D,
// columns the basis elements of degree <= D, D = g - 2 + M with decay(M) >= k.
inline Certificate theta_loop_certificate(const WSpace& W, const TSeries& h)
{
    Certificate cert;
    cert.name = "theta_member:h*" + W.label;
    cert.index = W.index;
    const int g = W.g;
    const PrimeCtx& c = *h.zero().ctx();
    if (!h.decay() || h.decay()->slope <= 0 || h.decay()->intercept < 0 || !h.head_exact() || h.tail_truncated()
        || h.lo() < 0) {
        cert.reason = "loop needs a decay bound and support in degrees >= 0";
        return cert;
    }
    const Decay dec = *h.decay();
    long M = 0;
    while (Rational(M) * dec.slope + dec.intercept < Rational(c.k)) ++M;
    const long D = g - 2 + M;
    cert.fact("cutoff_degree", std::to_string(D));
    if (W.degrees.back() < D) {
        cert.reason = "basis stops at degree " + std::to_string(W.degrees.back()) + ", needs " + std::to_string(D);
        return cert;
    }
    std::vector<size_t> cols;
    for (size_t i = 0; i < W.degrees.size(); ++i)
        if (W.degrees[i] <= D) cols.push_back(i);
    Matrix G;
    try {
        for (long m = g; m <= D; ++m) {
            std::vector<Scalar> row;
            for (size_t i : cols) {
                const TSeries& w = W.basis[i];
                Scalar acc(h.zero().ctx());
                const long jhi = std::min(h.hi(), m - w.lo());
                for (long j = std::max(0L, m - W.degrees[i]); j <= h.hi(); ++j) {
                    if (j > jhi && w.tail_truncated()) throw PrecisionError("basis window too shallow");
                    if (!w.stored(m - j)) continue;
                    acc.add_product(h[j], w[m - j]);
                }
                row.push_back(std::move(acc));
            }
            G.push_back(std::move(row));
        }
    } catch (const PrecisionError& e) {
        cert.reason = e.what();
        return cert;
    }
    EliminationResult er = eliminate(G);
    for (auto& st : er.steps) cert.pivots.push_back(PivotRecord{g + static_cast<long>(st.row), st.valuation});
    cert.fact("matrix", std::to_string(G.size()) + "x" + std::to_string(cols.size()));
    cert.fact("determinant_valuation", to_string(er.total_valuation()));
    if (er.rank() != cols.size()) {
        cert.reason = er.stalled ? er.note : "elimination did not reach full rank";
        return cert;
    }
    if (er.total_valuation() >= Rational(c.k)) {
        cert.reason = "determinant valuation reaches the working precision";
        return cert;
    }
    cert.verdict = Verdict::Out;
    return cert;
}

} // namespace detail

// Degree-0 classes: In with witness w_1 when deg(w_1) <= g-1, Out when deg(w_1) >= g.
inline Certificate theta_member(const WSpace& W)
{
    if (!W.certified) throw std::invalid_argument("theta_member: space must be certified");
    if (W.index != 1 - W.g) throw std::domain_error("theta_member: index must be 1-g");
    if (W.analytic) {
        if (!W.base || !W.loop) throw std::logic_error("theta_member: analytic space without loop data");
        Certificate c = detail::theta_loop_certificate(*W.base, *W.loop);
        c.name = "theta_member:" + W.label;
        return c;
    }
    Certificate cert;
    cert.name = "theta_member:" + W.label;
    cert.index = W.index;
    cert.partition = W.partition;
    cert.pivots = W.pivots;
    for (auto& p : W.pivots)
        if (p.valuation.units != 0) {
            cert.reason = "pivot at degree " + std::to_string(p.degree) + " is not a unit";
            return cert;
        }
    if (W.degrees.front() <= W.g - 1) {
        cert.verdict = Verdict::In;
        cert.witness = W.basis.front();
    } else {
        cert.verdict = Verdict::Out;
    }
    return cert;
}

} // namespace thetacert

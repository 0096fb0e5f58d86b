#pragma once

// Verification suites, report assembly and object dumps behind the verify tool.

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

#include "dwork.hpp"
#include "serialize.hpp"

namespace thetacert {

// Raised for configurations the tool refuses to run.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {"curve-identities", "bases-partitions", "lemma42", "dwork-bounds",
                                                   "prop43",           "theta",            "ptorsion"};
    return names;
}

struct SuiteConfig {
    int g = 2;
    u64 p = 17;
    int k = 6;
    std::optional<long> window;  // tail depth N of the curve expansions
    std::optional<long> M;       // head depth of loop expansions
    std::optional<long> s;       // twist exponent for prop43; least residue of order 4g by default
    std::string suite = "all";
    std::vector<std::string> specs;
    std::string mode = "generic-u";  // or exact-eps
    std::string out;
    bool strict = false;
    int jobs = 1;
};

// Basis length used by the structural suites.
inline int requested_length(int g) { return 4 * g + 8; }

inline long window_of(const SuiteConfig& cfg) { return cfg.window.value_or(default_depth(cfg.g, requested_length(cfg.g))); }

inline CtxPtr validate(const SuiteConfig& cfg)
{
    const auto& names = suite_names();
    if (cfg.suite != "all" && std::find(names.begin(), names.end(), cfg.suite) == names.end())
        throw UsageError("unknown suite: " + cfg.suite);
    if (cfg.mode != "generic-u" && cfg.mode != "exact-eps") throw UsageError("mode must be generic-u or exact-eps");
    if (cfg.jobs < 1) throw UsageError("--jobs must be positive");
    if (cfg.M && *cfg.M < 1) throw UsageError("--M must be positive");
    if (cfg.s && (*cfg.s < 1 || static_cast<u64>(*cfg.s) >= cfg.p)) throw UsageError("--s must lie in 1..p-1");
    CtxPtr ctx;
    try {
        ctx = make_context(cfg.g, cfg.p, cfg.k);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const long N = window_of(cfg);
    if (N < 8L * cfg.g + 32) throw UsageError("--window too shallow for genus " + std::to_string(cfg.g));
    for (const auto& s : cfg.specs) {
        try {
            DivisorSpec d = parse_divisor(s);
            if (d.kind == DivisorSpec::Kind::TwoTorsion && static_cast<int>(d.I.size()) > cfg.g)
                throw std::invalid_argument("|I| must be at most g");
            if (d.kind == DivisorSpec::Kind::TwoTorsion)
                for (int j : d.I)
                    if (j < 0 || j > 2 * cfg.g) throw std::invalid_argument("I entries must lie in 0..2g");
            if (d.kind == DivisorSpec::Kind::Point) resolve_point(d, integers_of(ctx));
        } catch (const std::exception& e) {
            throw UsageError("bad --spec '" + s + "': " + e.what());
        }
    }
    return ctx;
}

// A, every L_I with 1 <= |I| <= g, and L_Q for Q = (1, sqrt2) when 2 is a square mod p.
inline std::vector<DivisorSpec> default_specs(const CtxPtr& ctx)
{
    const int g = ctx->g;
    std::vector<DivisorSpec> out{DivisorSpec::trivial()};
    const int n = 2 * g + 1;
    for (int s = 1; s <= g; ++s)
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (__builtin_popcount(mask) != s) continue;
            std::vector<int> I;
            for (int j = 0; j < n; ++j)
                if (mask & (1u << j)) I.push_back(j);
            out.push_back(DivisorSpec::two_torsion(I));
        }
    std::sort(out.begin() + 1, out.end(), [](const DivisorSpec& a, const DivisorSpec& b) {
        return a.I.size() != b.I.size() ? a.I.size() < b.I.size() : a.I < b.I;
    });
    if (sqrt_mod(*ctx, 2)) out.push_back(parse_divisor("Q=(1,sqrt2)"));
    return out;
}

inline std::vector<DivisorSpec> specs_of(const SuiteConfig& cfg, const CtxPtr& ctx)
{
    if (cfg.specs.empty()) return default_specs(ctx);
    std::vector<DivisorSpec> out;
    for (const auto& s : cfg.specs) out.push_back(parse_divisor(s));
    return out;
}

// Partition predicted for the space of a divisor spec.
inline std::vector<long> expected_partition(int g, const DivisorSpec& d)
{
    long top = g;
    if (d.kind == DivisorSpec::Kind::TwoTorsion) top = g - static_cast<long>(d.I.size());
    if (d.kind == DivisorSpec::Kind::Point) top = g - 1;
    std::vector<long> out;
    for (long i = top; i >= 1; --i) out.push_back(i);
    return out;
}

inline std::string join(const std::vector<long>& v)
{
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

struct Task {
    std::string name;
    std::function<Certificate()> run;
};

namespace detail {

inline Verdict all_of(const std::vector<Stage>& st)
{
    Verdict v = Verdict::Pass;
    for (const auto& s : st) {
        if (s.verdict == Verdict::Fail) return Verdict::Fail;
        if (s.verdict != Verdict::Pass) v = Verdict::Unknown;
    }
    return v;
}

inline Certificate from_stages(std::string name, std::vector<Stage> st)
{
    Certificate c;
    c.name = std::move(name);
    c.stages = std::move(st);
    c.verdict = all_of(c.stages);
    for (const auto& s : c.stages)
        if (s.verdict != Verdict::Pass) {
            c.reason = s.name;
            break;
        }
    return c;
}

inline Stage stage(std::string name, bool ok, std::string detail = "")
{
    return Stage{std::move(name), ok ? Verdict::Pass : Verdict::Fail, std::move(detail)};
}

inline bool series_equal(const TSeries& a, const TSeries& b)
{
    auto [lo, hi] = common_window(a, b);
    return equal_on_window(a, b, lo, hi);
}

// Unit at which loops are evaluated: 1 in O1, or eps in the exact-epsilon algebra.
inline Scalar loop_unit(const CurveCtx& cc, const std::string& mode)
{
    if (mode == "exact-eps") {
        SplitResult sp = split_Tp(cc);
        return Scalar::epsilon(epsilon_context(cc, sp));
    }
    return Scalar::from_int(ramified_of(cc.prime()), 1);
}

} // namespace detail

inline void tasks_curve(const CurvePtr& cc, std::vector<Task>& out)
{
    out.push_back({"curve:identity", [cc] {
                       ZSeries r = curve_residual(cc->exact());
                       Certificate c = detail::from_stages(
                           "curve:identity", {detail::stage("y^2 = x^(2g+1) + x", is_zero_exact(r),
                                                            "window " + std::to_string(r.lo()) + ".." + std::to_string(r.hi()))});
                       c.fact("depth", std::to_string(cc->depth()));
                       return c;
                   }});
    out.push_back({"curve:twist", [cc] {
                       const int g = cc->g();
                       const Scalar z = cc->zeta();
                       const CurveSeries<Scalar>& cs = cc->reduced();
                       const Scalar one = Scalar::from_int(z.ctx(), 1);
                       bool order = z.pow(static_cast<u64>(4 * g)) == one;
                       for (int d = 1; d < 4 * g; ++d)
                           if ((4 * g) % d == 0 && z.pow(static_cast<u64>(d)) == one) order = false;
                       bool tx = detail::series_equal(zeta_twist(cs.x, cc->prime()), scale(cs.x, z.pow(2)));
                       bool ty = detail::series_equal(zeta_twist(cs.y, cc->prime()), scale(cs.y, -z));
                       return detail::from_stages("curve:twist", {detail::stage("order 4g", order),
                                                                  detail::stage("twist(x) = zeta^2 x", tx),
                                                                  detail::stage("twist(y) = -zeta y", ty)});
                   }});
    out.push_back({"curve:weierstrass", [cc] {
                       const int g = cc->g();
                       auto pts = cc->weierstrass_points();
                       bool ok = pts.size() == static_cast<size_t>(2 * g + 2) && pts.front().infinity;
                       const Scalar one = Scalar::from_int(cc->prime(), 1);
                       for (size_t i = 1; i < pts.size(); ++i) {
                           const Scalar& x = pts[i].x;
                           Scalar rhs = x.pow(static_cast<u64>(2 * g + 1)) + x;
                           ok = ok && rhs.is_zero() && pts[i].y.is_zero();
                           if (i >= 2) ok = ok && x.pow(static_cast<u64>(2 * g)) == -one;
                       }
                       return detail::from_stages("curve:weierstrass", {detail::stage("points on the curve", ok)});
                   }});
}

inline Certificate space_certificate(const CurveCtx& cc, const DivisorSpec& spec, int m)
{
    using detail::stage;
    const int g = cc.g();
    std::vector<Stage> st;
    Certificate c;
    c.name = "space:" + to_string(spec);
    try {
        if (spec.kind == DivisorSpec::Kind::Point) {
            auto [xq, yq] = resolve_point(spec, cc.prime());
            c.fact("xq", to_string(xq));
            c.fact("yq", to_string(yq));
        }
        auto raw = raw_basis_divisor(cc, spec, m);
        bool table = true;
        for (int i = 1; i <= m; ++i)
            table = table && detail::top_degree(raw[static_cast<size_t>(i - 1)]) == basis_divisor_degree(g, spec, i);
        st.push_back(stage("degree table", table));
        WSpace W = make_space(cc, spec, m);
        const long expected_index = 1 - g;  // every spec describes a degree-0 bundle
        st.push_back(stage("index = deg + 1 - g", W.index == expected_index, "i(W)=" + std::to_string(W.index)));
        FvIndex fv = index_via_fV(W);
        Stage sfv{"index via f_V", fv.verdict == Verdict::Pass ? (fv.index == W.index ? Verdict::Pass : Verdict::Fail)
                                                               : Verdict::Unknown,
                  "ker=" + std::to_string(fv.ker) + " coker=" + std::to_string(fv.coker) + " " + fv.note};
        st.push_back(sfv);
        auto want = expected_partition(g, spec);
        st.push_back(stage("partition", W.partition == want, "got " + join(W.partition) + " expected " + join(want)));
        Certificate out = detail::from_stages(c.name, std::move(st));
        out.facts = c.facts;
        out.index = W.index;
        out.partition = W.partition;
        out.pivots = W.pivots;
        return out;
    } catch (const PrecisionError& e) {
        c.verdict = Verdict::Unknown;
        c.reason = e.what();
        c.stages = st;
        return c;
    }
}

inline void tasks_bases(const CurvePtr& cc, const std::vector<DivisorSpec>& specs, std::vector<Task>& out)
{
    const int m = requested_length(cc->g());
    for (const auto& s : specs)
        out.push_back({"space:" + to_string(s), [cc, s, m] { return space_certificate(*cc, s, m); }});
}

inline void tasks_lemma42(const CurvePtr& cc, std::vector<Task>& out)
{
    out.push_back({"lemma42", [cc] {
                       using detail::stage;
                       SplitResult sp = split_Tp(*cc);
                       const u64 p = cc->prime()->p;
                       const unsigned long pp = static_cast<unsigned long>((p - 1) / (4 * static_cast<u64>(cc->g())));
                       mpz_class b;
                       mpz_bin_uiui(b.get_mpz_t(), 2UL * cc->g() * pp, pp);
                       Certificate c = detail::from_stages(
                           "lemma42", {stage("e0 = C(2gp', p')", sp.e0 == b, sp.e0.get_str()),
                                       stage("e0 is a unit", sp.e0_unit),
                                       stage("T^p - e0 T - a - g = 0", sp.residual_zero),
                                       stage("binomial and gap routes agree", sp.routes_agree)});
                       c.fact("e0", sp.e0.get_str());
                       c.fact("p'", std::to_string(pp));
                       return c;
                   }});
}

inline void tasks_dwork(const CtxPtr& ctx, std::optional<long> M, std::vector<Task>& out)
{
    const long nexp = M.value_or(300);
    out.push_back({"dwork:exact-bounds", [ctx, nexp] {
                       auto v = exact_loop_valuations(ctx->p, nexp);
                       const Rational s = dwork_slope(ctx->p);
                       long bad = -1;
                       for (long i = 0; i <= nexp; ++i)
                           if (v[static_cast<size_t>(i)] < Rational(i) * s) {
                               bad = i;
                               break;
                           }
                       Certificate c = detail::from_stages(
                           "dwork:exact-bounds",
                           {detail::stage("v(h_i) >= i(p-1)/p^2", bad < 0,
                                          bad < 0 ? "i <= " + std::to_string(nexp) : "violated at i=" + std::to_string(bad)),
                            detail::stage("v(h_0) = 0", v[0] == Rational(0))});
                       c.fact("terms", std::to_string(nexp + 1));
                       return c;
                   }});
    out.push_back({"dwork:working-precision", [ctx, M] {
                       using detail::stage;
                       TSeries h = dwork_unit_loop(ctx, M);
                       TSeries hi = dwork_unit_loop(ctx, M, -1);
                       const CtxPtr r = h.zero().ctx();
                       const Rational s = dwork_slope(ctx->p);
                       bool bound = true;
                       for (long i = h.lo(); i <= h.hi(); ++i) {
                           Valuation v = valuation(h[i]);
                           if (!v.capped && v.value() < Rational(i) * s) bound = false;
                       }
                       bool support = h.lo() == 0 && !h.tail_truncated();
                       bool h0 = h.coeff(0) == Scalar::from_int(r, 1);
                       bool h1 = h.hi() < 1 || h.coeff(1) == Scalar::pi(r);
                       TSeries prod = mul(h, hi).truncate_head(h.hi(), false);
                       TSeries one = TSeries::monomial(Scalar::from_int(r, 1), 0);
                       bool inv = true;
                       for (long i = 0; i <= h.hi(); ++i) inv = inv && prod.coeff(i) == one.coeff(i);
                       Certificate c = detail::from_stages("dwork:working-precision",
                                                           {stage("coefficient bound mod p^k", bound),
                                                            stage("support in degrees >= 0", support), stage("h_0 = 1", h0),
                                                            stage("h_1 = pi", h1), stage("h * h^(-1) = 1", inv)});
                       c.fact("top", std::to_string(h.hi()));
                       c.fact("cut", std::to_string(dwork_cut(ctx->p, ctx->k)));
                       return c;
                   }});
}

inline Stage factorization_stage(const std::string& name, const Factorization& F)
{
    Verdict v = detail::combine({F.reassembly, F.a_member, F.minus_member});
    std::string d = "reassembly=" + to_string(F.reassembly) + " A-bar=" + to_string(F.a_member)
                    + " Gamma_-=" + to_string(F.minus_member) + " window=" + std::to_string(F.window_lo) + ".."
                    + std::to_string(F.window_hi);
    if (!F.note.empty()) d += " (" + F.note + ")";
    return Stage{name, v, d};
}

inline void tasks_prop43(const CurvePtr& cc, std::optional<long> twist, std::vector<Task>& out)
{
    const i64 s = twist ? static_cast<i64>(*twist) : static_cast<i64>(cc->prime()->s0);
    out.push_back({"prop43:p-power", [cc] {
                       SplitResult sp = split_Tp(*cc);
                       return detail::from_stages("prop43:p-power", {factorization_stage("h_D^p = h_A h_-", factor_hp(*cc, sp))});
                   }});
    out.push_back({"prop43:twist", [cc, s] {
                       SplitResult sp = split_Tp(*cc);
                       Certificate c = detail::from_stages(
                           "prop43:twist", {factorization_stage("h_D(omega(s)T) h_D^(-s) = h_A,s h_-,s", factor_twist(*cc, sp, s))});
                       c.fact("s", std::to_string(s));
                       return c;
                   }});
    out.push_back({"prop43:control", [cc] {
                       SplitResult sp = split_Tp(*cc);
                       Factorization F = factor_hp(*cc, sp, true);
                       Stage st = factorization_stage("eps replaced by 1", F);
                       // the control is expected to break the reassembly
                       Certificate c = detail::from_stages(
                           "prop43:control", {detail::stage("reassembly fails", F.reassembly == Verdict::Fail, st.detail)});
                       return c;
                   }});
}

inline Certificate theta_certificate(const CurveCtx& cc, const DivisorSpec& spec, const Scalar& u,
                                     std::optional<long> M)
{
    const int g = cc.g();
    const PrimeCtx& pc = *cc.prime();
    Certificate c;
    c.name = "theta:" + to_string(spec);
    try {
        WSpace Ws = make_space(cc, spec, requested_length(g));
        Certificate mem = theta_member(Ws);
        const Verdict predicted = Ws.kappa1() >= 1 ? Verdict::In : Verdict::Out;
        Stage s1{"theta_member", mem.verdict == predicted ? Verdict::Pass : Verdict::Fail,
                 "got " + to_string(mem.verdict) + ", kappa_1=" + std::to_string(Ws.kappa1())};
        if (mem.verdict == Verdict::Unknown) s1.verdict = Verdict::Unknown;
        WSpace Wb = make_space(cc, spec, theta_basis_count(g, pc.p, pc.k));
        Certificate av = theta_avoid(Wb, u, M);
        Stage s2{"theta_avoid", Verdict::Unknown, "got " + to_string(av.verdict)};
        if (av.verdict == Verdict::Out) s2.verdict = Verdict::Pass;
        if (av.verdict == Verdict::In) s2.verdict = Verdict::Fail;
        if (!av.reason.empty()) s2.detail += " (" + av.reason + ")";
        Certificate out = detail::from_stages(c.name, {s1, s2});
        out.index = Wb.index;
        out.partition = Ws.partition;
        out.pivots = av.pivots;
        out.fact("theta_member", to_string(mem.verdict));
        out.fact("theta_avoid", to_string(av.verdict));
        for (const auto& f : av.facts) out.facts.push_back(f);
        return out;
    } catch (const PrecisionError& e) {
        c.reason = e.what();
        return c;
    }
}

inline void tasks_theta(const CurvePtr& cc, const std::vector<DivisorSpec>& specs, const std::string& mode,
                        std::optional<long> M, std::vector<Task>& out)
{
    auto u = std::make_shared<Scalar>(detail::loop_unit(*cc, mode));
    for (const auto& s : specs)
        out.push_back({"theta:" + to_string(s), [cc, s, u, M] { return theta_certificate(*cc, s, *u, M); }});
}

inline void tasks_ptorsion(const CurvePtr& cc, std::vector<Task>& out)
{
    out.push_back({"ptorsion", [cc] { return certify_ptorsion(*cc); }});
    out.push_back({"ptorsion:control", [cc] {
                       Certificate w = certify_ptorsion(*cc, true);
                       Certificate c = detail::from_stages(
                           "ptorsion:control",
                           {detail::stage("wrong scalar fails at p-power", w.verdict == Verdict::Fail && w.reason == "p-power",
                                          "verdict=" + to_string(w.verdict) + " at " + w.reason)});
                       c.stages.insert(c.stages.end(), w.stages.begin(), w.stages.end());
                       for (auto& s : c.stages)
                           if (s.name != "wrong scalar fails at p-power") s.name = "control/" + s.name;
                       c.verdict = c.stages.front().verdict;
                       c.reason = c.verdict == Verdict::Pass ? "" : c.stages.front().name;
                       return c;
                   }});
}

// Runs tasks on `jobs` threads; results keep task order.
inline std::vector<Certificate> run_tasks(const std::vector<Task>& tasks, int jobs)
{
    std::vector<Certificate> res(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < tasks.size(); i = next++) {
            try {
                res[i] = tasks[i].run();
            } catch (const PrecisionError& e) {
                res[i].name = tasks[i].name;
                res[i].verdict = Verdict::Unknown;
                res[i].reason = e.what();
            } catch (const std::exception& e) {
                res[i].name = tasks[i].name;
                res[i].verdict = Verdict::Fail;
                res[i].reason = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return res;
}

struct Report {
    SuiteConfig config;
    long window = 0;
    std::vector<Certificate> certificates;

    int exit_code() const
    {
        bool fail = false, unknown = false;
        for (const auto& c : certificates) {
            if (c.verdict == Verdict::Fail) fail = true;
            if (c.verdict == Verdict::Unknown) unknown = true;
        }
        if (fail || (unknown && config.strict)) return 1;
        return unknown ? 2 : 0;
    }
};

inline json to_json(const Report& r)
{
    json j;
    j["schema"] = 1;
    json cfg;
    cfg["suite"] = r.config.suite;
    cfg["g"] = r.config.g;
    cfg["p"] = r.config.p;
    cfg["k"] = r.config.k;
    cfg["window"] = r.window;
    cfg["M"] = r.config.M ? json(*r.config.M) : json(nullptr);
    cfg["s"] = r.config.s ? json(*r.config.s) : json(nullptr);
    cfg["mode"] = r.config.mode;
    cfg["specs"] = r.config.specs;
    cfg["strict"] = r.config.strict;
    j["config"] = cfg;
    json certs = json::array();
    long np = 0, nf = 0, nu = 0;
    for (const auto& c : r.certificates) {
        certs.push_back(to_json(c));
        if (c.verdict == Verdict::Pass) ++np;
        else if (c.verdict == Verdict::Fail) ++nf;
        else ++nu;
    }
    j["certificates"] = certs;
    j["summary"] = json{{"pass", np}, {"fail", nf}, {"unknown", nu}};
    j["exit_code"] = r.exit_code();
    return j;
}

inline Report run_suite(const SuiteConfig& cfg)
{
    CtxPtr ctx = validate(cfg);
    Report rep;
    rep.config = cfg;
    rep.window = window_of(cfg);
    CurvePtr cc = make_curve(ctx, rep.window);
    auto specs = specs_of(cfg, ctx);
    auto want = [&](const std::string& s) { return cfg.suite == "all" || cfg.suite == s; };
    std::vector<Task> tasks;
    if (want("curve-identities")) tasks_curve(cc, tasks);
    if (want("bases-partitions")) tasks_bases(cc, specs, tasks);
    if (want("lemma42")) tasks_lemma42(cc, tasks);
    if (want("dwork-bounds")) tasks_dwork(ctx, cfg.M, tasks);
    if (want("prop43")) tasks_prop43(cc, cfg.s, tasks);
    if (want("theta")) tasks_theta(cc, specs, cfg.mode, cfg.M, tasks);
    if (want("ptorsion")) tasks_ptorsion(cc, tasks);
    rep.certificates = run_tasks(tasks, cfg.jobs);
    return rep;
}

// Series or bases named by a selector: u, x, y, loop, basis:A, basis:I=..., basis:Q=(...).
inline json dump(const SuiteConfig& cfg, const std::string& what)
{
    CtxPtr ctx = validate(cfg);
    const long N = window_of(cfg);
    json j;
    j["schema"] = 1;
    j["object"] = what;
    if (what == "u") {
        j["series"] = to_json(reduce(build_u(cfg.g, N), ctx));
        return j;
    }
    if (what == "x" || what == "y") {
        CurveSeries<mpz_class> cs = build_xy(cfg.g, N);
        j["series"] = to_json(reduce(what == "x" ? cs.x : cs.y, ctx));
        return j;
    }
    if (what == "loop") {
        CurvePtr cc = make_curve(ctx, N);
        j["series"] = to_json(dwork_loop(detail::loop_unit(*cc, cfg.mode), cfg.M).h);
        return j;
    }
    if (what.rfind("basis:", 0) == 0) {
        std::string sel = what.substr(6);
        if ((sel == "I" || sel == "Q") && !cfg.specs.empty()) sel = cfg.specs.front();
        DivisorSpec spec;
        try {
            spec = parse_divisor(sel);
            if (spec.kind == DivisorSpec::Kind::Point) resolve_point(spec, integers_of(ctx));
        } catch (const std::exception& e) {
            throw UsageError("bad basis selector '" + what + "': " + e.what());
        }
        CurvePtr cc = make_curve(ctx, N);
        json arr = json::array();
        for (const auto& w : basis_divisor(*cc, spec, requested_length(cfg.g))) arr.push_back(to_json(w));
        j["spec"] = to_string(spec);
        j["basis"] = arr;
        return j;
    }
    throw UsageError("unknown dump selector: " + what);
}

} // namespace thetacert

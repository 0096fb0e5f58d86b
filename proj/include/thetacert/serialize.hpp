#pragma once

// JSON encoding of scalars, series and certificates.
//
// A scalar is written as its nonzero tower coordinates, each one a little-endian string
// of k base-p digits separated by dots. Parsing the output reproduces the value exactly.

#include <sstream>
#include <string>

#include <json.hpp>

#include "grassmann.hpp"

namespace thetacert {

using json = nlohmann::ordered_json;

inline json to_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const json& j)
{
    const std::string s = j.get<std::string>();
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

inline json context_header(const PrimeCtx& c)
{
    json h;
    h["g"] = c.g;
    h["p"] = c.p;
    h["k"] = c.k;
    h["ramified"] = c.ramified;
    h["e0"] = c.e0 ? json(*c.e0) : json(nullptr);
    return h;
}

inline CtxPtr context_from_header(const json& h)
{
    CtxPtr base = make_context(h.at("g").get<int>(), h.at("p").get<u64>(), h.at("k").get<int>(),
                               h.at("ramified").get<bool>());
    std::optional<u64> e0;
    if (!h.at("e0").is_null()) e0 = h.at("e0").get<u64>();
    return with_layout(base, h.at("ramified").get<bool>(), e0);
}

inline std::string digits_of(u64 v, const PrimeCtx& c)
{
    std::string out;
    for (int i = 0; i < c.k; ++i) {
        if (i) out += '.';
        out += std::to_string(v % c.p);
        v /= c.p;
    }
    return out;
}

inline u64 value_of_digits(const std::string& s, const PrimeCtx& c)
{
    std::vector<u64> d;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, '.')) {
        u64 x = std::stoull(part);
        if (x >= c.p) throw std::invalid_argument("digit out of range: " + s);
        d.push_back(x);
    }
    if (d.size() != static_cast<size_t>(c.k)) throw std::invalid_argument("expected k digits: " + s);
    u64 v = 0;
    for (size_t i = d.size(); i-- > 0;) v = v * c.p + d[i];
    return v;
}

// Coordinates only; the context lives in an enclosing header.
inline json scalar_body(const Scalar& s)
{
    const PrimeCtx& c = *s.ctx();
    json arr = json::array();
    for (int b = 0; b < c.d; ++b)
        for (int i = 0; i < c.e; ++i) {
            u64 v = s.coord(i, b);
            if (v) arr.push_back(json::array({i, b, digits_of(v, c)}));
        }
    return arr;
}

inline Scalar scalar_from_body(const json& j, const CtxPtr& ctx)
{
    Scalar s(ctx);
    for (const auto& e : j) {
        int i = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (i < 0 || i >= ctx->e || b < 0 || b >= ctx->d) throw std::invalid_argument("coordinate out of range");
        s.set_coord(i, b, value_of_digits(e.at(2).get<std::string>(), *ctx));
    }
    return s;
}

inline json to_json(const Scalar& s)
{
    json j;
    j["header"] = context_header(*s.ctx());
    j["coords"] = scalar_body(s);
    return j;
}

inline Scalar scalar_from_json(const json& j)
{
    return scalar_from_body(j.at("coords"), context_from_header(j.at("header")));
}

inline json to_json(const TSeries& s)
{
    json j;
    j["header"] = context_header(*s.zero().ctx());
    j["window"] = json::array({s.lo(), s.hi()});
    j["head_exact"] = s.head_exact();
    j["tail_truncated"] = s.tail_truncated();
    j["floor"] = to_json(s.floor());
    if (s.decay())
        j["decay"] = json{{"slope", to_json(s.decay()->slope)}, {"intercept", to_json(s.decay()->intercept)}};
    else
        j["decay"] = nullptr;
    json coeffs = json::array();
    for (long i = s.lo(); i <= s.hi(); ++i)
        if (!s[i].is_zero()) coeffs.push_back(json::array({i, scalar_body(s[i])}));
    j["coeffs"] = coeffs;
    return j;
}

inline TSeries series_from_json(const json& j)
{
    CtxPtr ctx = context_from_header(j.at("header"));
    long lo = j.at("window").at(0).get<long>(), hi = j.at("window").at(1).get<long>();
    TSeries s(Scalar(ctx), lo, hi, j.at("head_exact").get<bool>(), j.at("tail_truncated").get<bool>());
    s.set_floor(rational_from_json(j.at("floor")));
    if (!j.at("decay").is_null())
        s.set_decay(Decay{rational_from_json(j["decay"].at("slope")), rational_from_json(j["decay"].at("intercept"))});
    for (const auto& e : j.at("coeffs")) {
        long d = e.at(0).get<long>();
        if (!s.stored(d)) throw std::invalid_argument("coefficient outside the window");
        s[d] = scalar_from_body(e.at(1), ctx);
    }
    return s;
}

inline json to_json(const Valuation& v)
{
    return json{{"value", to_string(v.value())}, {"capped", v.capped}};
}

inline json to_json(const Certificate& c)
{
    json j;
    j["name"] = c.name;
    j["verdict"] = to_string(c.verdict);
    j["index"] = c.index ? json(*c.index) : json(nullptr);
    j["partition"] = c.partition;
    json piv = json::array();
    for (const auto& p : c.pivots) piv.push_back(json{{"degree", p.degree}, {"valuation", to_json(p.valuation)}});
    j["pivots"] = piv;
    if (c.witness) j["witness"] = to_json(*c.witness);
    json st = json::array();
    for (const auto& s : c.stages)
        st.push_back(json{{"name", s.name}, {"verdict", to_string(s.verdict)}, {"detail", s.detail}});
    j["stages"] = st;
    json facts = json::object();
    for (const auto& [k, v] : c.facts) facts[k] = v;
    j["facts"] = facts;
    if (!c.reason.empty()) j["reason"] = c.reason;
    return j;
}

} // namespace thetacert

#include <gtest/gtest.h>

#include "support.hpp"

using namespace thetacert;
using namespace thetacert::testing;

namespace {

TEST(BuildU, MatchesUndeterminedCoefficients)
{
    for (int g = 2; g <= 5; ++g) {
        const long n = 30;
        auto want = u_by_undetermined_coefficients(g, n);
        ZSeries u = build_u(g, 4L * g * n);
        for (long j = 0; j <= n; ++j) {
            EXPECT_EQ(u.coeff(-4L * g * j), want[static_cast<size_t>(j)]) << "g=" << g << " j=" << j;
            for (long r = 1; r < 4 * g && j < n; ++r) EXPECT_EQ(sgn(u.coeff(-4L * g * j - r)), 0);
        }
    }
}

TEST(BuildU, LeadingTermsGenus2)
{
    ZSeries u = build_u(2, 40);
    EXPECT_EQ(u.coeff(0), 1);
    EXPECT_EQ(u.coeff(-8), -1);
    EXPECT_EQ(u.coeff(-16), -3);
}

TEST(BuildXY, XModuloT14)
{
    CurveSeries<mpz_class> cs = build_xy(2, 40);
    EXPECT_EQ(cs.x.coeff(2), 1);
    EXPECT_EQ(cs.x.coeff(-6), -1);
    for (long i = -13; i <= 2; ++i)
        if (i != 2 && i != -6) {
            EXPECT_EQ(sgn(cs.x.coeff(i)), 0) << i;
        }
}

TEST(BuildXY, CurveIdentityDepth400)
{
    for (int g = 2; g <= 5; ++g) {
        CurveSeries<mpz_class> cs = build_xy(g, 400);
        ZSeries r = curve_residual(cs);
        EXPECT_TRUE(is_zero_exact(r)) << "g=" << g;
        EXPECT_EQ(r.hi(), 2 * (2 * g + 1));
        EXPECT_GE(r.hi() - r.lo(), 400);
    }
}

TEST(Weierstrass, Points)
{
    for (auto [g, p] : {std::pair{2, 17ULL}, {3, 13ULL}}) {
        CurveCtx cc(make_context(g, p, 6), 100);
        auto pts = cc.weierstrass_points();
        ASSERT_EQ(pts.size(), static_cast<size_t>(2 * g + 2));
        EXPECT_TRUE(pts[0].infinity);
        const Scalar one = Scalar::from_int(cc.prime(), 1);
        for (size_t i = 1; i < pts.size(); ++i) {
            const Scalar& x = pts[i].x;
            EXPECT_TRUE((x.pow(static_cast<u64>(2 * g + 1)) + x).is_zero());
            EXPECT_TRUE(pts[i].y.is_zero());
            if (i >= 2) {
                EXPECT_EQ(x.pow(static_cast<u64>(2 * g)), -one);
            }
        }
    }
}

TEST(DivisorSpec, Parse)
{
    EXPECT_EQ(parse_divisor("A").kind, DivisorSpec::Kind::Trivial);
    DivisorSpec d = parse_divisor("I=3,0");
    EXPECT_EQ(d.kind, DivisorSpec::Kind::TwoTorsion);
    EXPECT_EQ(d.I, (std::vector<int>{0, 3}));
    EXPECT_EQ(to_string(d), "I=0,3");
    DivisorSpec q = parse_divisor("Q=(1,sqrt2)");
    EXPECT_EQ(q.kind, DivisorSpec::Kind::Point);
    EXPECT_EQ(to_string(q), "Q=(1,sqrt2)");
    EXPECT_THROW(parse_divisor("I=1,1"), std::invalid_argument);
    EXPECT_THROW(parse_divisor("B=2"), std::invalid_argument);
    EXPECT_THROW(parse_divisor("Q=1"), std::invalid_argument);
}

TEST(DivisorSpec, ResolvePoint)
{
    auto ctx = integers_of(make_context(2, 17, 6));
    auto [x, y] = resolve_point(parse_divisor("Q=(1,sqrt2)"), ctx);
    EXPECT_EQ(y * y, Scalar::from_int(ctx, 2));
    EXPECT_EQ(x, Scalar::from_int(ctx, 1));
    EXPECT_LT(y.coord(0) % 17, 17u);
    EXPECT_THROW(resolve_point(parse_divisor("Q=(1,sqrt3)"), ctx), std::invalid_argument);
    EXPECT_THROW(resolve_point(parse_divisor("Q=(1,1)"), ctx), std::invalid_argument);
    EXPECT_THROW(resolve_point(parse_divisor("Q=(0,0)"), ctx), std::invalid_argument);
}

std::vector<long> degrees_of(const std::vector<TSeries>& b)
{
    std::vector<long> d;
    for (const auto& s : b) d.push_back(degree(s));
    return d;
}

TEST(Bases, DegreeTablesGenus2)
{
    CurveCtx cc(make_context(2, 17, 6), 200);
    EXPECT_EQ(degrees_of(basis_divisor(cc, parse_divisor("A"), 8)), (std::vector<long>{0, 2, 4, 5, 6, 7, 8, 9}));
    EXPECT_EQ(degrees_of(basis_divisor(cc, parse_divisor("I=0"), 6)), (std::vector<long>{1, 3, 4, 5, 6, 7}));
    EXPECT_EQ(degrees_of(basis_divisor(cc, parse_divisor("I=1,2"), 6)), (std::vector<long>{2, 3, 4, 5, 6, 7}));
    EXPECT_EQ(degrees_of(basis_divisor(cc, parse_divisor("Q=(1,sqrt2)"), 6)), (std::vector<long>{1, 3, 4, 5, 6, 7}));
    auto A = basis_divisor(cc, parse_divisor("A"), 4);
    EXPECT_TRUE(same_on_window(A[0], TSeries::monomial(Scalar::from_int(cc.prime(), 1), 0)));
}

TEST(Bases, RawDegreesFollowTable)
{
    for (auto [g, p] : {std::pair{2, 17ULL}, {3, 13ULL}}) {
        CurveCtx cc(make_context(g, p, 6), 300);
        std::vector<std::string> specs{"A", "I=0", "I=1,2"};
        if (g == 3) specs.push_back("I=0,2,5");
        else specs.push_back("Q=(1,sqrt2)");
        for (const auto& s : specs) {
            DivisorSpec d = parse_divisor(s);
            auto raw = raw_basis_divisor(cc, d, 14);
            for (int i = 1; i <= 14; ++i) {
                auto [deg, monic] = degree_monic(raw[static_cast<size_t>(i - 1)]);
                EXPECT_EQ(deg, basis_divisor_degree(g, d, i)) << s << " i=" << i;
                EXPECT_TRUE(monic) << s << " i=" << i;
            }
        }
    }
}

// f_I * prod_{j in I}(x - x_j) is a constant multiple of y.
TEST(Bases, TwoTorsionFunctionDivisor)
{
    CurveCtx cc(make_context(2, 17, 6), 200);
    const CurveSeries<Scalar>& cs = cc.reduced();
    auto pts = cc.weierstrass_points();
    for (std::vector<int> I : {std::vector<int>{0}, {3}, {1, 2}, {0, 4}}) {
        DivisorSpec d = DivisorSpec::two_torsion(I);
        const int s = static_cast<int>(I.size());
        auto raw = raw_basis_divisor(cc, d, 2 - s + 2);
        TSeries f = shift(raw.back(), -s);  // element i = g-s+2 is T^s f_I
        for (int j : I) f = mul(f, sub(cs.x, TSeries::monomial(pts[static_cast<size_t>(j + 1)].x, 0)));
        const long dy = 2 * 2 + 1;
        Scalar lambda = f.coeff(dy) * inverse(cs.y.coeff(dy));
        EXPECT_TRUE(same_on_window(f, scale(cs.y, lambda))) << to_string(d);
    }
}

// f_Q * (x - x_Q) is a constant multiple of l_Q = y - x + y_Q + x_Q.
TEST(Bases, PointFunctionDivisor)
{
    CurveCtx cc(make_context(2, 17, 6), 200);
    const CurveSeries<Scalar>& cs = cc.reduced();
    DivisorSpec d = parse_divisor("Q=(1,sqrt2)");
    auto [xq, yq] = resolve_point(d, cc.prime());
    auto raw = raw_basis_divisor(cc, d, 3);
    TSeries f = shift(raw.back(), -1);
    EXPECT_LE(degree(f), 2 * 2 - 1 + 1);
    TSeries prod = mul(f, sub(cs.x, TSeries::monomial(xq, 0)));
    TSeries lq = add(sub(cs.y, cs.x), TSeries::monomial(yq + xq, 0));
    Scalar lambda = prod.coeff(5) * inverse(lq.coeff(5));
    EXPECT_TRUE(same_on_window(prod, scale(lq, lambda)));
}

TEST(Gap, SimpleDecompositions)
{
    CurveCtx cc(make_context(2, 17, 6), 200);
    auto A = basis_A(cc.reduced(), 10);
    auto dx = decompose_gap(A, 2, cc.reduced().x);
    EXPECT_TRUE(gap_is_zero(dx));
    EXPECT_TRUE(tail_is_zero(dx));
    EXPECT_TRUE(same_on_window(dx.a_part, cc.reduced().x));
    auto dt = decompose_gap(A, 2, TSeries::monomial(Scalar::from_int(cc.prime(), 1), 1));
    EXPECT_EQ(dt.gap[0], Scalar::from_int(cc.prime(), 1));
    EXPECT_TRUE(dt.gap[1].is_zero());
    EXPECT_TRUE(tail_is_zero(dt));
    auto dT3 = decompose_gap(A, 2, TSeries::monomial(Scalar::from_int(cc.prime(), 1), 3));
    EXPECT_EQ(dT3.gap[1], Scalar::from_int(cc.prime(), 1));
}

TEST(Gap, TpHasGapE0)
{
    CurveCtx cc(make_context(2, 17, 6), 300);
    auto A = basis_A(cc.exact(), basis_A_count_for(2, 17));
    auto d = decompose_gap(A, 2, ZSeries::monomial(mpz_class(1), 17));
    EXPECT_EQ(d.gap[0], binomial(8, 2));
    EXPECT_EQ(sgn(d.gap[1]), 0);
}

TEST(Gap, AClosedUnderMultiplication)
{
    CurveCtx cc(make_context(2, 17, 6), 300);
    const int m = 16;
    auto A = basis_A(cc.reduced(), 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; i + j + 2 <= m / 2 + 2 && j < m; ++j) {
            auto d = decompose_gap(A, 2, mul(A[static_cast<size_t>(i)], A[static_cast<size_t>(j)]));
            EXPECT_TRUE(gap_is_zero(d)) << i << "," << j;
            EXPECT_TRUE(tail_is_zero(d)) << i << "," << j;
        }
}

TEST(CurveCtx, Reduced)
{
    CurveCtx cc(make_context(3, 13, 4), 120);
    EXPECT_EQ(cc.g(), 3);
    EXPECT_EQ(cc.depth(), 120);
    EXPECT_EQ(cc.reduced().x.coeff(2), Scalar::from_int(cc.prime(), 1));
    EXPECT_EQ(default_depth(2, 10), 400);
    EXPECT_EQ(default_depth(5, 30), 600);
}

} // namespace

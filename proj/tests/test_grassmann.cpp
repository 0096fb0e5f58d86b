#include <gtest/gtest.h>

#include <thetacert/suites.hpp>

#include "support.hpp"

using namespace thetacert;
using namespace thetacert::testing;

namespace {

struct Genus2 : ::testing::Test {
    static void SetUpTestSuite() { cc = make_curve(make_context(2, 17, 6), 400); }
    static CurvePtr cc;
};
CurvePtr Genus2::cc;

TEST_F(Genus2, PartitionsAndIndices)
{
    for (const auto& spec : default_specs(cc->prime())) {
        WSpace W = make_space(*cc, spec, 16);
        EXPECT_EQ(W.partition, expected_partition(2, spec)) << to_string(spec);
        EXPECT_EQ(W.index, -1) << to_string(spec);
        FvIndex fv = index_via_fV(W);
        EXPECT_EQ(fv.verdict, Verdict::Pass);
        EXPECT_EQ(fv.index, W.index) << to_string(spec);
        for (const auto& w : W.basis) {
            auto [d, monic] = degree_monic(w);
            (void)d;
            EXPECT_TRUE(monic);
        }
    }
}

TEST_F(Genus2, IndexViaFvForA)
{
    WSpace A = make_space(*cc, DivisorSpec::trivial(), 16);
    FvIndex fv = index_via_fV(A);
    EXPECT_EQ(fv.ker, 1);
    EXPECT_EQ(fv.coker, 2);
    EXPECT_EQ(fv.index, -1);
    EXPECT_EQ(A.partition, (std::vector<long>{2, 1}));
    EXPECT_EQ(A.kappa1(), 2);
    EXPECT_EQ(A.length(), 2);
}

TEST_F(Genus2, ShiftedSpacesChangeIndex)
{
    WSpace A = make_space(*cc, DivisorSpec::trivial(), 16);
    std::vector<TSeries> sh;
    for (const auto& w : A.basis) sh.push_back(shift(w, 1));
    WSpace V = reduce_admissible(sh, 2);
    EXPECT_EQ(V.index, A.index - 1);
    EXPECT_EQ(index_via_fV(V).index, V.index);
}

TEST_F(Genus2, ReduceIsIdempotent)
{
    WSpace W = make_space(*cc, parse_divisor("I=0"), 16);
    WSpace V = reduce_admissible(W.basis, 2);
    EXPECT_EQ(V.degrees, W.degrees);
    for (size_t i = 0; i < W.basis.size(); ++i) EXPECT_TRUE(same_on_window(V.basis[i], W.basis[i]));
}

TEST_F(Genus2, NonUnitPivotIsUnknown)
{
    const CtxPtr z = cc->prime();
    std::vector<TSeries> vs{TSeries::monomial(Scalar::from_int(z, 17), 3), TSeries::monomial(Scalar::from_int(z, 1), 4)};
    EXPECT_THROW(reduce_admissible(vs, 2), PrecisionError);
}

TEST_F(Genus2, Membership)
{
    WSpace A = make_space(*cc, DivisorSpec::trivial(), 16);
    const CurveSeries<Scalar>& cs = cc->reduced();
    EXPECT_EQ(member_of(A, cs.x), Verdict::Pass);
    EXPECT_EQ(member_of(A, mul(cs.x, cs.y)), Verdict::Pass);
    EXPECT_EQ(member_of(A, TSeries::monomial(Scalar::from_int(cc->prime(), 1), 1)), Verdict::Fail);
    EXPECT_EQ(member_of(A, TSeries::monomial(Scalar::from_int(cc->prime(), 1), 40)), Verdict::Unknown);
}

TEST_F(Genus2, ThetaMembership)
{
    EXPECT_EQ(theta_member(make_space(*cc, DivisorSpec::trivial(), 16)).verdict, Verdict::In);
    EXPECT_EQ(theta_member(make_space(*cc, parse_divisor("I=0"), 16)).verdict, Verdict::In);
    EXPECT_EQ(theta_member(make_space(*cc, parse_divisor("I=3"), 16)).verdict, Verdict::In);
    EXPECT_EQ(theta_member(make_space(*cc, parse_divisor("I=1,2"), 16)).verdict, Verdict::Out);
    EXPECT_EQ(theta_member(make_space(*cc, parse_divisor("I=0,4"), 16)).verdict, Verdict::Out);
    EXPECT_EQ(theta_member(make_space(*cc, parse_divisor("Q=(1,sqrt2)"), 16)).verdict, Verdict::In);
}

// i(W W') = i(W) + i(W') + g - 1
TEST_F(Genus2, ProductAdditivity)
{
    std::vector<std::string> specs{"A", "I=0", "I=2,3", "Q=(1,sqrt2)"};
    for (const auto& a : specs)
        for (const auto& b : specs) {
            WSpace W1 = make_space(*cc, parse_divisor(a), 20), W2 = make_space(*cc, parse_divisor(b), 20);
            WSpace P = product_space(W1, W2);
            EXPECT_EQ(P.index, W1.index + W2.index + 1) << a << " * " << b;
            EXPECT_EQ(index_via_fV(P).index, P.index) << a << " * " << b;
        }
}

// L_I L_J = L_{I xor J} up to an isomorphism, so the product has the partition of that space.
TEST_F(Genus2, TwoTorsionGroupLaw)
{
    WSpace P = product_space(make_space(*cc, parse_divisor("I=0"), 20), make_space(*cc, parse_divisor("I=0"), 20));
    EXPECT_EQ(P.partition, (std::vector<long>{2, 1}));
    WSpace Q = product_space(make_space(*cc, parse_divisor("I=0"), 20), make_space(*cc, parse_divisor("I=1"), 20));
    EXPECT_EQ(Q.partition, std::vector<long>{});
}

TEST_F(Genus2, SameBundle)
{
    WSpace A = make_space(*cc, DivisorSpec::trivial(), 16);
    WSpace I0 = make_space(*cc, parse_divisor("I=0"), 16);
    EXPECT_EQ(same_bundle(A, A).verdict, Verdict::Pass);
    EXPECT_EQ(same_bundle(I0, I0).verdict, Verdict::Pass);
    EXPECT_EQ(same_bundle(A, I0).verdict, Verdict::Fail);
    // multiplying by a rational function moves the divisor within its class
    const CurveSeries<Scalar>& cs = cc->reduced();
    TSeries f = mul(cs.x, invert(add(cs.x, TSeries::monomial(Scalar::from_int(cc->prime(), 3), 0)), 300));
    std::vector<TSeries> moved;
    for (const auto& w : I0.basis) moved.push_back(mul(w, f));
    EXPECT_EQ(same_bundle(reduce_admissible(moved, 2), I0).verdict, Verdict::Pass);
    EXPECT_EQ(same_bundle(reduce_admissible(moved, 2), A).verdict, Verdict::Fail);
}

TEST_F(Genus2, MinusLoopKeepsBundle)
{
    WSpace A = make_space(*cc, DivisorSpec::trivial(), 16);
    const CtxPtr r = ramified_of(cc->prime());
    TSeries h = add(TSeries::monomial(Scalar::from_int(r, 1), 0), TSeries::monomial(Scalar::from_int(r, 17), -1));
    ASSERT_TRUE(gamma_minus(h));
    WSpace V = loop_act(h, A);
    EXPECT_EQ(V.index, A.index);
    EXPECT_EQ(same_bundle(V, A).verdict, Verdict::Pass);
}

TEST(Grassmann, Genus3Partitions)
{
    CurvePtr cc = make_curve(make_context(3, 13, 5), 400);
    for (const auto& spec : default_specs(cc->prime())) {
        WSpace W = make_space(*cc, spec, 20);
        EXPECT_EQ(W.partition, expected_partition(3, spec)) << to_string(spec);
        EXPECT_EQ(W.index, -2) << to_string(spec);
        EXPECT_EQ(index_via_fV(W).index, -2) << to_string(spec);
    }
}

TEST(Linalg, EliminationRankAndValuation)
{
    const CtxPtr c = make_context(2, 17, 4);
    auto S = [&](i64 v) { return Scalar::from_int(c, v); };
    Matrix M{{S(1), S(2)}, {S(3), S(6 + 17)}};
    EliminationResult r = eliminate(M);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.rank(), 2u);
    EXPECT_EQ(r.total_valuation(), Rational(1));
    Matrix N{{S(1), S(2)}, {S(2), S(4)}};
    EliminationResult rn = eliminate(N);
    EXPECT_EQ(rn.rank(), 1u);
    EXPECT_TRUE(rn.complete);
}

} // namespace

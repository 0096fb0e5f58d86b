#include <gtest/gtest.h>

#include <thetacert/serialize.hpp>

#include "support.hpp"

using namespace thetacert;
using namespace thetacert::testing;

namespace {

TEST(Context, Guards)
{
    EXPECT_NO_THROW(make_context(2, 17, 6));
    EXPECT_THROW(make_context(2, 13, 6), std::invalid_argument);
    EXPECT_NO_THROW(make_context(3, 13, 6));
    EXPECT_THROW(make_context(2, 15, 6), std::invalid_argument);
    EXPECT_THROW(make_context(1, 17, 6), std::invalid_argument);
    EXPECT_THROW(make_context(2, 17, 0), std::invalid_argument);
    EXPECT_THROW(make_context(2, 17, 20), std::invalid_argument);
}

TEST(Context, ZetaHasOrder4g)
{
    for (auto [g, p] : {std::pair{2, 17ULL}, {3, 13ULL}, {4, 17ULL}, {2, 41ULL}}) {
        auto ctx = make_context(g, p, 5);
        EXPECT_EQ(modarith::order_mod(ctx->s0, p), static_cast<u64>(4 * g));
        EXPECT_EQ(ctx->zeta % p, ctx->s0);
        EXPECT_EQ(modarith::powmod(ctx->zeta, 4 * g, ctx->modulus), 1u);
    }
}

// Oracle: iterate x -> x^p from 2 until it stabilizes mod p^2.
TEST(Teichmuller, TwoModulo289)
{
    u64 x = 2;
    for (int i = 0; i < 10; ++i) x = modarith::powmod(x, 17, 289);
    EXPECT_EQ(x, 155u);
    auto ctx = integers_of(make_context(2, 17, 2));
    EXPECT_EQ(teichmuller(ctx, 2).coord(0), 155u);
}

TEST(Teichmuller, SpecialValues)
{
    auto ctx = integers_of(make_context(2, 17, 6));
    EXPECT_EQ(teichmuller(ctx, 1), Scalar::from_int(ctx, 1));
    EXPECT_EQ(teichmuller(ctx, 16), Scalar::from_int(ctx, -1));
    for (i64 i = 1; i < 17; ++i) EXPECT_EQ(teichmuller(ctx, i).pow(16), Scalar::from_int(ctx, 1));
}

TEST(Valuation, Normalization)
{
    auto ctx = make_context(2, 17, 6);
    EXPECT_EQ(valuation(Scalar::from_int(ctx, 17)).value(), Rational(1));
    EXPECT_EQ(valuation(Scalar::pi(ctx)).value(), Rational(1, 16));
    EXPECT_EQ(valuation(Scalar::pi(ctx).pow(5)).value(), Rational(5, 16));
    EXPECT_EQ(valuation(Scalar::from_int(ctx, 3 * 289)).value(), Rational(2));
    EXPECT_TRUE(valuation(Scalar(ctx)).capped);
    auto eps = adjoin_epsilon(ctx, Scalar::from_int(ctx, 28));
    EXPECT_EQ(valuation(Scalar::epsilon(eps)).value(), Rational(0));
}

TEST(Relations, PiAndEpsilon)
{
    auto ctx = make_context(2, 17, 6);
    EXPECT_TRUE((Scalar::pi(ctx).pow(16) + Scalar::from_int(ctx, 17)).is_zero());
    // -p pi = pi^p
    EXPECT_EQ(Scalar::pi(ctx).pow(17), -(Scalar::pi(ctx).mul_int(17)));
    auto eps = adjoin_epsilon(ctx, Scalar::from_int(ctx, 28));
    EXPECT_EQ(Scalar::epsilon(eps).pow(16) * Scalar::from_int(eps, 28), Scalar::from_int(eps, 1));
}

TEST(AdjoinEpsilon, Guards)
{
    auto ctx = make_context(2, 17, 6);
    EXPECT_NO_THROW(adjoin_epsilon(ctx, Scalar::from_int(ctx, 28)));
    EXPECT_THROW(adjoin_epsilon(ctx, Scalar::from_int(ctx, 17)), std::invalid_argument);
    EXPECT_THROW(adjoin_epsilon(ctx, Scalar::pi(ctx)), std::invalid_argument);
    // e0 = 1: eps^(p-1) = 1, so eps specializes to a (p-1)-st root of unity
    auto one = adjoin_epsilon(ctx, Scalar::from_int(ctx, 1));
    EXPECT_EQ(Scalar::epsilon(one).pow(16), Scalar::from_int(one, 1));
}

// Naive product in Z[pi]/(pi^(p-1) + p) modulo p^k.
std::vector<mpz_class> naive_mul(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b, long p, const mpz_class& m)
{
    const size_t e = static_cast<size_t>(p - 1);
    std::vector<mpz_class> full(2 * e, 0), out(e, 0);
    for (size_t i = 0; i < e; ++i)
        for (size_t j = 0; j < e; ++j) full[i + j] += a[i] * b[j];
    for (size_t i = 0; i < 2 * e; ++i) {
        if (i < e)
            out[i] += full[i];
        else
            out[i - e] -= p * full[i];
    }
    for (auto& c : out) {
        c %= m;
        if (c < 0) c += m;
    }
    return out;
}

TEST(Scalar, RamifiedProductMatchesNaivePolynomialProduct)
{
    std::mt19937_64 rng(7);
    auto ctx = make_context(2, 17, 6);
    const mpz_class m(static_cast<unsigned long>(ctx->modulus));
    for (int t = 0; t < 50; ++t) {
        Scalar a = random_scalar(rng, ctx), b = random_scalar(rng, ctx);
        std::vector<mpz_class> va, vb;
        for (int i = 0; i < 16; ++i) {
            va.emplace_back(static_cast<unsigned long>(a.coord(i)));
            vb.emplace_back(static_cast<unsigned long>(b.coord(i)));
        }
        auto want = naive_mul(va, vb, 17, m);
        Scalar c = a * b;
        for (int i = 0; i < 16; ++i) EXPECT_EQ(mpz_class(static_cast<unsigned long>(c.coord(i))), want[static_cast<size_t>(i)]);
    }
}

TEST(Scalar, InverseOfUnits)
{
    std::mt19937_64 rng(8);
    auto base = make_context(2, 17, 6);
    auto ctx = adjoin_epsilon(base, Scalar::from_int(base, 28));
    int tested = 0;
    for (int t = 0; t < 40; ++t) {
        Scalar a = random_scalar(rng, ctx);
        if (!is_unit(a)) continue;
        ++tested;
        EXPECT_EQ(a * inverse(a), Scalar::from_int(ctx, 1));
    }
    EXPECT_GT(tested, 0);
    EXPECT_FALSE(is_unit(Scalar::pi(base)));
    EXPECT_THROW(inverse(Scalar::pi(base)), std::domain_error);
}

TEST(Scalar, DivideUniformizer)
{
    auto ctx = make_context(2, 17, 6);
    Scalar u = Scalar::from_int(ctx, 5) + Scalar::pi(ctx);
    Scalar x = u * Scalar::pi(ctx).pow(7);
    EXPECT_EQ(valuation(x).units, 7);
    Scalar q = divide_uniformizer(x, 7);
    EXPECT_TRUE(is_unit(q));
    // q agrees with u up to the precision lost in the division
    EXPECT_GE(valuation(q - u).units, ctx->precision_units() - 7);
}

TEST(Scalar, PiPowerOver)
{
    auto ctx = make_context(2, 17, 6);
    // pi^17 / 17 = -pi
    EXPECT_EQ(pi_power_over(ctx, 17, 1, 1), -Scalar::pi(ctx));
    EXPECT_EQ(pi_power_over(ctx, 3, 0, 2) * Scalar::from_int(ctx, 2), Scalar::pi(ctx).pow(3));
}

TEST(Scalar, EmbedIntoTower)
{
    auto base = make_context(2, 17, 6);
    auto z = integers_of(base);
    auto eps = adjoin_epsilon(base, Scalar::from_int(base, 28));
    Scalar a = Scalar::from_int(z, 12345);
    EXPECT_EQ(a.embed(eps), Scalar::from_int(eps, 12345));
    EXPECT_EQ(Scalar::pi(base).embed(eps), Scalar::pi(eps));
    EXPECT_THROW(Scalar::epsilon(eps).embed(base), std::logic_error);
}

TEST(Serialize, ScalarRoundTrip)
{
    std::mt19937_64 rng(9);
    auto base = make_context(2, 17, 6);
    auto eps = adjoin_epsilon(base, Scalar::from_int(base, 28));
    for (const auto& ctx : {integers_of(base), base, eps}) {
        Scalar a = random_scalar(rng, ctx);
        Scalar b = scalar_from_json(json::parse(to_json(a).dump()));
        EXPECT_EQ(a, b);
        EXPECT_EQ(b.ctx()->e0, ctx->e0);
    }
    EXPECT_EQ(digits_of(155, *make_context(2, 17, 2)), "2.9");
    EXPECT_THROW(value_of_digits("17.0", *make_context(2, 17, 2)), std::invalid_argument);
}

} // namespace

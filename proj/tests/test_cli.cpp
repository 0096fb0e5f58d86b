#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include <thetacert/serialize.hpp>

using namespace thetacert;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run(const std::string& args, const std::string& env = "")
{
    std::string cmd = env + (env.empty() ? "" : " ") + VERIFY_BINARY + std::string(" ") + args + " 2>/dev/null";
    Outcome r;
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    int st = pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run("theta --g 2 --p 13").code, 64);
    EXPECT_EQ(run("nonsense").code, 64);
    EXPECT_EQ(run("lemma42 --mode sideways").code, 64);
    EXPECT_EQ(run("dump").code, 64);
    EXPECT_EQ(run("dump w").code, 64);
    EXPECT_EQ(run("bases-partitions --spec I=0,9").code, 64);
    EXPECT_EQ(run("bases-partitions --spec 'Q=(1,1)'").code, 64);
    EXPECT_EQ(run("lemma42 --bogus-flag").code, 64);
    EXPECT_EQ(run("prop43 --s 17").code, 64);
}

TEST(Cli, SplittingGenus3)
{
    Outcome r = run("lemma42 --g 3 --p 13");
    ASSERT_EQ(r.code, 0);
    json j = json::parse(r.out);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["certificates"][0]["facts"]["e0"], "6");
    EXPECT_EQ(j["exit_code"], 0);
}

TEST(Cli, EnvironmentOverrides)
{
    Outcome r = run("lemma42", "THETACERT_G=3 THETACERT_P=13");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["certificates"][0]["facts"]["e0"], "6");
}

TEST(Cli, DumpU)
{
    Outcome r = run("dump u --g 2 --p 17 --k 6 --window 64");
    ASSERT_EQ(r.code, 0);
    TSeries u = series_from_json(json::parse(r.out)["series"]);
    const CtxPtr& c = u.zero().ctx();
    EXPECT_EQ(u.coeff(0), Scalar::from_int(c, 1));
    EXPECT_EQ(u.coeff(-8), Scalar::from_int(c, -1));
    for (long i = -7; i < 0; ++i) EXPECT_TRUE(u.coeff(i).is_zero());
}

TEST(Cli, DumpBasisA)
{
    Outcome r = run("dump basis:A --window 128");
    ASSERT_EQ(r.code, 0);
    json j = json::parse(r.out);
    TSeries w1 = series_from_json(j["basis"][0]);
    ASSERT_TRUE(w1.top_nonzero().has_value());
    EXPECT_EQ(*w1.top_nonzero(), 0);
    EXPECT_EQ(w1.coeff(0), Scalar::from_int(w1.zero().ctx(), 1));
    for (long i = w1.lo(); i < 0; ++i) EXPECT_TRUE(w1.coeff(i).is_zero());
}

TEST(Cli, DumpBasisFromSpec)
{
    Outcome r = run("dump basis:Q --spec 'Q=(1,sqrt2)' --window 128");
    ASSERT_EQ(r.code, 0);
    json j = json::parse(r.out);
    EXPECT_EQ(j["spec"], "Q=(1,sqrt2)");
    EXPECT_EQ(degree(series_from_json(j["basis"][0])), 1);
    Outcome s = run("dump basis:I=1,2 --window 128");
    ASSERT_EQ(s.code, 0);
    EXPECT_EQ(degree(series_from_json(json::parse(s.out)["basis"][0])), 2);
}

TEST(Cli, DumpLoop)
{
    Outcome r = run("dump loop --p 17");
    ASSERT_EQ(r.code, 0);
    TSeries h = series_from_json(json::parse(r.out)["series"]);
    EXPECT_EQ(h.coeff(1), Scalar::pi(h.zero().ctx()));
    Outcome e = run("dump loop --p 17 --mode exact-eps --M 5");
    ASSERT_EQ(e.code, 0);
    TSeries he = series_from_json(json::parse(e.out)["series"]);
    const CtxPtr& c = he.zero().ctx();
    EXPECT_EQ(he.hi(), 5);
    EXPECT_EQ(he.coeff(1), Scalar::pi(c) * Scalar::epsilon(c));
}

TEST(Cli, DeterministicAcrossJobs)
{
    Outcome a = run("bases-partitions --window 200 --jobs 1");
    Outcome b = run("bases-partitions --window 200 --jobs 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    json j = json::parse(a.out);
    EXPECT_EQ(j["summary"]["fail"], 0);
    EXPECT_EQ(j["certificates"].size(), 17u);  // A, 15 two-torsion spaces, Q
}

TEST(Cli, WritesReportFile)
{
    const std::string path = ::testing::TempDir() + "thetacert_report.json";
    Outcome r = run("curve-identities --window 200 --out " + path);
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    json j = json::parse(f);
    EXPECT_EQ(j["config"]["suite"], "curve-identities");
    EXPECT_EQ(j["summary"]["pass"], 3);
}

TEST(Cli, UnknownAndStrict)
{
    // a loop cut far below the decay cut leaves the theta certificate undecided
    Outcome r = run("theta --spec A --M 20 --window 200");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.out)["summary"]["unknown"], 1);
    EXPECT_EQ(run("theta --spec A --M 20 --window 200 --strict").code, 1);
}

TEST(Cli, ThetaSingleSpec)
{
    Outcome r = run("theta --spec I=1,2 --window 256");
    ASSERT_EQ(r.code, 0);
    json c = json::parse(r.out)["certificates"][0];
    EXPECT_EQ(c["facts"]["theta_member"], "Out");
    EXPECT_EQ(c["facts"]["theta_avoid"], "Out");
}

TEST(Cli, TwistExponent)
{
    Outcome r = run("prop43 --s 5");
    ASSERT_EQ(r.code, 0);
    json j = json::parse(r.out);
    EXPECT_EQ(j["config"]["s"], 5);
    EXPECT_EQ(j["certificates"][1]["facts"]["s"], "5");
    EXPECT_EQ(json::parse(run("prop43").out)["certificates"][1]["facts"]["s"], "2");  // 2^4 = -1 mod 17
}

} // namespace

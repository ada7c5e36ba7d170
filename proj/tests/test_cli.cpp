#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli.hpp"

namespace {

struct CliRun {
    int code = 0;
    std::string out, err;
    nlohmann::json json() const { return nlohmann::json::parse(out); }
    nlohmann::json diag() const { return nlohmann::json::parse(err); }
};

CliRun run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    CliRun r;
    r.code = ocflab::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("ocflab_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, ExpandPurelyPeriodic)
{
    const CliRun r = run({"expand", "--cf", "ocf", "--value", "(1+1*sqrt(2))/1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.json();
    EXPECT_EQ(j["period"], "(3,-1)(1,+1)(1,+1)");
    EXPECT_EQ(j["preperiod"], "");
    EXPECT_EQ(j["purely_periodic"], true);
}

TEST(Cli, ExpandWithPreperiod)
{
    // 2 + sqrt2 = 3 + 1/(1 + sqrt2)
    const CliRun r = run({"expand", "--cf", "ocf", "--value", "(2+1*sqrt(2))/1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.json();
    EXPECT_EQ(j["preperiod"], "(3,+1)");
    EXPECT_EQ(j["period"], "(3,-1)(1,+1)(1,+1)");
    EXPECT_EQ(j["purely_periodic"], false);
}

TEST(Cli, ExpandRegularAndGrotesque)
{
    const CliRun rcf = run({"expand", "--cf", "rcf", "--value", "sqrt(2)"});
    ASSERT_EQ(rcf.code, 0);
    EXPECT_EQ(rcf.json()["preperiod"], "(1,+1)");
    EXPECT_EQ(rcf.json()["period"], "(2,+1)");
    const CliRun gro = run({"expand", "--cf", "grotesque", "--value", "(-1+sqrt(5))/2"});
    ASSERT_EQ(gro.code, 0) << gro.err;
    EXPECT_EQ(gro.json()["cf"], "grotesque");
}

TEST(Cli, GrammarViolationsExitTwo)
{
    const CliRun r = run({"expand", "--value", "(1+1*sqrt(2))/1+1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.diag()["error"], "parse_error");
    EXPECT_EQ(run({"expand", "--value", "(1+1*sqrt(2))/1", "--shift", "1"}).code, 2);
    EXPECT_EQ(run({"expand", "--cf", "bogus", "--value", "sqrt(2)"}).code, 2);
    EXPECT_EQ(run({"count", "--set", "S+1", "--N", "ten"}).code, 2);
    EXPECT_EQ(run({"count", "--set", "Q", "--N", "10"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"expand", "--value", "(1+sqrt(2))/0"}).code, 2);
}

TEST(Cli, PreconditionViolationsExitThree)
{
    const CliRun r = run({"factor", "--matrix", "[[2,1],[1,0]]"});
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(r.diag()["error"], "not_in_set");
    EXPECT_EQ(run({"count", "--set", "S+1", "--N", "10", "--R", "4"}).code, 3);
    EXPECT_EQ(run({"count", "--set", "S+1", "--N", "-5"}).code, 3);
    EXPECT_EQ(run({"count", "--set", "S-1", "--alpha", "1/2", "--N", "10"}).code, 3);
    EXPECT_EQ(run({"enumerate", "--N", "10", "--alpha", "1/2"}).code, 3);
}

TEST(Cli, BudgetExhaustionExitsFour)
{
    const CliRun r = run({"expand", "--value", "(1+sqrt(1000003))/7", "--max-steps", "3"});
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(r.diag()["error"], "period_not_found");
    ::setenv("OCFLAB_BUDGET_MS", "1", 1);
    const CliRun b = run({"count", "--set", "S+1", "--method", "brute", "--N", "3000"});
    ::unsetenv("OCFLAB_BUDGET_MS");
    EXPECT_EQ(b.code, 4);
    EXPECT_EQ(b.diag()["error"], "budget_exceeded");
}

TEST(Cli, CountWithMainTerm)
{
    const CliRun r = run({"count", "--set", "S+1", "--alpha", "1", "--beta", "1", "--N", "400", "--with-main-term"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = r.json();
    const double zeta2 = std::numbers::pi * std::numbers::pi / 6;
    const double main = 400.0 * 400.0 * std::log(2.0) / (4 * zeta2);
    EXPECT_NEAR(j["main_term"].get<double>(), main, 1e-6);
    EXPECT_NEAR(j["main_term"].get<double>(), 16855.3, 0.1);
    // the dual-method scan agrees with the triple count
    const CliRun both = run({"count", "--set", "S+1", "--alpha", "1", "--beta", "1", "--N", "400", "--method", "both"});
    ASSERT_EQ(both.code, 0) << both.err;
    EXPECT_EQ(both.json()["brute"], j["exact"]);
    EXPECT_EQ(j["exact"], 16981);
    EXPECT_NEAR(j["residual"].get<double>(), 16981 - main, 1e-6);
    const auto& bd = j["breakdown"];
    EXPECT_EQ(bd["A1"].get<int>() + bd["A2"].get<int>() + bd["A3"].get<int>() - bd["exceptions"].get<int>(), 16981);
    // without the flag the main term is omitted
    EXPECT_FALSE(run({"count", "--set", "S+1", "--beta", "1", "--N", "40"}).json().contains("main_term"));
}

TEST(Cli, CountOtherSets)
{
    const CliRun w = run({"count", "--set", "W", "--N", "100"});
    ASSERT_EQ(w.code, 0) << w.err;
    EXPECT_EQ(w.json()["W_minus"], 733);
    EXPECT_EQ(w.json()["W_plus"], 1462);
    EXPECT_EQ(w.json()["exact"], 2195);
    const CliRun a = run({"count", "--set", "ANr", "--r", "1", "--N", "50"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_GT(a.json()["exact"].get<int>(), 0);
    const CliRun a3 = run({"count", "--set", "A3", "--e", "-1", "--N", "60"});
    ASSERT_EQ(a3.code, 0) << a3.err;
    EXPECT_EQ(a3.json()["exact"], a3.json()["breakdown"]["A3"]);
}

TEST(Cli, ClassifyAndFactor)
{
    const CliRun c = run({"classify", "--value", "(3+sqrt(5))/2"});
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(c.json()["flags"], "EOB");
    EXPECT_EQ(c.json()["R"], false);
    const CliRun f = run({"factor", "--matrix", "[[5,2],[2,1]]"});
    ASSERT_EQ(f.code, 0) << f.err;
    EXPECT_EQ(f.json()["word"], "(3,-1)(1,+1)(1,+1)");
    EXPECT_EQ(f.json()["blocks"].size(), 3u);
}

TEST(Cli, EnumerateIdenticalAcrossPartitionsAndCheckpoints)
{
    const CliRun one = run({"enumerate", "--N", "80", "--partitions", "1"});
    ASSERT_EQ(one.code, 0);
    for (const char* parts : {"2", "7"})
        EXPECT_EQ(run({"enumerate", "--N", "80", "--partitions", parts}).out, one.out);
    const auto dir = scratch("ckpt");
    std::filesystem::remove_all(dir);
    const CliRun first = run({"enumerate", "--N", "80", "--checkpoint", dir.string(), "--partitions", "3"});
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_EQ(first.out, one.out);
    // resume after losing a chunk
    const auto victim = std::filesystem::directory_iterator(dir)->path();
    std::filesystem::remove(victim);
    const CliRun resumed = run({"enumerate", "--N", "80", "--checkpoint", dir.string()});
    EXPECT_EQ(resumed.out, one.out);
    std::filesystem::remove_all(dir);
}

TEST(Cli, EnumerateFormatsAndOutputFile)
{
    const CliRun csv = run({"enumerate", "--N", "30"});
    ASSERT_EQ(csv.code, 0);
    std::istringstream is(csv.out);
    std::string header;
    std::getline(is, header);
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);)
        ++rows;
    ocf::EnumParams p;
    p.N = 30;
    EXPECT_EQ(rows, ocf::enumerate_primitive(p).size());
    const CliRun js = run({"enumerate", "--N", "30", "--format", "json"});
    ASSERT_EQ(js.code, 0);
    EXPECT_EQ(js.json().size(), rows);
    const auto path = scratch("enum.csv");
    ASSERT_EQ(run({"enumerate", "--N", "30", "--out", path.string()}).code, 0);
    EXPECT_EQ(slurp(path), csv.out);
}

TEST(Cli, LengthBoundMapsToTraceBound)
{
    // N = floor(exp(R/2)): R = 8 gives 54
    EXPECT_EQ(run({"enumerate", "--R", "8"}).out, run({"enumerate", "--N", "54"}).out);
}

TEST(Cli, VerifySuites)
{
    for (const char* s : {"roundtrip", "appendix3", "trace-sandwich", "bijection", "reduction-chain", "kloosterman", "measures"}) {
        const CliRun r = run({"verify", "--suite", s, "--N", "40"});
        EXPECT_EQ(r.code, 0) << s << " " << r.out;
        EXPECT_EQ(r.json()["passed"], true) << s;
    }
    EXPECT_EQ(run({"verify", "--suite", "totient"}).code, 0);
    // at tiny N the totient sums are not yet within 1% of their main terms: a failed check exits 1
    const CliRun small = run({"verify", "--suite", "totient", "--N", "50"});
    EXPECT_EQ(small.code, 1);
    EXPECT_EQ(small.json()["passed"], false);
    EXPECT_EQ(run({"verify", "--suite", "nope"}).code, 2);
    EXPECT_EQ(run({"verify", "--suite", "roundtrip", "--N", "20", "--seed", "5"}).out,
              run({"verify", "--suite", "roundtrip", "--N", "20", "--seed", "5"}).out);
}

TEST(Cli, EquidistReports)
{
    const CliRun j1 = run({"equidist", "--N", "120", "--alpha", "2"});
    ASSERT_EQ(j1.code, 0) << j1.err;
    const auto j = j1.json();
    EXPECT_EQ(j["N"], 120);
    EXPECT_NEAR(j["corollary"]["limit"].get<double>(), std::log(std::sqrt(5.0)) / (3 * std::log((1 + std::sqrt(5.0)) / 2)),
                1e-12);
    EXPECT_EQ(run({"equidist", "--N", "120", "--alpha", "2", "--partitions", "4"}).out, j1.out);
    const auto dump = scratch("marg.txt");
    const CliRun csv = run({"equidist", "--N", "120", "--format", "csv", "--dump-marginals", dump.string()});
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(csv.out.rfind("ix,iy,count,frequency,mass,residual\n", 0), 0u);
    EXPECT_NE(slurp(dump).find("# x-marginal"), std::string::npos);
    EXPECT_EQ(run({"equidist", "--N", "120", "--format", "tsv"}).code, 2);
}

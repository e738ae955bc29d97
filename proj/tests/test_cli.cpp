#include <adalasso/cli.hpp>
#include <adalasso/csv.hpp>
#include <adalasso/synth.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace adalasso;
using nlohmann::json;

namespace {

struct CliRun
{
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Files
{
    std::filesystem::path dir, X, y, beta;
};

Files write_problem(const std::string& name)
{
    Files f;
    f.dir = testutil::scratch(name);
    const Matrix X = gen_random_design(CovarianceSpec::identity(10), 60, 1);
    SignalSpec s;
    s.s = 2;
    s.beta_min = 2.0;
    const RegressionProblem pr = gen_problem(X, s, 0.2, 1);
    f.X = f.dir / "X.csv";
    f.y = f.dir / "y.csv";
    f.beta = f.dir / "beta.csv";
    csv::write_matrix_file(f.X.string(), X);
    csv::write_vector_file(f.y.string(), pr.y);
    csv::write_vector_file(f.beta.string(), pr.truth->beta_star);
    return f;
}

} // namespace

TEST(Cli, SolveOutputsJson)
{
    const Files f = write_problem("cli_solve");
    const CliRun r = run({"solve", "--design", f.X.string(), "--response", f.y.string(), "--lambda", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["beta"].size(), 10u);
    EXPECT_TRUE(j["converged"].get<bool>());
}

TEST(Cli, SolveWithInfiniteWeights)
{
    const Files f = write_problem("cli_weights");
    {
        std::ofstream w(f.dir / "w.csv");
        for (int j = 0; j < 10; ++j) w << (j == 0 ? "inf" : "1") << '\n';
    }
    const CliRun r = run({"solve", "--design", f.X.string(), "--response", f.y.string(), "--lambda", "0.05", "--weights",
                       (f.dir / "w.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["beta"][0].get<double>(), 0.0);
}

TEST(Cli, AdaptiveWritesInfAsString)
{
    const Files f = write_problem("cli_adaptive");
    const CliRun r = run({"adaptive", "--design", f.X.string(), "--response", f.y.string(), "--sigma", "0.2", "--B",
                       "0.5", "--K", "1.4142"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    bool saw_inf = false;
    for (const auto& w : j["weights"]) saw_inf = saw_inf || (w.is_string() && w.get<std::string>() == "inf");
    EXPECT_TRUE(saw_inf);
    EXPECT_EQ(j["K_source"], "override");
}

TEST(Cli, CheckReportsDiagnostics)
{
    const Files f = write_problem("cli_check");
    const CliRun r = run({"check", "--design", f.X.string(), "--s", "2", "--m", "2", "--budget", "2", "--response",
                       f.y.string(), "--beta-star", f.beta.string(), "--noise-sigma", "0.2", "--theorem",
                       "fixed_design"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j.contains("lambda_min_s"));
    EXPECT_TRUE(j.contains("r_n"));
    EXPECT_FALSE(j["theorem_checks"].empty());
}

TEST(Cli, GgmRequiresNoiseInformation)
{
    const auto dir = testutil::scratch("cli_ggm");
    const GgmSamples g = gen_ggm_samples(tridiagonal_precision(6, 0.4), 600, 2);
    csv::write_matrix_file((dir / "S.csv").string(), g.samples);
    csv::write_matrix_file((dir / "Q.csv").string(), g.precision.Q);
    EXPECT_EQ(run({"ggm", "--samples", (dir / "S.csv").string()}).code, 2);
    const CliRun r = run({"ggm", "--samples", (dir / "S.csv").string(), "--precision", (dir / "Q.csv").string(), "--B",
                       "0.5", "--K", "1.4142", "--rule", "both", "--dot", (dir / "g.dot").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j.contains("and_edges"));
    EXPECT_TRUE(j.contains("or_edges"));
    EXPECT_TRUE(std::filesystem::exists(dir / "g.dot"));
}

TEST(Cli, SimulateAndExitCodes)
{
    const auto dir = testutil::scratch("cli_sim");
    {
        std::ofstream c(dir / "cfg.json");
        c << R"({"scenario":{"n":60,"p":15,"sigma_eps":0.3,"signal":{"s":2,"beta_min":1.5}},
                 "methods":["adaptive_lasso"],"replicates":4,"master_seed":3,
                 "constants":{"B":0.5},"adaptive":{"K":1.4142}})";
    }
    const CliRun r = run({"simulate", "--config", (dir / "cfg.json").string(), "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.json"));
    EXPECT_EQ(run({"simulate", "--config", (dir / "cfg.json").string(), "--out", (dir / "out").string(), "--format",
                   "plotdata"})
                  .code,
              2);
    {
        std::ofstream c(dir / "bad.json");
        c << R"({"scenario":{"n":60})";
    }
    EXPECT_EQ(run({"simulate", "--config", (dir / "bad.json").string()}).code, 2);
    EXPECT_EQ(run({"simulate", "--config", (dir / "missing.json").string()}).code, 2);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"solve", "--design", "x.csv"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    const Files f = write_problem("cli_errors");
    EXPECT_EQ(run({"solve", "--design", f.X.string(), "--response", f.X.string(), "--lambda", "0.1"}).code, 2);
    EXPECT_EQ(run({"solve", "--design", f.X.string(), "--response", f.y.string(), "--lambda", "-1"}).code, 2);
}

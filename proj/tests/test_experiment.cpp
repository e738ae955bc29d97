#include <adalasso/experiment.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace adalasso;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.scenario.covariance = CovarianceSpec::toeplitz(20, 0.3);
    c.scenario.n = 80;
    c.scenario.p = 20;
    c.scenario.signal.s = 3;
    c.scenario.signal.beta_min = 1.5;
    c.scenario.sigma_eps = 0.3;
    c.methods = {Method::plain_lasso, Method::adaptive_lasso, Method::thresholded_lasso_oracle};
    c.replicates = 12;
    c.master_seed = 77;
    c.constants.B = 0.5;
    c.adaptive.K = std::sqrt(2.0);
    return c;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Experiment, DeterministicAcrossJobs)
{
    const ExperimentConfig c = small_config();
    const ExperimentResult a = run_experiment(c, 1);
    const ExperimentResult b = run_experiment(c, 4);
    EXPECT_EQ(result_to_json(a), result_to_json(b));
    EXPECT_EQ(replicates_csv(a), replicates_csv(b));
    EXPECT_EQ(a.per_replicate.size(), 36u);
}

TEST(Experiment, SeedChangesResult)
{
    ExperimentConfig c = small_config();
    const std::string a = result_to_json(run_experiment(c));
    c.master_seed = 78;
    EXPECT_NE(a, result_to_json(run_experiment(c)));
}

TEST(Experiment, SummaryMatchesRows)
{
    const ExperimentResult r = run_experiment(small_config());
    for (const auto& [name, summary] : r.per_method) {
        int exact = 0, total = 0;
        double l2 = 0.0;
        for (const auto& row : r.per_replicate) {
            if (method_name(row.method) != name || row.failed) continue;
            ++total;
            exact += row.support_exact;
            l2 += row.l2_error;
        }
        ASSERT_GT(total, 0);
        EXPECT_NEAR(summary.exact_support_rate, static_cast<double>(exact) / total, 1e-12) << name;
        EXPECT_NEAR(summary.mean_l2_error, l2 / total, 1e-12) << name;
    }
}

TEST(Experiment, NullModelAdaptiveSelectsNothing)
{
    ExperimentConfig c;
    c.scenario.covariance = CovarianceSpec::identity(50);
    c.scenario.n = 100;
    c.scenario.p = 50;
    c.scenario.signal.s = 0;
    c.scenario.sigma_eps = 1.0;
    c.replicates = 50;
    c.adaptive.K = 1.0;
    const ExperimentResult r = run_experiment(c, 2);
    EXPECT_GE(r.per_method.at("adaptive_lasso").exact_support_rate, 0.96);
}

TEST(Experiment, FixedDesignSharesX)
{
    ExperimentConfig c = small_config();
    c.scenario.fixed_design = true;
    c.methods = {Method::adaptive_lasso};
    c.replicates = 3;
    EXPECT_NO_THROW(run_experiment(c));
}

TEST(Experiment, JsonRoundTrip)
{
    const ExperimentResult r = run_experiment(small_config());
    const std::string text = result_to_json(r);
    const ExperimentResult back = result_from_json(text);
    EXPECT_EQ(result_to_json(back), text);
    EXPECT_EQ(back.per_replicate.size(), r.per_replicate.size());
    EXPECT_EQ(text.find("wall_time"), std::string::npos);
}

TEST(Experiment, ConfigJsonRoundTrip)
{
    ExperimentConfig c = small_config();
    c.lambda_grid = std::vector<double>{0.05, 0.1, 0.2};
    c.sweep = SweepSpec{"beta_min", {0.5, 1.0}};
    const std::string text = config_to_json(c);
    const ExperimentConfig back = config_from_json(text);
    EXPECT_EQ(config_to_json(back), text);
}

TEST(Experiment, ConfigErrors)
{
    EXPECT_THROW(config_from_json("{"), ConfigError);
    EXPECT_THROW(config_from_json("{}"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":10,"p":5,"covariance":{"kind":"wavy"}}})"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":10,"p":5},"methods":["ridge"]})"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":10,"p":5},"replicates":0})"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":10,"p":5,"signal":{"s":9}}})"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":10,"p":5},"lambda_grid":[]})"), ConfigError);
    EXPECT_THROW(config_from_json(R"({"scenario":{"n":"ten","p":5}})"), ConfigError);
    const ExperimentConfig ok = config_from_json(
        R"({"scenario":{"n":40,"p":12,"covariance":{"kind":"irrepresentable_violating","s":3,"rho":0.55},
            "signal":{"s":3}}})");
    EXPECT_EQ(ok.scenario.covariance.kind, CovarianceKind::custom);
}

TEST(Experiment, ReportFiles)
{
    const auto dir = testutil::scratch("experiment_report");
    const ExperimentResult r = run_experiment(small_config());
    const auto json_paths = emit_report(r, ReportFormat::json, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "timing.json"));
    EXPECT_TRUE(nlohmann::json::accept(slurp(dir / "report.json")));
    emit_report(r, ReportFormat::csv, dir);
    const std::string csv = slurp(dir / "replicates.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 36);
    EXPECT_EQ(csv.rfind("replicate,method,", 0), 0u);
    EXPECT_THROW(emit_report(r, ReportFormat::plotdata, dir), ConfigError);
    EXPECT_THROW(parse_report_format("xml"), ConfigError);
}

TEST(Experiment, SweepPlotData)
{
    ExperimentConfig c = small_config();
    c.methods = {Method::adaptive_lasso};
    c.replicates = 4;
    c.sweep = SweepSpec{"n", {60, 120}};
    const auto points = run_sweep(c, 2);
    ASSERT_EQ(points.size(), 2u);
    const auto dir = testutil::scratch("experiment_sweep");
    emit_sweep_report(points, "n", ReportFormat::plotdata, dir);
    const std::string plot = slurp(dir / "plot_adaptive_lasso.csv");
    EXPECT_EQ(plot.rfind("n,exact_support_rate\n", 0), 0u);
    EXPECT_EQ(std::count(plot.begin(), plot.end(), '\n'), 3);
}

TEST(Experiment, CompareNeedsGrid)
{
    ExperimentConfig c = small_config();
    EXPECT_THROW(compare_methods(c), ConfigError);
    c.lambda_grid = std::vector<double>{0.02, 0.05, 0.1, 0.2, 0.4};
    c.replicates = 6;
    const Comparison cmp = compare_methods(c, 2);
    bool on_grid = false;
    for (double l : *c.lambda_grid) on_grid = on_grid || l == cmp.plain_best_lambda;
    EXPECT_TRUE(on_grid);
    EXPECT_GE(cmp.plain_best_rate, 0.0);
    EXPECT_LE(cmp.plain_best_rate, 1.0);
    EXPECT_TRUE(nlohmann::json::accept(comparison_to_json(cmp)));
}

TEST(Experiment, ZeroOnlyGridGivesDensePlainFit)
{
    ExperimentConfig c = small_config();
    c.lambda_grid = std::vector<double>{0.0};
    c.replicates = 5;
    const Comparison cmp = compare_methods(c);
    EXPECT_EQ(cmp.plain_best_lambda, 0.0);
    EXPECT_EQ(cmp.plain_best_rate, 0.0);
}

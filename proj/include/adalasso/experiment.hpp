#pragma once
// Monte Carlo experiments: scenario generation, method runs, aggregation and
// report files. Results depend only on the config and master seed, never on
// the number of worker threads.

#include <adalasso/adaptive.hpp>
#include <adalasso/synth.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adalasso {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Method
{
    plain_lasso,
    adaptive_lasso,
    thresholded_lasso_oracle,
};

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct Scenario
{
    /// Covariance of the design rows. kind "irrepresentable_violating" in the
    /// JSON form expands to irrepresentable_violating_design(p, s, rho).
    CovarianceSpec covariance = CovarianceSpec::identity(10);
    Index n = 100;
    Index p = 10;
    SignalSpec signal;
    double sigma_eps = 1.0;
    /// Draw one design for all replicates instead of one per replicate.
    bool fixed_design = false;
};

struct SweepSpec
{
    /// "n" or "beta_min"
    std::string parameter;
    std::vector<double> values;
};

struct ExperimentConfig
{
    Scenario scenario;
    std::vector<Method> methods{Method::adaptive_lasso};
    Index replicates = 1;
    std::uint64_t master_seed = 1;
    Constants constants;
    /// Overrides for the adaptive pipeline (lambda_init, lambda_n, position, K).
    AdaptiveConfig adaptive;
    /// Plain Lasso uses the best lambda over this grid when present,
    /// otherwise lambda_init from the formula.
    std::optional<std::vector<double>> lambda_grid;
    /// Evaluate r_n, incoherence and event T per replicate.
    bool conditions = true;
    /// Keep per-replicate rows in the result.
    bool detail = true;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

struct ReplicateRow
{
    Index replicate = 0;
    Method method = Method::adaptive_lasso;
    bool failed = false;
    std::string error;
    bool support_exact = false;
    bool sign_exact = false;
    double l1_error = 0.0;
    double l2_error = 0.0;
    double lambda = 0.0;
    Index support_size = 0;
    /// Initial-estimate error (adaptive and thresholded methods).
    std::optional<double> init_l1_error;
    std::optional<double> lambda_init;
    std::optional<Index> s_bar;
    std::optional<bool> event_T;
    std::optional<bool> certificate_predicts;
    std::optional<bool> certificate_a;
    std::optional<bool> certificate_b;
    /// Both margins clear +-10 tol on the side that decides the prediction.
    std::optional<bool> certificate_decided;
    std::optional<double> r_n;
    std::optional<bool> weighted_incoherence;
};

struct MethodSummary
{
    double exact_support_rate = 0.0;
    double exact_sign_rate = 0.0;
    double mean_l2_error = 0.0;
    double mean_l1_error = 0.0;
    /// Agreement among decided certificates; absent when none was decided.
    std::optional<double> certificate_agreement_rate;
    Index certificate_decided = 0;
    Index failures = 0;
    /// Plain Lasso on a grid: the chosen lambda and the rate at each grid point.
    std::optional<double> chosen_lambda;
    std::vector<double> grid_support_rates;
};

struct ConditionSummary
{
    Index evaluated = 0;
    double mean_r_n = 0.0;
    double irrepresentable_rate = 0.0;
    double event_T_rate = 0.0;
    /// Fraction of adaptive replicates whose realized weights pass the
    /// weighted incoherence check.
    std::optional<double> weighted_incoherence_rate;
};

struct ExperimentResult
{
    Index replicates = 0;
    std::uint64_t master_seed = 0;
    std::map<std::string, MethodSummary> per_method;
    std::vector<ReplicateRow> per_replicate;
    ConditionSummary condition_summary;
    Index failed_replicates = 0;
    /// Seconds; written to a separate timing file, not to the JSON report.
    double wall_time = 0.0;
};

struct SweepPoint
{
    double value = 0.0;
    ExperimentResult result;
};

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1);
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, unsigned jobs = 1);

struct Comparison
{
    double plain_best_lambda = 0.0;
    double plain_best_rate = 0.0;
    double adaptive_rate = 0.0;
    /// Fractions of replicates where each certificate condition holds.
    double plain_condition_a_rate = 0.0;
    double plain_condition_b_rate = 0.0;
    double adaptive_condition_a_rate = 0.0;
    double adaptive_condition_b_rate = 0.0;
    ExperimentResult result;
};

/// Runs plain Lasso (best lambda over the grid) and the adaptive pipeline on
/// the same replicates. Throws ConfigError on an empty or missing grid.
Comparison compare_methods(const ExperimentConfig& config, unsigned jobs = 1);

std::string result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const std::string& text);
std::string comparison_to_json(const Comparison& comparison);

enum class ReportFormat
{
    json,
    csv,
    plotdata,
};

ReportFormat parse_report_format(const std::string& name);

/// json: report.json; csv: replicates.csv (one row per replicate and method);
/// plotdata: needs sweep points, writes plot_<method>.csv with columns
/// <parameter>,exact_support_rate. Wall time goes to timing.json.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentResult& result, ReportFormat format,
                                               const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> emit_sweep_report(const std::vector<SweepPoint>& points,
                                                     const std::string& parameter, ReportFormat format,
                                                     const std::filesystem::path& out_dir);

std::string replicates_csv(const ExperimentResult& result);

} // namespace adalasso

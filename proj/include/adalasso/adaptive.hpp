#pragma once
// Two-stage adaptive Lasso: initial Lasso, weights max(1/|b|, 1), thresholded
// sparsity estimate, second-stage penalty from the admissible range, final
// weighted fit.

#include <adalasso/conditions.hpp>
#include <adalasso/core.hpp>

#include <optional>
#include <string>

namespace adalasso {

struct AdaptiveConfig
{
    Constants constants;
    std::optional<double> lambda_init;
    std::optional<double> lambda_n;
    /// Placement of lambda_n inside [lo, hi]; 0 is the lower endpoint.
    double lambda_n_position = 0.0;
    /// K used in the lambda_n range. Empty: the witnessed K(s_bar, s_bar, k0)
    /// from the conditions module.
    std::optional<double> K;
    ReOptions re_options;
    int re_budget = 8;

    void validate() const;
};

struct InitialFit
{
    Vector beta_init;
    double lambda_init = 0.0;
    Estimate estimate;
};

/// Standard Lasso at lambda_init = B c0 sigma sqrt(log p / n), or the
/// configured value. Throws MissingQuantity when neither sigma nor
/// lambda_init is available.
InitialFit fit_initial(const RegressionProblem& problem, const AdaptiveConfig& config);

/// w_j = max(1/|b_j|, 1), and +inf where b_j = 0.
WeightVector compute_weights(const Vector& beta_init);

/// { j : |b_j| > 4 lambda_init }
IndexSet threshold_support(const Vector& beta_init, double lambda_init);

struct LambdaRange
{
    double lo = 0.0;
    double hi = 0.0;
    /// lo > hi, i.e. M < 4K/eta.
    bool degenerate = false;
};

/// lo = (64 K^2 / eta) c0 sigma lambda_init sqrt(s_bar) sqrt(2 log(p - s) / n)
/// hi = 16 M K c0 sigma lambda_init sqrt(s_bar) sqrt(2 log(p - s) / n)
/// with s = s_for_log. Requires s_bar >= 1, K > 0 and p - s_for_log >= 2.
LambdaRange lambda_n_range(Index s_bar, double K, const Constants& constants, double sigma, double lambda_init,
                           Index p, Index n, Index s_for_log);

struct AdaptiveTrace
{
    Vector beta_init;
    double lambda_init_used = 0.0;
    Estimate initial;
    WeightVector weights;
    Index s_bar = 0;
    IndexSet s_bar_set;
    /// Absent when lambda_n was supplied and sigma is unknown.
    std::optional<LambdaRange> lambda_n_range;
    double lambda_n_used = 0.0;
    double K_used = 0.0;
    /// "override", "witnessed" or "exact".
    std::string K_source;
    std::vector<std::string> notes;
    Estimate final;
};

AdaptiveTrace adaptive_lasso(const RegressionProblem& problem, const AdaptiveConfig& config);

} // namespace adalasso

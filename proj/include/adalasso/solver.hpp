#pragma once
// Weighted Lasso:  min_b (1/2n)||y - X b||^2 + lambda * sum_j w_j |b_j|
// solved by cyclic coordinate descent with a KKT stopping rule.

#include <adalasso/core.hpp>

#include <optional>

namespace adalasso {

struct SolverConfig
{
    double lambda = 0.0;
    /// Empty means unit weights.
    WeightVector weights;
    double tol = 1e-8;
    std::int64_t max_iter = 100000;
    std::optional<Vector> warm_start;
    /// Evaluate the objective after every sweep and throw std::logic_error if
    /// it increases. Always on in debug builds.
    bool check_monotone = false;
};

/// Cyclic coordinate descent in fixed order 0..p-1. Between full sweeps the
/// solver cycles over the current support only; convergence is declared when
/// the KKT residual after a full sweep is <= tol. Coordinates with infinite
/// weight are held at exactly zero. One sweep (full or support-only) counts as
/// one iteration against max_iter.
Estimate solve_weighted_lasso(const RegressionProblem& problem, const SolverConfig& config);

/// Largest subgradient violation of `beta`:
///   beta_j != 0:  |g_j - sgn(beta_j) w_j lambda|
///   beta_j == 0:  max(|g_j| - lambda w_j, 0)
/// with g = X^T (y - X beta) / n. Zero exactly at an optimum.
double kkt_residual(const RegressionProblem& problem, const SolverConfig& config, const Vector& beta);

double lasso_objective(const RegressionProblem& problem, double lambda, const WeightVector& weights,
                       const Vector& beta);

/// Reparameterization b = W^{-1} b0 that turns the weighted program into a
/// standard (unit-weight) Lasso on the design X W^{-1}. Columns with infinite
/// weight are dropped and reinserted as zeros by recover().
struct StandardReduction
{
    RegressionProblem problem;
    /// Original column index of every reduced column.
    IndexSet kept;
    /// 1 / w_j for each kept column.
    Vector inverse_weights;
    Index original_p = 0;

    Vector recover(const Vector& beta0) const;
};

StandardReduction reduce_to_standard(const RegressionProblem& problem, const WeightVector& weights);

/// Soft-thresholding operator sgn(z) max(|z| - t, 0).
inline double soft_threshold(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

} // namespace adalasso

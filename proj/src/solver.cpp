#include <adalasso/solver.hpp>

#include <adalasso/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace adalasso {

namespace {

std::span<const double> column(const Matrix& X, Index j)
{
    return {X.data() + j * X.rows(), static_cast<std::size_t>(X.rows())};
}

WeightVector resolve_weights(const RegressionProblem& problem, const SolverConfig& config)
{
    if (config.weights.size() == 0) return WeightVector::ones(problem.p());
    if (config.weights.size() != problem.p())
        throw InvalidArgument("weights length " + std::to_string(config.weights.size()) +
                              " differs from p = " + std::to_string(problem.p()));
    return config.weights;
}

void check_shapes(const RegressionProblem& problem)
{
    if (problem.y.size() != problem.n())
        throw InvalidArgument("response length differs from the number of design rows");
    if (problem.n() < 1 || problem.p() < 1) throw InvalidArgument("empty design");
}

struct Workspace
{
    const Matrix& X;
    const WeightVector& w;
    double lambda;
    double inv_n;
    std::vector<double> col_sq; // ||X_j||^2 / n
    Vector beta;
    Vector resid;

    double threshold(Index j) const
    {
        const double wj = w[j];
        return std::isfinite(wj) ? lambda * wj : kInf;
    }

    // Exact minimization along coordinate j; returns the coefficient change.
    double update(Index j)
    {
        const double old = beta[j];
        const double csq = col_sq[static_cast<std::size_t>(j)];
        double fresh = 0.0;
        if (csq > 0.0 && std::isfinite(w[j])) {
            const std::span<const double> xj = column(X, j);
            const double z = kernels::dot(xj, {resid.data(), xj.size()}) * inv_n + csq * old;
            fresh = soft_threshold(z, threshold(j)) / csq;
        }
        const double delta = fresh - old;
        if (delta != 0.0) {
            kernels::axpy(-delta, column(X, j), {resid.data(), static_cast<std::size_t>(resid.size())});
            beta[j] = fresh;
        }
        return delta;
    }
};

double kkt_with(const Matrix& X, const Vector& resid, const WeightVector& w, double lambda,
                const Vector& beta)
{
    const double inv_n = 1.0 / static_cast<double>(X.rows());
    const std::span<const double> r(resid.data(), static_cast<std::size_t>(resid.size()));
    double worst = 0.0;
    for (Index j = 0; j < X.cols(); ++j) {
        const double g = kernels::dot(column(X, j), r) * inv_n;
        const double wj = w[j];
        double v;
        if (beta[j] != 0.0) {
            v = std::isfinite(wj) ? std::abs(g - sgn(beta[j]) * wj * lambda) : kInf;
        } else {
            v = std::isfinite(wj) ? std::max(std::abs(g) - lambda * wj, 0.0) : 0.0;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

double lasso_objective(const RegressionProblem& problem, double lambda, const WeightVector& weights,
                       const Vector& beta)
{
    const Vector r = problem.y - problem.X * beta;
    double penalty = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0) continue;
        const double wj = weights.size() ? weights[j] : 1.0;
        if (!std::isfinite(wj)) return kInf;
        penalty += wj * std::abs(beta[j]);
    }
    return 0.5 * r.squaredNorm() / static_cast<double>(problem.n()) + lambda * penalty;
}

double kkt_residual(const RegressionProblem& problem, const SolverConfig& config, const Vector& beta)
{
    check_shapes(problem);
    if (beta.size() != problem.p()) throw InvalidArgument("beta length differs from p");
    const WeightVector w = resolve_weights(problem, config);
    const Vector resid = problem.y - problem.X * beta;
    return kkt_with(problem.X, resid, w, config.lambda, beta);
}

Estimate solve_weighted_lasso(const RegressionProblem& problem, const SolverConfig& config)
{
    check_shapes(problem);
    if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda))
        throw InvalidArgument("lambda must be finite and nonnegative");
    if (!(config.tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (config.max_iter < 1) throw InvalidArgument("max_iter must be positive");
    const WeightVector w = resolve_weights(problem, config);

    const Index n = problem.n();
    const Index p = problem.p();
    Workspace ws{problem.X, w, config.lambda, 1.0 / static_cast<double>(n), {}, Vector::Zero(p), problem.y};
    ws.col_sq.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
        ws.col_sq[static_cast<std::size_t>(j)] = kernels::sum_squares(column(problem.X, j)) * ws.inv_n;

    if (config.warm_start) {
        if (config.warm_start->size() != p) throw InvalidArgument("warm start length differs from p");
        ws.beta = *config.warm_start;
        for (Index j = 0; j < p; ++j)
            if (w.is_excluded(j)) ws.beta[j] = 0.0;
        ws.resid = problem.y - problem.X * ws.beta;
    }

#ifndef NDEBUG
    const bool monotone = true;
#else
    const bool monotone = config.check_monotone;
#endif
    double last_obj = monotone ? lasso_objective(problem, config.lambda, w, ws.beta) : 0.0;
    auto check_descent = [&] {
        if (!monotone) return;
        const double obj = lasso_objective(problem, config.lambda, w, ws.beta);
        if (obj > last_obj + 1e-12 * (1.0 + std::abs(last_obj)))
            throw std::logic_error("coordinate descent increased the objective");
        last_obj = obj;
    };

    // Inner support-only cycling stops once no coordinate moves the gradient by
    // more than a fraction of the KKT tolerance.
    const double inner_tol = 0.1 * config.tol;
    std::int64_t iter = 0;
    double kkt = kInf;
    std::vector<Index> active;
    while (iter < config.max_iter) {
        for (Index j = 0; j < p; ++j) ws.update(j);
        ++iter;
        check_descent();

        kkt = kkt_with(problem.X, ws.resid, w, config.lambda, ws.beta);
        if (kkt <= config.tol) break;

        active.clear();
        for (Index j = 0; j < p; ++j)
            if (ws.beta[j] != 0.0) active.push_back(j);
        while (iter < config.max_iter && !active.empty()) {
            double moved = 0.0;
            for (Index j : active)
                moved = std::max(moved, std::abs(ws.update(j)) * ws.col_sq[static_cast<std::size_t>(j)]);
            ++iter;
            check_descent();
            if (moved <= inner_tol) break;
        }
    }

    // The residual vector accumulates rounding over many rank-one updates;
    // report the residual of a freshly computed y - X beta.
    const Vector fresh_resid = problem.y - problem.X * ws.beta;
    kkt = kkt_with(problem.X, fresh_resid, w, config.lambda, ws.beta);
    return Estimate::from_beta(std::move(ws.beta), kkt, iter, kkt <= config.tol);
}

Vector StandardReduction::recover(const Vector& beta0) const
{
    if (beta0.size() != static_cast<Index>(kept.size()))
        throw InvalidArgument("reduced coefficient length differs from the reduced design");
    Vector beta = Vector::Zero(original_p);
    for (std::size_t k = 0; k < kept.size(); ++k)
        beta[kept[k]] = beta0[static_cast<Index>(k)] * inverse_weights[static_cast<Index>(k)];
    return beta;
}

StandardReduction reduce_to_standard(const RegressionProblem& problem, const WeightVector& weights)
{
    if (weights.size() != problem.p()) throw InvalidArgument("weights length differs from p");
    StandardReduction red;
    red.original_p = problem.p();
    for (Index j = 0; j < problem.p(); ++j)
        if (!weights.is_excluded(j)) red.kept.push_back(j);
    red.inverse_weights.resize(static_cast<Index>(red.kept.size()));
    red.problem.X.resize(problem.n(), static_cast<Index>(red.kept.size()));
    for (std::size_t k = 0; k < red.kept.size(); ++k) {
        const Index j = red.kept[k];
        const double inv = 1.0 / weights[j];
        red.inverse_weights[static_cast<Index>(k)] = inv;
        red.problem.X.col(static_cast<Index>(k)) = problem.X.col(j) * inv;
    }
    red.problem.y = problem.y;
    red.problem.sigma_eps = problem.sigma_eps;
    return red;
}

} // namespace adalasso

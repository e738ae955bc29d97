#include <adalasso/adaptive.hpp>

#include <adalasso/solver.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adalasso {

void AdaptiveConfig::validate() const
{
    constants.validate();
    if (!(lambda_n_position >= 0.0 && lambda_n_position <= 1.0))
        throw InvalidArgument("lambda_n_position must lie in [0, 1]");
    if (lambda_init && !(*lambda_init > 0.0 && std::isfinite(*lambda_init)))
        throw InvalidArgument("lambda_init must be positive and finite");
    if (lambda_n && !(*lambda_n > 0.0 && std::isfinite(*lambda_n)))
        throw InvalidArgument("lambda_n must be positive and finite");
    if (K && !(*K > 0.0 && std::isfinite(*K))) throw InvalidArgument("K must be positive and finite");
}

InitialFit fit_initial(const RegressionProblem& problem, const AdaptiveConfig& config)
{
    InitialFit out;
    if (config.lambda_init) {
        out.lambda_init = *config.lambda_init;
    } else {
        if (!problem.sigma_eps) throw MissingQuantity("noise level sigma is required unless lambda_init is given");
        const double n = static_cast<double>(problem.n());
        const double p = static_cast<double>(problem.p());
        const Constants& c = config.constants;
        out.lambda_init = c.B * c.c0 * *problem.sigma_eps * std::sqrt(std::log(p) / n);
        if (!(out.lambda_init > 0.0))
            throw InvalidArgument("lambda_init from the formula is not positive (sigma = 0 or p = 1); supply it");
    }
    SolverConfig sc;
    sc.lambda = out.lambda_init;
    sc.tol = config.constants.tol;
    sc.max_iter = config.constants.max_iter;
    out.estimate = solve_weighted_lasso(problem, sc);
    out.beta_init = out.estimate.beta_hat;
    return out;
}

WeightVector compute_weights(const Vector& beta_init)
{
    Vector w(beta_init.size());
    for (Index j = 0; j < beta_init.size(); ++j) {
        const double b = std::abs(beta_init[j]);
        w[j] = b == 0.0 ? kInf : std::max(1.0 / b, 1.0);
    }
    return WeightVector(std::move(w));
}

IndexSet threshold_support(const Vector& beta_init, double lambda_init)
{
    if (!(lambda_init > 0.0)) throw InvalidArgument("lambda_init must be positive");
    IndexSet out;
    for (Index j = 0; j < beta_init.size(); ++j)
        if (std::abs(beta_init[j]) > 4.0 * lambda_init) out.push_back(j);
    return out;
}

LambdaRange lambda_n_range(Index s_bar, double K, const Constants& constants, double sigma, double lambda_init,
                           Index p, Index n, Index s_for_log)
{
    if (s_bar < 1) throw InvalidArgument("s_bar must be at least 1");
    if (!(K > 0.0)) throw InvalidArgument("K must be positive");
    if (p - s_for_log < 2) throw InvalidArgument("p - s must be at least 2");
    if (n < 1) throw InvalidArgument("n must be positive");
    const double common = constants.c0 * sigma * lambda_init * std::sqrt(static_cast<double>(s_bar)) *
                          std::sqrt(2.0 * std::log(static_cast<double>(p - s_for_log)) / static_cast<double>(n));
    LambdaRange r;
    r.lo = 64.0 * K * K / constants.eta * common;
    r.hi = 16.0 * constants.M * K * common;
    r.degenerate = r.lo > r.hi;
    return r;
}

AdaptiveTrace adaptive_lasso(const RegressionProblem& problem, const AdaptiveConfig& config)
{
    config.validate();
    const Index p = problem.p();
    const Index n = problem.n();

    AdaptiveTrace t;
    InitialFit init = fit_initial(problem, config);
    t.beta_init = init.beta_init;
    t.lambda_init_used = init.lambda_init;
    t.initial = std::move(init.estimate);
    if (!t.initial.converged) t.notes.emplace_back("initial Lasso did not converge");
    t.weights = compute_weights(t.beta_init);
    t.s_bar_set = threshold_support(t.beta_init, t.lambda_init_used);
    t.s_bar = static_cast<Index>(t.s_bar_set.size());

    const bool have_sigma = problem.sigma_eps.has_value();
    if (!config.lambda_n && !have_sigma)
        throw MissingQuantity("noise level sigma is required unless lambda_n is given");

    if (have_sigma) {
        const Index s_range = std::max<Index>(t.s_bar, 1);
        if (t.s_bar == 0) t.notes.emplace_back("s_bar = 0; the lambda_n range uses s_bar = 1");

        if (config.K) {
            t.K_used = *config.K;
            t.K_source = "override";
        } else {
            const Index s_re = std::max<Index>(1, std::min<Index>(s_range, p / 2));
            const Index m_re = std::min<Index>(s_re, p - s_re);
            const ReEstimate re = re_constant(problem.X, s_re, m_re, config.constants.k0, config.re_budget,
                                              config.re_options);
            if (!std::isfinite(re.value))
                throw MissingQuantity("the design shows no restricted eigenvalue at s_bar; supply K explicitly");
            t.K_used = re.value;
            t.K_source = re.kind == ReKind::exact ? "exact" : "witnessed";
        }

        // log(p - s) with s_bar standing in for s; kept at least log 2.
        const Index s_for_log = std::max<Index>(0, std::min<Index>(t.s_bar, p - 2));
        const Index p_for_log = std::max<Index>(p, s_for_log + 2);
        t.lambda_n_range = lambda_n_range(s_range, t.K_used, config.constants, *problem.sigma_eps,
                                          t.lambda_init_used, p_for_log, n, s_for_log);
        if (t.lambda_n_range->degenerate)
            t.notes.emplace_back("lambda_n range is empty (M < 4K/eta); using the lower endpoint");
    }

    if (config.lambda_n) {
        t.lambda_n_used = *config.lambda_n;
    } else {
        const LambdaRange& r = *t.lambda_n_range;
        t.lambda_n_used = r.degenerate ? r.lo : r.lo + config.lambda_n_position * (r.hi - r.lo);
    }

    SolverConfig sc;
    sc.lambda = t.lambda_n_used;
    sc.weights = t.weights;
    sc.tol = config.constants.tol;
    sc.max_iter = config.constants.max_iter;
    t.final = solve_weighted_lasso(problem, sc);
    if (!t.final.converged) t.notes.emplace_back("second-stage Lasso did not converge");
    return t;
}

} // namespace adalasso

#include <adalasso/core.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adalasso {

TrueModel TrueModel::from_beta(const Vector& beta_star)
{
    TrueModel t;
    t.beta_star = beta_star;
    t.support = support_of(beta_star);
    t.s = static_cast<Index>(t.support.size());
    if (!t.support.empty()) {
        double m = kInf;
        for (Index j : t.support) m = std::min(m, std::abs(beta_star[j]));
        t.beta_min = m;
    }
    return t;
}

double RegressionProblem::sigma() const
{
    if (!sigma_eps) throw MissingQuantity("noise level sigma_eps is not set on the problem");
    return *sigma_eps;
}

Vector RegressionProblem::noise() const
{
    if (!truth) throw MissingQuantity("problem carries no true model");
    if (truth->beta_star.size() != p()) throw InvalidArgument("beta_star length differs from p");
    return y - X * truth->beta_star;
}

WeightVector::WeightVector(Vector w) : w_(std::move(w))
{
    for (Index j = 0; j < w_.size(); ++j) {
        const double v = w_[j];
        if (std::isnan(v) || !(v > 0.0))
            throw InvalidArgument("weight " + std::to_string(j) + " is not in (0, +inf]");
    }
}

bool WeightVector::all_finite() const
{
    return std::all_of(w_.begin(), w_.end(), [](double v) { return std::isfinite(v); });
}

double WeightVector::max_over(const IndexSet& set) const
{
    double m = 0.0;
    for (Index j : set) {
        if (!std::isfinite(w_[j]))
            throw InvalidArgument("w_max over a set containing an infinite weight (index " +
                                  std::to_string(j) + ")");
        m = std::max(m, w_[j]);
    }
    return m;
}

double WeightVector::min_over(const IndexSet& set) const
{
    double m = kInf;
    for (Index j : set)
        if (std::isfinite(w_[j])) m = std::min(m, w_[j]);
    return m;
}

Vector WeightVector::signed_on(const IndexSet& support, const Vector& beta) const
{
    Vector b(static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        const Index i = support[k];
        if (!std::isfinite(w_[i]))
            throw InvalidArgument("infinite weight inside the support (index " + std::to_string(i) + ")");
        b[static_cast<Index>(k)] = sgn(beta[i]) * w_[i];
    }
    return b;
}

void Constants::validate() const
{
    const double c2_floor = 4.0 * std::sqrt(5.0 / 3.0);
    if (!(c0 > 0.0)) throw InvalidArgument("c0 must be positive");
    if (!(C2 > c2_floor)) throw InvalidArgument("C2 must exceed 4*sqrt(5/3)");
    if (!(B > 0.0)) throw InvalidArgument("B must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0,1)");
    if (!(M >= 4.0 / eta)) throw InvalidArgument("M must be at least 4/eta");
    if (!(k0 > 0.0)) throw InvalidArgument("k0 must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
}

Estimate Estimate::from_beta(Vector beta, double kkt_residual, std::int64_t iterations, bool converged)
{
    Estimate e;
    e.support = support_of(beta);
    e.signs = signs_of(beta);
    e.beta_hat = std::move(beta);
    e.kkt_residual = kkt_residual;
    e.iterations = iterations;
    e.converged = converged;
    return e;
}

std::vector<std::string> validate_problem(const RegressionProblem& problem, const Constants& constants,
                                          const ValidationOptions& options)
{
    std::vector<std::string> out;
    const Index n = problem.n();
    const Index p = problem.p();
    if (n < 1) out.emplace_back("design has no rows");
    if (p < 1) out.emplace_back("design has no columns");
    if (problem.y.size() != n) out.emplace_back("y length mismatch");

    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i)
            if (!std::isfinite(problem.X(i, j))) {
                std::ostringstream os;
                os << "non-finite entry at (" << i << "," << j << ")";
                out.push_back(os.str());
            }
    for (Index i = 0; i < problem.y.size(); ++i)
        if (!std::isfinite(problem.y[i])) out.push_back("non-finite response at " + std::to_string(i));

    if (problem.sigma_eps && !(*problem.sigma_eps >= 0.0 && std::isfinite(*problem.sigma_eps)))
        out.emplace_back("sigma_eps must be finite and nonnegative");

    if (problem.truth) {
        if (problem.truth->beta_star.size() != p) out.emplace_back("beta_star length mismatch");
        else if (!problem.truth->beta_star.allFinite()) out.emplace_back("beta_star has non-finite entries");
    }

    if (options.check_column_norms && n >= 1) {
        const double bound = constants.c0 * std::sqrt(static_cast<double>(n));
        for (Index j = 0; j < p; ++j) {
            const double norm = problem.X.col(j).norm();
            // Relative slack absorbs rounding for columns scaled exactly to the bound.
            if (norm > bound * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << "column " << j << " norm " << norm << " exceeds c0*sqrt(n) = " << bound;
                out.push_back(os.str());
            }
        }
    }
    return out;
}

TruthDiff diff_against_truth(const Estimate& estimate, const TrueModel& truth)
{
    if (estimate.beta_hat.size() != truth.beta_star.size())
        throw InvalidArgument("estimate and truth lengths differ");
    TruthDiff d;
    const Index p = truth.beta_star.size();
    std::vector<bool> in_s(static_cast<std::size_t>(p), false);
    for (Index j : truth.support) in_s[static_cast<std::size_t>(j)] = true;
    for (Index j = 0; j < p; ++j) {
        const double delta = std::abs(estimate.beta_hat[j] - truth.beta_star[j]);
        if (in_s[static_cast<std::size_t>(j)]) d.delta_S_inf = std::max(d.delta_S_inf, delta);
        else d.delta_Sc_inf = std::max(d.delta_Sc_inf, delta);
    }
    d.support_exact = support_of(estimate.beta_hat) == truth.support;
    d.signs_exact = signs_of(estimate.beta_hat) == signs_of(truth.beta_star);
    return d;
}

IndexSet support_of(const Vector& beta)
{
    IndexSet s;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) s.push_back(j);
    return s;
}

std::vector<int> signs_of(const Vector& beta)
{
    std::vector<int> s(static_cast<std::size_t>(beta.size()));
    for (Index j = 0; j < beta.size(); ++j) s[static_cast<std::size_t>(j)] = sgn(beta[j]);
    return s;
}

IndexSet complement(const IndexSet& set, Index p)
{
    IndexSet out;
    out.reserve(static_cast<std::size_t>(p) - std::min<std::size_t>(set.size(), static_cast<std::size_t>(p)));
    std::size_t k = 0;
    for (Index j = 0; j < p; ++j) {
        while (k < set.size() && set[k] < j) ++k;
        if (k < set.size() && set[k] == j) continue;
        out.push_back(j);
    }
    return out;
}

Matrix select_columns(const Matrix& X, const IndexSet& cols)
{
    Matrix out(X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = X.col(cols[k]);
    return out;
}

Vector select(const Vector& v, const IndexSet& idx)
{
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
    return out;
}

} // namespace adalasso

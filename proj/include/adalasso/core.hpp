#pragma once
// Shared data model: regression problems, estimates, weights and constants.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adalasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
/// Sorted, duplicate-free list of coordinates.
using IndexSet = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a call violates an operation's documented precondition.
class InvalidArgument : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// X_S^T X_S (or another required submatrix) is not invertible.
class SingularSubmatrix : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A quantity needed by a check could neither be computed nor was supplied.
class MissingQuantity : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct TrueModel
{
    Vector beta_star;
    IndexSet support;
    Index s = 0;
    /// min_{j in S} |beta*_j|; zero when the support is empty.
    double beta_min = 0.0;

    static TrueModel from_beta(const Vector& beta_star);
};

struct RegressionProblem
{
    Matrix X;
    Vector y;
    std::optional<double> sigma_eps;
    std::optional<TrueModel> truth;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    /// Noise standard deviation; throws MissingQuantity when unknown.
    double sigma() const;
    /// Realized noise y - X beta*; requires truth.
    Vector noise() const;
};

/// Per-coordinate penalty weights in (0, +inf]; +inf forces the coordinate to zero.
class WeightVector
{
public:
    WeightVector() = default;
    explicit WeightVector(Vector w);

    static WeightVector ones(Index p) { return WeightVector(Vector::Ones(p)); }

    Index size() const { return w_.size(); }
    double operator[](Index j) const { return w_[j]; }
    const Vector& values() const { return w_; }
    bool is_excluded(Index j) const { return w_[j] == kInf; }
    bool all_finite() const;

    /// max over `set`; throws InvalidArgument if any weight in `set` is infinite.
    double max_over(const IndexSet& set) const;
    /// min over the finite weights of `set`; +inf if none are finite.
    double min_over(const IndexSet& set) const;
    /// (sgn(beta_i) * w_i)_{i in S}
    Vector signed_on(const IndexSet& support, const Vector& beta) const;

private:
    Vector w_;
};

struct Constants
{
    double c0 = 1.0;
    double C2 = 4.0 * std::sqrt(5.0 / 3.0) + 0.1;
    double B = std::sqrt(24.0);
    double eta = 0.5;
    double M = 8.0;
    double k0 = 3.0;
    double tol = 1e-8;
    std::int64_t max_iter = 100000;

    /// Throws InvalidArgument unless C2 > 4 sqrt(5/3), 0 < eta < 1, M >= 4/eta,
    /// and every scale is positive.
    void validate() const;
    static Constants checked(const Constants& c)
    {
        c.validate();
        return c;
    }
};

struct Estimate
{
    Vector beta_hat;
    IndexSet support;
    std::vector<int> signs;
    double kkt_residual = 0.0;
    std::int64_t iterations = 0;
    bool converged = false;

    static Estimate from_beta(Vector beta, double kkt_residual, std::int64_t iterations,
                              bool converged);
};

struct ValidationOptions
{
    bool check_column_norms = false;
};

std::vector<std::string> validate_problem(const RegressionProblem& problem, const Constants& constants,
                                          const ValidationOptions& options = {});

struct TruthDiff
{
    double delta_S_inf = 0.0;
    double delta_Sc_inf = 0.0;
    bool support_exact = false;
    bool signs_exact = false;
};

TruthDiff diff_against_truth(const Estimate& estimate, const TrueModel& truth);

// Small helpers shared across modules.
IndexSet support_of(const Vector& beta);
std::vector<int> signs_of(const Vector& beta);
IndexSet complement(const IndexSet& set, Index p);
Matrix select_columns(const Matrix& X, const IndexSet& cols);
Vector select(const Vector& v, const IndexSet& idx);
inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace adalasso

#pragma once
// Synthetic designs, signals and Gaussian graphical samples with known truth.
// Every generator is a pure function of its arguments and seed.

#include <adalasso/core.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace adalasso {

class RandomStream;

enum class CovarianceKind
{
    identity,
    equicorrelation,       ///< 1 on the diagonal, rho elsewhere
    toeplitz,              ///< rho^|i-j|
    tridiagonal_precision, ///< inverse of a tridiagonal Q with unit diagonal and off-diagonal a
    custom,
};

struct CovarianceSpec
{
    CovarianceKind kind = CovarianceKind::identity;
    Index p = 0;
    /// rho for equicorrelation / toeplitz, a for tridiagonal_precision.
    double param = 0.0;
    Matrix custom;

    static CovarianceSpec identity(Index p) { return {CovarianceKind::identity, p, 0.0, {}}; }
    static CovarianceSpec equicorrelation(Index p, double rho) { return {CovarianceKind::equicorrelation, p, rho, {}}; }
    static CovarianceSpec toeplitz(Index p, double rho) { return {CovarianceKind::toeplitz, p, rho, {}}; }
    static CovarianceSpec tridiagonal_precision(Index p, double a)
    {
        return {CovarianceKind::tridiagonal_precision, p, a, {}};
    }
    static CovarianceSpec from_matrix(Matrix sigma)
    {
        const Index p = sigma.rows();
        return {CovarianceKind::custom, p, 0.0, std::move(sigma)};
    }
};

std::string covariance_kind_name(CovarianceKind kind);
CovarianceKind parse_covariance_kind(const std::string& name);

/// Sigma for the spec: symmetric, positive definite and rescaled to a unit
/// diagonal by D^{-1/2} Sigma D^{-1/2}. Throws InvalidArgument otherwise.
Matrix covariance_matrix(const CovarianceSpec& spec);

/// Symmetric square root through an eigendecomposition; throws on a
/// non-positive eigenvalue.
Matrix symmetric_sqrt(const Matrix& sigma);

/// n x p matrix with rows i.i.d. N(0, Sigma), computed as Z Sigma^{1/2}.
Matrix gen_random_design(const CovarianceSpec& spec, Index n, std::uint64_t seed);
/// Same, with a precomputed symmetric root (avoids repeated eigensolves).
Matrix gen_random_design_from_root(const Matrix& root, Index n, std::uint64_t seed);
/// Standard normal n x p matrix drawn from an existing stream.
Matrix standard_normal(Index n, Index p, RandomStream& rng);

enum class Magnitude
{
    fixed,
    uniform,
};
enum class SignPattern
{
    random,
    all_positive,
};
enum class Placement
{
    random,
    first_s,
};

struct SignalSpec
{
    Index s = 1;
    double beta_min = 1.0;
    Magnitude magnitude = Magnitude::fixed;
    /// Upper end for Magnitude::uniform.
    double b_max = 1.0;
    SignPattern sign_pattern = SignPattern::random;
    Placement support_placement = Placement::random;
};

/// beta with exactly s nonzeros, each of magnitude >= beta_min.
Vector gen_signal(const SignalSpec& signal, Index p, RandomStream& rng);

/// y = X beta + eps with eps i.i.d. N(0, sigma_eps^2). s = 0 gives the null model.
RegressionProblem gen_problem(const Matrix& design, const SignalSpec& signal, double sigma_eps, std::uint64_t seed);

using Edge = std::pair<Index, Index>;
using EdgeSet = std::vector<Edge>; ///< sorted pairs with first < second

struct PrecisionModel
{
    Matrix Q;
    EdgeSet edges;

    /// Validates symmetry and positive definiteness and derives the edge set.
    static PrecisionModel from_matrix(Matrix Q);
};

/// Tridiagonal precision with unit diagonal and off-diagonal a.
PrecisionModel tridiagonal_precision(Index p, double a);

struct GgmSamples
{
    Matrix samples;
    /// Q rescaled so that Q^{-1} has a unit diagonal; same edge set.
    PrecisionModel precision;
    Matrix sigma;
};

GgmSamples gen_ggm_samples(const PrecisionModel& precision, Index n, std::uint64_t seed);

/// Sigma = I except that variable s is correlated rho with each of the first
/// s variables. For S = {0..s-1} the irrepresentable norm is s*rho. Throws
/// when the result is not positive definite or the norm is not above 1.
CovarianceSpec irrepresentable_violating_design(Index p, Index s, double rho = 0.55);

} // namespace adalasso

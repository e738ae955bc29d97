#pragma once
// Design diagnostics: restricted eigenvalues, restricted orthogonality,
// irrepresentable / weighted incoherence, noise and Gram events, the exact
// sign-recovery certificate, and theorem hypothesis checks.
//
// Most quantities are defined through the empirical Gram matrix G = X^T X / n;
// the *_gram overloads take G (or a population covariance) directly.

#include <adalasso/core.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adalasso {

/// Subset enumeration would exceed the configured cap; use the sampled variant.
class EnumerationCapExceeded : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDefaultSubsetCap = 1'000'000;

Matrix gram(const Matrix& X);

/// Number of k-subsets of p items, saturating at INT64_MAX.
std::int64_t binomial(std::int64_t p, std::int64_t k);

// ---------------------------------------------------------------------------
// Lambda_min(s): smallest eigenvalue of any principal s x s block of G.

/// Exact, by enumerating every s-subset. Throws EnumerationCapExceeded when
/// C(p, s) > cap.
double lambda_min_subset(const Matrix& X, Index s, std::int64_t cap = kDefaultSubsetCap);
double lambda_min_subset_gram(const Matrix& G, Index s, std::int64_t cap = kDefaultSubsetCap);

struct SampledValue
{
    double value = 0.0;
    bool exhaustive = false;
    std::int64_t subsets_examined = 0;
};

/// Enumerates when C(p, s) <= cap, otherwise evaluates `samples` uniformly
/// drawn subsets (an over-estimate of the true minimum).
SampledValue lambda_min_subset_sampled(const Matrix& G, Index s, std::int64_t cap, std::int64_t samples,
                                       std::uint64_t seed);

/// Random-design variant on a covariance: (16/17) * min over s-subsets.
double lambda_min_subset_random(const Matrix& Sigma, Index s, std::int64_t cap = kDefaultSubsetCap);

// ---------------------------------------------------------------------------
// Restricted eigenvalue constant K(s, m, k0).

enum class ReKind
{
    /// Cone-free case (k0 == 0) with exhaustive enumeration.
    exact,
    /// Largest K witnessed by a feasible cone vector. The true constant is at
    /// least this large.
    witnessed,
};

struct ReOptions
{
    std::int64_t subset_cap = kDefaultSubsetCap;
    /// Subsets drawn when enumeration exceeds the cap.
    std::int64_t sampled_subsets = 200;
    int iterations = 150;
    std::uint64_t seed = 0x5eedULL;
};

struct ReEstimate
{
    double value = 0.0;
    ReKind kind = ReKind::witnessed;
    Index s = 0;
    Index m = 0;
    double k0 = 0.0;
    bool exhaustive = false;
    std::int64_t subsets_examined = 0;
    /// Smallest ||X g||^2 / (n ||g_{J0m}||^2) found; value = 1/sqrt(min_ratio).
    double min_ratio = 0.0;
};

/// Minimizes ||X g||_2^2 / (n ||g_{J0m}||_2^2) over the cone
/// ||g_{J0^c}||_1 <= k0 ||g_{J0}||_1 for every |J0| = s (or a sample of them)
/// by projected gradient descent. Each J0 is started from the bottom
/// eigenvector of G_{J0,J0} plus `budget` random cone points. m = 0 selects
/// the denominator ||g_{J0}||_2.
ReEstimate re_constant(const Matrix& X, Index s, Index m, double k0, int budget, const ReOptions& options = {});
ReEstimate re_constant_gram(const Matrix& G, Index s, Index m, double k0, int budget,
                            const ReOptions& options = {});

/// Ratio ||X g||^2/(n ||g_{J0m}||^2) for an explicit vector, G form.
double re_ratio(const Matrix& G, const Vector& gamma, const IndexSet& J0, Index m);

// ---------------------------------------------------------------------------
// Restricted orthogonality theta_{s,s'}: largest singular value of
// G_{T,T'} over disjoint T, T' with |T| <= s, |T'| <= s'.

SampledValue restricted_orthogonality(const Matrix& X, Index s, Index s_prime,
                                      std::int64_t cap = kDefaultSubsetCap, std::int64_t samples = 2000,
                                      std::uint64_t seed = 0x7e7aULL);
SampledValue restricted_orthogonality_gram(const Matrix& G, Index s, Index s_prime,
                                           std::int64_t cap = kDefaultSubsetCap, std::int64_t samples = 2000,
                                           std::uint64_t seed = 0x7e7aULL);

// ---------------------------------------------------------------------------
// r_n(S) = || G_{S^c S} G_{SS}^{-1} ||_inf (max row l1 norm).

struct RnResult
{
    double value = 0.0;
    /// c0 sqrt(s) / sqrt(Lambda_min(s)) with c0 = max_j ||X_j|| / sqrt(n).
    std::optional<double> lambda_bound;
    /// theta_{1,s} sqrt(s) / Lambda_min(s).
    std::optional<double> theta_bound;
    bool lambda_bound_violated = false;
    bool theta_bound_violated = false;
};

/// Throws SingularSubmatrix if X_S^T X_S is not invertible. The two bounds are
/// filled in when Lambda_min(|S|) is enumerable under `cap`.
RnResult r_n(const Matrix& X, const IndexSet& S, std::int64_t cap = kDefaultSubsetCap);
double r_n_gram(const Matrix& G, const IndexSet& S);

struct IrrepresentableResult
{
    double norm = 0.0;
    bool holds = false;
};

IrrepresentableResult irrepresentable_margin(const Matrix& X, const IndexSet& S, double eta);
IrrepresentableResult irrepresentable_margin_gram(const Matrix& G, const IndexSet& S, double eta);

struct WeightedIncoherence
{
    /// One entry per j in S^c, in increasing order of j.
    std::vector<bool> per_j_ok;
    /// w_j (1 - eta) - |X_j^T X_S (X_S^T X_S)^{-1} b| per j in S^c.
    std::vector<double> per_j_slack;
    bool all_ok = false;
    /// r_n <= (w_min(S^c) / w_max(S)) (1 - eta)
    bool sufficient_ok = false;
};

WeightedIncoherence weighted_incoherence(const Matrix& X, const IndexSet& S, const WeightVector& weights,
                                         const Vector& signs_on_S, double eta);

// ---------------------------------------------------------------------------
// Probability events.

struct EventT
{
    double statistic = 0.0; // ||X^T eps / n||_inf
    double threshold = 0.0; // c0 sigma sqrt(6 log p / n)
    bool holds = false;
};

EventT event_T(const Matrix& X, const Vector& eps, double sigma, double c0);

struct EventX
{
    double max_delta = 0.0;
    double threshold = 0.0; // C2 sqrt(log p / n)
    bool holds = false;
};

EventX event_X(const Matrix& X, const Matrix& Sigma, double C2);

// ---------------------------------------------------------------------------
// Exact sign-recovery certificate for the weighted Lasso with realized noise.

struct CertificateCondition
{
    bool holds = false;
    double margin = 0.0;
};

struct SignCertificate
{
    /// |G_{S^c S} G_{SS}^{-1} [X_S^T e/n - lambda b] - X_{S^c}^T e/n| <= lambda w_{S^c};
    /// margin = min_j (lambda w_j - |.|_j), +inf if S^c carries no finite weight.
    CertificateCondition condition_a;
    /// sgn(beta*_S + G_{SS}^{-1}[X_S^T e/n - lambda b]) = sgn(beta*_S);
    /// margin = min_i sgn(beta*_i) * (that vector)_i, +inf for empty S.
    CertificateCondition condition_b;
    bool predicts_recovery = false;
};

SignCertificate sign_recovery_certificate(const RegressionProblem& problem, double lambda,
                                          const WeightVector& weights);

// ---------------------------------------------------------------------------
// Theorem hypotheses.

enum class TheoremId
{
    general,          ///< weighted-Lasso selection with generic delta bounds
    fixed_design,     ///< fixed design with RE(s, s, 3, X)
    fixed_general_rn, ///< fixed design, r_n bounded through Lambda_min(s)
    fixed_theta_rn,   ///< fixed design, r_n bounded through theta_{1,s}
    random_design,    ///< Gaussian random design with RE on Sigma
};

std::string_view theorem_name(TheoremId id);
std::optional<TheoremId> parse_theorem(std::string_view name);

struct HypothesisCheck
{
    std::string name;
    std::string hypothesis;
    bool holds = false;
    /// Positive when the inequality holds, in the inequality's own units.
    double slack = 0.0;
};

/// Quantities a theorem check may need. Anything left empty is computed from
/// the problem when enumeration allows it; otherwise MissingQuantity is thrown.
struct HypothesisInputs
{
    std::optional<double> K;           ///< K(s, s, 3, X) (or K(s,s,3,Sigma) for the random design)
    std::optional<double> lambda_min;  ///< Lambda_min(s)
    std::optional<double> theta_1s;    ///< theta_{1,s}
    std::optional<double> r_n;         ///< upper bound r~_n on r_n(S)
    std::optional<double> lambda_init;
    std::optional<double> lambda_n;
    std::optional<Index> s_bar;
    std::optional<Matrix> Sigma;       ///< random design only
    std::int64_t subset_cap = kDefaultSubsetCap;
    int re_budget = 8;
};

std::vector<HypothesisCheck> theorem_hypotheses(const RegressionProblem& problem, const Constants& constants,
                                                TheoremId which, const HypothesisInputs& inputs = {});

// ---------------------------------------------------------------------------
// Aggregate report used by the `check` command.

struct ReportOptions
{
    Index s = 1;
    Index m = 1;
    double k0 = 3.0;
    double eta = 0.5;
    double c0 = 1.0;
    double C2 = 4.0 * std::sqrt(5.0 / 3.0) + 0.1;
    int budget = 8;
    std::optional<IndexSet> support;
    std::optional<Matrix> Sigma;
    std::optional<Vector> eps;
    std::optional<double> sigma;
    std::optional<WeightVector> weights;
    std::optional<Vector> signs_on_S;
    ReOptions re_options;
};

struct ConditionReport
{
    double lambda_min_s = 0.0;
    bool lambda_min_exhaustive = false;
    bool lambda_min_random_design = false;
    ReEstimate K_est;
    double theta = 0.0; ///< theta_{1,s}
    bool theta_exhaustive = false;
    std::optional<RnResult> r_n;
    std::optional<double> irrepresentable_margin; ///< 1 - r_n
    std::optional<bool> irrepresentable_holds;
    std::optional<bool> weighted_incoherence_ok;
    std::optional<EventT> event_T;
    std::optional<EventX> event_X;
    std::vector<HypothesisCheck> theorem_checks;
    std::vector<std::string> notes;
};

ConditionReport build_condition_report(const Matrix& X, const ReportOptions& options);

} // namespace adalasso

#include <adalasso/synth.hpp>

#include <adalasso/conditions.hpp>
#include <adalasso/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adalasso {

namespace {

constexpr std::uint64_t kDesignStream = 0xde5197ULL;
constexpr std::uint64_t kSignalStream = 0x5197a1ULL;
constexpr std::uint64_t kNoiseStream = 0x9015eULL;

void require_pd(const Matrix& m, const char* what)
{
    if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + " must be square");
    if (!m.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw InvalidArgument(std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()[0] > 0.0)) {
        std::ostringstream os;
        os << what << " is not positive definite (smallest eigenvalue " << es.eigenvalues()[0] << ")";
        throw InvalidArgument(os.str());
    }
}

Matrix unit_diagonal(const Matrix& sigma)
{
    const Vector d = sigma.diagonal().cwiseSqrt().cwiseInverse();
    Matrix out = d.asDiagonal() * sigma * d.asDiagonal();
    out.diagonal().setOnes();
    return 0.5 * (out + out.transpose());
}

Matrix tridiagonal(Index p, double a)
{
    Matrix Q = Matrix::Identity(p, p);
    for (Index i = 0; i + 1 < p; ++i) Q(i, i + 1) = Q(i + 1, i) = a;
    return Q;
}

} // namespace

std::string covariance_kind_name(CovarianceKind kind)
{
    switch (kind) {
    case CovarianceKind::identity: return "identity";
    case CovarianceKind::equicorrelation: return "equicorrelation";
    case CovarianceKind::toeplitz: return "toeplitz";
    case CovarianceKind::tridiagonal_precision: return "tridiagonal_precision";
    case CovarianceKind::custom: return "custom";
    }
    return "unknown";
}

CovarianceKind parse_covariance_kind(const std::string& name)
{
    for (CovarianceKind k : {CovarianceKind::identity, CovarianceKind::equicorrelation, CovarianceKind::toeplitz,
                             CovarianceKind::tridiagonal_precision, CovarianceKind::custom})
        if (covariance_kind_name(k) == name) return k;
    throw InvalidArgument("unknown covariance kind '" + name + "'");
}

Matrix covariance_matrix(const CovarianceSpec& spec)
{
    const Index p = spec.kind == CovarianceKind::custom ? spec.custom.rows() : spec.p;
    if (p < 1) throw InvalidArgument("covariance dimension must be positive");
    Matrix sigma;
    switch (spec.kind) {
    case CovarianceKind::identity: sigma = Matrix::Identity(p, p); break;
    case CovarianceKind::equicorrelation:
        sigma = Matrix::Constant(p, p, spec.param);
        sigma.diagonal().setOnes();
        break;
    case CovarianceKind::toeplitz:
        sigma.resize(p, p);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j) sigma(i, j) = std::pow(spec.param, static_cast<double>(std::abs(i - j)));
        break;
    case CovarianceKind::tridiagonal_precision: {
        const Matrix Q = tridiagonal(p, spec.param);
        require_pd(Q, "tridiagonal precision");
        sigma = Q.llt().solve(Matrix::Identity(p, p));
        sigma = 0.5 * (sigma + sigma.transpose());
        break;
    }
    case CovarianceKind::custom:
        sigma = spec.custom;
        if (!(sigma.diagonal().array() > 0.0).all()) throw InvalidArgument("covariance diagonal must be positive");
        break;
    }
    require_pd(sigma, "covariance");
    return unit_diagonal(sigma);
}

Matrix symmetric_sqrt(const Matrix& sigma)
{
    require_pd(sigma, "covariance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    const Vector root = es.eigenvalues().cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix standard_normal(Index n, Index p, RandomStream& rng)
{
    Matrix Z(n, p);
    // Row-major draw order so a prefix of rows does not depend on p's layout.
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
    return Z;
}

Matrix gen_random_design_from_root(const Matrix& root, Index n, std::uint64_t seed)
{
    if (n < 1) throw InvalidArgument("n must be positive");
    RandomStream rng(seed, kDesignStream);
    const Matrix Z = standard_normal(n, root.rows(), rng);
    if (root.isIdentity(0.0)) return Z;
    return Z * root;
}

Matrix gen_random_design(const CovarianceSpec& spec, Index n, std::uint64_t seed)
{
    return gen_random_design_from_root(symmetric_sqrt(covariance_matrix(spec)), n, seed);
}

Vector gen_signal(const SignalSpec& signal, Index p, RandomStream& rng)
{
    if (signal.s < 0 || signal.s > p) throw InvalidArgument("signal sparsity s must lie in [0, p]");
    if (signal.s > 0 && !(signal.beta_min > 0.0)) throw InvalidArgument("beta_min must be positive");
    if (signal.magnitude == Magnitude::uniform && !(signal.b_max >= signal.beta_min))
        throw InvalidArgument("b_max must be at least beta_min");

    IndexSet support(static_cast<std::size_t>(p));
    std::iota(support.begin(), support.end(), Index{0});
    if (signal.support_placement == Placement::random)
        for (Index i = 0; i < signal.s; ++i)
            std::swap(support[static_cast<std::size_t>(i)],
                      support[static_cast<std::size_t>(rng.uniform_int(i, p - 1))]);
    support.resize(static_cast<std::size_t>(signal.s));
    std::sort(support.begin(), support.end());

    Vector beta = Vector::Zero(p);
    for (Index j : support) {
        double mag = signal.beta_min;
        if (signal.magnitude == Magnitude::uniform)
            mag = signal.beta_min + (signal.b_max - signal.beta_min) * rng.uniform();
        const bool negative = signal.sign_pattern == SignPattern::random && rng.uniform() < 0.5;
        beta[j] = negative ? -mag : mag;
    }
    return beta;
}

RegressionProblem gen_problem(const Matrix& design, const SignalSpec& signal, double sigma_eps, std::uint64_t seed)
{
    if (!(sigma_eps >= 0.0)) throw InvalidArgument("sigma_eps must be nonnegative");
    if (signal.s > design.cols()) throw InvalidArgument("signal sparsity exceeds p");
    RandomStream signal_rng(seed, kSignalStream);
    RandomStream noise_rng(seed, kNoiseStream);

    RegressionProblem problem;
    problem.X = design;
    const Vector beta = gen_signal(signal, design.cols(), signal_rng);
    problem.y = design * beta;
    if (sigma_eps > 0.0)
        for (Index i = 0; i < problem.y.size(); ++i) problem.y[i] += sigma_eps * noise_rng.normal();
    problem.sigma_eps = sigma_eps;
    problem.truth = TrueModel::from_beta(beta);
    return problem;
}

PrecisionModel PrecisionModel::from_matrix(Matrix Q)
{
    require_pd(Q, "precision matrix");
    PrecisionModel m;
    for (Index i = 0; i < Q.rows(); ++i)
        for (Index j = i + 1; j < Q.cols(); ++j)
            if (Q(i, j) != 0.0) m.edges.emplace_back(i, j);
    m.Q = std::move(Q);
    return m;
}

PrecisionModel tridiagonal_precision(Index p, double a)
{
    if (p < 1) throw InvalidArgument("p must be positive");
    return PrecisionModel::from_matrix(tridiagonal(p, a));
}

GgmSamples gen_ggm_samples(const PrecisionModel& precision, Index n, std::uint64_t seed)
{
    const Index p = precision.Q.rows();
    require_pd(precision.Q, "precision matrix");
    Matrix sigma = precision.Q.llt().solve(Matrix::Identity(p, p));
    sigma = 0.5 * (sigma + sigma.transpose());
    // Sigma' = D^{-1/2} Sigma D^{-1/2}  <=>  Q' = D^{1/2} Q D^{1/2}
    const Vector d = sigma.diagonal().cwiseSqrt();
    Matrix Q = d.asDiagonal() * precision.Q * d.asDiagonal();
    Q = 0.5 * (Q + Q.transpose());
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            if (precision.Q(i, j) == 0.0) Q(i, j) = 0.0;

    GgmSamples out;
    out.sigma = unit_diagonal(sigma);
    out.samples = gen_random_design_from_root(symmetric_sqrt(out.sigma), n, seed);
    out.precision = PrecisionModel::from_matrix(std::move(Q));
    return out;
}

CovarianceSpec irrepresentable_violating_design(Index p, Index s, double rho)
{
    if (s < 1 || p < s + 1) throw InvalidArgument("need 1 <= s and p >= s + 1");
    if (s == 1)
        throw InvalidArgument("s = 1 cannot violate the irrepresentable condition with one loaded variable "
                              "(it would need |rho| > 1)");
    Matrix sigma = Matrix::Identity(p, p);
    for (Index j = 0; j < s; ++j) sigma(s, j) = sigma(j, s) = rho;

    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()[0] > 1e-6)) {
        std::ostringstream os;
        os << "construction is not positive definite for rho = " << rho << ", s = " << s;
        throw InvalidArgument(os.str());
    }
    IndexSet S(static_cast<std::size_t>(s));
    std::iota(S.begin(), S.end(), Index{0});
    const double norm = irrepresentable_margin_gram(sigma, S, 0.0).norm;
    if (!(norm > 1.0)) {
        std::ostringstream os;
        os << "irrepresentable norm " << norm << " does not exceed 1 (rho = " << rho << ", s = " << s << ")";
        throw InvalidArgument(os.str());
    }
    const Index two_s = std::min<Index>(2 * s, p);
    const double lam = lambda_min_subset_gram(sigma, two_s);
    if (!(lam > 1e-6)) throw InvalidArgument("Lambda_min(2s) of the construction is not bounded away from 0");
    return CovarianceSpec::from_matrix(sigma);
}

} // namespace adalasso

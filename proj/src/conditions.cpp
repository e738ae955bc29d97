#include <adalasso/conditions.hpp>

#include <adalasso/kernels.hpp>
#include <adalasso/rng.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace adalasso {

namespace {

// Calls fn(subset) for every k-subset of {0..p-1} in lexicographic order.
void for_each_subset(Index p, Index k, const std::function<void(const IndexSet&)>& fn)
{
    if (k < 0 || k > p) return;
    IndexSet idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Index{0});
    while (true) {
        fn(idx);
        Index i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

IndexSet random_subset(Index p, Index k, RandomStream& rng)
{
    std::vector<Index> pool(static_cast<std::size_t>(p));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, p - 1));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    IndexSet out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

Matrix principal(const Matrix& G, const IndexSet& rows, const IndexSet& cols)
{
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
            out(static_cast<Index>(a), static_cast<Index>(b)) = G(rows[a], cols[b]);
    return out;
}

double smallest_eigenvalue(const Matrix& A)
{
    if (A.rows() == 1) return A(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

double largest_singular_value(const Matrix& A)
{
    if (A.rows() == 1 || A.cols() == 1) return A.norm();
    const Matrix AtA = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Matrix> es(AtA, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()[es.eigenvalues().size() - 1]));
}

void check_square(const Matrix& G, const char* what)
{
    if (G.rows() != G.cols()) throw InvalidArgument(std::string(what) + " must be square");
}

void check_subset(const IndexSet& S, Index p)
{
    for (std::size_t k = 0; k < S.size(); ++k) {
        if (S[k] < 0 || S[k] >= p) throw InvalidArgument("support index out of range");
        if (k && S[k] <= S[k - 1]) throw InvalidArgument("support must be sorted and duplicate-free");
    }
}

// Cholesky of G_SS; throws SingularSubmatrix unless clearly positive definite.
Eigen::LLT<Matrix> factor_support(const Matrix& G, const IndexSet& S)
{
    const Matrix Gss = principal(G, S, S);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Gss, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0];
    const double hi = es.eigenvalues()[es.eigenvalues().size() - 1];
    if (!(lo > 1e-12 * std::max(1.0, hi))) {
        std::ostringstream os;
        os << "X_S^T X_S is singular (smallest eigenvalue of the Gram block " << lo << ")";
        throw SingularSubmatrix(os.str());
    }
    Eigen::LLT<Matrix> llt(Gss);
    if (llt.info() != Eigen::Success) throw SingularSubmatrix("Cholesky of X_S^T X_S failed");
    return llt;
}

// G_{S^c S} G_{SS}^{-1}, one row per j in S^c.
Matrix projection_rows(const Matrix& G, const IndexSet& S, const IndexSet& Sc)
{
    const Eigen::LLT<Matrix> llt = factor_support(G, S);
    const Matrix GsSc = principal(G, S, Sc); // |S| x |S^c|
    return llt.solve(GsSc).transpose();
}

double theta_1_s_gram(const Matrix& G, Index s)
{
    // T = {j}, |T'| <= s: the best T' takes the s largest |G_jk|, k != j.
    const Index p = G.rows();
    double best = 0.0;
    std::vector<double> row;
    for (Index j = 0; j < p; ++j) {
        row.clear();
        for (Index k = 0; k < p; ++k)
            if (k != j) row.push_back(G(j, k) * G(j, k));
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(s), row.size());
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end(),
                          std::greater<>());
        best = std::max(best, std::sqrt(std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), 0.0)));
    }
    return best;
}

} // namespace

Matrix gram(const Matrix& X)
{
    Matrix G = Matrix::Zero(X.cols(), X.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / static_cast<double>(X.rows()));
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose().triangularView<Eigen::StrictlyUpper>();
    return G;
}

std::int64_t binomial(std::int64_t p, std::int64_t k)
{
    if (k < 0 || k > p) return 0;
    k = std::min(k, p - k);
    long double r = 1.0L;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * static_cast<long double>(p - k + i) / static_cast<long double>(i);
        if (r > static_cast<long double>(std::numeric_limits<std::int64_t>::max() / 2))
            return std::numeric_limits<std::int64_t>::max();
    }
    return static_cast<std::int64_t>(std::llround(r));
}

// ---------------------------------------------------------------------------

double lambda_min_subset_gram(const Matrix& G, Index s, std::int64_t cap)
{
    check_square(G, "Gram matrix");
    const Index p = G.rows();
    if (s < 1 || s > p) throw InvalidArgument("Lambda_min(s) needs 1 <= s <= p");
    const std::int64_t count = binomial(p, s);
    if (count > cap) {
        std::ostringstream os;
        os << "C(" << p << "," << s << ") = " << count << " subsets exceeds the enumeration cap " << cap
           << "; use the sampled mode";
        throw EnumerationCapExceeded(os.str());
    }
    if (s == 1) return G.diagonal().minCoeff();
    // Interlacing makes the minimum over |J0| <= s attained at |J0| = s.
    double best = kInf;
    for_each_subset(p, s, [&](const IndexSet& J) { best = std::min(best, smallest_eigenvalue(principal(G, J, J))); });
    return best;
}

double lambda_min_subset(const Matrix& X, Index s, std::int64_t cap)
{
    if (s < 1 || s > X.cols()) throw InvalidArgument("Lambda_min(s) needs 1 <= s <= p");
    if (binomial(X.cols(), s) > cap) return lambda_min_subset_gram(Matrix::Identity(X.cols(), X.cols()), s, cap);
    return lambda_min_subset_gram(gram(X), s, cap);
}

SampledValue lambda_min_subset_sampled(const Matrix& G, Index s, std::int64_t cap, std::int64_t samples,
                                       std::uint64_t seed)
{
    check_square(G, "Gram matrix");
    const Index p = G.rows();
    if (s < 1 || s > p) throw InvalidArgument("Lambda_min(s) needs 1 <= s <= p");
    SampledValue out;
    const std::int64_t count = binomial(p, s);
    if (count <= cap) {
        out.value = lambda_min_subset_gram(G, s, cap);
        out.exhaustive = true;
        out.subsets_examined = count;
        return out;
    }
    RandomStream rng(seed, derive_stream(seed, 0x1a4bdaULL));
    double best = kInf;
    for (std::int64_t k = 0; k < samples; ++k) {
        const IndexSet J = random_subset(p, s, rng);
        best = std::min(best, smallest_eigenvalue(principal(G, J, J)));
    }
    out.value = best;
    out.subsets_examined = samples;
    return out;
}

double lambda_min_subset_random(const Matrix& Sigma, Index s, std::int64_t cap)
{
    return 16.0 / 17.0 * lambda_min_subset_gram(Sigma, s, cap);
}

// ---------------------------------------------------------------------------

double re_ratio(const Matrix& G, const Vector& gamma, const IndexSet& J0, Index m)
{
    const Index p = G.rows();
    const double num = gamma.dot(G * gamma);
    double den = 0.0;
    std::vector<bool> in_j0(static_cast<std::size_t>(p), false);
    for (Index j : J0) {
        in_j0[static_cast<std::size_t>(j)] = true;
        den += gamma[j] * gamma[j];
    }
    if (m > 0) {
        std::vector<double> outside;
        outside.reserve(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j)
            if (!in_j0[static_cast<std::size_t>(j)]) outside.push_back(gamma[j] * gamma[j]);
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(m), outside.size());
        std::partial_sort(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(take), outside.end(),
                          std::greater<>());
        den += std::accumulate(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(take), 0.0);
    }
    if (!(den > 0.0)) return kInf;
    return num / den;
}

namespace {

class ConeSearch
{
public:
    ConeSearch(const Matrix& G, const IndexSet& J0, Index m, double k0)
        : G_(G), J0_(J0), m_(m), k0_(k0), in_j0_(static_cast<std::size_t>(G.rows()), false)
    {
        for (Index j : J0_) in_j0_[static_cast<std::size_t>(j)] = true;
    }

    // Restores ||g_{J0^c}||_1 <= k0 ||g_{J0}||_1 by shrinking the off-support
    // part toward zero, then normalizes. Returns false for unusable points.
    bool project(Vector& g) const
    {
        double on = 0.0, off = 0.0;
        for (Index j = 0; j < g.size(); ++j)
            (in_j0_[static_cast<std::size_t>(j)] ? on : off) += std::abs(g[j]);
        if (!(on > 0.0)) return false;
        const double limit = k0_ * on;
        if (off > limit) {
            const double scale = off > 0.0 ? limit / off : 0.0;
            for (Index j = 0; j < g.size(); ++j)
                if (!in_j0_[static_cast<std::size_t>(j)]) g[j] *= scale;
        }
        const double nrm = g.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
        g /= nrm;
        return true;
    }

    double ratio(const Vector& g) const { return re_ratio(G_, g, J0_, m_); }

    // Denominator mask for the current J0m.
    Vector mask(const Vector& g) const
    {
        const Index p = g.size();
        Vector d = Vector::Zero(p);
        for (Index j : J0_) d[j] = 1.0;
        if (m_ > 0) {
            std::vector<Index> outside;
            for (Index j = 0; j < p; ++j)
                if (!in_j0_[static_cast<std::size_t>(j)]) outside.push_back(j);
            const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(m_), outside.size());
            std::partial_sort(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(take), outside.end(),
                              [&](Index a, Index b) { return std::abs(g[a]) > std::abs(g[b]); });
            for (std::size_t k = 0; k < take; ++k) d[outside[k]] = 1.0;
        }
        return d;
    }

    double descend(Vector g, int iterations) const
    {
        if (!project(g)) return kInf;
        double f = ratio(g);
        double step = 1.0 / std::max(1e-12, G_.diagonal().maxCoeff());
        for (int it = 0; it < iterations && step > 1e-14; ++it) {
            const Vector d = mask(g);
            const double den = g.cwiseProduct(d).squaredNorm();
            const Vector grad = 2.0 * (G_ * g - f * d.cwiseProduct(g)) / den;
            if (!(grad.squaredNorm() > 1e-30)) break;
            bool moved = false;
            while (step > 1e-14) {
                Vector cand = g - step * grad;
                if (project(cand)) {
                    const double fc = ratio(cand);
                    if (fc < f) {
                        g = std::move(cand);
                        f = fc;
                        step *= 1.5;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return f;
    }

    Vector random_start(RandomStream& rng, bool sparse_tail) const
    {
        const Index p = G_.rows();
        Vector g = Vector::Zero(p);
        double on = 0.0;
        for (Index j : J0_) {
            g[j] = rng.normal();
            on += std::abs(g[j]);
        }
        std::vector<Index> off;
        for (Index j = 0; j < p; ++j)
            if (!in_j0_[static_cast<std::size_t>(j)]) off.push_back(j);
        if (off.empty() || k0_ == 0.0) return g;
        Vector tail = Vector::Zero(p);
        double tail_l1 = 0.0;
        const std::size_t count = sparse_tail ? std::min<std::size_t>(off.size(), std::max<std::size_t>(1, J0_.size()))
                                              : off.size();
        for (std::size_t k = 0; k < count; ++k) {
            const Index j = sparse_tail ? off[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(off.size()) - 1))]
                                        : off[k];
            tail[j] = rng.normal();
        }
        tail_l1 = tail.lpNorm<1>();
        if (tail_l1 > 0.0) g += tail * (rng.uniform() * k0_ * on / tail_l1);
        return g;
    }

private:
    const Matrix& G_;
    const IndexSet& J0_;
    Index m_;
    double k0_;
    std::vector<bool> in_j0_;
};

} // namespace

ReEstimate re_constant_gram(const Matrix& G, Index s, Index m, double k0, int budget, const ReOptions& options)
{
    check_square(G, "Gram matrix");
    const Index p = G.rows();
    if (s < 1 || s > p) throw InvalidArgument("RE constant needs 1 <= s <= p");
    if (m < 0 || s + m > p) throw InvalidArgument("RE constant needs s + m <= p");
    if (!(k0 >= 0.0)) throw InvalidArgument("k0 must be nonnegative");
    if (budget < 0) throw InvalidArgument("budget must be nonnegative");

    ReEstimate est;
    est.s = s;
    est.m = m;
    est.k0 = k0;

    double best = kInf;
    std::int64_t subset_index = 0;
    auto visit = [&](const IndexSet& J0) {
        const ConeSearch search(G, J0, m, k0);
        RandomStream rng(options.seed, derive_stream(options.seed, static_cast<std::uint64_t>(subset_index)));
        ++subset_index;

        // Bottom eigenvector of G_{J0,J0}: its ratio is Lambda_min(G_{J0,J0}).
        Eigen::SelfAdjointEigenSolver<Matrix> es(principal(G, J0, J0));
        Vector start = Vector::Zero(p);
        for (std::size_t k = 0; k < J0.size(); ++k) start[J0[k]] = es.eigenvectors()(static_cast<Index>(k), 0);
        best = std::min(best, std::max(0.0, es.eigenvalues()[0]));
        if (k0 > 0.0) {
            best = std::min(best, search.descend(start, options.iterations));
            for (int b = 0; b < budget; ++b)
                best = std::min(best, search.descend(search.random_start(rng, b % 2 == 1), options.iterations));
        }
    };

    const std::int64_t count = binomial(p, s);
    if (count <= options.subset_cap) {
        for_each_subset(p, s, visit);
        est.exhaustive = true;
        est.subsets_examined = count;
    } else {
        RandomStream pick(options.seed, derive_stream(options.seed, 0xa11ce5ULL));
        for (std::int64_t k = 0; k < options.sampled_subsets; ++k) visit(random_subset(p, s, pick));
        est.subsets_examined = options.sampled_subsets;
    }

    est.min_ratio = std::max(0.0, best);
    est.value = est.min_ratio > 0.0 ? 1.0 / std::sqrt(est.min_ratio) : kInf;
    est.kind = (k0 == 0.0 && est.exhaustive) ? ReKind::exact : ReKind::witnessed;
    return est;
}

ReEstimate re_constant(const Matrix& X, Index s, Index m, double k0, int budget, const ReOptions& options)
{
    return re_constant_gram(gram(X), s, m, k0, budget, options);
}

// ---------------------------------------------------------------------------

SampledValue restricted_orthogonality_gram(const Matrix& G, Index s, Index s_prime, std::int64_t cap,
                                           std::int64_t samples, std::uint64_t seed)
{
    check_square(G, "Gram matrix");
    const Index p = G.rows();
    if (s < 1 || s_prime < 1 || s + s_prime > p) throw InvalidArgument("theta needs s, s' >= 1 and s + s' <= p");
    SampledValue out;
    if (s == 1 || s_prime == 1) {
        out.value = theta_1_s_gram(G, std::max(s, s_prime));
        out.exhaustive = true;
        out.subsets_examined = p;
        return out;
    }
    // Enlarging T or T' cannot shrink the operator norm, so full-size pairs suffice.
    const std::int64_t outer = binomial(p, s);
    const std::int64_t inner = binomial(p - s, s_prime);
    const bool enumerate = outer <= cap && inner <= cap && outer * inner <= cap;
    double best = 0.0;
    if (enumerate) {
        for_each_subset(p, s, [&](const IndexSet& T) {
            const IndexSet rest = complement(T, p);
            for_each_subset(static_cast<Index>(rest.size()), s_prime, [&](const IndexSet& local) {
                IndexSet Tp(local.size());
                for (std::size_t k = 0; k < local.size(); ++k) Tp[k] = rest[static_cast<std::size_t>(local[k])];
                best = std::max(best, largest_singular_value(principal(G, T, Tp)));
            });
        });
        out.exhaustive = true;
        out.subsets_examined = outer * inner;
    } else {
        RandomStream rng(seed, derive_stream(seed, 0x7e7aULL));
        for (std::int64_t k = 0; k < samples; ++k) {
            const IndexSet both = random_subset(p, s + s_prime, rng);
            // Split the drawn set at random into T and T'.
            IndexSet shuffled = both;
            for (std::size_t i = shuffled.size(); i > 1; --i)
                std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
            IndexSet T(shuffled.begin(), shuffled.begin() + s);
            IndexSet Tp(shuffled.begin() + s, shuffled.end());
            std::sort(T.begin(), T.end());
            std::sort(Tp.begin(), Tp.end());
            best = std::max(best, largest_singular_value(principal(G, T, Tp)));
        }
        out.subsets_examined = samples;
    }
    out.value = best;
    return out;
}

SampledValue restricted_orthogonality(const Matrix& X, Index s, Index s_prime, std::int64_t cap,
                                      std::int64_t samples, std::uint64_t seed)
{
    return restricted_orthogonality_gram(gram(X), s, s_prime, cap, samples, seed);
}

// ---------------------------------------------------------------------------

double r_n_gram(const Matrix& G, const IndexSet& S)
{
    check_square(G, "Gram matrix");
    check_subset(S, G.rows());
    if (S.empty()) return 0.0;
    const IndexSet Sc = complement(S, G.rows());
    if (Sc.empty()) {
        factor_support(G, S);
        return 0.0;
    }
    const Matrix A = projection_rows(G, S, Sc);
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

RnResult r_n(const Matrix& X, const IndexSet& S, std::int64_t cap)
{
    const Matrix G = gram(X);
    RnResult out;
    out.value = r_n_gram(G, S);
    const Index s = static_cast<Index>(S.size());
    if (s == 0 || binomial(X.cols(), s) > cap) return out;

    const double lam = lambda_min_subset_gram(G, s, cap);
    if (!(lam > 0.0)) return out;
    double c0 = 0.0;
    for (Index j = 0; j < X.cols(); ++j) c0 = std::max(c0, X.col(j).norm());
    c0 /= std::sqrt(static_cast<double>(X.rows()));
    const double root_s = std::sqrt(static_cast<double>(s));
    out.lambda_bound = c0 * root_s / std::sqrt(lam);
    if (s + 1 <= X.cols()) out.theta_bound = theta_1_s_gram(G, s) * root_s / lam;
    // Rounding slack only; both sides are computed in double precision.
    auto exceeds = [](double v, double bound) { return v > bound * (1.0 + 1e-10) + 1e-12; };
    out.lambda_bound_violated = exceeds(out.value, *out.lambda_bound);
    out.theta_bound_violated = out.theta_bound && exceeds(out.value, *out.theta_bound);
    return out;
}

IrrepresentableResult irrepresentable_margin_gram(const Matrix& G, const IndexSet& S, double eta)
{
    IrrepresentableResult out;
    out.norm = r_n_gram(G, S);
    out.holds = out.norm <= 1.0 - eta;
    return out;
}

IrrepresentableResult irrepresentable_margin(const Matrix& X, const IndexSet& S, double eta)
{
    return irrepresentable_margin_gram(gram(X), S, eta);
}

WeightedIncoherence weighted_incoherence(const Matrix& X, const IndexSet& S, const WeightVector& weights,
                                         const Vector& signs_on_S, double eta)
{
    const Index p = X.cols();
    check_subset(S, p);
    if (weights.size() != p) throw InvalidArgument("weights length differs from p");
    if (signs_on_S.size() != static_cast<Index>(S.size())) throw InvalidArgument("signs_on_S length differs from |S|");
    const double w_max_s = weights.max_over(S); // throws on infinite weight inside S

    const Matrix G = gram(X);
    const IndexSet Sc = complement(S, p);
    WeightedIncoherence out;
    out.all_ok = true;
    if (S.empty()) {
        out.per_j_ok.assign(Sc.size(), true);
        out.per_j_slack.assign(Sc.size(), kInf);
        out.sufficient_ok = true;
        return out;
    }
    Vector b(static_cast<Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k)
        b[static_cast<Index>(k)] = signs_on_S[static_cast<Index>(k)] * weights[S[k]];

    const double rn = r_n_gram(G, S);
    if (!Sc.empty()) {
        const Matrix A = projection_rows(G, S, Sc);
        const Vector v = A * b;
        for (std::size_t k = 0; k < Sc.size(); ++k) {
            const double wj = weights[Sc[k]];
            const double slack = std::isfinite(wj) ? wj * (1.0 - eta) - std::abs(v[static_cast<Index>(k)]) : kInf;
            const bool ok = slack >= 0.0;
            out.per_j_ok.push_back(ok);
            out.per_j_slack.push_back(slack);
            out.all_ok = out.all_ok && ok;
        }
    }
    const double w_min_sc = weights.min_over(Sc);
    out.sufficient_ok = rn <= (w_min_sc / w_max_s) * (1.0 - eta);
    return out;
}

// ---------------------------------------------------------------------------

EventT event_T(const Matrix& X, const Vector& eps, double sigma, double c0)
{
    if (eps.size() != X.rows()) throw InvalidArgument("noise length differs from the number of rows");
    const double n = static_cast<double>(X.rows());
    const double p = static_cast<double>(X.cols());
    EventT out;
    const Vector z = X.transpose() * eps / n;
    out.statistic = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
    out.threshold = c0 * sigma * std::sqrt(6.0 * std::log(p) / n);
    out.holds = out.statistic <= out.threshold;
    return out;
}

EventX event_X(const Matrix& X, const Matrix& Sigma, double C2)
{
    if (Sigma.rows() != X.cols() || Sigma.cols() != X.cols())
        throw InvalidArgument("Sigma must be p x p with p the number of design columns");
    const double n = static_cast<double>(X.rows());
    const double p = static_cast<double>(X.cols());
    EventX out;
    out.max_delta = (gram(X) - Sigma).cwiseAbs().maxCoeff();
    out.threshold = C2 * std::sqrt(std::log(p) / n);
    out.holds = out.max_delta < out.threshold;
    return out;
}

// ---------------------------------------------------------------------------

SignCertificate sign_recovery_certificate(const RegressionProblem& problem, double lambda,
                                          const WeightVector& weights)
{
    if (!problem.truth) throw MissingQuantity("sign-recovery certificate needs the true coefficients");
    const TrueModel& truth = *problem.truth;
    const Index p = problem.p();
    if (weights.size() != p) throw InvalidArgument("weights length differs from p");
    const double n = static_cast<double>(problem.n());
    const Vector eps = problem.noise();
    const Vector z = problem.X.transpose() * eps / n; // X^T eps / n
    const IndexSet& S = truth.support;
    const IndexSet Sc = complement(S, p);

    SignCertificate cert;
    Vector u; // G_SS^{-1} [X_S^T eps/n - lambda b]
    Matrix G;
    if (!S.empty()) {
        const Vector b = weights.signed_on(S, truth.beta_star);
        G = gram(problem.X);
        const Eigen::LLT<Matrix> llt = factor_support(G, S);
        u = llt.solve(select(z, S) - lambda * b);
        double margin = kInf;
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double bi = truth.beta_star[S[k]];
            margin = std::min(margin, sgn(bi) * (bi + u[static_cast<Index>(k)]));
        }
        cert.condition_b = {margin > 0.0, margin};
    } else {
        cert.condition_b = {true, kInf};
    }

    double margin_a = kInf;
    for (std::size_t k = 0; k < Sc.size(); ++k) {
        const Index j = Sc[k];
        const double wj = weights[j];
        if (!std::isfinite(wj)) continue;
        double v = -z[j];
        if (!S.empty())
            for (std::size_t a = 0; a < S.size(); ++a) v += G(j, S[a]) * u[static_cast<Index>(a)];
        margin_a = std::min(margin_a, lambda * wj - std::abs(v));
    }
    cert.condition_a = {margin_a >= 0.0, margin_a};
    cert.predicts_recovery = cert.condition_a.holds && cert.condition_b.holds;
    return cert;
}

// ---------------------------------------------------------------------------

std::string_view theorem_name(TheoremId id)
{
    switch (id) {
    case TheoremId::general: return "general";
    case TheoremId::fixed_design: return "fixed_design";
    case TheoremId::fixed_general_rn: return "fixed_general_rn";
    case TheoremId::fixed_theta_rn: return "fixed_theta_rn";
    case TheoremId::random_design: return "random_design";
    }
    return "unknown";
}

std::optional<TheoremId> parse_theorem(std::string_view name)
{
    for (TheoremId id : {TheoremId::general, TheoremId::fixed_design, TheoremId::fixed_general_rn,
                         TheoremId::fixed_theta_rn, TheoremId::random_design})
        if (theorem_name(id) == name) return id;
    return std::nullopt;
}

namespace {

struct Checks
{
    std::vector<HypothesisCheck> list;

    // lhs <= rhs (or < when strict); slack = rhs - lhs.
    void le(std::string name, std::string text, double lhs, double rhs, bool strict = false)
    {
        const double slack = rhs - lhs;
        const bool holds = strict ? lhs < rhs : lhs <= rhs;
        list.push_back({std::move(name), std::move(text), holds, std::isnan(slack) ? -kInf : slack});
    }
};

} // namespace

std::vector<HypothesisCheck> theorem_hypotheses(const RegressionProblem& problem, const Constants& constants,
                                                TheoremId which, const HypothesisInputs& in)
{
    if (!problem.truth) throw MissingQuantity("theorem checks need the true coefficients");
    const TrueModel& truth = *problem.truth;
    const double sigma = problem.sigma();
    const Index p_idx = problem.p();
    const double n = static_cast<double>(problem.n());
    const double p = static_cast<double>(p_idx);
    const Index s_idx = std::max<Index>(truth.s, 1);
    const double s = static_cast<double>(truth.s);
    const double s_eff = static_cast<double>(s_idx);
    const double eta = constants.eta;
    const double M = constants.M;
    const double k0 = constants.k0;
    const bool random = which == TheoremId::random_design;
    const double c0 = random ? std::sqrt(1.5) : constants.c0;

    const Matrix G = gram(problem.X);
    if (random && !in.Sigma) throw MissingQuantity("random-design checks need Sigma");
    const Matrix& design_cov = random ? *in.Sigma : G;

    auto need_lambda_min = [&]() -> double {
        if (in.lambda_min) return *in.lambda_min;
        try {
            return random ? lambda_min_subset_random(design_cov, s_idx, in.subset_cap)
                          : lambda_min_subset_gram(design_cov, s_idx, in.subset_cap);
        } catch (const EnumerationCapExceeded& e) {
            throw MissingQuantity(std::string("Lambda_min(s): ") + e.what());
        }
    };
    auto need_K_base = [&]() -> double {
        if (in.K) return *in.K;
        if (2 * s_idx > p_idx) throw MissingQuantity("K(s,s,3): 2s exceeds p; supply K");
        return re_constant_gram(design_cov, s_idx, s_idx, 3.0, in.re_budget).value;
    };
    auto need_r_n = [&]() -> double {
        if (in.r_n) return *in.r_n;
        if (truth.support.empty()) throw MissingQuantity("r_n needs a nonempty support; supply r_n");
        try {
            return r_n_gram(G, truth.support);
        } catch (const SingularSubmatrix& e) {
            throw MissingQuantity(std::string("r_n: ") + e.what());
        }
    };

    const double lambda_init = in.lambda_init ? *in.lambda_init : constants.B * c0 * sigma * std::sqrt(std::log(p) / n);
    const double log_ps = std::log(std::max(p - s, 2.0));
    const double max_col = [&] {
        double m = 0.0;
        for (Index j = 0; j < p_idx; ++j) m = std::max(m, problem.X.col(j).norm());
        return m;
    }();
    const double beta_min = truth.beta_min;

    Checks c;
    if (which == TheoremId::general) {
        const double K = need_K_base();
        const double lam = need_lambda_min();
        const double rn = need_r_n();
        const double d_s = 4.0 * K * K * lambda_init * std::sqrt(s_eff);
        const double d_sc = 16.0 * K * K * lambda_init * std::sqrt(s_eff);
        const double root = std::sqrt(2.0 * log_ps / n);
        const double lambda_n = in.lambda_n ? *in.lambda_n : 4.0 * c0 * sigma * d_sc / eta * root;
        const double C1 = std::max(2.0 * rn / (1.0 - eta), M / std::sqrt(3.0));
        c.le("column_norms", "max_j ||X_j|| <= c0 sqrt(n)", max_col, c0 * std::sqrt(n) * (1.0 + 1e-12));
        c.le("delta_S_bound", "delta~_S = 4 K^2 lambda_init sqrt(s) < 1", d_s, 1.0, true);
        c.le("delta_Sc_bound", "delta~_Sc = 16 K^2 lambda_init sqrt(s) < 1", d_sc, 1.0, true);
        c.le("M_lower", "M >= 4/eta", 4.0 / eta, M);
        c.le("lambda_n_lower", "lambda_n >= 4 c0 sigma delta~_Sc / eta * sqrt(2 log(p-s)/n)",
             4.0 * c0 * sigma * d_sc / eta * root, lambda_n);
        c.le("lambda_n_upper", "lambda_n <= M c0 sigma delta~_Sc sqrt(2 log(p-s)/n)", lambda_n,
             M * c0 * sigma * d_sc * root);
        c.le("r_n_bound", "r~_n <= (1 - eta) / delta~_Sc", rn, (1.0 - eta) / d_sc);
        const double need = std::max({2.0 * d_s, 2.0 * lambda_n * std::sqrt(s_eff) / lam,
                                      4.0 * c0 * sigma / lam * std::sqrt(6.0 * s_eff * std::log(p) / n), C1 * d_sc});
        c.le("beta_min", "beta_min > max{2 d~_S, 2 lambda_n sqrt(s)/Lmin, 4 c0 sigma/Lmin sqrt(6 s log p/n), C1 d~_Sc}",
             need, beta_min, true);
        return c.list;
    }

    // Fixed-design family and random design share the lambda_n / M structure.
    const double K_base = need_K_base();
    const double K = random ? std::sqrt(2.0) * K_base : K_base;
    const double lam = need_lambda_min();
    const double s_bar = static_cast<double>(in.s_bar ? std::max<Index>(*in.s_bar, 1) : s_idx);
    const double scale = c0 * sigma * lambda_init * std::sqrt(s_bar);
    const double root = std::sqrt(2.0 * log_ps / n);
    const double lambda_n = in.lambda_n ? *in.lambda_n : 64.0 * K * K / eta * scale * root;
    const double lambda_ratio = lambda_n / scale / root;
    const double tragic_base = 16.0 * K * K * lambda_init * std::sqrt(s_eff);

    if (random) {
        c.le("C2_floor", "C2 > 4 sqrt(5/3)", 4.0 * std::sqrt(5.0 / 3.0), constants.C2, true);
        c.le("p_bound", "log p < n / (4 C2^2)", std::log(p), n / (4.0 * constants.C2 * constants.C2), true);
        c.le("re_sigma", "K(s,s,3,Sigma) finite", 0.0, std::isfinite(K_base) ? 1.0 / (K_base * K_base) : -kInf, true);
    } else {
        c.le("column_norms", "max_j ||X_j|| <= c0 sqrt(n)", max_col, c0 * std::sqrt(n) * (1.0 + 1e-12));
        c.le("re_condition", "K(s,s,3,X) finite", 0.0, std::isfinite(K) ? 1.0 / (K * K) : -kInf, true);
    }
    c.le("M_lower", "M >= 4 K / eta", 4.0 * K / eta, M);
    c.le("M_upper", "M <= sqrt(Lmin) / ((1-eta) c0 sigma) sqrt(n / (2 log p))", M,
         std::sqrt(std::max(lam, 0.0)) / ((1.0 - eta) * c0 * sigma) * std::sqrt(n / (2.0 * std::log(p))));
    c.le("lambda_n_lower", "lambda_n/(c0 sigma lambda_init sqrt(s_bar)) sqrt(n/(2 log(p-s))) >= 64 K^2/eta",
         64.0 * K * K / eta, lambda_ratio);
    c.le("lambda_n_upper", "lambda_n/(c0 sigma lambda_init sqrt(s_bar)) sqrt(n/(2 log(p-s))) <= 16 M K",
         lambda_ratio, 16.0 * M * K);

    switch (which) {
    case TheoremId::fixed_design: {
        const double rn = need_r_n();
        c.le("linear_sparsity", "s < n / (96 c0^2 sigma^2 K^2 log p)", s,
             n / (96.0 * c0 * c0 * sigma * sigma * K * K * std::log(p)), true);
        c.le("sparsity", "r~_n sqrt(s) <= (1-eta) / (32 K^2 lambda_init)", rn * std::sqrt(s_eff),
             (1.0 - eta) / (32.0 * K * K * lambda_init));
        c.le("beta_min", "beta_min > max{2 r~_n/(1-eta), M/sqrt(3)} 16 K^2 lambda_init sqrt(s)",
             std::max(2.0 * rn / (1.0 - eta), M / std::sqrt(3.0)) * tragic_base, beta_min, true);
        break;
    }
    case TheoremId::fixed_general_rn: {
        c.le("sparsity", "s <= sqrt(Lmin)(1-eta) / (32 K^2 lambda_init)", s,
             std::sqrt(std::max(lam, 0.0)) * (1.0 - eta) / (32.0 * K * K * lambda_init));
        c.le("beta_min", "beta_min > max{2 sqrt(s)/((1-eta) sqrt(Lmin)), M/sqrt(3)} 16 K^2 lambda_init sqrt(s)",
             std::max(2.0 * std::sqrt(s_eff) / ((1.0 - eta) * std::sqrt(lam)), M / std::sqrt(3.0)) * tragic_base,
             beta_min, true);
        break;
    }
    case TheoremId::fixed_theta_rn: {
        const double theta = in.theta_1s ? *in.theta_1s : theta_1_s_gram(G, s_idx);
        c.le("k0_at_most_3", "k0 <= 3", k0, 3.0);
        c.le("admissible_three", "Lmin > 16 k0 K^2 lambda_init s theta_{1,s}",
             16.0 * k0 * K * K * lambda_init * s_eff * theta, lam, true);
        c.le("linear_sparsity", "s < n / (96 c0^2 sigma^2 K^2 log p)", s,
             n / (96.0 * c0 * c0 * sigma * sigma * K * K * std::log(p)), true);
        c.le("beta_min", "beta_min > max{2 sqrt(s) theta_{1,s}/((1-eta) Lmin), M/sqrt(3)} 16 K^2 lambda_init sqrt(s)",
             std::max(2.0 * std::sqrt(s_eff) * theta / ((1.0 - eta) * lam), M / std::sqrt(3.0)) * tragic_base,
             beta_min, true);
        break;
    }
    case TheoremId::random_design: {
        const double cap = 1.0 / (32.0 * K_base * K_base) *
                           std::min(1.0 / constants.C2,
                                    std::sqrt(std::max(lam, 0.0)) * (1.0 - eta) / (6.0 * std::sqrt(6.0) * sigma)) *
                           std::sqrt(n / std::log(p));
        c.le("sparsity_random", "s <= 1/(32 K_Sigma^2) min{1/C2, sqrt(Lmin)(1-eta)/(6 sqrt(6) sigma)} sqrt(n/log p)",
             s, cap);
        c.le("beta_min", "beta_min > max{2 sqrt(s)/((1-eta) sqrt(Lmin)), M/sqrt(3)} 16 K^2 lambda_init sqrt(s)",
             std::max(2.0 * std::sqrt(s_eff) / ((1.0 - eta) * std::sqrt(lam)), M / std::sqrt(3.0)) * tragic_base,
             beta_min, true);
        break;
    }
    case TheoremId::general: break;
    }
    return c.list;
}

// ---------------------------------------------------------------------------

ConditionReport build_condition_report(const Matrix& X, const ReportOptions& o)
{
    const Index p = X.cols();
    if (o.s < 1 || o.s > p) throw InvalidArgument("s must lie in [1, p]");
    ConditionReport r;
    const Matrix G = gram(X);

    if (o.Sigma) {
        if (o.Sigma->rows() != p || o.Sigma->cols() != p) throw InvalidArgument("Sigma must be p x p");
        const SampledValue v = lambda_min_subset_sampled(*o.Sigma, o.s, o.re_options.subset_cap,
                                                         o.re_options.sampled_subsets, o.re_options.seed);
        r.lambda_min_s = 16.0 / 17.0 * v.value;
        r.lambda_min_exhaustive = v.exhaustive;
        r.lambda_min_random_design = true;
        r.event_X = event_X(X, *o.Sigma, o.C2);
    } else {
        const SampledValue v = lambda_min_subset_sampled(G, o.s, o.re_options.subset_cap,
                                                         o.re_options.sampled_subsets, o.re_options.seed);
        r.lambda_min_s = v.value;
        r.lambda_min_exhaustive = v.exhaustive;
    }
    if (!r.lambda_min_exhaustive) r.notes.emplace_back("Lambda_min(s) from sampled subsets (over-estimate)");

    const Index m = std::min(o.m, p - o.s);
    if (m != o.m) r.notes.emplace_back("m reduced so that s + m <= p");
    r.K_est = re_constant_gram(G, o.s, m, o.k0, o.budget, o.re_options);
    r.notes.emplace_back("K_est is the largest K witnessed by a feasible cone vector; the true K is at least this");

    if (o.s + 1 <= p) {
        const SampledValue th = restricted_orthogonality_gram(G, 1, o.s);
        r.theta = th.value;
        r.theta_exhaustive = th.exhaustive;
    }

    if (o.support) {
        try {
            r.r_n = r_n(X, *o.support, o.re_options.subset_cap);
            r.irrepresentable_margin = 1.0 - r.r_n->value;
            r.irrepresentable_holds = r.r_n->value <= 1.0 - o.eta;
            if (o.weights) {
                const Vector signs = o.signs_on_S ? *o.signs_on_S : Vector::Ones(static_cast<Index>(o.support->size()));
                r.weighted_incoherence_ok = weighted_incoherence(X, *o.support, *o.weights, signs, o.eta).all_ok;
            }
        } catch (const SingularSubmatrix& e) {
            r.notes.emplace_back(std::string("support diagnostics skipped: ") + e.what());
        }
    }
    if (o.eps && o.sigma) r.event_T = event_T(X, *o.eps, *o.sigma, o.c0);
    return r;
}

} // namespace adalasso

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <adalasso/adaptive.hpp>
#include <adalasso/cli.hpp>
#include <adalasso/conditions.hpp>
#include <adalasso/experiment.hpp>
#include <adalasso/ggm.hpp>
#include <adalasso/parallel.hpp>
#include <adalasso/solver.hpp>
#include <adalasso/synth.hpp>

#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

using namespace adalasso;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Plug-in constants used where the literal worst-case constants leave an
// empty selection (see README, "Calibration").
struct PlugIn
{
    double B = 1.5;
    double K = 0.15;
    double eta = 0.5;
    double M = 16.0;
    double position = 0.0;
};
constexpr PlugIn kPlugIn{};

AdaptiveConfig plug_in_config(const PlugIn& c)
{
    AdaptiveConfig a;
    a.constants.B = c.B;
    a.constants.eta = c.eta;
    a.constants.M = c.M;
    a.K = c.K;
    a.lambda_n_position = c.position;
    return a;
}

// KKT residual computed from scratch: stationarity on the support, the
// subgradient bound off it.
double kkt_oracle(const Matrix& X, const Vector& y, double lambda, const Vector& w, const Vector& b)
{
    const double n = static_cast<double>(X.rows());
    const Vector g = X.transpose() * (y - X * b) / n;
    double worst = 0.0;
    for (Index j = 0; j < b.size(); ++j) {
        if (!std::isfinite(w[j])) {
            worst = std::max(worst, std::abs(b[j]));
            continue;
        }
        const double t = lambda * w[j];
        const double r = b[j] != 0.0 ? std::abs(g[j] - (b[j] > 0 ? t : -t)) : std::max(0.0, std::abs(g[j]) - t);
        worst = std::max(worst, r);
    }
    return worst;
}

struct Instance
{
    RegressionProblem problem;
    Vector w;
    double lambda = 0.0;
};

std::vector<Instance> solver_instances()
{
    RandomStream rng(20240601, 1);
    std::vector<Instance> out;
    for (int t = 0; t < 100; ++t) {
        const Index n = rng.uniform_int(20, 100), p = rng.uniform_int(10, 200);
        Instance in;
        in.problem.X = testutil::gaussian(n, p, rng);
        Vector beta = Vector::Zero(p);
        const Index s = std::min<Index>(p, 1 + rng.uniform_int(0, 9));
        for (Index k = 0; k < s; ++k) beta[rng.uniform_int(0, p - 1)] = 2.0 * rng.normal();
        in.problem.y = in.problem.X * beta;
        for (Index i = 0; i < n; ++i) in.problem.y[i] += 0.5 * rng.normal();
        in.w.resize(p);
        for (Index j = 0; j < p; ++j) in.w[j] = 0.5 + 3.5 * rng.uniform();
        in.lambda = 0.01 + 0.99 * rng.uniform();
        out.push_back(std::move(in));
    }
    return out;
}

Outcome criterion_1()
{
    const auto instances = solver_instances();
    const auto t0 = Clock::now();
    int converged = 0, bad = 0;
    double worst = 0.0;
    for (const Instance& in : instances) {
        SolverConfig c;
        c.lambda = in.lambda;
        c.weights = WeightVector(in.w);
        const Estimate e = solve_weighted_lasso(in.problem, c);
        if (!e.converged) continue;
        ++converged;
        const double r = kkt_oracle(in.problem.X, in.problem.y, in.lambda, in.w, e.beta_hat);
        worst = std::max(worst, r);
        bad += r > 1e-8;
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && converged == 100 && secs < 30.0,
            fmt("converged %d/100, worst KKT %.2e, violations %d, %.2fs", converged, worst, bad, secs)};
}

Outcome criterion_2()
{
    double worst = 0.0;
    for (const Instance& in : solver_instances()) {
        SolverConfig c;
        c.lambda = in.lambda;
        c.weights = WeightVector(in.w);
        const Vector direct = solve_weighted_lasso(in.problem, c).beta_hat;
        const StandardReduction red = reduce_to_standard(in.problem, WeightVector(in.w));
        SolverConfig plain;
        plain.lambda = in.lambda;
        const Vector via = red.recover(solve_weighted_lasso(red.problem, plain).beta_hat);
        worst = std::max(worst, (direct - via).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-6, fmt("max |direct - reduced| = %.2e over 100 instances", worst)};
}

Outcome criterion_3()
{
    RandomStream rng(20240602, 1);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Index p = rng.uniform_int(2, 40), n = p + rng.uniform_int(0, 60);
        RegressionProblem pr;
        pr.X = testutil::orthonormal_design(n, p, rng);
        pr.y = testutil::gaussian(n, 1, rng).col(0) * (0.5 + 2.0 * rng.uniform());
        Vector w(p);
        for (Index j = 0; j < p; ++j) w[j] = 0.5 + 3.5 * rng.uniform();
        SolverConfig c;
        c.lambda = 0.01 + 0.5 * rng.uniform();
        c.weights = WeightVector(w);
        c.tol = 1e-12;
        const Estimate e = solve_weighted_lasso(pr, c);
        const Vector z = pr.X.transpose() * pr.y / static_cast<double>(n);
        for (Index j = 0; j < p; ++j) worst = std::max(worst, std::abs(e.beta_hat[j] - testutil::soft(z[j], c.lambda * w[j])));
    }
    return {worst <= 1e-10, fmt("max deviation from soft-thresholding %.2e over 50 instances", worst)};
}

Outcome criterion_4()
{
    RandomStream rng(20240603, 1);
    const double tol = 1e-8, band = 10.0 * tol;
    int decided = 0, agree = 0, drawn = 0, predicted_success = 0;
    while (decided < 500 && drawn < 20000) {
        ++drawn;
        const Index p = rng.uniform_int(10, 60), n = rng.uniform_int(p / 2 + 10, 150);
        const Index s = rng.uniform_int(1, std::min<Index>(6, p / 3));
        RegressionProblem pr;
        pr.X = gen_random_design(CovarianceSpec::toeplitz(p, 0.6 * rng.uniform()), n, static_cast<std::uint64_t>(rng.uniform_int(0, INT64_MAX)));
        Vector beta = Vector::Zero(p);
        std::vector<Index> idx(p);
        std::iota(idx.begin(), idx.end(), Index{0});
        for (Index k = 0; k < s; ++k) {
            std::swap(idx[k], idx[rng.uniform_int(k, p - 1)]);
            beta[idx[k]] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + 1.5 * rng.uniform());
        }
        const double sigma = 0.1 + 0.9 * rng.uniform();
        pr.y = pr.X * beta;
        for (Index i = 0; i < n; ++i) pr.y[i] += sigma * rng.normal();
        pr.truth = TrueModel::from_beta(beta);
        Vector w(p);
        for (Index j = 0; j < p; ++j) {
            w[j] = 0.5 + 3.5 * rng.uniform();
            if (beta[j] == 0.0 && rng.uniform() < 0.1) w[j] = kInf;
        }
        const double lambda = 0.01 + 0.3 * rng.uniform();
        SignCertificate cert;
        try {
            cert = sign_recovery_certificate(pr, lambda, WeightVector(w));
        } catch (const SingularSubmatrix&) {
            continue;
        }
        const double a = cert.condition_a.margin, b = cert.condition_b.margin;
        const bool yes = a > band && b > band;
        const bool no = a < -band || b < -band;
        if (!yes && !no) continue;
        SolverConfig c;
        c.lambda = lambda;
        c.weights = WeightVector(w);
        c.tol = tol;
        const Estimate e = solve_weighted_lasso(pr, c);
        const bool signs = diff_against_truth(e, *pr.truth).signs_exact;
        ++decided;
        predicted_success += yes;
        agree += (yes == signs);
    }
    return {decided == 500 && agree == decided,
            fmt("agreement %d/%d decided instances (%d predicted recovery, %d drawn)", agree, decided,
                predicted_success, drawn)};
}

ExperimentConfig recovery_config(Index replicates)
{
    ExperimentConfig c;
    c.scenario.covariance = CovarianceSpec::identity(400);
    c.scenario.n = 200;
    c.scenario.p = 400;
    c.scenario.signal.s = 5;
    c.scenario.signal.beta_min = 1.0;
    c.scenario.sigma_eps = 0.5;
    c.methods = {Method::adaptive_lasso};
    c.replicates = replicates;
    c.master_seed = 20240605;
    c.conditions = false;
    c.adaptive = plug_in_config(kPlugIn);
    c.constants = c.adaptive.constants;
    return c;
}

Outcome criterion_5()
{
    const auto t0 = Clock::now();
    const ExperimentResult r = run_experiment(recovery_config(200), jobs());
    const double secs = seconds_since(t0);
    const double rate = r.per_method.at("adaptive_lasso").exact_support_rate;

    // Same replicates with the literal constants, for the record only.
    ExperimentConfig lit = recovery_config(200);
    lit.adaptive = AdaptiveConfig{};
    lit.adaptive.K = std::sqrt(2.0);
    lit.constants = Constants{};
    const double literal = run_experiment(lit, jobs()).per_method.at("adaptive_lasso").exact_support_rate;
    return {rate >= 0.95 && secs < 300.0,
            fmt("exact support %.3f over 200 replicates (plug-in B=%.2f K=%.2f eta=%.2f M=%.0f), %.1fs; "
                "literal constants give %.3f",
                rate, kPlugIn.B, kPlugIn.K, kPlugIn.eta, kPlugIn.M, secs, literal)};
}

Outcome criterion_6()
{
    ExperimentConfig c;
    c.scenario.covariance = irrepresentable_violating_design(10, 3, 0.55);
    c.scenario.n = 2000;
    c.scenario.p = 10;
    c.scenario.signal.s = 3;
    c.scenario.signal.beta_min = 1.0;
    c.scenario.signal.sign_pattern = SignPattern::all_positive;
    c.scenario.signal.support_placement = Placement::first_s;
    c.scenario.sigma_eps = 0.1;
    c.replicates = 200;
    c.master_seed = 20240606;
    c.adaptive = plug_in_config(kPlugIn);
    c.constants = c.adaptive.constants;
    c.lambda_grid = std::vector<double>{};
    for (int k = 0; k <= 40; ++k) c.lambda_grid->push_back(1e-4 * std::pow(10.0, k / 10.0));
    const Comparison cmp = compare_methods(c, jobs());

    const Matrix Sigma = covariance_matrix(c.scenario.covariance);
    const double irr = irrepresentable_margin_gram(Sigma, {0, 1, 2}, 0.0).norm;
    const double wi = cmp.result.condition_summary.weighted_incoherence_rate.value_or(0.0);
    return {cmp.adaptive_rate > cmp.plain_best_rate && irr > 1.0 && wi >= 0.9,
            fmt("adaptive %.3f vs plain best %.3f (lambda %.3g); irrepresentable norm %.3f; weighted "
                "incoherence passes %.3f",
                cmp.adaptive_rate, cmp.plain_best_rate, cmp.plain_best_lambda, irr, wi)};
}

Outcome criterion_7()
{
    const Index n = 200, p = 50, draws = 10000;
    const double C2 = 4.0 * std::sqrt(5.0 / 3.0) + 0.1;
    const double c0 = std::sqrt(1.5);
    std::vector<char> fail_T(draws), fail_X(draws);
    const Matrix I = Matrix::Identity(p, p);
    parallel_for(static_cast<std::size_t>(draws), jobs(), [&](std::size_t d) {
        const std::uint64_t seed = derive_stream(20240607, d);
        const Matrix X = gen_random_design(CovarianceSpec::identity(p), n, seed);
        RandomStream noise(seed, 0xe7e27ULL);
        Vector eps(n);
        for (Index i = 0; i < n; ++i) eps[i] = noise.normal();
        fail_T[d] = !event_T(X, eps, 1.0, c0).holds;
        fail_X[d] = !event_X(X, I, C2).holds;
    });
    const double fT = std::accumulate(fail_T.begin(), fail_T.end(), 0.0) / draws;
    const double fX = std::accumulate(fail_X.begin(), fail_X.end(), 0.0) / draws;
    return {fT <= 2e-3 && fX <= 2e-3, fmt("event T failure %.4f, event X failure %.4f over %d draws", fT, fX,
                                          static_cast<int>(draws))};
}

Outcome criterion_8()
{
    RandomStream rng(20240608, 1);
    int violations = 0, evaluated = 0;
    double tightest = kInf;
    for (int t = 0; t < 100; ++t) {
        const Index p = rng.uniform_int(6, 12), n = rng.uniform_int(p + 5, 80);
        // The violating construction stays positive definite only while 0.55 sqrt(s) < 1.
        const Index s = rng.uniform_int(2, std::min<Index>(t % 4 == 3 ? 3 : 4, p - 2));
        CovarianceSpec spec = CovarianceSpec::identity(p);
        switch (t % 4) {
        case 1: spec = CovarianceSpec::equicorrelation(p, 0.1 + 0.7 * rng.uniform()); break;
        case 2: spec = CovarianceSpec::toeplitz(p, 0.1 + 0.8 * rng.uniform()); break;
        case 3: spec = irrepresentable_violating_design(p, s, 0.55); break;
        default: break;
        }
        const Matrix X = gen_random_design(spec, n, static_cast<std::uint64_t>(rng.uniform_int(0, INT64_MAX)));
        IndexSet S(s);
        if (t % 4 == 3) {
            std::iota(S.begin(), S.end(), Index{0});
        } else {
            std::vector<Index> idx(p);
            std::iota(idx.begin(), idx.end(), Index{0});
            for (Index k = 0; k < s; ++k) std::swap(idx[k], idx[rng.uniform_int(k, p - 1)]);
            S.assign(idx.begin(), idx.begin() + s);
            std::sort(S.begin(), S.end());
        }
        const RnResult r = r_n(X, S);
        if (!r.lambda_bound || !r.theta_bound) continue;
        ++evaluated;
        violations += r.value > *r.lambda_bound || r.value > *r.theta_bound;
        tightest = std::min({tightest, *r.lambda_bound - r.value, *r.theta_bound - r.value});
    }
    return {violations == 0 && evaluated == 100,
            fmt("%d violations over %d designs; smallest slack %.3g", violations, evaluated, tightest)};
}

Outcome criterion_9()
{
    // Initial Lasso at the literal lambda_init, compared against the bound with
    // the conditions module's K(s, s, 3, X).
    const ExperimentConfig base = recovery_config(100);
    const Index n = base.scenario.n, s = base.scenario.signal.s;
    const Constants literal;
    std::vector<int> eventT(100), violated(100);
    std::vector<double> ratio(100);
    ReOptions re;
    re.sampled_subsets = 10;
    re.iterations = 60;
    parallel_for(100, jobs(), [&](std::size_t r) {
        const std::uint64_t seed = derive_stream(base.master_seed, r + 1);
        const Matrix X = gen_random_design(base.scenario.covariance, n, seed);
        const RegressionProblem pr = gen_problem(X, base.scenario.signal, base.scenario.sigma_eps, seed);
        const EventT ev = event_T(X, pr.noise(), base.scenario.sigma_eps, literal.c0);
        eventT[r] = ev.holds;
        if (!ev.holds) return;
        AdaptiveConfig a;
        a.constants = literal;
        const InitialFit init = fit_initial(pr, a);
        const double K = re_constant(X, s, s, 3.0, 1, re).value;
        const double err = (init.beta_init - pr.truth->beta_star).lpNorm<1>();
        const double bound = 4.0 * K * K * init.lambda_init * static_cast<double>(s);
        ratio[r] = err / bound;
        violated[r] = err > bound;
    });
    const int held = std::accumulate(eventT.begin(), eventT.end(), 0);
    const int bad = std::accumulate(violated.begin(), violated.end(), 0);
    const double worst = *std::max_element(ratio.begin(), ratio.end());
    return {bad == 0 && held > 0, fmt("%d violations among %d replicates with event T; largest error/bound %.3f",
                                      bad, held, worst)};
}

Outcome criterion_10()
{
    const auto t0 = Clock::now();
    const Index p = 50, n = 1500, reps = 50;
    const PrecisionModel truth = tridiagonal_precision(p, 0.3);
    std::vector<int> exact(reps);
    std::vector<double> disagreement(reps);
    parallel_for(static_cast<std::size_t>(reps), jobs(), [&](std::size_t r) {
        const GgmSamples g = gen_ggm_samples(truth, n, derive_stream(20240610, r + 1));
        GgmConfig c;
        c.adaptive = plug_in_config(kPlugIn);
        c.precision = g.precision.Q;
        const GraphEstimate e = select_graph(g.samples, c);
        exact[r] = e.and_edges == g.precision.edges;
        disagreement[r] = e.or_edges.empty() ? 0.0
                                             : static_cast<double>(e.disagreement.size()) /
                                                   static_cast<double>(e.or_edges.size());
    });
    const double rate = std::accumulate(exact.begin(), exact.end(), 0.0) / reps;
    const double dis = std::accumulate(disagreement.begin(), disagreement.end(), 0.0) / reps;
    const double secs = seconds_since(t0);
    return {rate >= 0.9 && dis <= 0.05 && secs < 600.0,
            fmt("AND exact recovery %.3f, mean disagreement %.4f of OR edges, %.1fs", rate, dis, secs)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_11()
{
    const auto dir = testutil::scratch("acceptance_determinism");
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"scenario":{"n":120,"p":60,"sigma_eps":0.5,
                   "covariance":{"kind":"toeplitz","rho":0.4},
                   "signal":{"s":4,"beta_min":1.0,"magnitude":"uniform","b_max":2.0}},
                   "methods":["plain_lasso","adaptive_lasso","thresholded_lasso_oracle"],
                   "replicates":24,"master_seed":99,
                   "constants":{"B":1.5,"eta":0.5,"M":16},
                   "adaptive":{"K":0.15},
                   "lambda_grid":[0.02,0.05,0.1,0.2]})";
    }
    std::set<std::string> reports;
    std::string failures;
    for (const char* j : {"1", "2", "3", "8"}) {
        std::ostringstream out, err;
        const auto target = dir / (std::string("jobs") + j);
        const int code = cli::run({"simulate", "--config", (dir / "config.json").string(), "--out", target.string(),
                                   "--jobs", j, "--compare"},
                                  out, err);
        if (code != 0) failures += std::string(" jobs=") + j + ": " + err.str();
        reports.insert(slurp(target / "report.json") + "\n--\n" + slurp(target / "comparison.json"));
    }
    return {failures.empty() && reports.size() == 1,
            fmt("%zu distinct report sets across --jobs 1,2,3,8%s", reports.size(), failures.c_str())};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"solver KKT optimality", criterion_1},
        {"reduction equivalence", criterion_2},
        {"orthonormal closed form", criterion_3},
        {"certificate agrees with solver", criterion_4},
        {"adaptive recovery, n=200 p=400 s=5", criterion_5},
        {"adaptive beats plain on violating design", criterion_6},
        {"event T and event X frequencies", criterion_7},
        {"r_n bounds", criterion_8},
        {"initial l1 error bound", criterion_9},
        {"GGM edge recovery", criterion_10},
        {"determinism across --jobs", criterion_11},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

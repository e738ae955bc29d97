#include <adalasso/experiment.hpp>

#include <adalasso/parallel.hpp>
#include <adalasso/rng.hpp>
#include <adalasso/solver.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace adalasso {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kFixedDesignLabel = 0xf17edULL;

// ---------------------------------------------------------------------------
// JSON helpers

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

// Non-finite doubles have no JSON literal; they are written as null and read back as NaN.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double read_num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

template <class T>
json opt(const std::optional<T>& v)
{
    if (!v) return nullptr;
    if constexpr (std::is_same_v<T, double>) return num(*v);
    else return json(*v);
}

json matrix_json(const Matrix& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows)
{
    if (!rows.is_array() || rows.empty()) throw ConfigError("matrix must be a non-empty array of rows");
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows[0].size());
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != c) throw ConfigError("ragged matrix");
        for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

// ---------------------------------------------------------------------------

struct GridOutcome
{
    bool failed = false;
    std::string error;
    bool support_exact = false;
    bool sign_exact = false;
    double l1 = 0.0;
    double l2 = 0.0;
    Index support_size = 0;
    std::optional<bool> cert_predicts, cert_a, cert_b, cert_decided;
};

struct ReplicateOutput
{
    std::vector<ReplicateRow> rows;
    /// Plain Lasso outcomes per grid point.
    std::vector<GridOutcome> grid;
    bool conditions_ok = false;
    double r_n = 0.0;
    bool irrepresentable = false;
    bool event_T = false;
    std::optional<bool> weighted_incoherence;
};

void score(const Vector& beta_hat, const TrueModel& truth, bool& support_exact, bool& sign_exact, double& l1,
           double& l2, Index& support_size)
{
    const Vector d = beta_hat - truth.beta_star;
    l1 = d.lpNorm<1>();
    l2 = d.norm();
    const IndexSet supp = support_of(beta_hat);
    support_size = static_cast<Index>(supp.size());
    support_exact = supp == truth.support;
    sign_exact = support_exact && signs_of(beta_hat) == signs_of(truth.beta_star);
}

void certify(const RegressionProblem& problem, double lambda, const WeightVector& w, double tol,
             std::optional<bool>& predicts, std::optional<bool>& a, std::optional<bool>& b,
             std::optional<bool>& decided)
{
    const TrueModel& truth = *problem.truth;
    for (Index j : truth.support) {
        if (w.is_excluded(j)) {
            // A support coordinate held at zero cannot be recovered.
            predicts = false;
            a = false;
            b = false;
            decided = true;
            return;
        }
    }
    const SignCertificate c = sign_recovery_certificate(problem, lambda, w);
    predicts = c.predicts_recovery;
    a = c.condition_a.holds;
    b = c.condition_b.holds;
    const double band = 10.0 * tol;
    decided = (c.condition_a.margin > band && c.condition_b.margin > band) || c.condition_a.margin < -band ||
              c.condition_b.margin < -band;
}

ReplicateRow failed_row(Index r, Method m, const std::string& what)
{
    ReplicateRow row;
    row.replicate = r;
    row.method = m;
    row.failed = true;
    row.error = what;
    row.l1_error = kNaN;
    row.l2_error = kNaN;
    return row;
}

bool has(const std::vector<Method>& ms, Method m) { return std::find(ms.begin(), ms.end(), m) != ms.end(); }

double formula_lambda_init(const ExperimentConfig& c)
{
    if (c.adaptive.lambda_init) return *c.adaptive.lambda_init;
    return c.constants.B * c.constants.c0 * c.scenario.sigma_eps *
           std::sqrt(std::log(static_cast<double>(c.scenario.p)) / static_cast<double>(c.scenario.n));
}

ReplicateOutput run_replicate(const ExperimentConfig& config, Index r, const Matrix& root,
                              const std::optional<Matrix>& fixed_X)
{
    ReplicateOutput out;
    const Scenario& sc = config.scenario;
    const std::uint64_t seed = derive_stream(config.master_seed, static_cast<std::uint64_t>(r) + 1);
    const Matrix X = fixed_X ? *fixed_X : gen_random_design_from_root(root, sc.n, seed);
    const RegressionProblem problem = gen_problem(X, sc.signal, sc.sigma_eps, seed);
    const TrueModel& truth = *problem.truth;
    const double tol = config.constants.tol;

    if (config.conditions) {
        try {
            const EventT t = event_T(X, problem.noise(), sc.sigma_eps, config.constants.c0);
            out.event_T = t.holds;
            out.r_n = r_n_gram(gram(X), truth.support);
            out.irrepresentable = out.r_n <= 1.0 - config.constants.eta;
            out.conditions_ok = true;
        } catch (const std::exception&) {
            out.conditions_ok = false;
        }
    }

    // Plain Lasso.
    if (has(config.methods, Method::plain_lasso)) {
        const std::vector<double> lambdas =
            config.lambda_grid ? *config.lambda_grid : std::vector<double>{formula_lambda_init(config)};
        const WeightVector unit = WeightVector::ones(sc.p);
        std::optional<Vector> warm;
        for (double lam : lambdas) {
            GridOutcome g;
            try {
                SolverConfig s;
                s.lambda = lam;
                s.tol = tol;
                s.max_iter = config.constants.max_iter;
                const Estimate e = solve_weighted_lasso(problem, s);
                if (!e.converged) throw std::runtime_error("solver did not converge");
                score(e.beta_hat, truth, g.support_exact, g.sign_exact, g.l1, g.l2, g.support_size);
                if (lam > 0.0 && !truth.support.empty()) {
                    try {
                        certify(problem, lam, unit, tol, g.cert_predicts, g.cert_a, g.cert_b, g.cert_decided);
                    } catch (const SingularSubmatrix&) {
                    }
                }
            } catch (const std::exception& e) {
                g = GridOutcome{};
                g.failed = true;
                g.error = e.what();
            }
            out.grid.push_back(std::move(g));
        }
    }

    // Adaptive pipeline and the thresholded initial estimate.
    const bool want_adaptive = has(config.methods, Method::adaptive_lasso);
    const bool want_thresh = has(config.methods, Method::thresholded_lasso_oracle);
    if (want_adaptive || want_thresh) {
        AdaptiveConfig ac = config.adaptive;
        ac.constants = config.constants;
        std::optional<AdaptiveTrace> trace;
        std::string adaptive_error;
        std::optional<InitialFit> init;
        try {
            if (want_adaptive) {
                trace = adaptive_lasso(problem, ac);
            } else {
                init = fit_initial(problem, ac);
            }
        } catch (const std::exception& e) {
            adaptive_error = e.what();
        }

        if (want_adaptive) {
            if (!trace) {
                out.rows.push_back(failed_row(r, Method::adaptive_lasso, adaptive_error));
            } else if (!trace->final.converged) {
                out.rows.push_back(failed_row(r, Method::adaptive_lasso, "second-stage solver did not converge"));
            } else {
                ReplicateRow row;
                row.replicate = r;
                row.method = Method::adaptive_lasso;
                score(trace->final.beta_hat, truth, row.support_exact, row.sign_exact, row.l1_error, row.l2_error,
                      row.support_size);
                row.lambda = trace->lambda_n_used;
                row.lambda_init = trace->lambda_init_used;
                row.s_bar = trace->s_bar;
                row.init_l1_error = (trace->beta_init - truth.beta_star).lpNorm<1>();
                if (out.conditions_ok) row.event_T = out.event_T;
                if (!truth.support.empty()) {
                    try {
                        certify(problem, trace->lambda_n_used, trace->weights, tol, row.certificate_predicts,
                                row.certificate_a, row.certificate_b, row.certificate_decided);
                    } catch (const SingularSubmatrix&) {
                    }
                    if (config.conditions) {
                        bool ok = false;
                        try {
                            const Vector signs = [&] {
                                Vector v(static_cast<Index>(truth.support.size()));
                                for (std::size_t k = 0; k < truth.support.size(); ++k)
                                    v[static_cast<Index>(k)] = sgn(truth.beta_star[truth.support[k]]);
                                return v;
                            }();
                            ok = weighted_incoherence(X, truth.support, trace->weights, signs,
                                                      config.constants.eta).all_ok;
                        } catch (const std::exception&) {
                            ok = false; // infinite weight on S or singular X_S
                        }
                        row.weighted_incoherence = ok;
                        out.weighted_incoherence = ok;
                    }
                }
                if (out.conditions_ok) row.r_n = out.r_n;
                out.rows.push_back(std::move(row));
            }
        }

        if (want_thresh) {
            const Vector* beta_init = trace ? &trace->beta_init : init ? &init->beta_init : nullptr;
            const double lam = trace ? trace->lambda_init_used : init ? init->lambda_init : 0.0;
            if (!beta_init) {
                out.rows.push_back(failed_row(r, Method::thresholded_lasso_oracle, adaptive_error));
            } else {
                Vector b = Vector::Zero(beta_init->size());
                const IndexSet keep = threshold_support(*beta_init, lam);
                for (Index j : keep) b[j] = (*beta_init)[j];
                ReplicateRow row;
                row.replicate = r;
                row.method = Method::thresholded_lasso_oracle;
                score(b, truth, row.support_exact, row.sign_exact, row.l1_error, row.l2_error, row.support_size);
                row.lambda = lam;
                row.lambda_init = lam;
                row.s_bar = static_cast<Index>(keep.size());
                row.init_l1_error = (*beta_init - truth.beta_star).lpNorm<1>();
                if (out.conditions_ok) row.event_T = out.event_T;
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

MethodSummary summarize(const std::vector<const ReplicateRow*>& rows, Index replicates)
{
    MethodSummary s;
    Index support = 0, sign = 0, ok = 0, decided = 0, agree = 0;
    double l1 = 0.0, l2 = 0.0;
    for (const ReplicateRow* r : rows) {
        if (r->failed) {
            ++s.failures;
            continue;
        }
        ++ok;
        support += r->support_exact;
        sign += r->sign_exact;
        l1 += r->l1_error;
        l2 += r->l2_error;
        if (r->certificate_decided && *r->certificate_decided) {
            ++decided;
            agree += (*r->certificate_predicts == r->sign_exact);
        }
    }
    const double reps = static_cast<double>(replicates);
    s.exact_support_rate = static_cast<double>(support) / reps;
    s.exact_sign_rate = static_cast<double>(sign) / reps;
    s.mean_l1_error = ok ? l1 / static_cast<double>(ok) : kNaN;
    s.mean_l2_error = ok ? l2 / static_cast<double>(ok) : kNaN;
    s.certificate_decided = decided;
    if (decided) s.certificate_agreement_rate = static_cast<double>(agree) / static_cast<double>(decided);
    return s;
}

Matrix design_root(const Scenario& sc)
{
    return symmetric_sqrt(covariance_matrix(sc.covariance));
}

} // namespace

// ---------------------------------------------------------------------------

std::string method_name(Method m)
{
    switch (m) {
    case Method::plain_lasso: return "plain_lasso";
    case Method::adaptive_lasso: return "adaptive_lasso";
    case Method::thresholded_lasso_oracle: return "thresholded_lasso_oracle";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    for (Method m : {Method::plain_lasso, Method::adaptive_lasso, Method::thresholded_lasso_oracle})
        if (method_name(m) == name) return m;
    throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const
{
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (methods.empty()) throw ConfigError("at least one method is required");
    const Scenario& sc = scenario;
    if (sc.n < 1 || sc.p < 1) throw ConfigError("n and p must be positive");
    if (sc.signal.s < 0 || sc.signal.s > sc.p) throw ConfigError("signal.s must lie in [0, p]");
    if (!(sc.sigma_eps >= 0.0)) throw ConfigError("sigma_eps must be nonnegative");
    const Index cov_p = sc.covariance.kind == CovarianceKind::custom ? sc.covariance.custom.rows() : sc.covariance.p;
    if (cov_p != sc.p) throw ConfigError("covariance dimension differs from p");
    if (lambda_grid) {
        if (lambda_grid->empty()) throw ConfigError("lambda_grid must not be empty");
        for (double l : *lambda_grid)
            if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda_grid entries must be finite and >= 0");
    }
    if (sweep) {
        if (sweep->parameter != "n" && sweep->parameter != "beta_min")
            throw ConfigError("sweep.parameter must be 'n' or 'beta_min'");
        if (sweep->values.empty()) throw ConfigError("sweep.values must not be empty");
    }
    try {
        constants.validate();
        AdaptiveConfig ac = adaptive;
        ac.constants = constants;
        ac.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;

    if (!j.contains("scenario")) throw ConfigError("missing 'scenario'");
    const json& s = j.at("scenario");
    c.scenario.n = get_or<Index>(s, "n", c.scenario.n);
    c.scenario.p = get_or<Index>(s, "p", c.scenario.p);
    c.scenario.sigma_eps = get_or<double>(s, "sigma_eps", c.scenario.sigma_eps);
    c.scenario.fixed_design = get_or<bool>(s, "fixed_design", false);

    if (s.contains("signal")) {
        const json& g = s.at("signal");
        SignalSpec& sig = c.scenario.signal;
        sig.s = get_or<Index>(g, "s", sig.s);
        sig.beta_min = get_or<double>(g, "beta_min", sig.beta_min);
        const std::string mag = get_or<std::string>(g, "magnitude", "fixed");
        if (mag == "fixed") sig.magnitude = Magnitude::fixed;
        else if (mag == "uniform") sig.magnitude = Magnitude::uniform;
        else throw ConfigError("signal.magnitude must be 'fixed' or 'uniform'");
        sig.b_max = get_or<double>(g, "b_max", sig.beta_min);
        const std::string signs = get_or<std::string>(g, "sign_pattern", "random");
        if (signs == "random") sig.sign_pattern = SignPattern::random;
        else if (signs == "all_positive") sig.sign_pattern = SignPattern::all_positive;
        else throw ConfigError("signal.sign_pattern must be 'random' or 'all_positive'");
        const std::string place = get_or<std::string>(g, "support_placement", "random");
        if (place == "random") sig.support_placement = Placement::random;
        else if (place == "first_s") sig.support_placement = Placement::first_s;
        else throw ConfigError("signal.support_placement must be 'random' or 'first_s'");
    }

    const Index p = c.scenario.p;
    const json cov = s.contains("covariance") ? s.at("covariance") : json::object();
    const std::string kind = get_or<std::string>(cov, "kind", "identity");
    try {
        if (kind == "irrepresentable_violating") {
            c.scenario.covariance = irrepresentable_violating_design(p, get_or<Index>(cov, "s", c.scenario.signal.s),
                                                                     get_or<double>(cov, "rho", 0.55));
        } else if (kind == "custom") {
            if (!cov.contains("matrix")) throw ConfigError("custom covariance needs 'matrix'");
            c.scenario.covariance = CovarianceSpec::from_matrix(matrix_from_json(cov.at("matrix")));
        } else {
            const CovarianceKind k = parse_covariance_kind(kind);
            double param = 0.0;
            if (k == CovarianceKind::equicorrelation || k == CovarianceKind::toeplitz)
                param = get_or<double>(cov, "rho", 0.0);
            if (k == CovarianceKind::tridiagonal_precision) param = get_or<double>(cov, "a", 0.0);
            c.scenario.covariance = CovarianceSpec{k, p, param, {}};
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("covariance: ") + e.what());
    }

    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    c.replicates = get_or<Index>(j, "replicates", c.replicates);
    c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed);
    c.conditions = get_or<bool>(j, "conditions", c.conditions);
    c.detail = get_or<bool>(j, "detail", c.detail);

    if (j.contains("constants")) {
        const json& k = j.at("constants");
        Constants& cs = c.constants;
        cs.c0 = get_or<double>(k, "c0", cs.c0);
        cs.C2 = get_or<double>(k, "C2", cs.C2);
        cs.B = get_or<double>(k, "B", cs.B);
        cs.eta = get_or<double>(k, "eta", cs.eta);
        cs.M = get_or<double>(k, "M", cs.M);
        cs.k0 = get_or<double>(k, "k0", cs.k0);
        cs.tol = get_or<double>(k, "tol", cs.tol);
        cs.max_iter = get_or<std::int64_t>(k, "max_iter", cs.max_iter);
    }
    if (j.contains("adaptive")) {
        const json& a = j.at("adaptive");
        c.adaptive.lambda_init = get_opt<double>(a, "lambda_init");
        c.adaptive.lambda_n = get_opt<double>(a, "lambda_n");
        c.adaptive.lambda_n_position = get_or<double>(a, "position", 0.0);
        c.adaptive.K = get_opt<double>(a, "K");
        c.adaptive.re_budget = get_or<int>(a, "re_budget", c.adaptive.re_budget);
    }
    c.adaptive.constants = c.constants;
    c.lambda_grid = get_opt<std::vector<double>>(j, "lambda_grid");
    if (j.contains("sweep")) {
        const json& w = j.at("sweep");
        c.sweep = SweepSpec{get_or<std::string>(w, "parameter", ""), get_or<std::vector<double>>(w, "values", {})};
    }
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c)
{
    const Scenario& s = c.scenario;
    json cov;
    cov["kind"] = covariance_kind_name(s.covariance.kind);
    if (s.covariance.kind == CovarianceKind::custom) cov["matrix"] = matrix_json(s.covariance.custom);
    if (s.covariance.kind == CovarianceKind::equicorrelation || s.covariance.kind == CovarianceKind::toeplitz)
        cov["rho"] = s.covariance.param;
    if (s.covariance.kind == CovarianceKind::tridiagonal_precision) cov["a"] = s.covariance.param;
    json sig = {
        {"s", s.signal.s},
        {"beta_min", s.signal.beta_min},
        {"magnitude", s.signal.magnitude == Magnitude::fixed ? "fixed" : "uniform"},
        {"b_max", s.signal.b_max},
        {"sign_pattern", s.signal.sign_pattern == SignPattern::random ? "random" : "all_positive"},
        {"support_placement", s.signal.support_placement == Placement::random ? "random" : "first_s"},
    };
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(method_name(m));
    json j = {
        {"scenario",
         {{"n", s.n}, {"p", s.p}, {"sigma_eps", s.sigma_eps}, {"fixed_design", s.fixed_design}, {"covariance", cov},
          {"signal", sig}}},
        {"methods", methods},
        {"replicates", c.replicates},
        {"master_seed", c.master_seed},
        {"conditions", c.conditions},
        {"detail", c.detail},
        {"constants",
         {{"c0", c.constants.c0},
          {"C2", c.constants.C2},
          {"B", c.constants.B},
          {"eta", c.constants.eta},
          {"M", c.constants.M},
          {"k0", c.constants.k0},
          {"tol", c.constants.tol},
          {"max_iter", c.constants.max_iter}}},
        {"adaptive",
         {{"lambda_init", opt(c.adaptive.lambda_init)},
          {"lambda_n", opt(c.adaptive.lambda_n)},
          {"position", c.adaptive.lambda_n_position},
          {"K", opt(c.adaptive.K)},
          {"re_budget", c.adaptive.re_budget}}},
    };
    if (c.lambda_grid) j["lambda_grid"] = *c.lambda_grid;
    if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const Scenario& sc = config.scenario;

    const Matrix root = design_root(sc);
    std::optional<Matrix> fixed_X;
    if (sc.fixed_design)
        fixed_X = gen_random_design_from_root(root, sc.n, derive_stream(config.master_seed, kFixedDesignLabel));

    const auto reps = static_cast<std::size_t>(config.replicates);
    std::vector<ReplicateOutput> outs(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        try {
            outs[r] = run_replicate(config, static_cast<Index>(r), root, fixed_X);
        } catch (const std::exception& e) {
            ReplicateOutput failed;
            for (Method m : config.methods) failed.rows.push_back(failed_row(static_cast<Index>(r), m, e.what()));
            outs[r] = std::move(failed);
        }
    });

    ExperimentResult res;
    res.replicates = config.replicates;
    res.master_seed = config.master_seed;

    // Plain Lasso on a grid: pick the lambda with the most exact supports
    // (first grid point on ties), then report that lambda's rows.
    if (has(config.methods, Method::plain_lasso)) {
        const std::size_t grid_size = config.lambda_grid ? config.lambda_grid->size() : 1;
        std::vector<Index> wins(grid_size, 0);
        for (const ReplicateOutput& o : outs)
            for (std::size_t g = 0; g < o.grid.size() && g < grid_size; ++g) wins[g] += o.grid[g].support_exact;
        const std::size_t best =
            static_cast<std::size_t>(std::max_element(wins.begin(), wins.end()) - wins.begin());
        const double lam = config.lambda_grid ? (*config.lambda_grid)[best] : formula_lambda_init(config);
        for (std::size_t r = 0; r < reps; ++r) {
            ReplicateOutput& o = outs[r];
            if (o.grid.size() <= best) continue; // replicate failed before the plain fit
            const GridOutcome& g = o.grid[best];
            ReplicateRow row = g.failed ? failed_row(static_cast<Index>(r), Method::plain_lasso, g.error) : ReplicateRow{};
            if (!g.failed) {
                row.replicate = static_cast<Index>(r);
                row.method = Method::plain_lasso;
                row.support_exact = g.support_exact;
                row.sign_exact = g.sign_exact;
                row.l1_error = g.l1;
                row.l2_error = g.l2;
                row.support_size = g.support_size;
                row.certificate_predicts = g.cert_predicts;
                row.certificate_a = g.cert_a;
                row.certificate_b = g.cert_b;
                row.certificate_decided = g.cert_decided;
                if (o.conditions_ok) {
                    row.event_T = o.event_T;
                    row.r_n = o.r_n;
                }
            }
            row.lambda = lam;
            o.rows.insert(o.rows.begin(), std::move(row));
        }
        MethodSummary& ms = res.per_method[method_name(Method::plain_lasso)];
        if (config.lambda_grid) {
            ms.chosen_lambda = lam;
            for (Index w : wins) ms.grid_support_rates.push_back(static_cast<double>(w) / static_cast<double>(reps));
        }
    }

    // Rows in (replicate, method order) layout.
    for (ReplicateOutput& o : outs) {
        std::stable_sort(o.rows.begin(), o.rows.end(), [&](const ReplicateRow& a, const ReplicateRow& b) {
            const auto pos = [&](Method m) { return std::find(config.methods.begin(), config.methods.end(), m) - config.methods.begin(); };
            return pos(a.method) < pos(b.method);
        });
        for (ReplicateRow& row : o.rows) res.per_replicate.push_back(std::move(row));
    }

    for (Method m : config.methods) {
        std::vector<const ReplicateRow*> rows;
        for (const ReplicateRow& row : res.per_replicate)
            if (row.method == m) rows.push_back(&row);
        MethodSummary s = summarize(rows, config.replicates);
        MethodSummary& slot = res.per_method[method_name(m)];
        s.chosen_lambda = slot.chosen_lambda;
        s.grid_support_rates = slot.grid_support_rates;
        slot = std::move(s);
    }

    std::vector<bool> replicate_failed(reps, false);
    for (const ReplicateRow& row : res.per_replicate)
        if (row.failed) replicate_failed[static_cast<std::size_t>(row.replicate)] = true;
    res.failed_replicates = std::count(replicate_failed.begin(), replicate_failed.end(), true);

    ConditionSummary& cs = res.condition_summary;
    Index wi_count = 0, wi_ok = 0;
    double rn_sum = 0.0;
    Index irr = 0, evt = 0;
    for (const ReplicateOutput& o : outs) {
        if (o.weighted_incoherence) {
            ++wi_count;
            wi_ok += *o.weighted_incoherence;
        }
        if (!o.conditions_ok) continue;
        ++cs.evaluated;
        rn_sum += o.r_n;
        irr += o.irrepresentable;
        evt += o.event_T;
    }
    if (cs.evaluated) {
        const double e = static_cast<double>(cs.evaluated);
        cs.mean_r_n = rn_sum / e;
        cs.irrepresentable_rate = static_cast<double>(irr) / e;
        cs.event_T_rate = static_cast<double>(evt) / e;
    }
    if (wi_count) cs.weighted_incoherence_rate = static_cast<double>(wi_ok) / static_cast<double>(wi_count);

    if (!config.detail) res.per_replicate.clear();
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, unsigned jobs)
{
    if (!config.sweep) throw ConfigError("config has no sweep");
    std::vector<SweepPoint> points;
    for (double v : config.sweep->values) {
        ExperimentConfig c = config;
        c.sweep.reset();
        if (config.sweep->parameter == "n") {
            if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("sweep values for n must be positive integers");
            c.scenario.n = static_cast<Index>(v);
        } else {
            c.scenario.signal.beta_min = v;
            c.scenario.signal.b_max = std::max(c.scenario.signal.b_max, v);
        }
        points.push_back({v, run_experiment(c, jobs)});
    }
    return points;
}

Comparison compare_methods(const ExperimentConfig& config, unsigned jobs)
{
    if (!config.lambda_grid || config.lambda_grid->empty())
        throw ConfigError("method comparison needs a non-empty lambda_grid");
    ExperimentConfig c = config;
    c.methods = {Method::plain_lasso, Method::adaptive_lasso};
    c.detail = true;
    Comparison cmp;
    cmp.result = run_experiment(c, jobs);
    const MethodSummary& plain = cmp.result.per_method.at("plain_lasso");
    cmp.plain_best_lambda = *plain.chosen_lambda;
    cmp.plain_best_rate = plain.exact_support_rate;
    cmp.adaptive_rate = cmp.result.per_method.at("adaptive_lasso").exact_support_rate;
    Index pa = 0, pb = 0, aa = 0, ab = 0;
    for (const ReplicateRow& r : cmp.result.per_replicate) {
        const bool a = r.certificate_a.value_or(false);
        const bool b = r.certificate_b.value_or(false);
        if (r.method == Method::plain_lasso) {
            pa += a;
            pb += b;
        } else {
            aa += a;
            ab += b;
        }
    }
    const double reps = static_cast<double>(c.replicates);
    cmp.plain_condition_a_rate = static_cast<double>(pa) / reps;
    cmp.plain_condition_b_rate = static_cast<double>(pb) / reps;
    cmp.adaptive_condition_a_rate = static_cast<double>(aa) / reps;
    cmp.adaptive_condition_b_rate = static_cast<double>(ab) / reps;
    if (!config.detail) cmp.result.per_replicate.clear();
    return cmp;
}

// ---------------------------------------------------------------------------

namespace {

json summary_json(const MethodSummary& s)
{
    return {
        {"exact_support_rate", num(s.exact_support_rate)},
        {"exact_sign_rate", num(s.exact_sign_rate)},
        {"mean_l2_error", num(s.mean_l2_error)},
        {"mean_l1_error", num(s.mean_l1_error)},
        {"certificate_agreement_rate", opt(s.certificate_agreement_rate)},
        {"certificate_decided", s.certificate_decided},
        {"failures", s.failures},
        {"chosen_lambda", opt(s.chosen_lambda)},
        {"grid_support_rates", s.grid_support_rates},
    };
}

MethodSummary summary_from(const json& j)
{
    MethodSummary s;
    s.exact_support_rate = read_num(j.at("exact_support_rate"));
    s.exact_sign_rate = read_num(j.at("exact_sign_rate"));
    s.mean_l2_error = read_num(j.at("mean_l2_error"));
    s.mean_l1_error = read_num(j.at("mean_l1_error"));
    if (!j.at("certificate_agreement_rate").is_null())
        s.certificate_agreement_rate = j.at("certificate_agreement_rate").get<double>();
    s.certificate_decided = j.at("certificate_decided").get<Index>();
    s.failures = j.at("failures").get<Index>();
    if (!j.at("chosen_lambda").is_null()) s.chosen_lambda = j.at("chosen_lambda").get<double>();
    s.grid_support_rates = j.at("grid_support_rates").get<std::vector<double>>();
    return s;
}

json row_json(const ReplicateRow& r)
{
    return {
        {"replicate", r.replicate},
        {"method", method_name(r.method)},
        {"failed", r.failed},
        {"error", r.error},
        {"support_exact", r.support_exact},
        {"sign_exact", r.sign_exact},
        {"l1_error", num(r.l1_error)},
        {"l2_error", num(r.l2_error)},
        {"lambda", num(r.lambda)},
        {"support_size", r.support_size},
        {"init_l1_error", opt(r.init_l1_error)},
        {"lambda_init", opt(r.lambda_init)},
        {"s_bar", opt(r.s_bar)},
        {"event_T", opt(r.event_T)},
        {"certificate_predicts", opt(r.certificate_predicts)},
        {"certificate_a", opt(r.certificate_a)},
        {"certificate_b", opt(r.certificate_b)},
        {"certificate_decided", opt(r.certificate_decided)},
        {"r_n", opt(r.r_n)},
        {"weighted_incoherence", opt(r.weighted_incoherence)},
    };
}

template <class T>
std::optional<T> read_opt(const json& j, const char* key)
{
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

ReplicateRow row_from(const json& j)
{
    ReplicateRow r;
    r.replicate = j.at("replicate").get<Index>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.support_exact = j.at("support_exact").get<bool>();
    r.sign_exact = j.at("sign_exact").get<bool>();
    r.l1_error = read_num(j.at("l1_error"));
    r.l2_error = read_num(j.at("l2_error"));
    r.lambda = read_num(j.at("lambda"));
    r.support_size = j.at("support_size").get<Index>();
    r.init_l1_error = read_opt<double>(j, "init_l1_error");
    r.lambda_init = read_opt<double>(j, "lambda_init");
    r.s_bar = read_opt<Index>(j, "s_bar");
    r.event_T = read_opt<bool>(j, "event_T");
    r.certificate_predicts = read_opt<bool>(j, "certificate_predicts");
    r.certificate_a = read_opt<bool>(j, "certificate_a");
    r.certificate_b = read_opt<bool>(j, "certificate_b");
    r.certificate_decided = read_opt<bool>(j, "certificate_decided");
    r.r_n = read_opt<double>(j, "r_n");
    r.weighted_incoherence = read_opt<bool>(j, "weighted_incoherence");
    return r;
}

json result_json(const ExperimentResult& r)
{
    json methods = json::object();
    for (const auto& [name, s] : r.per_method) methods[name] = summary_json(s);
    json rows = json::array();
    for (const ReplicateRow& row : r.per_replicate) rows.push_back(row_json(row));
    const ConditionSummary& c = r.condition_summary;
    return {
        {"replicates", r.replicates},
        {"master_seed", r.master_seed},
        {"failed_replicates", r.failed_replicates},
        {"per_method", methods},
        {"per_replicate", rows},
        {"condition_summary",
         {{"evaluated", c.evaluated},
          {"mean_r_n", num(c.mean_r_n)},
          {"irrepresentable_rate", num(c.irrepresentable_rate)},
          {"event_T_rate", num(c.event_T_rate)},
          {"weighted_incoherence_rate", opt(c.weighted_incoherence_rate)}}},
    };
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <class T>
std::string csv_opt(const std::optional<T>& v)
{
    if (!v) return "";
    if constexpr (std::is_same_v<T, double>) return format_double(*v);
    else return std::to_string(static_cast<long long>(*v));
}

} // namespace

std::string result_to_json(const ExperimentResult& result) { return result_json(result).dump(2) + "\n"; }

ExperimentResult result_from_json(const std::string& text)
{
    const json j = json::parse(text);
    ExperimentResult r;
    r.replicates = j.at("replicates").get<Index>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.failed_replicates = j.at("failed_replicates").get<Index>();
    for (const auto& [name, s] : j.at("per_method").items()) r.per_method[name] = summary_from(s);
    for (const auto& row : j.at("per_replicate")) r.per_replicate.push_back(row_from(row));
    const json& c = j.at("condition_summary");
    r.condition_summary.evaluated = c.at("evaluated").get<Index>();
    r.condition_summary.mean_r_n = read_num(c.at("mean_r_n"));
    r.condition_summary.irrepresentable_rate = read_num(c.at("irrepresentable_rate"));
    r.condition_summary.event_T_rate = read_num(c.at("event_T_rate"));
    r.condition_summary.weighted_incoherence_rate = read_opt<double>(c, "weighted_incoherence_rate");
    return r;
}

std::string comparison_to_json(const Comparison& c)
{
    json j = {
        {"plain_best_lambda", c.plain_best_lambda},
        {"plain_best_rate", c.plain_best_rate},
        {"adaptive_rate", c.adaptive_rate},
        {"plain_condition_a_rate", c.plain_condition_a_rate},
        {"plain_condition_b_rate", c.plain_condition_b_rate},
        {"adaptive_condition_a_rate", c.adaptive_condition_a_rate},
        {"adaptive_condition_b_rate", c.adaptive_condition_b_rate},
        {"result", result_json(c.result)},
    };
    return j.dump(2) + "\n";
}

ReportFormat parse_report_format(const std::string& name)
{
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    if (name == "plotdata") return ReportFormat::plotdata;
    throw ConfigError("format must be json, csv or plotdata");
}

std::string replicates_csv(const ExperimentResult& result)
{
    std::ostringstream os;
    os << "replicate,method,failed,support_exact,sign_exact,l1_error,l2_error,lambda,support_size,"
          "init_l1_error,s_bar,event_T,certificate_predicts,certificate_decided,r_n,weighted_incoherence\n";
    for (const ReplicateRow& r : result.per_replicate) {
        os << r.replicate << ',' << method_name(r.method) << ',' << r.failed << ',' << r.support_exact << ','
           << r.sign_exact << ',' << format_double(r.l1_error) << ',' << format_double(r.l2_error) << ','
           << format_double(r.lambda) << ',' << r.support_size << ',' << csv_opt(r.init_l1_error) << ','
           << csv_opt(r.s_bar) << ',' << csv_opt(r.event_T) << ',' << csv_opt(r.certificate_predicts) << ','
           << csv_opt(r.certificate_decided) << ',' << csv_opt(r.r_n) << ',' << csv_opt(r.weighted_incoherence)
           << '\n';
    }
    return os.str();
}

namespace {

std::filesystem::path write_timing(const std::filesystem::path& dir, double seconds)
{
    const auto path = dir / "timing.json";
    write_text(path, json{{"wall_time", seconds}}.dump(2) + "\n");
    return path;
}

} // namespace

std::vector<std::filesystem::path> emit_report(const ExperimentResult& result, ReportFormat format,
                                               const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    switch (format) {
    case ReportFormat::json:
        written.push_back(out_dir / "report.json");
        write_text(written.back(), result_to_json(result));
        break;
    case ReportFormat::csv:
        written.push_back(out_dir / "replicates.csv");
        write_text(written.back(), replicates_csv(result));
        break;
    case ReportFormat::plotdata: throw ConfigError("plotdata output needs a sweep in the config");
    }
    written.push_back(write_timing(out_dir, result.wall_time));
    return written;
}

std::vector<std::filesystem::path> emit_sweep_report(const std::vector<SweepPoint>& points,
                                                     const std::string& parameter, ReportFormat format,
                                                     const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    double seconds = 0.0;
    for (const SweepPoint& pt : points) seconds += pt.result.wall_time;
    if (format == ReportFormat::plotdata) {
        std::map<std::string, std::ostringstream> files;
        for (const SweepPoint& pt : points) {
            for (const auto& [name, s] : pt.result.per_method) {
                std::ostringstream& os = files[name];
                if (os.tellp() == 0) os << parameter << ",exact_support_rate\n";
                os << format_double(pt.value) << ',' << format_double(s.exact_support_rate) << '\n';
            }
        }
        for (auto& [name, os] : files) {
            written.push_back(out_dir / ("plot_" + name + ".csv"));
            write_text(written.back(), os.str());
        }
    } else if (format == ReportFormat::json) {
        json arr = json::array();
        for (const SweepPoint& pt : points) arr.push_back({{"value", pt.value}, {"result", result_json(pt.result)}});
        written.push_back(out_dir / "report.json");
        write_text(written.back(), json{{"parameter", parameter}, {"points", arr}}.dump(2) + "\n");
    } else {
        std::ostringstream os;
        bool header = true;
        for (const SweepPoint& pt : points) {
            std::istringstream rows(replicates_csv(pt.result));
            std::string line;
            bool first = true;
            while (std::getline(rows, line)) {
                if (first) {
                    first = false;
                    if (!header) continue;
                    os << parameter << ',' << line << '\n';
                    header = false;
                    continue;
                }
                os << format_double(pt.value) << ',' << line << '\n';
            }
        }
        written.push_back(out_dir / "replicates.csv");
        write_text(written.back(), os.str());
    }
    written.push_back(write_timing(out_dir, seconds));
    return written;
}

} // namespace adalasso

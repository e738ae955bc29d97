#include <adalasso/cli.hpp>

#include <adalasso/adaptive.hpp>
#include <adalasso/conditions.hpp>
#include <adalasso/csv.hpp>
#include <adalasso/experiment.hpp>
#include <adalasso/ggm.hpp>
#include <adalasso/solver.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace adalasso::cli {

using nlohmann::json;

namespace {

json num(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

json vec(const Vector& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

json estimate_json(const Estimate& e)
{
    return {{"beta", vec(e.beta_hat)},
            {"support", e.support},
            {"kkt_residual", num(e.kkt_residual)},
            {"iterations", e.iterations},
            {"converged", e.converged}};
}

json trace_json(const AdaptiveTrace& t)
{
    json j = {
        {"beta_init", vec(t.beta_init)},
        {"lambda_init_used", num(t.lambda_init_used)},
        {"weights", vec(t.weights.values())},
        {"s_bar", t.s_bar},
        {"s_bar_set", t.s_bar_set},
        {"lambda_n_used", num(t.lambda_n_used)},
        {"K_used", num(t.K_used)},
        {"K_source", t.K_source},
        {"notes", t.notes},
        {"initial", estimate_json(t.initial)},
        {"final", estimate_json(t.final)},
    };
    if (t.lambda_n_range)
        j["lambda_n_range"] = {{"lo", num(t.lambda_n_range->lo)},
                               {"hi", num(t.lambda_n_range->hi)},
                               {"degenerate", t.lambda_n_range->degenerate}};
    else
        j["lambda_n_range"] = nullptr;
    return j;
}

IndexSet read_index_set(const std::string& path, Index p)
{
    const Vector v = csv::read_vector_file(path);
    IndexSet s;
    for (Index i = 0; i < v.size(); ++i) {
        const double x = v[i];
        if (x != std::floor(x) || x < 0 || x >= static_cast<double>(p))
            throw InvalidArgument("support file entries must be integer column indices in [0, p)");
        s.push_back(static_cast<Index>(x));
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

RegressionProblem load_problem(const std::string& design, const std::string& response, bool header)
{
    RegressionProblem pr;
    pr.X = csv::read_matrix_file(design, {header});
    pr.y = csv::read_vector_file(response, {header});
    if (pr.y.size() != pr.X.rows())
        throw InvalidArgument("response has " + std::to_string(pr.y.size()) + " entries but the design has " +
                              std::to_string(pr.X.rows()) + " rows");
    return pr;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

struct Shared
{
    bool header = false;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Adaptive and weighted Lasso: solver, diagnostics, graphical models and simulations", "adalasso"};
    app.require_subcommand(1);
    Shared shared;
    app.add_flag("--header", shared.header, "Skip one header line in every CSV input");

    // solve
    auto* solve = app.add_subcommand("solve", "Weighted Lasso by coordinate descent");
    std::string design, response, weights_path;
    double lambda = 0.0;
    double tol = 1e-8;
    std::int64_t max_iter = 100000;
    solve->add_option("--design", design, "n x p design CSV")->required();
    solve->add_option("--response", response, "length-n response CSV")->required();
    solve->add_option("--lambda", lambda, "Penalty level")->required();
    solve->add_option("--weights", weights_path, "Length-p weights CSV (inf allowed)");
    solve->add_option("--tol", tol, "KKT tolerance");
    solve->add_option("--max-iter", max_iter, "Sweep limit");

    // adaptive
    auto* adaptive = app.add_subcommand("adaptive", "Two-stage adaptive Lasso");
    double sigma = 0.0;
    std::optional<double> lambda_init, lambda_n, K;
    Constants constants;
    double position = 0.0;
    adaptive->add_option("--design", design)->required();
    adaptive->add_option("--response", response)->required();
    adaptive->add_option("--sigma", sigma, "Noise standard deviation")->required();
    adaptive->add_option("--lambda-init", lambda_init);
    adaptive->add_option("--lambda-n", lambda_n);
    adaptive->add_option("--eta", constants.eta);
    adaptive->add_option("--M", constants.M);
    adaptive->add_option("--B", constants.B);
    adaptive->add_option("--c0", constants.c0);
    adaptive->add_option("--position", position, "Placement of lambda_n in its range, 0..1");
    adaptive->add_option("--K", K, "K used in the lambda_n range (default: witnessed K from the design)");
    adaptive->add_option("--tol", constants.tol);
    adaptive->add_option("--max-iter", constants.max_iter);

    // check
    auto* check = app.add_subcommand("check", "Design diagnostics");
    std::string sigma_matrix, support_path, beta_star_path, theorem = "fixed_design";
    ReportOptions ro;
    std::optional<double> noise_sigma;
    check->add_option("--design", design)->required();
    check->add_option("--sigma-matrix", sigma_matrix, "Population covariance CSV (random-design variants)");
    check->add_option("--support", support_path, "CSV of 0-based support indices");
    check->add_option("--s", ro.s);
    check->add_option("--m", ro.m);
    check->add_option("--k0", ro.k0);
    check->add_option("--eta", ro.eta);
    check->add_option("--c0", ro.c0);
    check->add_option("--C2", ro.C2);
    check->add_option("--budget", ro.budget, "Random cone starts per subset in the RE search");
    check->add_option("--response", response, "With --beta-star and --noise-sigma: evaluate theorem hypotheses");
    check->add_option("--beta-star", beta_star_path, "True coefficients CSV");
    check->add_option("--noise-sigma", noise_sigma, "Noise standard deviation");
    check->add_option("--theorem", theorem, "general|fixed_design|fixed_general_rn|fixed_theta_rn|random_design");
    check->add_option("--B", constants.B);
    check->add_option("--M", constants.M);

    // ggm
    auto* ggm = app.add_subcommand("ggm", "Graph selection by neighborhood regressions");
    std::string samples_path, precision_path, rule = "both", dot_path;
    std::optional<double> ggm_sigma;
    unsigned jobs = 1;
    ggm->add_option("--samples", samples_path)->required();
    auto* sigma_opt = ggm->add_option("--sigma", ggm_sigma, "Common noise level of every node regression");
    ggm->add_option("--precision", precision_path, "Precision matrix CSV; node sigma_i = 1/sqrt(Q_ii)")
        ->excludes(sigma_opt);
    ggm->add_option("--rule", rule)->check(CLI::IsMember({"and", "or", "both"}));
    ggm->add_option("--eta", constants.eta);
    ggm->add_option("--M", constants.M);
    ggm->add_option("--B", constants.B);
    ggm->add_option("--K", K);
    ggm->add_option("--lambda-init", lambda_init);
    ggm->add_option("--lambda-n", lambda_n);
    ggm->add_option("--jobs", jobs);
    ggm->add_option("--dot", dot_path, "Write the selected graph in DOT format");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment from a JSON config");
    std::string config_path, out_dir = ".", format = "json";
    std::optional<std::uint64_t> seed;
    double max_fail_rate = 1.0;
    bool compare = false;
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--out", out_dir);
    simulate->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "plotdata"}));
    simulate->add_option("--jobs", jobs);
    simulate->add_option("--seed", seed, "Overrides master_seed");
    simulate->add_option("--max-fail-rate", max_fail_rate, "Exit 3 when the failed-replicate fraction exceeds this");
    simulate->add_flag("--compare", compare, "Also write comparison.json (plain vs adaptive over lambda_grid)");

    std::vector<std::string> argv_store{"adalasso"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*solve) {
            const RegressionProblem pr = load_problem(design, response, shared.header);
            SolverConfig sc;
            sc.lambda = lambda;
            sc.tol = tol;
            sc.max_iter = max_iter;
            if (!weights_path.empty()) sc.weights = WeightVector(csv::read_vector_file(weights_path, {shared.header}));
            emit(out, estimate_json(solve_weighted_lasso(pr, sc)));
            return ok;
        }
        if (*adaptive) {
            RegressionProblem pr = load_problem(design, response, shared.header);
            pr.sigma_eps = sigma;
            AdaptiveConfig ac;
            ac.constants = constants;
            ac.lambda_init = lambda_init;
            ac.lambda_n = lambda_n;
            ac.lambda_n_position = position;
            ac.K = K;
            emit(out, trace_json(adaptive_lasso(pr, ac)));
            return ok;
        }
        if (*check) {
            const Matrix X = csv::read_matrix_file(design, {shared.header});
            if (!sigma_matrix.empty()) ro.Sigma = csv::read_matrix_file(sigma_matrix, {shared.header});
            if (!support_path.empty()) ro.support = read_index_set(support_path, X.cols());
            ro.sigma = noise_sigma;
            std::optional<RegressionProblem> pr;
            if (!beta_star_path.empty() && !response.empty()) {
                pr = load_problem(design, response, shared.header);
                const Vector beta = csv::read_vector_file(beta_star_path, {shared.header});
                if (beta.size() != X.cols()) throw InvalidArgument("beta-star length differs from p");
                pr->truth = TrueModel::from_beta(beta);
                pr->sigma_eps = noise_sigma;
                ro.eps = pr->noise();
                if (!ro.support) ro.support = pr->truth->support;
            }
            ConditionReport rep = build_condition_report(X, ro);
            if (pr) {
                const auto which = parse_theorem(theorem);
                if (!which) throw InvalidArgument("unknown theorem '" + theorem + "'");
                Constants c = constants;
                c.eta = ro.eta;
                c.c0 = ro.c0;
                c.C2 = ro.C2;
                c.k0 = ro.k0;
                HypothesisInputs in;
                in.Sigma = ro.Sigma;
                in.re_budget = ro.budget;
                try {
                    rep.theorem_checks = theorem_hypotheses(*pr, c, *which, in);
                } catch (const MissingQuantity& e) {
                    rep.notes.emplace_back(std::string("theorem checks skipped: ") + e.what());
                }
            }
            json j = {
                {"lambda_min_s", num(rep.lambda_min_s)},
                {"lambda_min_exhaustive", rep.lambda_min_exhaustive},
                {"lambda_min_random_design", rep.lambda_min_random_design},
                {"K_est",
                 {{"value", num(rep.K_est.value)},
                  {"kind", rep.K_est.kind == ReKind::exact ? "exact" : "witnessed"},
                  {"s", rep.K_est.s},
                  {"m", rep.K_est.m},
                  {"k0", rep.K_est.k0},
                  {"exhaustive", rep.K_est.exhaustive},
                  {"subsets_examined", rep.K_est.subsets_examined},
                  {"min_ratio", num(rep.K_est.min_ratio)}}},
                {"theta_1_s", num(rep.theta)},
                {"theta_exhaustive", rep.theta_exhaustive},
                {"notes", rep.notes},
            };
            if (rep.r_n) {
                j["r_n"] = {{"value", num(rep.r_n->value)},
                            {"lambda_bound", rep.r_n->lambda_bound ? num(*rep.r_n->lambda_bound) : json(nullptr)},
                            {"theta_bound", rep.r_n->theta_bound ? num(*rep.r_n->theta_bound) : json(nullptr)},
                            {"lambda_bound_violated", rep.r_n->lambda_bound_violated},
                            {"theta_bound_violated", rep.r_n->theta_bound_violated}};
                j["irrepresentable"] = {{"norm", num(rep.r_n->value)}, {"holds", *rep.irrepresentable_holds}};
            }
            if (rep.event_T)
                j["event_T"] = {{"statistic", num(rep.event_T->statistic)},
                                {"threshold", num(rep.event_T->threshold)},
                                {"holds", rep.event_T->holds}};
            if (rep.event_X)
                j["event_X"] = {{"max_delta", num(rep.event_X->max_delta)},
                                {"threshold", num(rep.event_X->threshold)},
                                {"holds", rep.event_X->holds}};
            json checks = json::array();
            for (const HypothesisCheck& h : rep.theorem_checks)
                checks.push_back({{"name", h.name}, {"hypothesis", h.hypothesis}, {"holds", h.holds}, {"slack", num(h.slack)}});
            j["theorem_checks"] = checks;
            emit(out, j);
            return ok;
        }
        if (*ggm) {
            const Matrix samples = csv::read_matrix_file(samples_path, {shared.header});
            GgmConfig gc;
            gc.adaptive.constants = constants;
            gc.adaptive.lambda_init = lambda_init;
            gc.adaptive.lambda_n = lambda_n;
            gc.adaptive.K = K;
            gc.sigma = ggm_sigma;
            gc.jobs = jobs;
            if (!precision_path.empty()) gc.precision = csv::read_matrix_file(precision_path, {shared.header});
            if (!gc.sigma && !gc.precision && !(lambda_init && lambda_n)) {
                err << "ggm: supply --sigma or --precision (or both --lambda-init and --lambda-n)\n";
                return config_error;
            }
            const GraphEstimate g = select_graph(samples, gc);
            auto edges = [](const EdgeSet& es) {
                json a = json::array();
                for (const Edge& e : es) a.push_back({e.first, e.second});
                return a;
            };
            json nodes = json::array();
            for (const NodeRegression& r : g.per_node) {
                json n = {{"node", r.node}, {"ok", r.ok}, {"neighborhood", r.neighborhood},
                          {"constant_response", r.constant_response}, {"sigma", num(r.sigma_used)}};
                if (!r.ok) n["error"] = r.error;
                if (r.trace) {
                    n["s_bar"] = r.trace->s_bar;
                    n["lambda_init"] = num(r.trace->lambda_init_used);
                    n["lambda_n"] = num(r.trace->lambda_n_used);
                    n["converged"] = r.trace->final.converged;
                }
                nodes.push_back(std::move(n));
            }
            json j = {{"disagreement", edges(g.disagreement)},
                      {"per_node_summaries", nodes},
                      {"failed_nodes", g.failed_nodes},
                      {"warnings", g.warnings}};
            if (rule != "or") j["and_edges"] = edges(g.and_edges);
            if (rule != "and") j["or_edges"] = edges(g.or_edges);
            emit(out, j);
            if (!dot_path.empty()) {
                std::ofstream dot(dot_path);
                if (!dot) throw std::runtime_error("cannot write " + dot_path);
                dot << to_dot(rule == "or" ? g.or_edges : g.and_edges, samples.cols());
            }
            return ok;
        }
        if (*simulate) {
            ExperimentConfig config;
            try {
                std::ifstream in(config_path);
                if (!in) throw ConfigError("cannot read config " + config_path);
                std::stringstream buf;
                buf << in.rdbuf();
                config = config_from_json(buf.str());
                if (seed) config.master_seed = *seed;
            } catch (const ConfigError& e) {
                err << "config error: " << e.what() << '\n';
                return config_error;
            }
            const ReportFormat fmt = parse_report_format(format);
            std::vector<std::filesystem::path> written;
            double fail_rate = 0.0;
            if (config.sweep) {
                const std::vector<SweepPoint> pts = run_sweep(config, jobs);
                written = emit_sweep_report(pts, config.sweep->parameter, fmt, out_dir);
                for (const SweepPoint& pt : pts)
                    fail_rate = std::max(fail_rate, static_cast<double>(pt.result.failed_replicates) /
                                                        static_cast<double>(pt.result.replicates));
            } else {
                if (fmt == ReportFormat::plotdata) {
                    err << "config error: plotdata output needs a sweep\n";
                    return config_error;
                }
                ExperimentResult res;
                if (compare) {
                    const Comparison cmp = compare_methods(config, jobs);
                    const auto path = std::filesystem::path(out_dir) / "comparison.json";
                    std::filesystem::create_directories(out_dir);
                    std::ofstream(path) << comparison_to_json(cmp);
                    written.push_back(path);
                    res = cmp.result;
                } else {
                    res = run_experiment(config, jobs);
                }
                auto more = emit_report(res, fmt, out_dir);
                written.insert(written.end(), more.begin(), more.end());
                fail_rate = static_cast<double>(res.failed_replicates) / static_cast<double>(res.replicates);
            }
            json j = {{"written", json::array()}, {"failed_replicate_rate", fail_rate}};
            for (const auto& p : written) j["written"].push_back(p.string());
            emit(out, j);
            if (fail_rate > max_fail_rate) {
                err << "failed replicate rate " << fail_rate << " exceeds --max-fail-rate " << max_fail_rate << '\n';
                return too_many_failures;
            }
            return ok;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const InvalidArgument& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const csv::ParseError& e) {
        err << "CSV error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return runtime_failure;
    }
    return ok;
}

} // namespace adalasso::cli

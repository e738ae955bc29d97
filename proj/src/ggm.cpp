#include <adalasso/ggm.hpp>

#include <adalasso/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace adalasso {

Vector beta_from_precision(const Matrix& Q, Index i)
{
    if (Q.rows() != Q.cols()) throw InvalidArgument("precision matrix must be square");
    if (i < 0 || i >= Q.rows()) throw InvalidArgument("node index out of range");
    if (!(Q(i, i) > 0.0)) throw InvalidArgument("precision diagonal must be positive");
    Vector out(Q.rows() - 1);
    for (Index j = 0, k = 0; j < Q.rows(); ++j)
        if (j != i) out[k++] = -Q(i, j) / Q(i, i);
    return out;
}

NodeRegression neighborhood_regression(const Matrix& samples, Index i, const AdaptiveConfig& config,
                                       std::optional<double> sigma)
{
    const Index n = samples.rows();
    const Index p = samples.cols();
    if (n < 2) throw InvalidArgument("neighborhood regression needs at least two samples");
    if (i < 0 || i >= p) throw InvalidArgument("node index out of range");

    NodeRegression out;
    out.node = i;
    out.coefficients = Vector::Zero(p);
    out.sigma_used = sigma.value_or(0.0);

    RegressionProblem problem;
    problem.X.resize(n, p - 1);
    for (Index j = 0, k = 0; j < p; ++j)
        if (j != i) problem.X.col(k++) = samples.col(j);
    problem.y = samples.col(i);
    problem.sigma_eps = sigma;

    if (problem.y.maxCoeff() == problem.y.minCoeff()) {
        out.constant_response = true;
        out.ok = true;
        AdaptiveTrace t;
        t.beta_init = Vector::Zero(p - 1);
        t.weights = compute_weights(t.beta_init);
        t.initial = Estimate::from_beta(Vector::Zero(p - 1), 0.0, 0, true);
        t.final = t.initial;
        t.notes.emplace_back("response column has zero variance");
        out.trace = std::move(t);
        return out;
    }

    AdaptiveTrace t = adaptive_lasso(problem, config);
    for (Index j = 0, k = 0; j < p; ++j) {
        if (j == i) continue;
        const double b = t.final.beta_hat[k++];
        out.coefficients[j] = b;
        if (b != 0.0) out.neighborhood.push_back(j);
    }
    out.ok = true;
    out.trace = std::move(t);
    return out;
}

GraphEstimate select_graph(const Matrix& samples, const GgmConfig& config)
{
    const Index n = samples.rows();
    const Index p = samples.cols();
    if (n < 2 || p < 2) throw InvalidArgument("graph selection needs n >= 2 and p >= 2");
    if (config.precision && (config.precision->rows() != p || config.precision->cols() != p))
        throw InvalidArgument("precision matrix must be p x p");
    config.adaptive.validate();

    GraphEstimate g;
    for (Index j = 0; j < p; ++j) {
        const double mean = samples.col(j).mean();
        const double var = (samples.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
        if (std::abs(var - 1.0) > 0.2) {
            std::ostringstream os;
            os << "sample variance of node " << j << " is " << var << " (expected about 1)";
            g.warnings.push_back(os.str());
        }
    }

    g.per_node.resize(static_cast<std::size_t>(p));
    parallel_for(static_cast<std::size_t>(p), config.jobs, [&](std::size_t idx) {
        const Index i = static_cast<Index>(idx);
        std::optional<double> sigma = config.sigma;
        if (!sigma && config.precision) sigma = 1.0 / std::sqrt((*config.precision)(i, i));
        try {
            g.per_node[idx] = neighborhood_regression(samples, i, config.adaptive, sigma);
        } catch (const std::exception& e) {
            NodeRegression failed;
            failed.node = i;
            failed.error = e.what();
            failed.coefficients = Vector::Zero(p);
            g.per_node[idx] = std::move(failed);
        }
    });

    std::set<Edge> directed;
    for (const NodeRegression& r : g.per_node) {
        if (!r.ok) {
            g.failed_nodes.push_back(r.node);
            g.warnings.push_back("node " + std::to_string(r.node) + " failed: " + r.error);
            continue;
        }
        if (r.constant_response) g.warnings.push_back("node " + std::to_string(r.node) + " has zero variance");
        for (Index j : r.neighborhood) directed.emplace(r.node, j);
    }
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            const bool ij = directed.count({i, j}) > 0;
            const bool ji = directed.count({j, i}) > 0;
            if (ij && ji) g.and_edges.emplace_back(i, j);
            if (ij || ji) g.or_edges.emplace_back(i, j);
            if (ij != ji) g.disagreement.emplace_back(i, j);
        }
    }
    return g;
}

std::string to_dot(const EdgeSet& edges, Index p, const std::string& name)
{
    std::ostringstream os;
    os << "graph " << name << " {\n";
    for (Index i = 0; i < p; ++i) os << "  " << i << ";\n";
    for (const Edge& e : edges) os << "  " << e.first << " -- " << e.second << ";\n";
    os << "}\n";
    return os.str();
}

} // namespace adalasso

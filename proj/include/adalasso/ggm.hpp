#pragma once
// Gaussian graphical model selection by one adaptive Lasso per node.

#include <adalasso/adaptive.hpp>
#include <adalasso/synth.hpp>

#include <optional>
#include <string>
#include <vector>

namespace adalasso {

/// beta^i_j = -Q_ij / Q_ii for j != i, in node order with i skipped.
Vector beta_from_precision(const Matrix& Q, Index i);

struct NodeRegression
{
    Index node = 0;
    bool ok = false;
    std::string error;
    /// Response column has zero variance; the fit is trivially zero.
    bool constant_response = false;
    double sigma_used = 0.0;
    /// Neighbors in original node labels.
    IndexSet neighborhood;
    /// Second-stage coefficients mapped back to node labels (entry i is 0).
    Vector coefficients;
    std::optional<AdaptiveTrace> trace;
};

/// Regresses column i on the remaining columns. sigma, when given, is the
/// noise level of this regression.
NodeRegression neighborhood_regression(const Matrix& samples, Index i, const AdaptiveConfig& config,
                                       std::optional<double> sigma = std::nullopt);

struct GgmConfig
{
    AdaptiveConfig adaptive;
    /// Common noise level for every node.
    std::optional<double> sigma;
    /// Precision matrix used for per-node sigma_i = 1/sqrt(Q_ii).
    std::optional<Matrix> precision;
    unsigned jobs = 1;
};

struct GraphEstimate
{
    EdgeSet and_edges;
    EdgeSet or_edges;
    /// or_edges minus and_edges
    EdgeSet disagreement;
    std::vector<NodeRegression> per_node;
    IndexSet failed_nodes;
    std::vector<std::string> warnings;
};

GraphEstimate select_graph(const Matrix& samples, const GgmConfig& config);

/// DOT rendering of an edge set.
std::string to_dot(const EdgeSet& edges, Index p, const std::string& name = "G");

} // namespace adalasso

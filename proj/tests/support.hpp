#pragma once

// Fixtures and independent reference implementations shared by the suites.

#include "sitc/sitc.hpp"

#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sitc::test {

inline Graph graph_from_text(const std::string& text, WeightPolicy policy = WeightPolicy::reject_out_of_range) {
    std::istringstream in(text);
    return parse_edge_list(in, policy, "<test>");
}

inline NodeId id(const Graph& g, const std::string& name) { return g.dictionary().find(name).value(); }

/// Six users: target v1 with sources v2..v6. Sources v2, v3, v4 are chained,
/// v5 and v6 are linked, and v1 follows v2 back.
inline Graph figure_one() {
    return graph_from_text(
        "v1 v2 0.6\n"
        "v2 v1 0.8\n"
        "v3 v1 0.5\n"
        "v4 v1 0.4\n"
        "v5 v1 0.9\n"
        "v6 v1 0.3\n"
        "v2 v3 0.7\n"
        "v3 v4 0.2\n"
        "v5 v6 1.0\n");
}

/// Random simple digraph on n nodes; each ordered pair appears with probability p.
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId s = 0; s < n; ++s)
        for (NodeId t = 0; t < n; ++t)
            if (s != t && uniform01(rng) < p) edges.push_back({s, t, 1.0 - uniform01(rng)});
    return Graph::from_edges(n, edges);
}

// ---------------------------------------------------------------------------
// Centrality oracles
// ---------------------------------------------------------------------------

using Dense = std::vector<std::vector<double>>;

inline Dense transition_matrix(const Graph& g) {
    auto n = g.num_nodes();
    Dense p(n, std::vector<double>(n, 0.0));
    for (const auto& e : g.edges()) p[e.src][e.dst] = 1.0 / static_cast<double>(g.out_degree(e.src));
    return p;
}

/// Dense row-vector series sum_t alpha (1-alpha)^t s P^t with the same
/// truncation rule as the library.
inline std::vector<double> dense_series(const Graph& g, std::vector<double> s, double alpha, double eps) {
    auto n = g.num_nodes();
    auto p = transition_matrix(g);
    std::vector<double> out(n, 0.0);
    double tail = 1.0;
    while (true) {
        for (std::size_t i = 0; i < n; ++i) out[i] += alpha * s[i];
        tail *= 1.0 - alpha;
        if (tail < eps) break;
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[j] += (1.0 - alpha) * s[i] * p[i][j];
        s = next;
    }
    return out;
}

/// Closed form of the untruncated series: x = alpha s (I - (1-alpha) P)^-1,
/// solved by Gaussian elimination with partial pivoting on the transpose.
inline std::vector<double> closed_form_series(const Graph& g, const std::vector<double>& s, double alpha) {
    auto n = g.num_nodes();
    auto p = transition_matrix(g);
    Dense a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - (1.0 - alpha) * p[j][i];
        a[i][n] = alpha * s[i];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    return x;
}

inline std::vector<double> one_hot(std::size_t n, NodeId v) {
    std::vector<double> s(n, 0.0);
    s[v] = 1.0;
    return s;
}

/// Random walk with restart: stop with probability alpha at each node, else
/// follow a uniform out-edge; walks at dangling nodes are absorbed (counted
/// nowhere). Returns stop frequencies.
inline std::vector<double> monte_carlo_rwr(const Graph& g, NodeId source, double alpha, std::size_t walks,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> hits(g.num_nodes(), 0.0);
    for (std::size_t w = 0; w < walks; ++w) {
        NodeId v = source;
        while (true) {
            if (uniform01(rng) < alpha) {
                hits[v] += 1.0;
                break;
            }
            auto nb = g.target_neighbors(v);
            if (nb.empty()) break;
            v = nb.ids[uniform_below(rng, nb.size())];
        }
    }
    for (auto& h : hits) h /= static_cast<double>(walks);
    return hits;
}

// ---------------------------------------------------------------------------
// Categorization oracle
// ---------------------------------------------------------------------------

/// Components by breadth-first search over the undirected view; each sorted,
/// ordered by smallest member.
inline std::vector<std::vector<NodeId>> bfs_components(const EgoNetwork& eg) {
    std::map<NodeId, std::vector<NodeId>> adj;
    for (NodeId v : eg.nodes) adj[v];
    for (const auto& e : eg.edges) {
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
    }
    std::set<NodeId> seen;
    std::vector<std::vector<NodeId>> comps;
    for (NodeId start : eg.nodes) {
        if (seen.count(start)) continue;
        std::vector<NodeId> comp;
        std::queue<NodeId> q;
        q.push(start);
        seen.insert(start);
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            comp.push_back(v);
            for (NodeId u : adj[v])
                if (seen.insert(u).second) q.push(u);
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(comp);
    }
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

// ---------------------------------------------------------------------------
// Learner oracles
// ---------------------------------------------------------------------------

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double good = 0.0, total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            total += 1.0;
            if (scores[i] > scores[j]) good += 1.0;
            else if (scores[i] == scores[j]) good += 0.5;
        }
    }
    return good / total;
}

}  // namespace sitc::test

#pragma once

#include "sitc/categorize.hpp"
#include "sitc/graph.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace sitc {

// The walk is degree-uniform: from v_i every target neighbor is chosen with
// probability 1/d_i, independent of edge weight. Rows of nodes without target
// neighbors are zero, so walk mass reaching them beyond the stop term is lost.

inline constexpr double kDefaultAlpha = 0.15;
inline constexpr double kDefaultEps = 1e-6;

enum class Aggregation { mean, sum };

struct PageRankVector {
    std::vector<double> values;
    double alpha = kDefaultAlpha;
    std::optional<NodeId> source;  // empty for the global vector

    bool personalized() const noexcept { return source.has_value(); }
    double operator[](NodeId v) const { return values.at(v); }
};

namespace detail {

inline void check_centrality_params(double alpha, double eps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("centrality", "alpha must lie in (0,1)");
    if (!(eps > 0.0)) throw ParameterError("centrality", "eps must be positive");
}

}  // namespace detail

/// Truncated evaluation of sum_t alpha (1-alpha)^t s P^t for an arbitrary
/// starting vector. Terms are added until the untouched tail mass (1-alpha)^t
/// drops below eps.
inline std::vector<double> truncated_walk_series(const Graph& g, std::vector<double> start, double alpha,
                                                 double eps) {
    detail::check_centrality_params(alpha, eps);
    const auto n = g.num_nodes();
    std::vector<double> result(n, 0.0), next(n, 0.0);
    std::vector<double>& cur = start;
    double tail = 1.0;
    const auto& off = g.out_offsets();
    const auto& ids = g.out_ids();
    while (true) {
        for (std::size_t v = 0; v < n; ++v) result[v] += alpha * cur[v];
        tail *= 1.0 - alpha;
        if (tail < eps) break;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (cur[v] == 0.0) continue;
            auto d = off[v + 1] - off[v];
            if (d == 0) continue;
            double share = (1.0 - alpha) * cur[v] / static_cast<double>(d);
            for (auto k = off[v]; k < off[v + 1]; ++k) next[ids[k]] += share;
        }
        cur.swap(next);
    }
    return result;
}

inline PageRankVector pagerank(const Graph& g, double alpha = kDefaultAlpha, double eps = kDefaultEps) {
    detail::check_centrality_params(alpha, eps);
    const auto n = g.num_nodes();
    PageRankVector pr;
    pr.alpha = alpha;
    if (n == 0) return pr;
    pr.values = truncated_walk_series(g, std::vector<double>(n, 1.0 / static_cast<double>(n)), alpha, eps);
    return pr;
}

/// Reusable buffers for single-source PPR. Both routines leave the estimate in
/// a dense array and remember which entries they touched so reset() is
/// proportional to the explored region, not to n.
class PprWorkspace {
public:
    explicit PprWorkspace(std::size_t n = 0) { resize(n); }

    void resize(std::size_t n) {
        estimate_.assign(n, 0.0);
        residual_.assign(n, 0.0);
        next_.assign(n, 0.0);
        mark_.assign(n, 0);
        touched_.clear();
    }

    double value(NodeId v) const { return estimate_[v]; }
    const std::vector<NodeId>& touched() const noexcept { return touched_; }

    void reset() {
        for (NodeId v : touched_) {
            estimate_[v] = 0.0;
            residual_[v] = 0.0;
            next_[v] = 0.0;
            mark_[v] = 0;
        }
        touched_.clear();
    }

    /// Same truncated series as pagerank() with a one-hot start, restricted to
    /// the reachable frontier.
    void power_iteration(const Graph& g, NodeId source, double alpha, double eps) {
        detail::check_centrality_params(alpha, eps);
        prepare(g, source);
        const auto& off = g.out_offsets();
        const auto& ids = g.out_ids();
        std::vector<NodeId> frontier{source}, next_frontier;
        residual_[source] = 1.0;
        double tail = 1.0;
        while (true) {
            for (NodeId v : frontier) estimate_[v] += alpha * residual_[v];
            tail *= 1.0 - alpha;
            if (tail < eps) break;
            next_frontier.clear();
            for (NodeId v : frontier) {
                auto d = off[v + 1] - off[v];
                if (d == 0) continue;
                double share = (1.0 - alpha) * residual_[v] / static_cast<double>(d);
                for (auto k = off[v]; k < off[v + 1]; ++k) {
                    NodeId u = ids[k];
                    touch(u);
                    if (mark_[u] != 2) {
                        mark_[u] = 2;
                        next_frontier.push_back(u);
                    }
                    next_[u] += share;
                }
            }
            for (NodeId v : frontier) residual_[v] = 0.0;
            for (NodeId u : next_frontier) {
                residual_[u] = next_[u];
                next_[u] = 0.0;
                mark_[u] = 1;
            }
            if (next_frontier.empty()) break;
            // Frontier order must not depend on discovery order for bit-stable sums.
            std::sort(next_frontier.begin(), next_frontier.end());
            frontier.swap(next_frontier);
        }
    }

    /// Forward push: settles residual at v while r(v) > threshold * max(1, d_v).
    /// Every entry under-estimates the series value by at most the total
    /// residual left behind.
    double forward_push(const Graph& g, NodeId source, double alpha, double threshold) {
        detail::check_centrality_params(alpha, threshold);
        prepare(g, source);
        const auto& off = g.out_offsets();
        const auto& ids = g.out_ids();
        residual_[source] = 1.0;
        std::vector<NodeId> queue{source};
        std::size_t head = 0;
        mark_[source] = 2;
        while (head < queue.size()) {
            NodeId v = queue[head++];
            mark_[v] = 1;
            double r = residual_[v];
            auto d = off[v + 1] - off[v];
            if (r <= threshold * static_cast<double>(std::max<std::uint64_t>(d, 1))) continue;
            residual_[v] = 0.0;
            estimate_[v] += alpha * r;
            if (d == 0) continue;
            double share = (1.0 - alpha) * r / static_cast<double>(d);
            for (auto k = off[v]; k < off[v + 1]; ++k) {
                NodeId u = ids[k];
                touch(u);
                residual_[u] += share;
                auto du = off[u + 1] - off[u];
                if (mark_[u] != 2 && residual_[u] > threshold * static_cast<double>(std::max<std::uint64_t>(du, 1))) {
                    mark_[u] = 2;
                    queue.push_back(u);
                }
            }
            if (head > 4096 && head * 2 > queue.size()) {
                queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
                head = 0;
            }
        }
        double left = 0.0;
        for (NodeId v : touched_) left += residual_[v];
        return left;
    }

private:
    void prepare(const Graph& g, NodeId source) {
        if (estimate_.size() != g.num_nodes()) resize(g.num_nodes());
        else reset();
        if (source >= g.num_nodes()) throw IndexError("centrality", "source out of range");
        touch(source);
    }

    void touch(NodeId v) {
        if (mark_[v] == 0) {
            mark_[v] = 1;
            touched_.push_back(v);
        }
    }

    std::vector<double> estimate_;
    std::vector<double> residual_;
    std::vector<double> next_;
    std::vector<unsigned char> mark_;  // 0 untouched, 1 touched, 2 queued / in next frontier
    std::vector<NodeId> touched_;
};

inline PageRankVector personalized_pagerank(const Graph& g, NodeId source, double alpha = kDefaultAlpha,
                                            double eps = kDefaultEps) {
    if (source >= g.num_nodes()) throw IndexError("centrality", "source out of range");
    PprWorkspace ws(g.num_nodes());
    ws.power_iteration(g, source, alpha, eps);
    PageRankVector pr;
    pr.alpha = alpha;
    pr.source = source;
    pr.values.assign(g.num_nodes(), 0.0);
    for (NodeId v : ws.touched()) pr.values[v] = ws.value(v);
    return pr;
}

namespace detail {

template <typename ValueOf>
double aggregate_sources(const CandidateGroup& grp, Aggregation agg, ValueOf&& value_of) {
    if (grp.sources.empty())
        throw ValidationError("centrality", "candidate group must contain at least one source");
    double total = 0.0;
    for (NodeId j : grp.sources) total += value_of(j);
    return agg == Aggregation::mean ? total / static_cast<double>(grp.sources.size()) : total;
}

}  // namespace detail

/// Mean (or sum) global PageRank of the group's non-target members.
inline double group_pagerank(const PageRankVector& pr, const CandidateGroup& grp, Aggregation agg = Aggregation::mean) {
    if (pr.personalized()) throw ParameterError("centrality", "group_pagerank expects the global vector");
    return detail::aggregate_sources(grp, agg, [&](NodeId j) { return pr.values.at(j); });
}

/// Mean (or sum) of pi(target, j) over the group's sources.
inline double group_personalized_pagerank(const Graph& g, const CandidateGroup& grp, double alpha = kDefaultAlpha,
                                          double eps = kDefaultEps, Aggregation agg = Aggregation::mean) {
    if (grp.sources.empty())
        throw ValidationError("centrality", "candidate group must contain at least one source");
    auto ppr = personalized_pagerank(g, grp.target, alpha, eps);
    return detail::aggregate_sources(grp, agg, [&](NodeId j) { return ppr.values[j]; });
}

}  // namespace sitc

#pragma once

#include "sitc/graph.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <vector>

namespace sitc {

/// A target plus one weakly connected component of its ego network.
struct CandidateGroup {
    NodeId target = 0;
    std::vector<NodeId> sources;  // the component, sorted ascending
    std::vector<Edge> edges;      // ego-network edges inside the component
    std::size_t group_index = 0;

    /// |C|, target included.
    std::size_t size() const noexcept { return sources.size() + 1; }

    std::vector<NodeId> members() const {
        std::vector<NodeId> m = sources;
        m.insert(std::lower_bound(m.begin(), m.end(), target), target);
        return m;
    }

    bool contains_source(NodeId v) const { return std::binary_search(sources.begin(), sources.end(), v); }
};

struct GroupAssignment {
    NodeId target = 0;
    std::vector<CandidateGroup> groups;
    std::unordered_map<NodeId, std::size_t> pair_to_group;  // source -> group_index

    std::size_t group_of(NodeId source) const {
        auto it = pair_to_group.find(source);
        if (it == pair_to_group.end())
            throw LookupError("categorize", "node " + std::to_string(source) + " is not a source of target " +
                                                std::to_string(target));
        return it->second;
    }
};

/// Union-find with path halving and union by size over a dense index range.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

namespace detail {

inline std::size_t local_index(const std::vector<NodeId>& sorted_nodes, NodeId v) {
    auto it = std::lower_bound(sorted_nodes.begin(), sorted_nodes.end(), v);
    if (it == sorted_nodes.end() || *it != v)
        throw ValidationError("categorize", "ego-network edge endpoint " + std::to_string(v) + " not in node set");
    return static_cast<std::size_t>(it - sorted_nodes.begin());
}

// Component label per local node, labels numbered by smallest member.
inline std::vector<std::size_t> component_labels(const EgoNetwork& eg, std::size_t& count) {
    const auto& nodes = eg.nodes;
    DisjointSets ds(nodes.size());
    for (const auto& e : eg.edges) ds.unite(local_index(nodes, e.src), local_index(nodes, e.dst));
    std::vector<std::size_t> label(nodes.size());
    std::vector<std::size_t> root_label(nodes.size(), static_cast<std::size_t>(-1));
    count = 0;
    // nodes are sorted, so the first time a root is seen is its smallest member
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto r = ds.find(i);
        if (root_label[r] == static_cast<std::size_t>(-1)) root_label[r] = count++;
        label[i] = root_label[r];
    }
    return label;
}

}  // namespace detail

/// Partitions the ego-network nodes into weakly connected components, ordered
/// by smallest member id, each sorted ascending.
inline std::vector<std::vector<NodeId>> weakly_connected_components(const EgoNetwork& eg) {
    if (!std::is_sorted(eg.nodes.begin(), eg.nodes.end()))
        throw ValidationError("categorize", "ego-network nodes must be sorted");
    std::size_t count = 0;
    auto label = detail::component_labels(eg, count);
    std::vector<std::vector<NodeId>> comps(count);
    for (std::size_t i = 0; i < eg.nodes.size(); ++i) comps[label[i]].push_back(eg.nodes[i]);
    return comps;
}

/// One candidate group per WCC of the target's ego network.
inline GroupAssignment categorize(const EgoNetwork& eg) {
    GroupAssignment ga;
    ga.target = eg.target;
    std::size_t count = 0;
    auto label = detail::component_labels(eg, count);
    ga.groups.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
        ga.groups[c].target = eg.target;
        ga.groups[c].group_index = c;
    }
    ga.pair_to_group.reserve(eg.nodes.size());
    for (std::size_t i = 0; i < eg.nodes.size(); ++i) {
        ga.groups[label[i]].sources.push_back(eg.nodes[i]);
        ga.pair_to_group.emplace(eg.nodes[i], label[i]);
    }
    for (const auto& e : eg.edges) ga.groups[label[detail::local_index(eg.nodes, e.src)]].edges.push_back(e);
    return ga;
}

inline GroupAssignment categorize_target(const Graph& g, NodeId t) { return categorize(ego_network(g, t)); }

/// Text dump: `target group_index member...` with external names; the target
/// is listed first among the members.
inline void write_group_dump(const Graph& g, const GroupAssignment& ga, std::ostream& out) {
    for (const auto& grp : ga.groups) {
        out << g.name(ga.target) << ' ' << grp.group_index << ' ' << g.name(ga.target);
        for (NodeId s : grp.sources) out << ' ' << g.name(s);
        out << '\n';
    }
}

}  // namespace sitc

#pragma once

#include "sitc/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace sitc {

using NodeId = std::uint32_t;

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class WeightPolicy { reject_out_of_range, clamp, minmax_rescale };

inline constexpr double kRescaleEpsilon = 1e-6;

inline std::string_view to_string(WeightPolicy p) {
    switch (p) {
        case WeightPolicy::reject_out_of_range: return "reject_out_of_range";
        case WeightPolicy::clamp: return "clamp";
        case WeightPolicy::minmax_rescale: return "minmax_rescale";
    }
    return "?";
}

inline WeightPolicy parse_weight_policy(std::string_view s) {
    if (s == "reject_out_of_range" || s == "reject") return WeightPolicy::reject_out_of_range;
    if (s == "clamp") return WeightPolicy::clamp;
    if (s == "minmax_rescale" || s == "rescale") return WeightPolicy::minmax_rescale;
    throw ParameterError("graph", "unknown weight policy '" + std::string(s) + "'");
}

/// Read-only view of one adjacency list: neighbor ids sorted ascending with
/// parallel weights.
struct Neighbors {
    std::span<const NodeId> ids;
    std::span<const double> weights;

    std::size_t size() const noexcept { return ids.size(); }
    bool empty() const noexcept { return ids.empty(); }
};

/// Bidirectional external-name <-> dense id mapping.
class IdDictionary {
public:
    IdDictionary() = default;

    NodeId intern(std::string_view name) {
        auto it = index_.find(std::string(name));
        if (it != index_.end()) return it->second;
        auto id = static_cast<NodeId>(names_.size());
        names_.emplace_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<NodeId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(NodeId id) const { return names_.at(id); }
    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    static IdDictionary numeric(std::size_t n) {
        IdDictionary d;
        for (std::size_t i = 0; i < n; ++i) d.intern(std::to_string(i));
        return d;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> index_;
};

/// Sources of a target and the directed edges among them (the target itself
/// is excluded).
struct EgoNetwork {
    NodeId target = 0;
    std::vector<NodeId> nodes;
    std::vector<Edge> edges;
};

/// Immutable directed weighted graph in CSR form, with forward (out) and
/// reverse (in) adjacency. Weights lie in (0,1]; no self-loops or duplicates.
class Graph {
public:
    Graph() = default;

    /// Builds from an edge list over ids [0, n). Validates every invariant.
    static Graph from_edges(std::size_t n, std::vector<Edge> edges, IdDictionary dict = {}) {
        if (dict.size() == 0) dict = IdDictionary::numeric(n);
        if (dict.size() != n)
            throw ValidationError("graph", "dictionary size does not match node count");
        for (const auto& e : edges) {
            if (e.src >= n || e.dst >= n)
                throw IndexError("graph", "edge endpoint out of range");
            if (e.src == e.dst)
                throw ValidationError("graph", "self-loop on node '" + dict.name(e.src) + "'");
            if (!(e.weight > 0.0 && e.weight <= 1.0))
                throw ValidationError("graph", "edge weight outside (0,1] on " + dict.name(e.src) +
                                                   " -> " + dict.name(e.dst));
        }
        Graph g;
        g.n_ = n;
        g.dict_ = std::move(dict);
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
        });
        for (std::size_t i = 1; i < edges.size(); ++i) {
            if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst)
                throw ValidationError("graph", "duplicate edge " + g.dict_.name(edges[i].src) +
                                                   " -> " + g.dict_.name(edges[i].dst));
        }
        build_csr(n, edges, /*reverse=*/false, g.out_offsets_, g.out_ids_, g.out_weights_);
        build_csr(n, edges, /*reverse=*/true, g.in_offsets_, g.in_ids_, g.in_weights_);
        return g;
    }

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return out_ids_.size(); }
    const IdDictionary& dictionary() const noexcept { return dict_; }
    const std::string& name(NodeId v) const { return dict_.name(v); }

    /// Targets of v (out-neighbors).
    Neighbors target_neighbors(NodeId v) const {
        check(v);
        return slice(out_offsets_, out_ids_, out_weights_, v);
    }

    /// Sources of v (in-neighbors), sorted by id.
    Neighbors source_neighbors(NodeId v) const {
        check(v);
        return slice(in_offsets_, in_ids_, in_weights_, v);
    }

    std::size_t out_degree(NodeId v) const {
        check(v);
        return out_offsets_[v + 1] - out_offsets_[v];
    }
    std::size_t in_degree(NodeId v) const {
        check(v);
        return in_offsets_[v + 1] - in_offsets_[v];
    }

    /// w(s -> t), or nullopt when the edge is absent.
    std::optional<double> weight(NodeId s, NodeId t) const {
        auto nb = target_neighbors(s);
        auto it = std::lower_bound(nb.ids.begin(), nb.ids.end(), t);
        if (it == nb.ids.end() || *it != t) return std::nullopt;
        return nb.weights[static_cast<std::size_t>(it - nb.ids.begin())];
    }

    bool has_edge(NodeId s, NodeId t) const { return weight(s, t).has_value(); }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (NodeId s = 0; s < n_; ++s) {
            auto nb = target_neighbors(s);
            for (std::size_t i = 0; i < nb.size(); ++i) out.push_back({s, nb.ids[i], nb.weights[i]});
        }
        return out;
    }

    const std::vector<std::uint64_t>& out_offsets() const noexcept { return out_offsets_; }
    const std::vector<NodeId>& out_ids() const noexcept { return out_ids_; }
    const std::vector<double>& out_weights() const noexcept { return out_weights_; }
    const std::vector<std::uint64_t>& in_offsets() const noexcept { return in_offsets_; }
    const std::vector<NodeId>& in_ids() const noexcept { return in_ids_; }
    const std::vector<double>& in_weights() const noexcept { return in_weights_; }

    /// 64-bit FNV-1a over n, the forward adjacency and the weight bit patterns.
    std::uint64_t content_hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](const void* data, std::size_t len) {
            const auto* p = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < len; ++i) {
                h ^= p[i];
                h *= 1099511628211ULL;
            }
        };
        std::uint64_t n = n_;
        mix(&n, sizeof n);
        mix(out_offsets_.data(), out_offsets_.size() * sizeof(std::uint64_t));
        mix(out_ids_.data(), out_ids_.size() * sizeof(NodeId));
        mix(out_weights_.data(), out_weights_.size() * sizeof(double));
        for (const auto& s : dict_.names()) {
            mix(s.data(), s.size());
            mix("\n", 1);
        }
        return h;
    }

private:
    friend Graph load_snapshot(const std::string& path);

    void check(NodeId v) const {
        if (v >= n_) throw IndexError("graph", "node id " + std::to_string(v) + " out of range [0, " +
                                                   std::to_string(n_) + ")");
    }

    static Neighbors slice(const std::vector<std::uint64_t>& off, const std::vector<NodeId>& ids,
                           const std::vector<double>& w, NodeId v) {
        auto b = off[v], e = off[v + 1];
        return {std::span<const NodeId>(ids.data() + b, e - b),
                std::span<const double>(w.data() + b, e - b)};
    }

    // `edges` must be sorted by (src, dst); the reverse lists come out sorted by
    // source id because the scatter is stable.
    static void build_csr(std::size_t n, const std::vector<Edge>& edges, bool reverse,
                          std::vector<std::uint64_t>& off, std::vector<NodeId>& ids,
                          std::vector<double>& w) {
        off.assign(n + 1, 0);
        for (const auto& e : edges) ++off[(reverse ? e.dst : e.src) + 1];
        for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
        ids.resize(edges.size());
        w.resize(edges.size());
        std::vector<std::uint64_t> cursor(off.begin(), off.end() - 1);
        for (const auto& e : edges) {
            auto key = reverse ? e.dst : e.src;
            auto pos = cursor[key]++;
            ids[pos] = reverse ? e.src : e.dst;
            w[pos] = e.weight;
        }
    }

    std::size_t n_ = 0;
    IdDictionary dict_;
    std::vector<std::uint64_t> out_offsets_{0};
    std::vector<NodeId> out_ids_;
    std::vector<double> out_weights_;
    std::vector<std::uint64_t> in_offsets_{0};
    std::vector<NodeId> in_ids_;
    std::vector<double> in_weights_;
};

/// Parses `src dst weight` records (whitespace separated, `#` comments) from a
/// stream. Names are interned in order of first appearance.
inline Graph parse_edge_list(std::istream& in, WeightPolicy policy = WeightPolicy::reject_out_of_range,
                             const std::string& origin = "<stream>") {
    IdDictionary dict;
    std::vector<Edge> edges;
    std::vector<std::size_t> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string a, b, w, extra;
        if (!(ls >> a)) continue;
        if (!(ls >> b >> w) || (ls >> extra))
            throw ParseError("graph", origin + ":" + std::to_string(lineno) +
                                          ": expected 'src dst weight'");
        double weight = 0.0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), weight);
        if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(weight))
            throw ParseError("graph", origin + ":" + std::to_string(lineno) + ": bad weight '" + w + "'");
        if (a == b)
            throw ValidationError("graph", origin + ":" + std::to_string(lineno) + ": self-loop on '" + a + "'");
        NodeId s = dict.intern(a);
        NodeId t = dict.intern(b);
        edges.push_back({s, t, weight});
        lines.push_back(lineno);
    }

    switch (policy) {
        case WeightPolicy::reject_out_of_range:
            for (std::size_t i = 0; i < edges.size(); ++i)
                if (!(edges[i].weight > 0.0 && edges[i].weight <= 1.0))
                    throw ValidationError("graph", origin + ":" + std::to_string(lines[i]) +
                                                       ": weight outside (0,1]");
            break;
        case WeightPolicy::clamp:
            // Non-positive weights clamp to the rescale epsilon, the smallest
            // admissible intimacy.
            for (auto& e : edges) e.weight = std::clamp(e.weight, kRescaleEpsilon, 1.0);
            break;
        case WeightPolicy::minmax_rescale: {
            if (edges.empty()) break;
            auto [lo, hi] = std::minmax_element(edges.begin(), edges.end(),
                                                [](const Edge& x, const Edge& y) { return x.weight < y.weight; });
            double min = lo->weight, max = hi->weight;
            for (auto& e : edges)
                e.weight = (e.weight - min + kRescaleEpsilon) / (max - min + kRescaleEpsilon);
            break;
        }
    }

    // Report duplicates with the offending line before CSR construction.
    {
        std::vector<std::size_t> order(edges.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return std::tie(edges[x].src, edges[x].dst, x) < std::tie(edges[y].src, edges[y].dst, y);
        });
        for (std::size_t i = 1; i < order.size(); ++i) {
            const auto& p = edges[order[i - 1]];
            const auto& q = edges[order[i]];
            if (p.src == q.src && p.dst == q.dst)
                throw ValidationError("graph", origin + ":" + std::to_string(lines[order[i]]) +
                                                   ": duplicate edge " + dict.name(q.src) + " -> " +
                                                   dict.name(q.dst));
        }
    }
    auto n = dict.size();
    return Graph::from_edges(n, std::move(edges), std::move(dict));
}

inline Graph load_graph(const std::string& path, WeightPolicy policy = WeightPolicy::reject_out_of_range) {
    std::ifstream in(path);
    if (!in) throw IoError("graph", "cannot open edge list '" + path + "'");
    return parse_edge_list(in, policy, path);
}

inline void write_edge_list(const Graph& g, std::ostream& out) {
    char buf[64];
    for (const auto& e : g.edges()) {
        std::snprintf(buf, sizeof buf, "%.17g", e.weight);
        out << g.name(e.src) << ' ' << g.name(e.dst) << ' ' << buf << '\n';
    }
}

/// Source neighbors of t as (id, weight) pairs sorted by id.
inline std::vector<std::pair<NodeId, double>> source_neighbors(const Graph& g, NodeId t) {
    auto nb = g.source_neighbors(t);
    std::vector<std::pair<NodeId, double>> out;
    out.reserve(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) out.emplace_back(nb.ids[i], nb.weights[i]);
    return out;
}

/// Ego network of t: its sources plus every edge of the graph between two of them.
inline EgoNetwork ego_network(const Graph& g, NodeId t) {
    EgoNetwork eg;
    eg.target = t;
    auto src = g.source_neighbors(t);
    eg.nodes.assign(src.ids.begin(), src.ids.end());
    for (NodeId s : eg.nodes) {
        auto out = g.target_neighbors(s);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (std::binary_search(eg.nodes.begin(), eg.nodes.end(), out.ids[i]))
                eg.edges.push_back({s, out.ids[i], out.weights[i]});
        }
    }
    return eg;
}

// ---------------------------------------------------------------------------
// Binary snapshot: little-endian, fixed layout.
//   magic "SITCGRPH" | u32 version | u64 n | u64 m
//   u64 out_offsets[n+1] | u32 out_ids[m] | f64 out_weights[m]
//   u64 in_offsets[n+1]  | u32 in_ids[m]  | f64 in_weights[m]
//   n x (u32 length, bytes) dictionary
// ---------------------------------------------------------------------------

inline constexpr char kSnapshotMagic[8] = {'S', 'I', 'T', 'C', 'G', 'R', 'P', 'H'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw ParseError("graph", "truncated snapshot '" + path + "'");
    return v;
}

template <typename T>
std::vector<T> read_vec(std::istream& in, std::size_t count, const std::string& path) {
    std::vector<T> v(count);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T))))
        throw ParseError("graph", "truncated snapshot '" + path + "'");
    return v;
}

}  // namespace detail

inline void save_snapshot(const Graph& g, std::ostream& out) {
    out.write(kSnapshotMagic, sizeof kSnapshotMagic);
    detail::write_pod(out, kSnapshotVersion);
    detail::write_pod(out, static_cast<std::uint64_t>(g.num_nodes()));
    detail::write_pod(out, static_cast<std::uint64_t>(g.num_edges()));
    detail::write_vec(out, g.out_offsets());
    detail::write_vec(out, g.out_ids());
    detail::write_vec(out, g.out_weights());
    detail::write_vec(out, g.in_offsets());
    detail::write_vec(out, g.in_ids());
    detail::write_vec(out, g.in_weights());
    for (const auto& name : g.dictionary().names()) {
        detail::write_pod(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
}

inline void save_snapshot(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("graph", "cannot write snapshot '" + path + "'");
    save_snapshot(g, out);
}

inline Graph load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("graph", "cannot open snapshot '" + path + "'");
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
        throw ParseError("graph", "'" + path + "' is not a graph snapshot");
    auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != kSnapshotVersion)
        throw ParseError("graph", "unsupported snapshot version " + std::to_string(version));
    auto n = detail::read_pod<std::uint64_t>(in, path);
    auto m = detail::read_pod<std::uint64_t>(in, path);
    Graph g;
    g.n_ = n;
    g.out_offsets_ = detail::read_vec<std::uint64_t>(in, n + 1, path);
    g.out_ids_ = detail::read_vec<NodeId>(in, m, path);
    g.out_weights_ = detail::read_vec<double>(in, m, path);
    g.in_offsets_ = detail::read_vec<std::uint64_t>(in, n + 1, path);
    g.in_ids_ = detail::read_vec<NodeId>(in, m, path);
    g.in_weights_ = detail::read_vec<double>(in, m, path);
    for (std::uint64_t i = 0; i < n; ++i) {
        auto len = detail::read_pod<std::uint32_t>(in, path);
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw ParseError("graph", "truncated snapshot '" + path + "'");
        g.dict_.intern(name);
    }
    if (g.dict_.size() != n || g.out_offsets_.back() != m || g.in_offsets_.back() != m)
        throw ParseError("graph", "inconsistent snapshot '" + path + "'");
    return g;
}

/// Loads either a snapshot (by magic bytes) or a text edge list.
inline Graph load_any(const std::string& path, WeightPolicy policy = WeightPolicy::reject_out_of_range) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("graph", "cannot open '" + path + "'");
    char magic[8] = {};
    probe.read(magic, sizeof magic);
    if (probe.gcount() == sizeof magic && std::memcmp(magic, kSnapshotMagic, sizeof magic) == 0)
        return load_snapshot(path);
    return load_graph(path, policy);
}

/// Source and target roles of an event.
struct NodeSetRole {
    std::vector<NodeId> sources;
    std::vector<NodeId> targets;
};

}  // namespace sitc

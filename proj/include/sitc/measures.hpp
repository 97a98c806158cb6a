#pragma once

#include "sitc/categorize.hpp"
#include "sitc/centrality.hpp"
#include "sitc/embedding.hpp"
#include "sitc/graph.hpp"
#include "sitc/parallel.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <ostream>
#include <string_view>
#include <vector>

namespace sitc {

// Column order of every feature file.
enum class Measure : std::size_t {
    tie, com, ppr, n2v_cos, n2v_euc, gt, gd, cc_count, gs,
    gpr, gpr_sum, gppr, gppr_sum,
    ugt, ugt_euc, ugt_sum, ugt_w, ugt_delta,
    igt, igt_euc, igt_sum, igt_w, igt_delta,
};

inline constexpr std::size_t kMeasureCount = 23;

inline constexpr std::array<std::string_view, kMeasureCount> kMeasureNames = {
    "tie", "com", "ppr", "n2v_cos", "n2v_euc", "gt", "gd", "cc_count", "gs",
    "gpr", "gpr_sum", "gppr", "gppr_sum",
    "ugt", "ugt_euc", "ugt_sum", "ugt_w", "ugt_delta",
    "igt", "igt_euc", "igt_sum", "igt_w", "igt_delta",
};

inline std::string_view measure_name(Measure m) { return kMeasureNames[static_cast<std::size_t>(m)]; }

inline std::optional<Measure> find_measure(std::string_view name) {
    for (std::size_t i = 0; i < kMeasureCount; ++i)
        if (kMeasureNames[i] == name) return static_cast<Measure>(i);
    return std::nullopt;
}

// Diagnostic bits carried next to the values.
enum RecordFlag : std::uint32_t {
    kUgtZeroWeight = 1u << 0,   // no positive target-member weight, ugt set to 0
    kIgtSingleton = 1u << 1,    // group has one source, igt set to 0
    kIgtNoIntraEdges = 1u << 2, // no intra-source weight at all, igt set to 0
    kNoGroup = 1u << 3,         // pair has no group context (degenerate record)
};

struct MeasureRecord {
    NodeId source = 0;
    NodeId target = 0;
    std::size_t group_index = 0;
    std::array<double, kMeasureCount> values{};
    std::uint32_t flags = 0;

    double& operator[](Measure m) { return values[static_cast<std::size_t>(m)]; }
    double operator[](Measure m) const { return values[static_cast<std::size_t>(m)]; }

    friend bool operator==(const MeasureRecord&, const MeasureRecord&) = default;
};

// ---------------------------------------------------------------------------
// Individual-level measures
// ---------------------------------------------------------------------------

inline double tie_strength(const Graph& g, NodeId s, NodeId t) {
    auto w = g.weight(s, t);
    if (!w) throw LookupError("measures", "edge " + g.name(s) + " -> " + g.name(t) + " not in graph");
    return *w;
}

/// |N(s) ∩ N(t)| where N(x) is the union of x's source and target neighbors.
inline std::size_t common_neighbors(const Graph& g, NodeId s, NodeId t) {
    auto merged = [&g](NodeId v) {
        auto in = g.source_neighbors(v);
        auto out = g.target_neighbors(v);
        std::vector<NodeId> u;
        u.reserve(in.size() + out.size());
        std::set_union(in.ids.begin(), in.ids.end(), out.ids.begin(), out.ids.end(), std::back_inserter(u));
        return u;
    };
    auto a = merged(s);
    auto b = merged(t);
    std::size_t count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

/// w_{i,j} as used by the group measures: w(i->j) when present, else w(j->i),
/// else 0.
inline double tie_weight(const Graph& g, NodeId i, NodeId j) {
    if (auto w = g.weight(i, j)) return *w;
    if (auto w = g.weight(j, i)) return *w;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Group-level measures
// ---------------------------------------------------------------------------

inline double user_group_tie(const Graph& g, const CandidateGroup& grp) {
    double total = 0.0;
    for (NodeId j : grp.sources) total += tie_weight(g, grp.target, j);
    return total;
}

/// Sum of directed edge weights with both endpoints in C over |C|(|C|-1).
inline double group_density(const Graph& g, const CandidateGroup& grp) {
    if (grp.sources.empty()) throw ValidationError("measures", "group density needs at least one source");
    double total = 0.0;
    for (NodeId j : grp.sources) {
        if (auto w = g.weight(j, grp.target)) total += *w;
        if (auto w = g.weight(grp.target, j)) total += *w;
    }
    for (const auto& e : grp.edges) total += e.weight;
    auto c = static_cast<double>(grp.size());
    return total / (c * (c - 1.0));
}

inline std::size_t multi_membership(const GroupAssignment& ga) { return ga.groups.size(); }

inline std::size_t inclusiveness(const CandidateGroup& grp) { return grp.size(); }

/// Weight-weighted similarity of one pivot to a member set, with its
/// separated weight and similarity parts.
struct Tightness {
    double mean = 0.0;       // sum(w*delta) / sum(w), 0 when sum(w) == 0
    double sum = 0.0;        // sum(w*delta)
    double weight_part = 0.0;  // mean of w over the members considered
    double delta_part = 0.0;   // mean of delta over the members considered
    bool zero_weight = false;
};

using SimilarityFn = std::function<double(NodeId, NodeId)>;

/// UGT: tightness of the target to the group's sources.
inline Tightness ugt(const Graph& g, const CandidateGroup& grp, const SimilarityFn& delta) {
    Tightness r;
    if (grp.sources.empty()) throw ValidationError("measures", "ugt needs at least one source");
    double wsum = 0.0, dsum = 0.0;
    for (NodeId j : grp.sources) {
        double w = tie_weight(g, grp.target, j);
        double d = delta(grp.target, j);
        r.sum += w * d;
        wsum += w;
        dsum += d;
    }
    auto k = static_cast<double>(grp.sources.size());
    r.weight_part = wsum / k;
    r.delta_part = dsum / k;
    r.zero_weight = !(wsum > 0.0);
    r.mean = r.zero_weight ? 0.0 : r.sum / wsum;
    return r;
}

inline double ugt(const Graph& g, const CandidateGroup& grp, const SimilarityFn& delta, Aggregation agg) {
    auto r = ugt(g, grp, delta);
    return agg == Aggregation::mean ? r.mean : r.sum;
}

/// Undirected intra-source ties of a group: for every ordered (pivot, other)
/// with a positive w_{pivot,other} under the tie_weight convention.
struct PivotTie {
    NodeId pivot;
    NodeId other;
    double weight;
};

inline std::vector<PivotTie> intra_group_ties(const CandidateGroup& grp) {
    struct Entry {
        NodeId pivot, other;
        bool direct;
        double w;
    };
    std::vector<Entry> entries;
    entries.reserve(grp.edges.size() * 2);
    for (const auto& e : grp.edges) {
        if (e.src == grp.target || e.dst == grp.target) continue;
        entries.push_back({e.src, e.dst, true, e.weight});
        entries.push_back({e.dst, e.src, false, e.weight});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.pivot != b.pivot) return a.pivot < b.pivot;
        if (a.other != b.other) return a.other < b.other;
        return a.direct > b.direct;
    });
    std::vector<PivotTie> ties;
    ties.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].pivot == entries[i - 1].pivot && entries[i].other == entries[i - 1].other) continue;
        ties.push_back({entries[i].pivot, entries[i].other, entries[i].w});
    }
    return ties;
}

struct GroupTightness {
    double mean = 0.0;
    double sum = 0.0;
    double weight_part = 0.0;
    double delta_part = 0.0;
    bool singleton = false;
    bool no_intra_edges = false;
};

/// IGT: mean over the group's sources of each source's tightness to the other
/// sources (target excluded). A source without intra-group ties contributes 0.
inline GroupTightness igt(const CandidateGroup& grp, const std::vector<PivotTie>& ties, const SimilarityFn& delta) {
    GroupTightness r;
    const auto k = grp.sources.size();
    if (k == 0) throw ValidationError("measures", "igt needs at least one source");
    if (k == 1) {
        r.singleton = true;
        return r;
    }
    r.no_intra_edges = ties.empty();
    double mean_acc = 0.0, w_acc = 0.0, d_acc = 0.0;
    std::size_t i = 0;
    while (i < ties.size()) {
        NodeId pivot = ties[i].pivot;
        double num = 0.0, wsum = 0.0, dsum = 0.0;
        std::size_t cnt = 0;
        for (; i < ties.size() && ties[i].pivot == pivot; ++i) {
            double d = delta(pivot, ties[i].other);
            num += ties[i].weight * d;
            wsum += ties[i].weight;
            dsum += d;
            ++cnt;
        }
        r.sum += num;
        if (wsum > 0.0) mean_acc += num / wsum;
        w_acc += wsum / static_cast<double>(cnt);
        d_acc += dsum / static_cast<double>(cnt);
    }
    auto kd = static_cast<double>(k);
    r.mean = mean_acc / kd;
    r.weight_part = w_acc / kd;
    r.delta_part = d_acc / kd;
    return r;
}

inline GroupTightness igt(const CandidateGroup& grp, const SimilarityFn& delta) {
    return igt(grp, intra_group_ties(grp), delta);
}

inline double igt(const CandidateGroup& grp, const SimilarityFn& delta, Aggregation agg) {
    auto r = igt(grp, delta);
    return agg == Aggregation::mean ? r.mean : r.sum;
}

// ---------------------------------------------------------------------------
// Batch extraction
// ---------------------------------------------------------------------------

struct MeasureConfig {
    double alpha = kDefaultAlpha;
    double eps = kDefaultEps;
    // 0 evaluates PPR by truncated power iteration to eps; a positive value
    // switches to forward push with this residual threshold.
    double ppr_push_threshold = 0.0;
    std::size_t workers = 0;
};

/// Shared, fitted inputs for record computation.
struct MeasureContext {
    const Graph* graph = nullptr;
    const EmbeddingTable* embeddings = nullptr;
    SimilarityProvider cosine{SimilarityKind::cosine};
    SimilarityProvider euclidean{SimilarityKind::euclidean};
    PageRankVector global_pagerank;
    MeasureConfig config;
};

namespace detail {

inline void compute_ppr(PprWorkspace& ws, const Graph& g, NodeId source, const MeasureConfig& cfg) {
    if (cfg.ppr_push_threshold > 0.0) ws.forward_push(g, source, cfg.alpha, cfg.ppr_push_threshold);
    else ws.power_iteration(g, source, cfg.alpha, cfg.eps);
}

struct GroupValues {
    double gt = 0, gd = 0, gs = 0, gpr = 0, gpr_sum = 0, gppr = 0, gppr_sum = 0;
    double ugt = 0, ugt_euc = 0, ugt_sum = 0, ugt_w = 0, ugt_delta = 0;
    double igt = 0, igt_euc = 0, igt_sum = 0, igt_w = 0, igt_delta = 0;
    std::uint32_t flags = 0;
};

// `ppr_from_target` must hold pi(target, .) for the group's target.
inline GroupValues group_values(const MeasureContext& ctx, const CandidateGroup& grp,
                                const PprWorkspace& ppr_from_target) {
    const Graph& g = *ctx.graph;
    const EmbeddingTable& emb = *ctx.embeddings;
    GroupValues v;
    SimilarityFn cos = [&](NodeId a, NodeId b) { return ctx.cosine(emb, a, b); };
    SimilarityFn euc = [&](NodeId a, NodeId b) { return ctx.euclidean(emb, a, b); };
    v.gt = user_group_tie(g, grp);
    v.gd = group_density(g, grp);
    v.gs = static_cast<double>(grp.size());
    v.gpr_sum = group_pagerank(ctx.global_pagerank, grp, Aggregation::sum);
    v.gpr = group_pagerank(ctx.global_pagerank, grp, Aggregation::mean);
    double pp = 0.0;
    for (NodeId j : grp.sources) pp += ppr_from_target.value(j);
    v.gppr_sum = pp;
    v.gppr = pp / static_cast<double>(grp.sources.size());

    auto u = ugt(g, grp, cos);
    auto ue = ugt(g, grp, euc);
    v.ugt = u.mean;
    v.ugt_sum = u.sum;
    v.ugt_w = u.weight_part;
    v.ugt_delta = u.delta_part;
    v.ugt_euc = ue.mean;
    if (u.zero_weight) v.flags |= kUgtZeroWeight;

    auto ties = intra_group_ties(grp);
    auto ig = igt(grp, ties, cos);
    auto ige = igt(grp, ties, euc);
    v.igt = ig.mean;
    v.igt_sum = ig.sum;
    v.igt_w = ig.weight_part;
    v.igt_delta = ig.delta_part;
    v.igt_euc = ige.mean;
    if (ig.singleton) v.flags |= kIgtSingleton;
    else if (ig.no_intra_edges) v.flags |= kIgtNoIntraEdges;
    return v;
}

inline void fill_group(MeasureRecord& rec, const GroupValues& v, std::size_t cc_count) {
    rec[Measure::gt] = v.gt;
    rec[Measure::gd] = v.gd;
    rec[Measure::cc_count] = static_cast<double>(cc_count);
    rec[Measure::gs] = v.gs;
    rec[Measure::gpr] = v.gpr;
    rec[Measure::gpr_sum] = v.gpr_sum;
    rec[Measure::gppr] = v.gppr;
    rec[Measure::gppr_sum] = v.gppr_sum;
    rec[Measure::ugt] = v.ugt;
    rec[Measure::ugt_euc] = v.ugt_euc;
    rec[Measure::ugt_sum] = v.ugt_sum;
    rec[Measure::ugt_w] = v.ugt_w;
    rec[Measure::ugt_delta] = v.ugt_delta;
    rec[Measure::igt] = v.igt;
    rec[Measure::igt_euc] = v.igt_euc;
    rec[Measure::igt_sum] = v.igt_sum;
    rec[Measure::igt_w] = v.igt_w;
    rec[Measure::igt_delta] = v.igt_delta;
    rec.flags |= v.flags;
}

inline void fill_individual(MeasureRecord& rec, const MeasureContext& ctx, double ppr_value, std::size_t com) {
    const Graph& g = *ctx.graph;
    rec[Measure::tie] = tie_strength(g, rec.source, rec.target);
    rec[Measure::com] = static_cast<double>(com);
    rec[Measure::ppr] = ppr_value;
    rec[Measure::n2v_cos] = ctx.cosine(*ctx.embeddings, rec.source, rec.target);
    rec[Measure::n2v_euc] = ctx.euclidean(*ctx.embeddings, rec.source, rec.target);
}

}  // namespace detail

/// Every pair (s,t) of the graph, sorted by (target, source).
inline std::vector<std::pair<NodeId, NodeId>> all_pairs(const Graph& g) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(g.num_edges());
    for (NodeId t = 0; t < g.num_nodes(); ++t)
        for (NodeId s : g.source_neighbors(t).ids) pairs.emplace_back(s, t);
    return pairs;
}

/// Sorts by (target, source), removes duplicates and checks membership in E.
inline std::vector<std::pair<NodeId, NodeId>> normalize_pairs(const Graph& g,
                                                              std::vector<std::pair<NodeId, NodeId>> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.second, a.first) < std::tie(b.second, b.first);
    });
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const auto& [s, t] : pairs) {
        if (s >= g.num_nodes() || t >= g.num_nodes() || !g.has_edge(s, t))
            throw LookupError("measures", "pair (" + std::to_string(s) + ", " + std::to_string(t) + ") not in graph");
    }
    return pairs;
}

/// Fits both similarity providers over the population the records will use:
/// the pairs themselves, every target-source pair of the groups they fall in,
/// and every intra-source tie of those groups.
inline void fit_similarity(MeasureContext& ctx, const std::vector<std::pair<NodeId, NodeId>>& sorted_pairs) {
    const Graph& g = *ctx.graph;
    const EmbeddingTable& emb = *ctx.embeddings;
    std::vector<NodeId> targets;
    for (const auto& p : sorted_pairs)
        if (targets.empty() || targets.back() != p.second) targets.push_back(p.second);

    struct Range {
        double cmin = std::numeric_limits<double>::infinity(), cmax = -std::numeric_limits<double>::infinity();
        double emin = std::numeric_limits<double>::infinity(), emax = -std::numeric_limits<double>::infinity();
        void add(const EmbeddingTable& e, NodeId a, NodeId b) {
            double c = raw_cosine(e.row(a), e.row(b));
            double d = raw_euclidean(e.row(a), e.row(b));
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
            emin = std::min(emin, d);
            emax = std::max(emax, d);
        }
        void merge(const Range& o) {
            cmin = std::min(cmin, o.cmin);
            cmax = std::max(cmax, o.cmax);
            emin = std::min(emin, o.emin);
            emax = std::max(emax, o.emax);
        }
    };
    std::vector<Range> per_target(targets.size());
    std::vector<std::size_t> starts(targets.size());
    for (std::size_t i = 0, k = 0; i < sorted_pairs.size(); ++i)
        if (i == 0 || sorted_pairs[i].second != sorted_pairs[i - 1].second) starts[k++] = i;
    parallel_for(targets.size(), ctx.config.workers, [&](std::size_t ti, std::size_t) {
        NodeId t = targets[ti];
        auto ga = categorize_target(g, t);
        std::vector<char> used(ga.groups.size(), 0);
        auto end = ti + 1 < targets.size() ? starts[ti + 1] : sorted_pairs.size();
        Range& r = per_target[ti];
        for (auto i = starts[ti]; i < end; ++i) used[ga.group_of(sorted_pairs[i].first)] = 1;
        for (std::size_t gi = 0; gi < ga.groups.size(); ++gi) {
            if (!used[gi]) continue;
            const auto& grp = ga.groups[gi];
            for (NodeId j : grp.sources) r.add(emb, t, j);
            for (const auto& e : grp.edges) r.add(emb, e.src, e.dst);
        }
    });
    Range all;
    for (const auto& r : per_target) all.merge(r);
    if (targets.empty()) {
        ctx.cosine.fit_range(0.0, 0.0);
        ctx.euclidean.fit_range(0.0, 0.0);
        return;
    }
    ctx.cosine.fit_range(all.cmin, all.cmax);
    ctx.euclidean.fit_range(all.emin, all.emax);
}

inline MeasureContext make_context(const Graph& g, const EmbeddingTable& emb, const MeasureConfig& cfg) {
    if (emb.size() != g.num_nodes()) throw ValidationError("measures", "embedding table does not cover the graph");
    MeasureContext ctx;
    ctx.graph = &g;
    ctx.embeddings = &emb;
    ctx.config = cfg;
    if (g.num_nodes() > 0) ctx.global_pagerank = pagerank(g, cfg.alpha, cfg.eps);
    return ctx;
}

/// Records for every pair, sorted by (target, source). Group-level values are
/// computed once per (target, group) and shared by its pairs. The context must
/// already be fitted.
inline std::vector<MeasureRecord> compute_all(const MeasureContext& ctx,
                                              const std::vector<std::pair<NodeId, NodeId>>& input_pairs) {
    const Graph& g = *ctx.graph;
    auto pairs = normalize_pairs(g, input_pairs);
    std::vector<MeasureRecord> records(pairs.size());
    if (pairs.empty()) return records;

    // Index pairs by source so each node's PPR run serves both roles.
    std::vector<std::size_t> by_source(pairs.size());
    std::iota(by_source.begin(), by_source.end(), std::size_t{0});
    std::sort(by_source.begin(), by_source.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(pairs[a].first, pairs[a].second) < std::tie(pairs[b].first, pairs[b].second);
    });
    std::vector<std::size_t> target_start(g.num_nodes() + 1, 0), source_start(g.num_nodes() + 1, 0);
    for (const auto& [s, t] : pairs) {
        ++target_start[t + 1];
        ++source_start[s + 1];
    }
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
        target_start[v + 1] += target_start[v];
        source_start[v + 1] += source_start[v];
    }
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (target_start[v + 1] > target_start[v] || source_start[v + 1] > source_start[v]) nodes.push_back(v);

    std::size_t workers = ctx.config.workers == 0 ? default_workers() : ctx.config.workers;
    std::vector<PprWorkspace> spaces(workers);
    std::vector<std::vector<std::uint32_t>> stamps(workers);
    std::vector<std::uint32_t> epoch(workers, 0);
    // written by the source's task, merged after the loop
    std::vector<double> pair_ppr(pairs.size(), 0.0);

    parallel_for(nodes.size(), workers, [&](std::size_t ni, std::size_t w) {
        NodeId v = nodes[ni];
        auto& ws = spaces[w];
        detail::compute_ppr(ws, g, v, ctx.config);

        // v as source: pi(v, t) for its pairs
        for (auto k = source_start[v]; k < source_start[v + 1]; ++k) {
            auto idx = by_source[k];
            pair_ppr[idx] = ws.value(pairs[idx].second);
        }

        auto tb = target_start[v], te = target_start[v + 1];
        if (tb == te) return;

        // v as target
        auto ga = categorize_target(g, v);
        auto& stamp = stamps[w];
        if (stamp.size() != g.num_nodes()) stamp.assign(g.num_nodes(), 0);
        if (++epoch[w] == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch[w] = 1;
        }
        auto mark = epoch[w];
        for (NodeId x : g.source_neighbors(v).ids) stamp[x] = mark;
        for (NodeId x : g.target_neighbors(v).ids) stamp[x] = mark;

        std::vector<std::optional<detail::GroupValues>> cache(ga.groups.size());
        for (auto i = tb; i < te; ++i) {
            auto& rec = records[i];
            NodeId s = pairs[i].first;
            rec.source = s;
            rec.target = v;
            auto gi = ga.group_of(s);
            rec.group_index = gi;
            if (!cache[gi]) cache[gi] = detail::group_values(ctx, ga.groups[gi], ws);
            detail::fill_group(rec, *cache[gi], ga.groups.size());

            std::size_t com = 0;
            auto out = g.target_neighbors(s);
            for (NodeId x : out.ids) com += stamp[x] == mark;
            for (NodeId x : g.source_neighbors(s).ids)
                if (stamp[x] == mark && !std::binary_search(out.ids.begin(), out.ids.end(), x)) ++com;
            detail::fill_individual(rec, ctx, 0.0, com);
        }
    }, 1);
    for (std::size_t i = 0; i < records.size(); ++i) records[i][Measure::ppr] = pair_ppr[i];
    return records;
}

/// Fits the similarity providers over the pairs' population and computes all
/// records.
inline std::vector<MeasureRecord> compute_all(const Graph& g, const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                              const EmbeddingTable& emb, const MeasureConfig& cfg = {}) {
    auto ctx = make_context(g, emb, cfg);
    fit_similarity(ctx, normalize_pairs(g, pairs));
    return compute_all(ctx, pairs);
}

/// Single-pair evaluation through the per-measure functions, for checking the
/// batch path.
inline MeasureRecord compute_pair(const MeasureContext& ctx, NodeId s, NodeId t) {
    const Graph& g = *ctx.graph;
    MeasureRecord rec;
    rec.source = s;
    rec.target = t;
    auto ga = categorize_target(g, t);
    auto gi = ga.group_of(s);
    rec.group_index = gi;
    PprWorkspace from_target(g.num_nodes()), from_source(g.num_nodes());
    detail::compute_ppr(from_target, g, t, ctx.config);
    detail::compute_ppr(from_source, g, s, ctx.config);
    detail::fill_group(rec, detail::group_values(ctx, ga.groups[gi], from_target), multi_membership(ga));
    detail::fill_individual(rec, ctx, from_source.value(t), common_neighbors(g, s, t));
    return rec;
}

// ---------------------------------------------------------------------------
// Feature file
// ---------------------------------------------------------------------------

inline void write_feature_header(std::ostream& out) {
    out << "source\ttarget\tgroup";
    for (auto name : kMeasureNames) out << '\t' << name;
    out << "\tflags\n";
}

inline void write_feature_file(const Graph& g, const std::vector<MeasureRecord>& records, std::ostream& out) {
    write_feature_header(out);
    char buf[32];
    for (const auto& r : records) {
        out << g.name(r.source) << '\t' << g.name(r.target) << '\t' << r.group_index;
        for (double v : r.values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << '\t' << buf;
        }
        out << '\t' << r.flags << '\n';
    }
}

/// Reads a feature file written by write_feature_file; names resolve through
/// the dictionary.
inline std::vector<MeasureRecord> read_feature_file(std::istream& in, const IdDictionary& dict,
                                                    const std::string& origin = "<features>") {
    std::string line;
    std::size_t lineno = 0;
    do {
        if (!std::getline(in, line)) throw ParseError("measures", origin + ": empty feature file");
        ++lineno;
    } while (!line.empty() && line[0] == '#');
    std::istringstream hs(line);
    std::vector<std::string> header;
    for (std::string tok; hs >> tok;) header.push_back(tok);
    if (header.size() != kMeasureCount + 4 || header[0] != "source" || header[1] != "target" ||
        header[2] != "group" || header.back() != "flags")
        throw ParseError("measures", origin + ": unexpected feature header");
    for (std::size_t i = 0; i < kMeasureCount; ++i)
        if (header[i + 3] != kMeasureNames[i])
            throw ParseError("measures", origin + ": column '" + header[i + 3] + "' out of order");
    std::vector<MeasureRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string s, t;
        MeasureRecord r;
        auto where = origin + ":" + std::to_string(lineno);
        if (!(ls >> s >> t >> r.group_index)) throw ParseError("measures", where + ": malformed row");
        auto sid = dict.find(s), tid = dict.find(t);
        if (!sid || !tid) throw LookupError("measures", where + ": unknown node");
        r.source = *sid;
        r.target = *tid;
        for (auto& v : r.values) {
            std::string tok;
            if (!(ls >> tok)) throw ParseError("measures", where + ": missing value");
            char* end = nullptr;
            v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size() || !std::isfinite(v))
                throw ParseError("measures", where + ": bad value '" + tok + "'");
        }
        if (!(ls >> r.flags)) throw ParseError("measures", where + ": missing flags");
        records.push_back(r);
    }
    return records;
}

}  // namespace sitc

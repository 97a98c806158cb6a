#pragma once

#include "sitc/categorize.hpp"
#include "sitc/graph.hpp"
#include "sitc/measures.hpp"
#include "sitc/outcome.hpp"
#include "sitc/random.hpp"
#include "sitc/recommend.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <unordered_set>
#include <vector>

namespace sitc {

enum class GraphFamily { two_clique, planted_groups, random_power_law };

inline std::string_view to_string(GraphFamily f) {
    switch (f) {
        case GraphFamily::two_clique: return "two-clique";
        case GraphFamily::planted_groups: return "planted-groups";
        case GraphFamily::random_power_law: return "random-power-law";
    }
    return "?";
}

inline GraphFamily parse_graph_family(std::string_view s) {
    if (s == "two-clique" || s == "two_clique") return GraphFamily::two_clique;
    if (s == "planted-groups" || s == "planted_groups") return GraphFamily::planted_groups;
    if (s == "random-power-law" || s == "random_power_law") return GraphFamily::random_power_law;
    throw ParameterError("eventsim", "unknown graph family '" + std::string(s) + "'");
}

/// Logistic behavior: p = sigmoid(intercept + sum coef * measure).
struct BehaviorModel {
    std::vector<std::pair<Measure, double>> coefficients;
    double intercept = 0.0;

    double probability(const MeasureRecord& rec) const {
        double z = intercept;
        for (const auto& [m, c] : coefficients) z += c * rec[m];
        return sigmoid(z);
    }
};

/// Single-measure logistic behavior scaled to the observed spread of `m`:
/// the coefficient is steepness / (q90 - q10) and the median record sits at
/// logit `offset`.
inline BehaviorModel spread_scaled_behavior(const std::vector<MeasureRecord>& records, Measure m, double steepness,
                                            double offset) {
    if (records.empty()) throw ParameterError("eventsim", "spread scaling needs at least one record");
    std::vector<double> u;
    u.reserve(records.size());
    for (const auto& r : records) u.push_back(r[m]);
    std::sort(u.begin(), u.end());
    auto q = [&](double f) { return u[static_cast<std::size_t>(f * static_cast<double>(u.size() - 1))]; };
    double beta = steepness / std::max(q(0.9) - q(0.1), 1e-9);
    return {{{m, beta}}, offset - beta * q(0.5)};
}

struct GeneratorConfig {
    GraphFamily family = GraphFamily::planted_groups;
    std::size_t nodes = 1000;
    std::uint64_t seed = 1;

    // random-power-law
    std::size_t edges = 5000;
    double exponent = 2.5;

    // planted-groups: dedicated target nodes, each fed by whole communities.
    // Communities are internally connected and never linked to each other, so
    // a target's ego network has exactly as many WCCs as communities feeding it.
    std::size_t targets = 50;
    std::size_t min_groups = 1;
    std::size_t max_groups = 4;
    std::size_t min_group_size = 2;
    std::size_t max_group_size = 8;
    double intra_density = 0.3;     // extra intra-community edge probability
    double reciprocity = 0.5;       // probability of a target -> source edge

    BehaviorModel invitation;
    BehaviorModel adoption;
};

namespace detail {

inline double random_weight(Rng& rng) { return 1.0 - uniform01(rng); }  // (0, 1]

inline Graph two_clique_graph(const GeneratorConfig& cfg) {
    if (cfg.nodes < 4) throw ParameterError("eventsim", "config error: two-clique needs at least 4 nodes");
    Rng rng(derive_seed(cfg.seed, "two-clique"));
    std::vector<Edge> edges;
    std::size_t half = cfg.nodes / 2;
    auto clique = [&](std::size_t lo, std::size_t hi) {
        for (auto a = lo; a < hi; ++a)
            for (auto b = lo; b < hi; ++b)
                if (a != b) edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), random_weight(rng)});
    };
    clique(0, half);
    clique(half, cfg.nodes);
    edges.push_back({static_cast<NodeId>(half - 1), static_cast<NodeId>(half), random_weight(rng)});
    return Graph::from_edges(cfg.nodes, std::move(edges));
}

// Chung-Lu style: endpoints drawn proportionally to i^(-1/(exponent-1)).
inline Graph power_law_graph(const GeneratorConfig& cfg) {
    const auto n = cfg.nodes;
    if (n < 2) throw ParameterError("eventsim", "config error: need at least 2 nodes");
    if (static_cast<double>(cfg.edges) > static_cast<double>(n) * static_cast<double>(n - 1))
        throw ParameterError("eventsim", "config error: more edges than n(n-1)");
    if (!(cfg.exponent > 1.0)) throw ParameterError("eventsim", "config error: exponent must exceed 1");
    if (static_cast<double>(cfg.edges) > 0.5 * static_cast<double>(n) * static_cast<double>(n - 1))
        throw ParameterError("eventsim", "config error: power-law family supports at most half of all ordered pairs");
    Rng rng(derive_seed(cfg.seed, "power-law"));
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cumulative[i] = acc += std::pow(static_cast<double>(i + 1), -1.0 / (cfg.exponent - 1.0));
    auto draw = [&]() {
        return static_cast<NodeId>(detail::sample_index(cumulative, uniform01(rng)));
    };
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(cfg.edges * 2);
    std::vector<Edge> edges;
    edges.reserve(cfg.edges);
    std::size_t attempts = 0;
    const std::size_t max_attempts = cfg.edges * 50 + 1000;
    while (edges.size() < cfg.edges) {
        if (++attempts > max_attempts) throw ParameterError("eventsim", "config error: cannot place requested edges");
        NodeId s = draw(), t = draw();
        // mix in uniform endpoints so the tail of the degree distribution is populated
        if (uniform01(rng) < 0.5) t = static_cast<NodeId>(uniform_below(rng, n));
        if (s == t || !seen.insert(pair_key(s, t)).second) continue;
        edges.push_back({s, t, random_weight(rng)});
    }
    return Graph::from_edges(n, std::move(edges));
}

struct PlantedLayout {
    std::vector<NodeId> targets;
    std::vector<std::vector<NodeId>> communities;
    std::vector<std::vector<std::size_t>> feeding;  // per target: community indices
};

inline PlantedLayout planted_layout(const GeneratorConfig& cfg, Rng& rng) {
    if (cfg.targets == 0) throw ParameterError("eventsim", "config error: planted-groups needs targets");
    if (cfg.min_groups < 1 || cfg.min_groups > cfg.max_groups)
        throw ParameterError("eventsim", "config error: invalid group count range");
    if (cfg.min_group_size < 1 || cfg.min_group_size > cfg.max_group_size)
        throw ParameterError("eventsim", "config error: invalid group size range");
    if (cfg.nodes < cfg.targets + cfg.max_groups * cfg.max_group_size)
        throw ParameterError("eventsim", "config error: too few nodes for the planted structure");
    PlantedLayout lay;
    for (std::size_t i = 0; i < cfg.targets; ++i) lay.targets.push_back(static_cast<NodeId>(i));
    NodeId next = static_cast<NodeId>(cfg.targets);
    while (next < cfg.nodes) {
        auto size = cfg.min_group_size + uniform_below(rng, cfg.max_group_size - cfg.min_group_size + 1);
        size = std::min<std::size_t>(size, cfg.nodes - next);
        std::vector<NodeId> c;
        for (std::size_t k = 0; k < size; ++k) c.push_back(next++);
        lay.communities.push_back(std::move(c));
    }
    if (lay.communities.size() < cfg.max_groups)
        throw ParameterError("eventsim", "config error: fewer communities than groups per target");
    for (std::size_t i = 0; i < cfg.targets; ++i) {
        auto k = cfg.min_groups + uniform_below(rng, cfg.max_groups - cfg.min_groups + 1);
        std::vector<std::size_t> pick;
        while (pick.size() < k) {
            auto c = uniform_below(rng, lay.communities.size());
            if (std::find(pick.begin(), pick.end(), c) == pick.end()) pick.push_back(c);
        }
        std::sort(pick.begin(), pick.end());
        lay.feeding.push_back(std::move(pick));
    }
    return lay;
}

inline Graph planted_graph(const GeneratorConfig& cfg, PlantedLayout* layout_out = nullptr) {
    Rng rng(derive_seed(cfg.seed, "planted"));
    auto lay = planted_layout(cfg, rng);
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    auto add = [&](NodeId s, NodeId t) {
        if (s != t && seen.insert(pair_key(s, t)).second) edges.push_back({s, t, random_weight(rng)});
    };
    for (const auto& c : lay.communities) {
        // spanning path keeps the community weakly connected
        for (std::size_t k = 1; k < c.size(); ++k) {
            if (uniform01(rng) < 0.5) add(c[k - 1], c[k]);
            else add(c[k], c[k - 1]);
        }
        for (NodeId a : c)
            for (NodeId b : c)
                if (a != b && uniform01(rng) < cfg.intra_density) add(a, b);
    }
    for (std::size_t i = 0; i < lay.targets.size(); ++i) {
        NodeId t = lay.targets[i];
        for (auto ci : lay.feeding[i])
            for (NodeId s : lay.communities[ci]) {
                add(s, t);
                if (uniform01(rng) < cfg.reciprocity) add(t, s);
            }
    }
    if (layout_out) *layout_out = std::move(lay);
    return Graph::from_edges(cfg.nodes, std::move(edges));
}

}  // namespace detail

inline Graph generate_graph(const GeneratorConfig& cfg) {
    switch (cfg.family) {
        case GraphFamily::two_clique: return detail::two_clique_graph(cfg);
        case GraphFamily::random_power_law: return detail::power_law_graph(cfg);
        case GraphFamily::planted_groups: return detail::planted_graph(cfg);
    }
    throw ParameterError("eventsim", "unknown family");
}

/// Planted graph plus the designated targets (ids [0, targets)) and the
/// number of communities feeding each.
struct PlantedGraph {
    Graph graph;
    std::vector<NodeId> targets;
    std::vector<std::size_t> planted_groups;
};

inline PlantedGraph generate_planted(const GeneratorConfig& cfg) {
    detail::PlantedLayout lay;
    PlantedGraph pg{detail::planted_graph(cfg, &lay), lay.targets, {}};
    for (const auto& f : lay.feeding) pg.planted_groups.push_back(f.size());
    return pg;
}

// ---------------------------------------------------------------------------
// Event simulation
// ---------------------------------------------------------------------------

/// Roles for an event on a planted graph: the planted targets as T and every
/// other node as S.
inline NodeSetRole planted_roles(const PlantedGraph& pg) {
    NodeSetRole r;
    r.targets = pg.targets;
    std::sort(r.targets.begin(), r.targets.end());
    for (NodeId v = 0; v < pg.graph.num_nodes(); ++v)
        if (!std::binary_search(r.targets.begin(), r.targets.end(), v)) r.sources.push_back(v);
    return r;
}

/// Every (s, t) with s in S, t in T and an edge s -> t, sorted by (s, t).
inline std::vector<std::pair<NodeId, NodeId>> event_pairs(const Graph& g, const NodeSetRole& roles) {
    std::vector<NodeId> sources = roles.sources, targets = roles.targets;
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    std::sort(targets.begin(), targets.end());
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId s : sources)
        for (NodeId t : eligible_targets(g, s, targets)) out.emplace_back(s, t);
    return out;
}


/// Exposure policy: given a source and its eligible targets (ascending),
/// returns the exposed subset.
using ExposurePolicy = std::function<std::vector<NodeId>(NodeId, const std::vector<NodeId>&, Rng&)>;

/// Uniform sample of min(k, |eligible|) targets without replacement.
inline ExposurePolicy random_exposure(std::size_t k) {
    return [k](NodeId, const std::vector<NodeId>& eligible, Rng& rng) {
        std::vector<NodeId> pool = eligible;
        auto take = std::min(k, pool.size());
        for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + uniform_below(rng, pool.size() - i)]);
        pool.resize(take);
        std::sort(pool.begin(), pool.end());
        return pool;
    };
}

/// Exposes the top-k window of a scorer.
inline ExposurePolicy recommender_exposure(const Graph& g, std::function<double(NodeId, NodeId)> score, std::size_t k) {
    return [&g, score = std::move(score), k](NodeId s, const std::vector<NodeId>& eligible, Rng&) {
        auto win = recommend_topk(g, s, eligible, k, score);
        std::vector<NodeId> out;
        for (const auto& [t, _] : win.ranked) out.push_back(t);
        std::sort(out.begin(), out.end());
        return out;
    };
}

/// One event over sources S and targets T. Every eligible pair (s -> t, t in T)
/// gets a row. Invitation and adoption draws come from a per-pair stream, so
/// two policies run under the same seed see the same user responses and
/// differ only in what they expose.
inline EventOutcome simulate_event(const Graph& g, const NodeSetRole& roles, const RecordIndex& truth,
                                   const BehaviorModel& invitation, const BehaviorModel& adoption,
                                   const ExposurePolicy& policy, std::uint64_t seed) {
    EventOutcome out;
    std::vector<NodeId> sources = roles.sources, targets = roles.targets;
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (NodeId s : sources) {
        auto eligible = eligible_targets(g, s, targets);
        if (eligible.empty()) continue;
        Rng exposure_rng(derive_seed(seed, {0x6578706fULL, s}));
        auto exposed = policy(s, eligible, exposure_rng);
        for (NodeId t : eligible) {
            PairOutcome p{s, t, std::binary_search(exposed.begin(), exposed.end(), t), false, false};
            if (p.exposed) {
                const MeasureRecord* rec = truth.find(s, t);
                MeasureRecord fallback = degenerate_record(s, t);
                const MeasureRecord& r = rec ? *rec : fallback;
                Rng pair_rng(derive_seed(seed, {0x62656861ULL, s, t}));
                double u_inv = uniform01(pair_rng);
                double u_adopt = uniform01(pair_rng);
                p.invited = u_inv < invitation.probability(r);
                p.adopted = p.invited && u_adopt < adoption.probability(r);
            }
            out.pairs.push_back(p);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Averaged CC size
// ---------------------------------------------------------------------------

enum class CcSizeMode { all_sources, inviting_sources };

struct CcSizeHistogram {
    std::vector<std::pair<NodeId, double>> per_target;  // targets with a defined ratio
    double bin_width = 1.0;
    std::vector<std::pair<double, std::size_t>> bins;   // (lower edge, count), ascending
};

/// Per target: (#sources considered) / (#WCCs over those sources). In inviting
/// mode only sources that invited the target count and the components are
/// taken over the ego network restricted to them; targets without inviting
/// sources are skipped.
inline CcSizeHistogram averaged_cc_size_distribution(const Graph& g, const std::vector<NodeId>& targets, CcSizeMode mode,
                                                     const EventOutcome* outcome = nullptr, double bin_width = 1.0) {
    if (mode == CcSizeMode::inviting_sources && !outcome)
        throw ParameterError("eventsim", "inviting-source mode requires an event outcome");
    if (!(bin_width > 0.0)) throw ParameterError("eventsim", "bin width must be positive");
    CcSizeHistogram h;
    h.bin_width = bin_width;
    std::map<long long, std::size_t> counts;
    for (NodeId t : targets) {
        auto eg = ego_network(g, t);
        if (mode == CcSizeMode::inviting_sources) {
            std::vector<NodeId> keep;
            for (NodeId s : eg.nodes) {
                const auto* p = outcome->find(s, t);
                if (p && p->invited) keep.push_back(s);
            }
            std::vector<Edge> kept_edges;
            for (const auto& e : eg.edges)
                if (std::binary_search(keep.begin(), keep.end(), e.src) && std::binary_search(keep.begin(), keep.end(), e.dst))
                    kept_edges.push_back(e);
            eg.nodes = std::move(keep);
            eg.edges = std::move(kept_edges);
        }
        if (eg.nodes.empty()) continue;
        auto comps = weakly_connected_components(eg);
        double avg = static_cast<double>(eg.nodes.size()) / static_cast<double>(comps.size());
        h.per_target.emplace_back(t, avg);
        ++counts[static_cast<long long>(std::floor(avg / bin_width))];
    }
    for (const auto& [b, c] : counts) h.bins.emplace_back(static_cast<double>(b) * bin_width, c);
    return h;
}

}  // namespace sitc

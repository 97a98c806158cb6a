#include "support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace sitc;
using sitc::test::graph_from_text;
using sitc::test::id;

namespace {

CandidateGroup group(NodeId t, std::vector<NodeId> sources, std::vector<Edge> edges = {}) {
    CandidateGroup g;
    g.target = t;
    g.sources = std::move(sources);
    g.edges = std::move(edges);
    return g;
}

/// delta from a symmetric lookup table keyed by unordered pair.
SimilarityFn table_delta(std::map<std::pair<NodeId, NodeId>, double> table) {
    return [table](NodeId a, NodeId b) {
        auto it = table.find({std::min(a, b), std::max(a, b)});
        return it == table.end() ? 0.0 : it->second;
    };
}

EmbeddingTable random_embeddings(std::size_t n, std::size_t dim, std::uint64_t seed) {
    EmbeddingTable t(n, dim);
    Rng rng(seed);
    for (NodeId v = 0; v < n; ++v)
        for (double& x : t.row(v)) x = uniform01(rng) - 0.5;
    return t;
}

/// Neighbor-set intersection computed with std::set.
std::size_t brute_common(const Graph& g, NodeId s, NodeId t) {
    auto nbrs = [&g](NodeId v) {
        std::set<NodeId> out;
        for (NodeId x : g.source_neighbors(v).ids) out.insert(x);
        for (NodeId x : g.target_neighbors(v).ids) out.insert(x);
        return out;
    };
    auto a = nbrs(s), b = nbrs(t);
    std::size_t c = 0;
    for (NodeId x : a) c += b.count(x);
    return c;
}

/// IGT spelled out over every ordered pair of distinct sources.
double brute_igt(const Graph& g, const CandidateGroup& grp, const SimilarityFn& delta) {
    if (grp.sources.size() < 2) return 0.0;
    double total = 0.0;
    for (NodeId j : grp.sources) {
        double num = 0.0, den = 0.0;
        for (NodeId i : grp.sources) {
            if (i == j) continue;
            double w = tie_weight(g, j, i);
            num += w * delta(j, i);
            den += w;
        }
        total += den > 0.0 ? num / den : 0.0;
    }
    return total / static_cast<double>(grp.sources.size());
}

}  // namespace

TEST(Measures, TieStrength) {
    auto g = graph_from_text("a b 0.7\nb c 1\n");
    EXPECT_DOUBLE_EQ(tie_strength(g, id(g, "a"), id(g, "b")), 0.7);
    EXPECT_DOUBLE_EQ(tie_strength(g, id(g, "b"), id(g, "c")), 1.0);
    EXPECT_THROW(tie_strength(g, id(g, "b"), id(g, "a")), LookupError);
}

TEST(Measures, CommonNeighbors) {
    auto disjoint = graph_from_text("s a 1\nt b 1\n");
    EXPECT_EQ(common_neighbors(disjoint, id(disjoint, "s"), id(disjoint, "t")), 0u);

    auto hub = graph_from_text("s x 1\nx s 1\nt x 1\nx t 1\n");
    EXPECT_EQ(common_neighbors(hub, id(hub, "s"), id(hub, "t")), 1u);

    std::string text;
    for (const char* a : {"a", "b", "c", "d"})
        for (const char* b : {"a", "b", "c", "d"})
            if (std::string(a) != b) text += std::string(a) + " " + b + " 1\n";
    auto clique = graph_from_text(text);
    for (NodeId s = 0; s < 4; ++s)
        for (NodeId t = 0; t < 4; ++t)
            if (s != t) {
                EXPECT_EQ(common_neighbors(clique, s, t), 2u);
            }

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto g = test::random_graph(12, 0.25, seed);
        for (NodeId s = 0; s < 12; ++s)
            for (NodeId t = 0; t < 12; ++t) ASSERT_EQ(common_neighbors(g, s, t), brute_common(g, s, t));
    }
}

TEST(Measures, TieWeightConvention) {
    auto g = graph_from_text("t a 0.3\na t 0.9\nb t 0.4\n");
    EXPECT_DOUBLE_EQ(tie_weight(g, id(g, "t"), id(g, "a")), 0.3);
    EXPECT_DOUBLE_EQ(tie_weight(g, id(g, "t"), id(g, "b")), 0.4);
    EXPECT_DOUBLE_EQ(tie_weight(g, id(g, "a"), id(g, "b")), 0.0);
}

TEST(Measures, UserGroupTie) {
    auto g = graph_from_text("a t 0.5\nb t 1\nc t 0.3\nx y 1\n");
    auto t = id(g, "t");
    EXPECT_DOUBLE_EQ(user_group_tie(g, group(t, {id(g, "a"), id(g, "b")})), 1.5);
    EXPECT_DOUBLE_EQ(user_group_tie(g, group(t, {id(g, "c")})), 0.3);
    EXPECT_DOUBLE_EQ(user_group_tie(g, group(t, {id(g, "x"), id(g, "y")})), 0.0);
}

TEST(Measures, GroupDensity) {
    auto g = graph_from_text("t a 0.5\na t 0.5\na b 0.5\n");
    auto t = id(g, "t"), a = id(g, "a"), b = id(g, "b");
    auto grp = group(t, {std::min(a, b), std::max(a, b)}, {{a, b, 0.5}});
    EXPECT_DOUBLE_EQ(group_density(g, grp), 0.25);

    std::string text;
    for (const char* x : {"t", "a", "b", "c"})
        for (const char* y : {"t", "a", "b", "c"})
            if (std::string(x) != y) text += std::string(x) + " " + y + " 1\n";
    auto k4 = graph_from_text(text);
    auto ga = categorize_target(k4, id(k4, "t"));
    ASSERT_EQ(ga.groups.size(), 1u);
    EXPECT_DOUBLE_EQ(group_density(k4, ga.groups[0]), 1.0);
}

TEST(Measures, MultiMembershipAndInclusiveness) {
    auto g = test::figure_one();
    auto ga = categorize_target(g, id(g, "v1"));
    EXPECT_EQ(multi_membership(ga), 2u);
    EXPECT_EQ(inclusiveness(ga.groups[0]), 4u);

    auto star = graph_from_text("a t 1\nb t 1\nc t 1\nd t 1\n");
    auto sa = categorize_target(star, id(star, "t"));
    EXPECT_EQ(multi_membership(sa), 4u);
    EXPECT_EQ(inclusiveness(sa.groups[0]), 2u);

    auto chain = graph_from_text("a t 1\nb t 1\nc t 1\na b 1\na c 1\n");
    auto ca = categorize_target(chain, id(chain, "t"));
    EXPECT_EQ(multi_membership(ca), 1u);
    EXPECT_EQ(inclusiveness(ca.groups[0]), 4u);

    EXPECT_EQ(multi_membership(categorize_target(chain, id(chain, "a"))), 0u);
}

TEST(Measures, UgtByHand) {
    auto g = graph_from_text("a t 0.5\nb t 1\n");
    auto t = id(g, "t"), a = id(g, "a"), b = id(g, "b");
    auto grp = group(t, {a, b});
    auto delta = table_delta({{{std::min(t, a), std::max(t, a)}, 0.4}, {{std::min(t, b), std::max(t, b)}, 0.8}});
    auto r = ugt(g, grp, delta);
    EXPECT_DOUBLE_EQ(r.mean, 1.0 / 1.5);
    EXPECT_NEAR(r.mean, 0.6667, 5e-5);
    EXPECT_DOUBLE_EQ(r.sum, 1.0);
    EXPECT_DOUBLE_EQ(r.weight_part, 0.75);
    EXPECT_NEAR(r.delta_part, 0.6, 1e-15);
    EXPECT_FALSE(r.zero_weight);
    EXPECT_DOUBLE_EQ(ugt(g, grp, delta, Aggregation::sum), 1.0);

    SimilarityFn constant = [](NodeId, NodeId) { return 0.37; };
    EXPECT_DOUBLE_EQ(ugt(g, grp, constant).mean, 0.37);

    auto h = graph_from_text("x y 1\nt z 1\n");
    auto zero = ugt(h, group(id(h, "t"), {id(h, "x"), id(h, "y")}), constant);
    EXPECT_TRUE(zero.zero_weight);
    EXPECT_EQ(zero.mean, 0.0);
}

TEST(Measures, IgtByHand) {
    SimilarityFn constant = [](NodeId, NodeId) { return 0.9; };
    auto single = igt(group(0, {1}), constant);
    EXPECT_TRUE(single.singleton);
    EXPECT_EQ(single.mean, 0.0);

    // {t, a, b} with a -> b and b -> a: each pivot sees only the other source
    auto g = graph_from_text("a t 1\nb t 1\na b 0.3\nb a 0.8\n");
    auto t = id(g, "t"), a = id(g, "a"), b = id(g, "b");
    auto ga = categorize_target(g, t);
    ASSERT_EQ(ga.groups.size(), 1u);
    auto delta = table_delta({{{std::min(a, b), std::max(a, b)}, 0.55}, {{std::min(t, a), std::max(t, a)}, 0.1}});
    EXPECT_DOUBLE_EQ(igt(ga.groups[0], delta).mean, 0.55);

    auto none = igt(group(t, {a, b}), constant);
    EXPECT_TRUE(none.no_intra_edges);
    EXPECT_EQ(none.mean, 0.0);
}

TEST(Measures, IgtMatchesDefinitionOnRandomGroups) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto g = test::random_graph(10, 0.35, seed + 70);
        auto emb = random_embeddings(10, 4, seed);
        SimilarityProvider p(SimilarityKind::cosine);
        p.fit_range(-1.0, 1.0);
        SimilarityFn delta = [&](NodeId i, NodeId j) { return p(emb, i, j); };
        for (NodeId t = 0; t < 10; ++t) {
            for (const auto& grp : categorize_target(g, t).groups) {
                auto r = igt(grp, delta);
                EXPECT_NEAR(r.mean, brute_igt(g, grp, delta), 1e-12);
                EXPECT_GE(r.mean, 0.0);
                EXPECT_LE(r.mean, 1.0);
                auto u = ugt(g, grp, delta);
                EXPECT_GE(u.mean, 0.0);
                EXPECT_LE(u.mean, 1.0 + 1e-15);
            }
        }
    }
}

TEST(Measures, ComputeAllEmptyAndMissingPair) {
    auto g = test::figure_one();
    auto emb = random_embeddings(g.num_nodes(), 4, 1);
    EXPECT_TRUE(compute_all(g, {}, emb).empty());
    EXPECT_THROW(compute_all(g, {{id(g, "v1"), id(g, "v3")}}, emb), LookupError);
}

TEST(Measures, ComputeAllFigureOne) {
    auto g = test::figure_one();
    auto emb = random_embeddings(g.num_nodes(), 4, 2);
    auto v1 = id(g, "v1");
    auto recs = compute_all(g, {{id(g, "v2"), v1}, {id(g, "v3"), v1}, {id(g, "v5"), v1}}, emb);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].source, id(g, "v2"));
    EXPECT_EQ(recs[0][Measure::cc_count], 2.0);
    EXPECT_EQ(recs[0][Measure::gs], 4.0);
    EXPECT_EQ(recs[2][Measure::gs], 3.0);
    for (auto m : {Measure::gs, Measure::gpr, Measure::gppr, Measure::igt, Measure::gd, Measure::gt, Measure::cc_count,
                   Measure::ugt, Measure::igt_euc})
        EXPECT_EQ(recs[0][m], recs[1][m]) << measure_name(m);
    EXPECT_DOUBLE_EQ(recs[0][Measure::tie], 0.8);
}

TEST(Measures, BatchEqualsPerPairOnRandomGraphs) {
    for (double push : {0.0, 1e-6}) {
        for (std::uint64_t seed = 0; seed < 12; ++seed) {
            auto g = test::random_graph(25, 0.15, seed + 300);
            auto emb = random_embeddings(25, 6, seed);
            MeasureConfig cfg;
            cfg.ppr_push_threshold = push;
            cfg.workers = 2;
            auto pairs = all_pairs(g);
            auto ctx = make_context(g, emb, cfg);
            fit_similarity(ctx, pairs);
            auto recs = compute_all(ctx, pairs);
            ASSERT_EQ(recs.size(), g.num_edges());
            for (const auto& r : recs) {
                auto single = compute_pair(ctx, r.source, r.target);
                ASSERT_EQ(r, single) << "pair " << r.source << "->" << r.target;
                EXPECT_GE(r[Measure::cc_count], 1.0);
                EXPECT_GE(r[Measure::gs], 2.0);
                for (double v : r.values) EXPECT_TRUE(std::isfinite(v));
                EXPECT_NEAR(r[Measure::gpr_sum], r[Measure::gpr] * (r[Measure::gs] - 1), 1e-15);
                EXPECT_NEAR(r[Measure::gppr_sum], r[Measure::gppr] * (r[Measure::gs] - 1), 1e-15);
                EXPECT_EQ(r[Measure::com], static_cast<double>(brute_common(g, r.source, r.target)));
                for (std::size_t m = 0; m < kMeasureCount; ++m) EXPECT_GE(r.values[m], 0.0) << kMeasureNames[m];
            }
        }
    }
}

TEST(Measures, GroupSharingAndOrdering) {
    auto g = test::random_graph(40, 0.12, 9);
    auto emb = random_embeddings(40, 8, 3);
    auto recs = compute_all(g, all_pairs(g), emb);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        const auto& a = recs[i - 1];
        const auto& b = recs[i];
        ASSERT_TRUE(std::tie(a.target, a.source) < std::tie(b.target, b.source));
        if (a.target != b.target || a.group_index != b.group_index) continue;
        for (auto m : {Measure::gs, Measure::gpr, Measure::gppr, Measure::igt, Measure::gd, Measure::gt,
                       Measure::cc_count, Measure::ugt, Measure::ugt_sum, Measure::igt_sum})
            EXPECT_EQ(a[m], b[m]);
    }
}

TEST(Measures, WorkerCountDoesNotChangeRecords) {
    auto g = test::random_graph(60, 0.08, 13);
    auto emb = random_embeddings(60, 8, 4);
    MeasureConfig one, four;
    one.workers = 1;
    four.workers = 4;
    EXPECT_EQ(compute_all(g, all_pairs(g), emb, one), compute_all(g, all_pairs(g), emb, four));
}

TEST(Measures, FeatureFileRoundTrip) {
    auto g = test::random_graph(20, 0.2, 5);
    auto emb = random_embeddings(20, 4, 5);
    auto recs = compute_all(g, all_pairs(g), emb);
    std::stringstream buf;
    buf << "# manifest: test\n";
    write_feature_file(g, recs, buf);
    auto back = read_feature_file(buf, g.dictionary());
    EXPECT_EQ(back, recs);

    std::istringstream bad("source\ttarget\tgroup\ttie\n");
    EXPECT_THROW(read_feature_file(bad, g.dictionary()), ParseError);
    std::istringstream empty("");
    EXPECT_THROW(read_feature_file(empty, g.dictionary()), ParseError);
}

TEST(Measures, NamesRoundTrip) {
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        auto m = find_measure(kMeasureNames[i]);
        ASSERT_TRUE(m.has_value());
        EXPECT_EQ(measure_name(*m), kMeasureNames[i]);
    }
    EXPECT_FALSE(find_measure("pagerank").has_value());
}

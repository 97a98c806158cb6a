#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace sitc;

namespace {

LabeledPair row(std::vector<double> x, int y) {
    LabeledPair p;
    p.features = std::move(x);
    p.label = y;
    return p;
}

TreeNode leaf(double v) {
    TreeNode n;
    n.value = v;
    return n;
}

TreeNode split(int f, double thr, int l, int r) {
    TreeNode n;
    n.feature = f;
    n.threshold = thr;
    n.left = l;
    n.right = r;
    return n;
}

TreeEnsemble model_with(std::vector<RegressionTree> trees, std::size_t d) {
    TreeEnsemble m;
    for (std::size_t f = 0; f < d; ++f) m.feature_names.push_back("f" + std::to_string(f));
    m.trees = std::move(trees);
    return m;
}

/// Noisy two-class data: the label depends on x0 + x1 plus a flip rate.
std::vector<LabeledPair> noisy_data(std::size_t n, double flip, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledPair> out;
    for (std::size_t i = 0; i < n; ++i) {
        double a = uniform01(rng), b = uniform01(rng), c = uniform01(rng);
        int y = a + b > 1.0;
        if (uniform01(rng) < flip) y = 1 - y;
        out.push_back(row({a, b, c}, y));
    }
    return out;
}

}  // namespace

TEST(Learn, LogisticLoss) {
    EXPECT_NEAR(logistic_loss(1, 0.0), 0.6931, 5e-5);
    EXPECT_NEAR(logistic_loss(0, 0.0), 0.6931, 5e-5);
    EXPECT_NEAR(logistic_loss(1, 2.0), 0.1269, 5e-5);
    EXPECT_NEAR(logistic_loss(1, 2.0), std::log(1.0 + std::exp(-2.0)), 1e-15);
    EXPECT_TRUE(std::isfinite(logistic_loss(0, 800.0)));
    EXPECT_NEAR(logistic_loss(0, 800.0), 800.0, 1e-9);
}

TEST(Learn, PredictExamples) {
    RegressionTree single;
    single.nodes = {leaf(0.7)};
    EXPECT_DOUBLE_EQ(predict(model_with({single}, 1), std::vector<double>{3.0}), 0.7);

    RegressionTree a, b;
    a.nodes = {leaf(0.3)};
    b.nodes = {leaf(-0.1)};
    EXPECT_NEAR(predict(model_with({a, b}, 1), std::vector<double>{0.0}), 0.2, 1e-15);

    EXPECT_EQ(predict(model_with({}, 2), std::vector<double>{1.0, 2.0}), 0.0);
    EXPECT_THROW(predict(model_with({single}, 2), std::vector<double>{1.0}), ValidationError);
}

TEST(Learn, PredictionIsSumOfTreeOutputs) {
    auto data = noisy_data(300, 0.1, 3);
    BoostingParams p;
    p.rounds = 15;
    p.max_depth = 3;
    auto m = train(data, p);
    ASSERT_FALSE(m.trees.empty());
    for (const auto& d : data) {
        double sum = 0.0;
        for (const auto& t : m.trees) sum += t.nodes[t.leaf_index(d.features)].value;
        EXPECT_EQ(predict(m, d.features), sum);
    }
}

TEST(Learn, GroupInclination) {
    RegressionTree t;
    t.nodes = {split(0, 0.5, 1, 2), leaf(0.2), leaf(0.4)};
    auto m = model_with({t}, 1);
    EXPECT_NEAR(group_inclination(m, {{0.0}, {1.0}}), 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(group_inclination(m, {{1.0}}), 0.4);

    RegressionTree c;
    c.nodes = {leaf(0.9)};
    EXPECT_DOUBLE_EQ(group_inclination(model_with({c}, 1), {{0.0}}), 0.9);
    EXPECT_DOUBLE_EQ(group_inclination(model_with({c}, 1), {{0.0}, {5.0}, {-2.0}}), 0.9);
    EXPECT_THROW(group_inclination(m, {}), ValidationError);
}

TEST(Learn, InclinationLiesBetweenMemberScores) {
    auto data = noisy_data(200, 0.1, 8);
    BoostingParams p;
    p.rounds = 10;
    p.max_depth = 2;
    auto m = train(data, p);
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> members;
        auto k = 1 + uniform_below(rng, 6);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < k; ++i) {
            members.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
            double s = predict(m, members.back());
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        double y = group_inclination(m, members);
        EXPECT_GE(y, lo - 1e-12);
        EXPECT_LE(y, hi + 1e-12);
    }
}

TEST(Learn, AucExamples) {
    std::vector<int> labels{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.8, 0.3, 0.1}, labels), 1.0);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.3, 0.8, 0.9}, labels), 0.0);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.8, 0.3, 0.1}, std::vector<int>{1, 0, 1, 0}), 0.75);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}), 0.5);
    EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), StateError);
    EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ValidationError);
}

TEST(Learn, RankAucMatchesBruteForce) {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto n = 2 + uniform_below(rng, 199);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        // coarse scores force plenty of ties
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(uniform_below(rng, trial % 2 ? 5 : 1000));
            labels[i] = static_cast<int>(uniform_below(rng, 2));
        }
        labels[0] = 1;
        labels[1] = 0;
        ASSERT_NEAR(auc(scores, labels), test::brute_force_auc(scores, labels), 1e-12) << "trial " << trial;
    }
}

TEST(Learn, EvaluateReportsMetrics) {
    RegressionTree t;
    t.nodes = {split(0, 0.5, 1, 2), leaf(-1.0), leaf(1.0)};
    auto m = model_with({t}, 1);
    std::vector<LabeledPair> test{row({0.0}, 0), row({1.0}, 1), row({1.0}, 0), row({0.0}, 0)};
    auto r = evaluate(m, test);
    ASSERT_TRUE(r.auc.has_value());
    EXPECT_DOUBLE_EQ(*r.auc, test::brute_force_auc(r.raw, {0, 1, 0, 0}));
    EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
    EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);  // tp=1 fp=1 fn=0

    auto single = evaluate(m, {row({0.0}, 0), row({1.0}, 0)});
    EXPECT_FALSE(single.auc.has_value());
    EXPECT_DOUBLE_EQ(single.accuracy, 0.5);
    EXPECT_THROW(evaluate(m, {}), ValidationError);

    // probability exactly 0.5 classifies as positive
    RegressionTree zero;
    zero.nodes = {leaf(0.0)};
    EXPECT_DOUBLE_EQ(evaluate(model_with({zero}, 1), {row({0.0}, 1)}).accuracy, 1.0);
}

TEST(Learn, FeatureImportance) {
    RegressionTree t;
    t.nodes = {split(0, 0.5, 1, 2), split(0, 0.2, 3, 4), split(1, 0.7, 5, 6), leaf(0), leaf(0), leaf(0), leaf(0)};
    std::size_t splits = 0;
    auto imp = feature_importance(model_with({t}, 2), &splits);
    EXPECT_EQ(splits, 3u);
    ASSERT_EQ(imp.size(), 2u);
    EXPECT_NEAR(imp[0].second, 0.667, 5e-4);
    EXPECT_NEAR(imp[1].second, 0.333, 5e-4);

    RegressionTree one;
    one.nodes = {split(0, 0.5, 1, 2), leaf(0), leaf(0)};
    EXPECT_DOUBLE_EQ(feature_importance(model_with({one}, 1))[0].second, 1.0);

    RegressionTree stump;
    stump.nodes = {leaf(1.0)};
    auto none = feature_importance(model_with({stump}, 2), &splits);
    EXPECT_EQ(splits, 0u);
    for (const auto& [_, v] : none) EXPECT_EQ(v, 0.0);

    BoostingParams p;
    p.rounds = 20;
    auto trained = train(noisy_data(400, 0.1, 12), p);
    double total = 0.0;
    for (const auto& [_, v] : feature_importance(trained)) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Learn, TrainingErrors) {
    BoostingParams p;
    EXPECT_THROW(train({row({1.0}, 1), row({2.0}, 1)}, p), StateError);
    EXPECT_THROW(train({row({1.0}, 1)}, p), StateError);
    EXPECT_THROW(train({row({1.0}, 1), row({std::nan("")}, 0)}, p), ValidationError);
    EXPECT_THROW(train({row({1.0}, 1), row({1.0, 2.0}, 0)}, p), ValidationError);
    EXPECT_THROW(train({row({1.0}, 2), row({1.0}, 0)}, p), ValidationError);
    EXPECT_THROW(train({row({1.0}, 1), row({0.0}, 0)}, p, {"a", "b"}), ValidationError);
    auto bad = p;
    bad.max_depth = 0;
    EXPECT_THROW(train({row({1.0}, 1), row({0.0}, 0)}, bad), ParameterError);
    bad = p;
    bad.learning_rate = 0.0;
    EXPECT_THROW(train({row({1.0}, 1), row({0.0}, 0)}, bad), ParameterError);
}

TEST(Learn, ObjectiveNeverIncreases) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        BoostingParams p;
        p.rounds = 30;
        p.max_depth = 1 + seed % 4;
        p.gamma = static_cast<double>(seed % 3) * 0.5;
        p.lambda = 0.5 + static_cast<double>(seed % 2);
        p.learning_rate = 0.05 + 0.1 * static_cast<double>(seed % 5);
        auto data = noisy_data(250, 0.2, seed);
        auto m = train(data, p);
        ASSERT_EQ(m.objective_history.size(), m.trees.size() + 1);
        for (std::size_t i = 1; i < m.objective_history.size(); ++i)
            EXPECT_LE(m.objective_history[i], m.objective_history[i - 1]) << "seed " << seed << " round " << i;
        EXPECT_NEAR(m.objective_history.back(), objective(m, data), 1e-6 * m.objective_history.back());
    }
}

TEST(Learn, SeparableTrainingAccuracy) {
    std::vector<LabeledPair> data;
    Rng rng(21);
    for (int i = 0; i < 500; ++i) {
        double a = uniform01(rng), b = uniform01(rng);
        data.push_back(row({a, b}, a > 0.4 && b < 0.7));
    }
    BoostingParams p;
    p.rounds = 20;
    p.max_depth = 3;
    p.learning_rate = 0.3;
    auto m = train(data, p);
    EXPECT_GE(evaluate(m, data).accuracy, 0.99);
}

TEST(Learn, LeavesStayWithinDepth) {
    BoostingParams p;
    p.rounds = 8;
    p.max_depth = 2;
    auto m = train(noisy_data(300, 0.2, 5), p);
    for (const auto& t : m.trees) {
        EXPECT_LE(t.depth(), 2u);
        EXPECT_LE(t.leaf_count(), 4u);
    }
}

TEST(Learn, TrainingIsDeterministic) {
    BoostingParams p;
    p.rounds = 10;
    p.subsample = 0.7;
    auto data = noisy_data(200, 0.1, 30);
    EXPECT_EQ(model_to_json(train(data, p)).dump(), model_to_json(train(data, p)).dump());
}

TEST(Learn, ModelJsonRoundTrip) {
    BoostingParams p;
    p.rounds = 12;
    p.max_depth = 3;
    auto m = train(noisy_data(300, 0.1, 77), p, {"x", "y", "z"});
    auto text = model_to_json(m).dump();
    auto back = model_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(model_to_json(back).dump(), text);
    EXPECT_EQ(back.feature_names, m.feature_names);
    auto data = noisy_data(50, 0.0, 78);
    for (const auto& d : data) EXPECT_EQ(predict(back, d.features), predict(m, d.features));

    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"format":"other"})")), ParseError);
    auto j = model_to_json(m);
    j["trees"][0][0]["feature"] = 9;
    EXPECT_THROW(model_from_json(j), ParseError);
    j = model_to_json(m);
    j.erase("params");
    EXPECT_THROW(model_from_json(j), ParseError);
}

TEST(Learn, BalancedSampleAndSplit) {
    std::vector<LabeledPair> data;
    for (int i = 0; i < 100; ++i) data.push_back(row({static_cast<double>(i)}, i % 5 == 0));
    auto bal = balanced_sample(data, 3);
    ASSERT_EQ(bal.size(), 40u);
    EXPECT_EQ(std::count_if(bal.begin(), bal.end(), [](const auto& r) { return r.label == 1; }), 20);
    for (std::size_t i = 1; i < bal.size(); ++i) EXPECT_LT(bal[i - 1].features[0], bal[i].features[0]);

    auto [tr, te] = train_test_split(bal, 0.8, 3);
    EXPECT_EQ(tr.size(), 32u);
    EXPECT_EQ(te.size(), 8u);
    std::vector<double> all;
    for (const auto& r : tr) all.push_back(r.features[0]);
    for (const auto& r : te) all.push_back(r.features[0]);
    std::sort(all.begin(), all.end());
    std::vector<double> expect;
    for (const auto& r : bal) expect.push_back(r.features[0]);
    EXPECT_EQ(all, expect);

    auto again = balanced_sample(data, 3);
    for (std::size_t i = 0; i < bal.size(); ++i) EXPECT_EQ(bal[i].features, again[i].features);
}

TEST(Learn, BehaviorNames) {
    EXPECT_EQ(parse_behavior(to_string(Behavior::adoption)), Behavior::adoption);
    EXPECT_EQ(parse_behavior(to_string(Behavior::invitation)), Behavior::invitation);
    EXPECT_THROW(parse_behavior("share"), ParameterError);
}

#pragma once

#include "sitc/error.hpp"
#include "sitc/graph.hpp"
#include "sitc/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sitc {

enum class Behavior { adoption, invitation };

inline std::string_view to_string(Behavior b) { return b == Behavior::adoption ? "adoption" : "invitation"; }

inline Behavior parse_behavior(std::string_view s) {
    if (s == "adoption") return Behavior::adoption;
    if (s == "invitation") return Behavior::invitation;
    throw ParameterError("learn", "unknown behavior '" + std::string(s) + "'");
}

struct LabeledPair {
    NodeId source = 0;
    NodeId target = 0;
    std::vector<double> features;
    int label = 0;
    Behavior behavior = Behavior::adoption;
};

/// softplus(x) = ln(1 + e^x), evaluated without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// y ln(1 + e^{-yhat}) + (1 - y) ln(1 + e^{yhat}).
inline double logistic_loss(int y, double yhat) {
    return y ? softplus(-yhat) : softplus(yhat);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;     // taken when x[feature] < threshold
    int right = -1;
    double value = 0.0;  // leaf parameter (already scaled by the learning rate)

    bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    /// Index of the leaf reached by x.
    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf()) {
            const auto& nd = nodes[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right);
        }
        return i;
    }

    double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
    }

    std::size_t depth() const {
        std::vector<std::size_t> d(nodes.size(), 0);
        std::size_t best = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            best = std::max(best, d[i]);
            if (!nodes[i].is_leaf()) {
                d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
                d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
            }
        }
        return best;
    }
};

struct BoostingParams {
    std::size_t rounds = 100;  // T
    std::size_t max_depth = 6; // h
    double learning_rate = 0.1;
    double lambda = 1.0;  // L2 coefficient
    double gamma = 0.0;   // per-leaf (L0) coefficient
    double min_child_weight = 1.0;
    double subsample = 1.0;
    std::uint64_t seed = 1;
};

struct TreeEnsemble {
    std::vector<std::string> feature_names;
    BoostingParams params;
    std::vector<RegressionTree> trees;
    std::vector<double> objective_history;  // training objective after each kept round, [0] = empty model

    std::size_t num_features() const noexcept { return feature_names.size(); }
};

/// sum_i Theta[i, q_i(x)].
inline double predict(const TreeEnsemble& model, std::span<const double> x) {
    if (x.size() != model.num_features())
        throw ValidationError("learn", "feature dimension " + std::to_string(x.size()) + " does not match model (" +
                                           std::to_string(model.num_features()) + ")");
    double y = 0.0;
    for (const auto& t : model.trees) y += t.predict(x);
    return y;
}

/// Gamma times the leaf count plus half lambda times the squared leaf
/// parameters, over all trees.
inline double regularization(const TreeEnsemble& model) {
    double leaves = 0.0, sq = 0.0;
    for (const auto& t : model.trees)
        for (const auto& n : t.nodes)
            if (n.is_leaf()) {
                leaves += 1.0;
                sq += n.value * n.value;
            }
    return model.params.gamma * leaves + 0.5 * model.params.lambda * sq;
}

/// Training objective: summed logistic loss plus regularization.
inline double objective(const TreeEnsemble& model, const std::vector<LabeledPair>& data) {
    double loss = 0.0;
    for (const auto& d : data) loss += logistic_loss(d.label, predict(model, d.features));
    return loss + regularization(model);
}

// ---------------------------------------------------------------------------
// Training: second-order exact greedy boosting
// ---------------------------------------------------------------------------

namespace detail {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

inline double leaf_score(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace detail

inline TreeEnsemble train(const std::vector<LabeledPair>& data, const BoostingParams& params,
                          std::vector<std::string> feature_names = {}) {
    if (data.size() < 2) throw StateError("learn", "training error: need at least 2 examples");
    const std::size_t d = data.front().features.size();
    std::size_t positives = 0;
    for (const auto& ex : data) {
        if (ex.features.size() != d) throw ValidationError("learn", "inconsistent feature dimension");
        if (ex.label != 0 && ex.label != 1) throw ValidationError("learn", "labels must be 0 or 1");
        for (double x : ex.features)
            if (!std::isfinite(x)) throw ValidationError("learn", "non-finite feature value");
        positives += static_cast<std::size_t>(ex.label);
    }
    if (positives == 0 || positives == data.size())
        throw StateError("learn", "training error: both classes must be present");
    if (params.max_depth < 1) throw ParameterError("learn", "max depth must be >= 1");
    if (!(params.learning_rate > 0.0) || !(params.lambda >= 0.0) || !(params.gamma >= 0.0))
        throw ParameterError("learn", "learning rate must be positive, lambda and gamma non-negative");
    if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw ParameterError("learn", "subsample must lie in (0,1]");

    if (feature_names.empty())
        for (std::size_t f = 0; f < d; ++f) feature_names.push_back("f" + std::to_string(f));
    if (feature_names.size() != d) throw ValidationError("learn", "feature name count does not match dimension");

    TreeEnsemble model;
    model.feature_names = std::move(feature_names);
    model.params = params;

    const std::size_t n = data.size();
    // Presorted order per feature; stable so equal values keep row order.
    std::vector<std::vector<std::uint32_t>> order(d, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < d; ++f) {
        std::iota(order[f].begin(), order[f].end(), 0u);
        std::stable_sort(order[f].begin(), order[f].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return data[a].features[f] < data[b].features[f]; });
    }

    std::vector<double> yhat(n, 0.0), grad(n), hess(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += logistic_loss(data[i].label, 0.0);
    double prev_objective = loss;
    model.objective_history.push_back(prev_objective);
    double reg = 0.0;
    Rng rng(derive_seed(params.seed, "subsample"));

    std::vector<int> node_of(n);
    for (std::size_t round = 0; round < params.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(yhat[i]);
            grad[i] = p - data[i].label;
            hess[i] = p * (1.0 - p);
        }
        if (params.subsample < 1.0)
            for (std::size_t i = 0; i < n; ++i)
                if (uniform01(rng) >= params.subsample) grad[i] = hess[i] = 0.0;

        RegressionTree tree;
        struct Stat {
            double g = 0.0, h = 0.0;
        };
        std::vector<Stat> stats(1);
        tree.nodes.emplace_back();
        std::fill(node_of.begin(), node_of.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            stats[0].g += grad[i];
            stats[0].h += hess[i];
        }
        std::vector<int> frontier{0};
        for (std::size_t depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
            // per-node scan state, indexed by tree node id
            std::vector<detail::SplitCandidate> best(tree.nodes.size());
            std::vector<char> open(tree.nodes.size(), 0);
            for (int id : frontier) open[static_cast<std::size_t>(id)] = 1;
            struct Scan {
                double gl = 0.0, hl = 0.0, last = 0.0;
                bool seen = false;
            };
            std::vector<Scan> scan(tree.nodes.size());
            for (std::size_t f = 0; f < d; ++f) {
                for (int id : frontier) scan[static_cast<std::size_t>(id)] = Scan{};
                for (auto row : order[f]) {
                    auto id = static_cast<std::size_t>(node_of[row]);
                    if (!open[id]) continue;
                    auto& s = scan[id];
                    double x = data[row].features[f];
                    if (s.seen && x > s.last) {
                        double gr = stats[id].g - s.gl, hr = stats[id].h - s.hl;
                        if (s.hl >= params.min_child_weight && hr >= params.min_child_weight) {
                            double gain = 0.5 * (detail::leaf_score(s.gl, s.hl, params.lambda) +
                                                 detail::leaf_score(gr, hr, params.lambda) -
                                                 detail::leaf_score(stats[id].g, stats[id].h, params.lambda)) -
                                          params.gamma;
                            if (gain > best[id].gain) {
                                double thr = s.last + (x - s.last) / 2.0;
                                if (!(s.last < thr && thr <= x)) thr = x;
                                best[id] = {gain, static_cast<int>(f), thr};
                            }
                        }
                    }
                    s.gl += grad[row];
                    s.hl += hess[row];
                    s.last = x;
                    s.seen = true;
                }
            }
            std::vector<int> next;
            for (int id : frontier) {
                const auto& b = best[static_cast<std::size_t>(id)];
                if (b.feature < 0) continue;
                int l = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                stats.resize(tree.nodes.size());
                auto& nd = tree.nodes[static_cast<std::size_t>(id)];
                nd.feature = b.feature;
                nd.threshold = b.threshold;
                nd.left = l;
                nd.right = l + 1;
                next.push_back(l);
                next.push_back(l + 1);
            }
            if (next.empty()) break;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node_of[i])];
                if (nd.is_leaf()) continue;
                if (node_of[i] >= static_cast<int>(open.size()) || !open[static_cast<std::size_t>(node_of[i])]) continue;
                node_of[i] = data[i].features[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
                stats[static_cast<std::size_t>(node_of[i])].g += grad[i];
                stats[static_cast<std::size_t>(node_of[i])].h += hess[i];
            }
            frontier = std::move(next);
        }
        double tree_reg = 0.0;
        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& nd = tree.nodes[id];
            if (!nd.is_leaf()) continue;
            nd.value = -params.learning_rate * stats[id].g / (stats[id].h + params.lambda);
            tree_reg += params.gamma + 0.5 * params.lambda * nd.value * nd.value;
        }

        std::vector<double> trial(n);
        double trial_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            trial[i] = yhat[i] + tree.nodes[node_of[i]].value;
            trial_loss += logistic_loss(data[i].label, trial[i]);
        }
        double trial_objective = trial_loss + reg + tree_reg;
        // A round that would raise the objective ends training.
        if (trial_objective > prev_objective) break;
        yhat.swap(trial);
        reg += tree_reg;
        prev_objective = trial_objective;
        model.objective_history.push_back(trial_objective);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Inference and evaluation
// ---------------------------------------------------------------------------

/// Mean predicted score over the group's member pairs.
inline double group_inclination(const TreeEnsemble& model, const std::vector<std::vector<double>>& member_features) {
    if (member_features.empty()) throw ValidationError("learn", "group inclination needs member features");
    double total = 0.0;
    for (const auto& x : member_features) total += predict(model, x);
    return total / static_cast<double>(member_features.size());
}

/// Rank-statistic AUC with tied scores sharing their average rank.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("learn", "scores and labels differ in length");
    std::size_t pos = 0;
    for (int y : labels) pos += static_cast<std::size_t>(y != 0);
    std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw StateError("learn", "AUC undefined: test set has a single class");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (auto k = i; k < j; ++k)
            if (labels[idx[k]]) rank_sum += avg_rank;
        i = j;
    }
    auto p = static_cast<double>(pos), q = static_cast<double>(neg);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

struct PredictionReport {
    std::vector<double> raw;          // log-odds
    std::vector<double> probability;
    std::optional<double> auc;        // empty when the test set has one class
    double accuracy = 0.0;
    double f1 = 0.0;
};

inline PredictionReport evaluate(const TreeEnsemble& model, const std::vector<LabeledPair>& test) {
    if (test.empty()) throw ValidationError("learn", "empty test set");
    PredictionReport r;
    std::vector<int> labels;
    std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
    for (const auto& ex : test) {
        double y = predict(model, ex.features);
        double p = sigmoid(y);
        r.raw.push_back(y);
        r.probability.push_back(p);
        labels.push_back(ex.label);
        bool predicted = p >= 0.5;
        bool actual = ex.label != 0;
        correct += predicted == actual;
        tp += predicted && actual;
        fp += predicted && !actual;
        fn += !predicted && actual;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    r.f1 = tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (pos > 0 && pos < labels.size()) r.auc = sitc::auc(r.raw, labels);
    return r;
}

/// Split-count importance normalized to sum 1. `splits` reports the raw total;
/// a model without splits yields all zeros.
inline std::vector<std::pair<std::string, double>> feature_importance(const TreeEnsemble& model,
                                                                      std::size_t* splits = nullptr) {
    std::vector<double> counts(model.num_features(), 0.0);
    double total = 0.0;
    for (const auto& t : model.trees)
        for (const auto& n : t.nodes)
            if (!n.is_leaf()) {
                counts[static_cast<std::size_t>(n.feature)] += 1.0;
                total += 1.0;
            }
    if (splits) *splits = static_cast<std::size_t>(total);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t f = 0; f < counts.size(); ++f)
        out.emplace_back(model.feature_names[f], total > 0.0 ? counts[f] / total : 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling protocol
// ---------------------------------------------------------------------------

/// All positives plus an equal number of negatives drawn without replacement
/// (or all negatives and an equal number of positives when negatives are the
/// minority). Output order is the input order of the kept rows.
inline std::vector<LabeledPair> balanced_sample(const std::vector<LabeledPair>& data, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].label ? pos : neg).push_back(i);
    Rng rng(derive_seed(seed, "balance"));
    auto draw = [&rng](std::vector<std::size_t>& v, std::size_t k) {
        for (std::size_t i = 0; i < k && i < v.size(); ++i) {
            auto j = i + uniform_below(rng, v.size() - i);
            std::swap(v[i], v[j]);
        }
        v.resize(std::min(k, v.size()));
        std::sort(v.begin(), v.end());
    };
    if (neg.size() >= pos.size()) draw(neg, pos.size());
    else draw(pos, neg.size());
    std::vector<std::size_t> keep;
    std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(keep));
    std::vector<LabeledPair> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(data[i]);
    return out;
}

/// Seeded shuffle then split: the first `train_fraction` go to training.
inline std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> train_test_split(std::vector<LabeledPair> data,
                                                                                      double train_fraction,
                                                                                      std::uint64_t seed) {
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t i = data.size(); i > 1; --i) std::swap(data[i - 1], data[uniform_below(rng, i)]);
    auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
    std::vector<LabeledPair> test(std::make_move_iterator(data.begin() + static_cast<std::ptrdiff_t>(cut)),
                                  std::make_move_iterator(data.end()));
    data.resize(cut);
    return {std::move(data), std::move(test)};
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

inline constexpr const char* kModelFormat = "sitc-gbdt";
inline constexpr int kModelVersion = 1;

inline nlohmann::json model_to_json(const TreeEnsemble& model) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["feature_names"] = model.feature_names;
    const auto& p = model.params;
    j["params"] = {{"rounds", p.rounds},     {"max_depth", p.max_depth}, {"learning_rate", p.learning_rate},
                   {"lambda", p.lambda},     {"gamma", p.gamma},         {"min_child_weight", p.min_child_weight},
                   {"subsample", p.subsample}, {"seed", p.seed}};
    j["objective_history"] = model.objective_history;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : model.trees) {
        auto nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) nodes.push_back({{"leaf", n.value}});
            else nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
        }
        trees.push_back(std::move(nodes));
    }
    return j;
}

inline TreeEnsemble model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != kModelFormat) throw ParseError("learn", "not a model file");
        if (j.at("version") != kModelVersion) throw ParseError("learn", "unsupported model version");
        TreeEnsemble m;
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& p = j.at("params");
        m.params.rounds = p.at("rounds");
        m.params.max_depth = p.at("max_depth");
        m.params.learning_rate = p.at("learning_rate");
        m.params.lambda = p.at("lambda");
        m.params.gamma = p.at("gamma");
        m.params.min_child_weight = p.at("min_child_weight");
        m.params.subsample = p.at("subsample");
        m.params.seed = p.at("seed");
        m.objective_history = j.at("objective_history").get<std::vector<double>>();
        for (const auto& jt : j.at("trees")) {
            RegressionTree t;
            for (const auto& jn : jt) {
                TreeNode n;
                if (jn.contains("leaf")) n.value = jn.at("leaf");
                else {
                    n.feature = jn.at("feature");
                    n.threshold = jn.at("threshold");
                    n.left = jn.at("left");
                    n.right = jn.at("right");
                    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= m.feature_names.size())
                        throw ParseError("learn", "split feature out of range");
                }
                t.nodes.push_back(n);
            }
            for (const auto& n : t.nodes)
                if (!n.is_leaf() && (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= t.nodes.size() ||
                                     static_cast<std::size_t>(n.right) >= t.nodes.size()))
                    throw ParseError("learn", "child index out of range");
            if (t.nodes.empty()) throw ParseError("learn", "empty tree");
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("learn", std::string("malformed model: ") + e.what());
    }
}

}  // namespace sitc

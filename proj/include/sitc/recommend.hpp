#pragma once

#include "sitc/boosting.hpp"
#include "sitc/graph.hpp"
#include "sitc/measures.hpp"
#include "sitc/outcome.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace sitc {

/// Values of `names` (measure columns) from a record, in that order.
inline std::vector<double> feature_vector(const MeasureRecord& rec, const std::vector<std::string>& names) {
    std::vector<double> x;
    x.reserve(names.size());
    for (const auto& n : names) {
        auto m = find_measure(n);
        if (!m) throw LookupError("recommend", "unknown feature '" + n + "'");
        x.push_back(rec[*m]);
    }
    return x;
}

inline constexpr std::uint64_t pair_key(NodeId s, NodeId t) noexcept {
    return (static_cast<std::uint64_t>(s) << 32) | t;
}

/// Indexes measure records by (source, target).
class RecordIndex {
public:
    RecordIndex() = default;
    explicit RecordIndex(const std::vector<MeasureRecord>& records) : records_(&records) {
        index_.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) index_.emplace(pair_key(records[i].source, records[i].target), i);
    }

    const MeasureRecord* find(NodeId s, NodeId t) const {
        auto it = index_.find(pair_key(s, t));
        return it == index_.end() ? nullptr : &(*records_)[it->second];
    }

    const std::vector<MeasureRecord>& records() const { return *records_; }

private:
    const std::vector<MeasureRecord>* records_ = nullptr;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// A pair without a computed record is scored from an all-zero record flagged
/// kNoGroup, so every eligible pair receives a score.
inline MeasureRecord degenerate_record(NodeId s, NodeId t) {
    MeasureRecord r;
    r.source = s;
    r.target = t;
    r.flags = kNoGroup;
    return r;
}

/// Scores pairs with a trained model over their measure records.
class PairScorer {
public:
    PairScorer(const TreeEnsemble& model, const RecordIndex& index) : model_(&model), index_(&index) {}

    double score(NodeId s, NodeId t) const {
        const MeasureRecord* rec = index_->find(s, t);
        if (rec) return predict(*model_, feature_vector(*rec, model_->feature_names));
        return predict(*model_, feature_vector(degenerate_record(s, t), model_->feature_names));
    }

private:
    const TreeEnsemble* model_;
    const RecordIndex* index_;
};

struct FeedWindow {
    NodeId source = 0;
    std::vector<std::pair<NodeId, double>> ranked;  // (target, score), best first
};

/// Target neighbors of `source` that belong to `targets` (sorted ascending).
inline std::vector<NodeId> eligible_targets(const Graph& g, NodeId source, const std::vector<NodeId>& targets) {
    std::vector<NodeId> out;
    for (NodeId t : g.target_neighbors(source).ids)
        if (std::binary_search(targets.begin(), targets.end(), t)) out.push_back(t);
    return out;
}

/// Top-k eligible targets by score; ties go to the smaller node id.
template <typename ScoreFn>
FeedWindow recommend_topk(const Graph& g, NodeId source, const std::vector<NodeId>& sorted_targets, std::size_t k,
                          ScoreFn&& score) {
    if (k < 1) throw ParameterError("recommend", "k must be >= 1");
    FeedWindow win;
    win.source = source;
    for (NodeId t : eligible_targets(g, source, sorted_targets)) win.ranked.emplace_back(t, score(source, t));
    std::sort(win.ranked.begin(), win.ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (win.ranked.size() > k) win.ranked.resize(k);
    return win;
}

inline FeedWindow recommend_topk(const Graph& g, const PairScorer& scorer, NodeId source,
                                 const std::vector<NodeId>& sorted_targets, std::size_t k) {
    return recommend_topk(g, source, sorted_targets, k, [&](NodeId s, NodeId t) { return scorer.score(s, t); });
}

inline void write_recommendations(const Graph& g, const std::vector<FeedWindow>& windows, std::ostream& out) {
    char buf[32];
    for (const auto& w : windows)
        for (std::size_t r = 0; r < w.ranked.size(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g", w.ranked[r].second);
            out << g.name(w.source) << '\t' << g.name(w.ranked[r].first) << '\t' << r + 1 << '\t' << buf << '\n';
        }
}

}  // namespace sitc

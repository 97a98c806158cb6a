#pragma once

#include "sitc/boosting.hpp"
#include "sitc/eventsim.hpp"
#include "sitc/measures.hpp"
#include "sitc/outcome.hpp"
#include "sitc/recommend.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sitc {

inline constexpr std::size_t kLevels = 5;

/// Equal-frequency five-level binning. A run of tied scores never straddles a
/// cut; it falls wholly into the lower level.
struct LevelBinning {
    std::string measure;
    std::array<double, kLevels - 1> cuts{};  // level(x) = #cuts strictly below x
    std::vector<std::size_t> level;          // per input score
    std::array<std::size_t, kLevels> counts{};

    bool present(std::size_t l) const { return counts[l] > 0; }

    std::size_t level_of(double x) const {
        std::size_t l = 0;
        for (double c : cuts) l += x > c;
        return l;
    }
};

inline LevelBinning discretize(const std::vector<double>& scores, std::string measure = {}) {
    if (scores.size() < kLevels) throw ValidationError("analyze", "discretization needs at least 5 scores");
    for (double s : scores)
        if (!std::isfinite(s)) throw ValidationError("analyze", "non-finite score");
    LevelBinning b;
    b.measure = std::move(measure);
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    for (std::size_t i = 1; i < kLevels; ++i) b.cuts[i - 1] = sorted[i * n / kLevels - 1];
    b.level.reserve(n);
    for (double s : scores) {
        auto l = b.level_of(s);
        b.level.push_back(l);
        ++b.counts[l];
    }
    return b;
}

struct ConversionCurve {
    std::string measure;
    std::string behavior;
    std::array<std::size_t, kLevels> pairs{};
    std::array<std::size_t, kLevels> positives{};
    std::array<std::optional<double>, kLevels> probability{};  // empty for an absent level
};

inline ConversionCurve conversion_curve(const LevelBinning& binning, const std::vector<int>& labels,
                                        std::string behavior = {}) {
    if (labels.size() != binning.level.size())
        throw ValidationError("analyze", "labels (" + std::to_string(labels.size()) + ") misaligned with scores (" +
                                             std::to_string(binning.level.size()) + ")");
    ConversionCurve c;
    c.measure = binning.measure;
    c.behavior = std::move(behavior);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++c.pairs[binning.level[i]];
        c.positives[binning.level[i]] += labels[i] != 0;
    }
    for (std::size_t l = 0; l < kLevels; ++l)
        if (c.pairs[l] > 0) c.probability[l] = static_cast<double>(c.positives[l]) / static_cast<double>(c.pairs[l]);
    return c;
}

/// True when every pair of consecutive present levels is non-decreasing.
inline bool non_decreasing(const ConversionCurve& c) {
    std::optional<double> prev;
    for (const auto& p : c.probability) {
        if (!p) continue;
        if (prev && *p < *prev) return false;
        prev = p;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Feature sets
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& sit_dimensions() {
    static const std::vector<std::string> v = {"cc_count", "gs", "gpr", "gppr", "ugt", "igt"};
    return v;
}

inline const std::vector<std::string>& split_measures() {
    static const std::vector<std::string> v = {"ugt_w", "ugt_delta", "igt_w", "igt_delta"};
    return v;
}

inline std::vector<std::string> feature_set(std::string_view name) {
    if (name == "sit") return sit_dimensions();
    if (name == "sit_sum") return {"cc_count", "gs", "gpr_sum", "gppr_sum", "ugt_sum", "igt_sum"};
    if (name == "sit_euc") return {"cc_count", "gs", "gpr", "gppr", "ugt_euc", "igt_euc"};
    if (name == "competitors") return {"tie", "com", "ppr", "n2v_cos", "n2v_euc", "cc_count", "gt", "gd"};
    if (name == "individual") return {"tie", "com", "ppr", "n2v_euc"};
    if (name == "all") return {kMeasureNames.begin(), kMeasureNames.end()};
    if (name.starts_with("only_")) {
        auto m = std::string(name.substr(5));
        if (!find_measure(m)) throw ParameterError("analyze", "unknown measure '" + m + "'");
        return {m};
    }
    throw ParameterError("analyze", "unknown feature set '" + std::string(name) + "'");
}

/// Exposed pairs with a record, labeled by the behavior.
inline std::vector<LabeledPair> labeled_pairs(const RecordIndex& index, const EventOutcome& outcome, Behavior behavior,
                                              const std::vector<std::string>& features) {
    std::vector<LabeledPair> out;
    for (const auto& p : outcome.pairs) {
        if (!p.exposed) continue;
        const MeasureRecord* rec = index.find(p.source, p.target);
        if (!rec) continue;
        LabeledPair lp;
        lp.source = p.source;
        lp.target = p.target;
        lp.features = feature_vector(*rec, features);
        lp.label = behavior == Behavior::adoption ? p.adopted : p.invited;
        lp.behavior = behavior;
        out.push_back(std::move(lp));
    }
    return out;
}

struct Metrics {
    double auc = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
};

struct ProtocolResult {
    Metrics mean;
    std::vector<Metrics> runs;
    std::vector<std::pair<std::string, double>> importance;  // mean over runs
    TreeEnsemble first_model;
};

/// Balanced sampling, 80/20 split, training and evaluation, repeated with
/// seeds derived from `seed`; reports the mean.
inline ProtocolResult run_protocol(const std::vector<LabeledPair>& data, const std::vector<std::string>& features,
                                   const BoostingParams& params, std::uint64_t seed, std::size_t repetitions = 3) {
    if (repetitions == 0) throw ParameterError("analyze", "need at least one repetition");
    ProtocolResult res;
    std::vector<double> imp(features.size(), 0.0);
    for (std::size_t r = 0; r < repetitions; ++r) {
        auto rs = derive_seed(seed, {0x726570ULL, r});
        auto balanced = balanced_sample(data, rs);
        auto [train_set, test_set] = train_test_split(std::move(balanced), 0.8, rs);
        auto p = params;
        p.seed = rs;
        auto model = train(train_set, p, features);
        auto rep = evaluate(model, test_set);
        if (!rep.auc) throw StateError("analyze", "test split has a single class");
        res.runs.push_back({*rep.auc, rep.accuracy, rep.f1});
        auto fi = feature_importance(model);
        for (std::size_t f = 0; f < fi.size(); ++f) imp[f] += fi[f].second;
        if (r == 0) res.first_model = std::move(model);
    }
    for (const auto& m : res.runs) {
        res.mean.auc += m.auc;
        res.mean.accuracy += m.accuracy;
        res.mean.f1 += m.f1;
    }
    auto k = static_cast<double>(res.runs.size());
    res.mean.auc /= k;
    res.mean.accuracy /= k;
    res.mean.f1 /= k;
    for (std::size_t f = 0; f < features.size(); ++f) res.importance.emplace_back(features[f], imp[f] / k);
    return res;
}

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct ReportConfig {
    std::vector<std::string> feature_sets = {"sit", "sit_sum", "sit_euc", "competitors", "individual"};
    bool single_dimensions = true;
    BoostingParams params;
    std::uint64_t seed = 1;
    std::size_t repetitions = 3;
    double cc_bin_width = 1.0;
};

struct MetricsRow {
    std::string behavior;
    std::string feature_set;
    Metrics metrics;
};

struct AnalysisBundle {
    std::vector<MetricsRow> metrics;
    std::vector<std::tuple<std::string, std::string, double>> importance;  // behavior, feature, value
    std::vector<ConversionCurve> curves;
    CcSizeHistogram cc_all;
    CcSizeHistogram cc_inviting;
};

inline AnalysisBundle report(const Graph& g, const std::vector<MeasureRecord>& records, const EventOutcome& outcome,
                             const std::vector<NodeId>& targets, const ReportConfig& cfg,
                             const TreeEnsemble* supplied_model = nullptr) {
    if (records.empty()) throw ValidationError("analyze", "missing input: no measure records");
    if (outcome.pairs.empty()) throw ValidationError("analyze", "missing input: empty event outcome");
    RecordIndex index(records);
    AnalysisBundle b;
    for (Behavior behavior : {Behavior::adoption, Behavior::invitation}) {
        auto bname = std::string(to_string(behavior));
        std::vector<std::string> sets = cfg.feature_sets;
        if (cfg.single_dimensions)
            for (const auto& d : sit_dimensions()) sets.push_back("only_" + d);
        for (const auto& set : sets) {
            auto features = feature_set(set);
            auto data = labeled_pairs(index, outcome, behavior, features);
            auto res = run_protocol(data, features, cfg.params, derive_seed(cfg.seed, bname), cfg.repetitions);
            b.metrics.push_back({bname, set, res.mean});
            if (set == "sit")
                for (const auto& [f, v] : res.importance) b.importance.emplace_back(bname, f, v);
        }
        if (supplied_model) {
            auto data = labeled_pairs(index, outcome, behavior, supplied_model->feature_names);
            auto rep = evaluate(*supplied_model, data);
            b.metrics.push_back({bname, "supplied_model", {rep.auc.value_or(0.0), rep.accuracy, rep.f1}});
        }

        // curves over all exposed pairs (no rebalancing)
        std::vector<std::string> curve_measures = sit_dimensions();
        curve_measures.insert(curve_measures.end(), split_measures().begin(), split_measures().end());
        auto all = labeled_pairs(index, outcome, behavior, curve_measures);
        std::vector<int> labels;
        for (const auto& lp : all) labels.push_back(lp.label);
        for (std::size_t m = 0; m < curve_measures.size(); ++m) {
            std::vector<double> scores;
            for (const auto& lp : all) scores.push_back(lp.features[m]);
            b.curves.push_back(conversion_curve(discretize(scores, curve_measures[m]), labels, bname));
        }
    }
    b.cc_all = averaged_cc_size_distribution(g, targets, CcSizeMode::all_sources, nullptr, cfg.cc_bin_width);
    b.cc_inviting = averaged_cc_size_distribution(g, targets, CcSizeMode::inviting_sources, &outcome, cfg.cc_bin_width);
    return b;
}

namespace detail {

inline std::string fmt4(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// Writes metrics.tsv, importance.tsv, conversion_<measure>_<behavior>.tsv and
/// ccsize_hist.tsv under `dir`. Returns the written file names.
inline std::vector<std::string> write_bundle(const AnalysisBundle& b, const std::filesystem::path& dir,
                                             const std::string& manifest_name = {}) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        std::ofstream out(dir / name);
        if (!out) throw IoError("analyze", "cannot write '" + (dir / name).string() + "'");
        if (!manifest_name.empty()) out << "# manifest: " << manifest_name << '\n';
        files.push_back(name);
        return out;
    };
    {
        auto out = open("metrics.tsv");
        out << "behavior\tfeature_set\tauc\taccuracy\tf1\n";
        for (const auto& r : b.metrics)
            out << r.behavior << '\t' << r.feature_set << '\t' << detail::fmt4(r.metrics.auc) << '\t'
                << detail::fmt4(r.metrics.accuracy) << '\t' << detail::fmt4(r.metrics.f1) << '\n';
    }
    {
        auto out = open("importance.tsv");
        out << "behavior\tfeature\timportance\n";
        for (const auto& [beh, f, v] : b.importance) out << beh << '\t' << f << '\t' << detail::fmt4(v) << '\n';
    }
    for (const auto& c : b.curves) {
        auto out = open("conversion_" + c.measure + "_" + c.behavior + ".tsv");
        out << "level\tpairs\tpositives\tprobability\n";
        for (std::size_t l = 0; l < kLevels; ++l)
            out << l + 1 << '\t' << c.pairs[l] << '\t' << c.positives[l] << '\t'
                << (c.probability[l] ? detail::fmt17(*c.probability[l]) : std::string("absent")) << '\n';
    }
    {
        auto out = open("ccsize_hist.tsv");
        out << "mode\tbin_lower\tcount\n";
        for (const auto& [lo, c] : b.cc_all.bins) out << "all_sources\t" << detail::fmt17(lo) << '\t' << c << '\n';
        for (const auto& [lo, c] : b.cc_inviting.bins) out << "inviting_sources\t" << detail::fmt17(lo) << '\t' << c << '\n';
    }
    return files;
}

}  // namespace sitc

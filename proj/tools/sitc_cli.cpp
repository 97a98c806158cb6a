// sitc: command-line front end over the sitc library.

#include "sitc/sitc.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace fs = std::filesystem;
using namespace sitc;

namespace {

/// Per-run state: resolved configuration, output directory and the manifest
/// being assembled.
struct Run {
    RunConfig cfg;
    fs::path dir;
    Manifest manifest;

    std::string manifest_name() const { return manifest.file_name(); }

    /// Opens an artifact for writing and stamps it with the manifest name.
    std::ofstream artifact(const std::string& name, bool stamp = true) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw IoError("cli", "cannot write '" + (dir / name).string() + "'");
        if (stamp) out << "# manifest: " << manifest_name() << '\n';
        manifest.artifacts.push_back(name);
        return out;
    }

    void set_graph(const Graph& g) { manifest.graph_hash = hex64(g.content_hash()); }

    void finish() {
        std::ofstream out(dir / manifest_name(), std::ios::binary);
        if (!out) throw IoError("cli", "cannot write '" + (dir / manifest_name()).string() + "'");
        out << manifest.to_json(cfg).dump(1) << '\n';
    }
};

std::string required(const Run& run, const std::string& key) {
    const auto& f = config_field(key);
    auto value = f.get(run.cfg);
    if (value.empty())
        throw ParameterError("cli", "missing input: " + run.manifest.subcommand + " requires --" + key + " (" + f.help + ")");
    return value;
}

Graph load_input_graph(Run& run) {
    auto g = load_any(required(run, "graph"), parse_weight_policy(run.cfg.weight_policy));
    run.set_graph(g);
    return g;
}

std::ifstream open_input(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw IoError("cli", "cannot open " + what + " '" + path + "'");
    return in;
}

std::vector<MeasureRecord> load_records(const Run& run, const Graph& g) {
    const auto& path = required(run, "features");
    auto in = open_input(path, "feature file");
    return read_feature_file(in, g.dictionary(), path);
}

EventOutcome load_outcome(const Run& run, const Graph& g) {
    const auto& path = required(run, "labels");
    auto in = open_input(path, "outcome file");
    return read_outcome(in, g.dictionary(), path);
}

TreeEnsemble load_model(const Run& run) {
    const auto& path = required(run, "model");
    auto in = open_input(path, "model file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("cli", "model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

/// Sorted node ids named one per line; '#' lines and blanks are skipped.
std::vector<NodeId> read_targets(const std::string& path, const Graph& g) {
    auto in = open_input(path, "targets file");
    std::vector<NodeId> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name) || name[0] == '#') continue;
        auto id = g.dictionary().find(name);
        if (!id) throw LookupError("cli", path + ":" + std::to_string(lineno) + ": unknown node '" + name + "'");
        out.push_back(*id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Targets from --targets, or every node with at least one source.
std::vector<NodeId> resolve_targets(const Run& run, const Graph& g) {
    if (!run.cfg.targets.empty()) return read_targets(run.cfg.targets, g);
    std::vector<NodeId> out;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (!g.source_neighbors(v).ids.empty()) out.push_back(v);
    return out;
}

void write_targets(Run& run, const Graph& g, const std::vector<NodeId>& targets) {
    auto out = run.artifact("targets.txt");
    for (NodeId t : targets) out << g.name(t) << '\n';
}

EmbeddingTable embeddings_for(Run& run, const Graph& g) {
    if (!run.cfg.embeddings.empty()) return import_embeddings(run.cfg.embeddings, g.dictionary());
    auto emb = train_embeddings(g, walk_config(run.cfg), skipgram_config(run.cfg));
    auto out = run.artifact("embeddings.txt");
    write_embeddings(g, emb, out);
    return emb;
}

void write_metrics(Run& run, const std::string& name, const ProtocolResult& res) {
    auto out = run.artifact(name);
    out << "run\tauc\taccuracy\tf1\n";
    auto row = [&](const std::string& label, const Metrics& m) {
        out << label << '\t' << detail::fmt4(m.auc) << '\t' << detail::fmt4(m.accuracy) << '\t' << detail::fmt4(m.f1)
            << '\n';
    };
    for (std::size_t i = 0; i < res.runs.size(); ++i) row(std::to_string(i + 1), res.runs[i]);
    row("mean", res.mean);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_ingest(Run& run) {
    auto g = load_input_graph(run);
    run.manifest.artifacts.push_back("graph.bin");
    save_snapshot(g, (run.dir / "graph.bin").string());
}

void cmd_features(Run& run) {
    auto g = load_input_graph(run);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (run.cfg.targets.empty()) {
        pairs = all_pairs(g);
    } else {
        for (NodeId t : read_targets(run.cfg.targets, g))
            for (NodeId s : g.source_neighbors(t).ids) pairs.emplace_back(s, t);
    }
    auto emb = embeddings_for(run, g);
    auto records = compute_all(g, pairs, emb, measure_config(run.cfg));
    auto out = run.artifact("features.tsv");
    write_feature_file(g, records, out);
}

void cmd_train(Run& run) {
    auto g = load_input_graph(run);
    auto records = load_records(run, g);
    auto outcome = load_outcome(run, g);
    auto behavior = parse_behavior(run.cfg.behavior);
    auto features = feature_set(run.cfg.feature_set);
    auto params = boosting_params(run.cfg);
    auto data = labeled_pairs(RecordIndex(records), outcome, behavior, features);
    if (data.empty()) throw ValidationError("cli", "missing input: no exposed pair of the outcome has a feature record");

    auto res = run_protocol(data, features, params, derive_seed(run.cfg.seed, "protocol"), run.cfg.repetitions);
    write_metrics(run, "metrics.tsv", res);

    auto model = train(balanced_sample(data, derive_seed(run.cfg.seed, "final")), params, features);
    auto j = model_to_json(model);
    j["manifest"] = run.manifest_name();
    run.artifact("model.json", false) << j.dump(1) << '\n';

    auto out = run.artifact("importance.tsv");
    out << "feature\timportance\n";
    for (const auto& [f, v] : feature_importance(model)) out << f << '\t' << detail::fmt4(v) << '\n';
}

void cmd_predict(Run& run) {
    auto model = load_model(run);
    auto g = load_input_graph(run);
    auto records = load_records(run, g);
    auto out = run.artifact("predictions.tsv");
    out << "source\ttarget\traw\tprobability\n";
    for (const auto& r : records) {
        double raw = predict(model, feature_vector(r, model.feature_names));
        out << g.name(r.source) << '\t' << g.name(r.target) << '\t' << detail::fmt17(raw) << '\t'
            << detail::fmt17(sigmoid(raw)) << '\n';
    }
}

void cmd_recommend(Run& run) {
    auto model = load_model(run);
    auto g = load_input_graph(run);
    auto records = load_records(run, g);
    auto targets = resolve_targets(run, g);
    RecordIndex index(records);
    PairScorer scorer(model, index);
    std::vector<FeedWindow> windows;
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
        auto w = recommend_topk(g, scorer, s, targets, run.cfg.k);
        if (!w.ranked.empty()) windows.push_back(std::move(w));
    }
    auto out = run.artifact("recommendations.tsv");
    write_recommendations(g, windows, out);
}

void cmd_simulate(Run& run) {
    auto gc = generator_config(run.cfg);
    Graph g;
    NodeSetRole roles;
    if (gc.family == GraphFamily::planted_groups) {
        auto pg = generate_planted(gc);
        roles = planted_roles(pg);
        g = std::move(pg.graph);
    } else {
        g = generate_graph(gc);
        for (NodeId v = 0; v < g.num_nodes(); ++v) (v < gc.targets ? roles.targets : roles.sources).push_back(v);
    }
    run.set_graph(g);
    {
        auto out = run.artifact("graph.tsv");
        write_edge_list(g, out);
    }
    write_targets(run, g, roles.targets);

    auto emb = embeddings_for(run, g);
    auto records = compute_all(g, event_pairs(g, roles), emb, measure_config(run.cfg));
    {
        auto out = run.artifact("features.tsv");
        write_feature_file(g, records, out);
    }
    RecordIndex truth(records);
    auto adoption = adoption_model(run.cfg, records);

    ExposurePolicy policy;
    std::optional<TreeEnsemble> model;
    std::optional<PairScorer> scorer;
    if (run.cfg.exposure == "random") {
        policy = random_exposure(run.cfg.k);
    } else if (run.cfg.exposure == "recommender") {
        model = load_model(run);
        scorer.emplace(*model, truth);
        policy = recommender_exposure(g, [&](NodeId s, NodeId t) { return scorer->score(s, t); }, run.cfg.k);
    } else {
        throw ParameterError("cli", "exposure must be random or recommender, got '" + run.cfg.exposure + "'");
    }
    auto outcome = simulate_event(g, roles, truth, gc.invitation, adoption, policy, derive_seed(run.cfg.seed, "event"));
    {
        auto out = run.artifact("outcome.tsv");
        write_outcome(g, outcome, out);
    }
    auto rep = e2e_report(outcome);
    auto out = run.artifact("event_summary.tsv");
    out << "pairs\texposed\tinvited\tadopted\texposed_sources\te2e_rate\n"
        << outcome.pairs.size() << '\t' << outcome.count_exposed() << '\t' << outcome.count_invited() << '\t'
        << outcome.count_adopted() << '\t' << rep.exposed_sources << '\t' << detail::fmt4(rep.rate) << '\n';
}

void cmd_analyze(Run& run) {
    auto g = load_input_graph(run);
    auto records = load_records(run, g);
    auto outcome = load_outcome(run, g);
    std::vector<NodeId> targets;
    if (!run.cfg.targets.empty()) {
        targets = read_targets(run.cfg.targets, g);
    } else {
        std::set<NodeId> seen;
        for (const auto& p : outcome.pairs) seen.insert(p.target);
        targets.assign(seen.begin(), seen.end());
    }
    std::optional<TreeEnsemble> model;
    if (!run.cfg.model.empty()) model = load_model(run);
    ReportConfig rc;
    rc.params = boosting_params(run.cfg);
    rc.seed = run.cfg.seed;
    rc.repetitions = run.cfg.repetitions;
    auto bundle = report(g, records, outcome, targets, rc, model ? &*model : nullptr);
    for (auto& f : write_bundle(bundle, run.dir, run.manifest_name())) run.manifest.artifacts.push_back(f);
}

/// Shortest decimal that reads back to the default value.
std::string default_text(const detail::ConfigField& f) {
    auto v = f.get(RunConfig{});
    if (v.empty()) return "none";
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.find_first_of(".e") == std::string::npos) return v;
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sitc: group-structure social influence toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file (flags override it)");

    std::map<std::string, std::string> flag_values;
    std::map<std::string, CLI::Option*> flag_options;
    for (const auto& f : config_fields()) {
        std::string names = "--" + f.key;
        if (f.key.find('_') != std::string::npos) {
            auto dashed = f.key;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            names += ",--" + dashed;
        }
        if (f.key == "k") names += ",-k";
        flag_options[f.key] =
            app.add_option(names, flag_values[f.key], f.help + " [default: " + default_text(f) + "]")->group("Configuration");
    }

    const std::vector<std::pair<std::string, std::string>> subcommands = {
        {"ingest", "parse and validate a graph, write a binary snapshot (graph.bin)"},
        {"features", "compute measure records for every edge or for edges into --targets (features.tsv)"},
        {"train", "train the boosted-tree learner on --features and --labels (model.json, metrics.tsv)"},
        {"predict", "score every record of --features with --model (predictions.tsv)"},
        {"recommend", "top-k feed window per source (recommendations.tsv)"},
        {"simulate", "generate a graph and simulate an event on it (graph.tsv, features.tsv, outcome.tsv)"},
        {"analyze", "metrics, importance, conversion curves and group-size histograms"},
    };
    for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: cli: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        Run run;
        run.manifest.subcommand = app.get_subcommands().front()->get_name();
        if (!config_path.empty()) run.cfg = load_config(config_path);
        if (const char* env = std::getenv("SITC_OUTPUT_DIR"); env && *env) run.cfg.output_dir = env;
        for (const auto& [key, opt] : flag_options)
            if (opt->count() > 0) set_config_value(run.cfg, key, flag_values[key]);
        if (run.cfg.k == 0) throw ParameterError("cli", "k must be positive");

        run.dir = run.cfg.output_dir;
        std::error_code ec;
        fs::create_directories(run.dir, ec);
        if (ec) throw IoError("cli", "cannot create output directory '" + run.dir.string() + "': " + ec.message());
        run.manifest.config_hash = hex64(config_hash(run.cfg));
        run.manifest.seed = run.cfg.seed;

        static const std::map<std::string, void (*)(Run&)> handlers = {
            {"ingest", cmd_ingest},     {"features", cmd_features}, {"train", cmd_train},     {"predict", cmd_predict},
            {"recommend", cmd_recommend}, {"simulate", cmd_simulate}, {"analyze", cmd_analyze},
        };
        handlers.at(run.manifest.subcommand)(run);
        run.finish();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: cli: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#pragma once

#include "sitc/boosting.hpp"
#include "sitc/centrality.hpp"
#include "sitc/embedding.hpp"
#include "sitc/error.hpp"
#include "sitc/eventsim.hpp"
#include "sitc/graph.hpp"
#include "sitc/measures.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sitc {

/// Every setting of a pipeline run. The defaults below are the documented ones.
struct RunConfig {
    // paths
    std::string graph;
    std::string targets;
    std::string labels;
    std::string embeddings;
    std::string features;
    std::string model;
    std::string output_dir = "sitc-out";
    std::string weight_policy = "reject";

    // centrality
    double alpha = kDefaultAlpha;
    double eps = kDefaultEps;
    double ppr_push_threshold = 0.0;

    // walks and embeddings
    std::size_t walk_length = 20;
    std::size_t walks_per_node = 4;
    double p = 1.0;
    double q = 1.0;
    std::size_t dim = 32;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 1;
    double embed_lr = 0.025;

    // learner
    std::string behavior = "adoption";
    std::string feature_set = "sit";
    std::size_t rounds = 100;
    std::size_t max_depth = 6;
    double lr = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    std::size_t repetitions = 3;

    // recommendation and simulation
    std::size_t k = 5;
    std::string exposure = "random";
    std::string family = "planted_groups";
    std::size_t nodes = 2000;
    std::size_t edges = 10000;
    double exponent = 2.5;
    std::size_t sim_targets = 200;
    std::size_t min_groups = 1;
    std::size_t max_groups = 3;
    std::size_t min_group_size = 2;
    std::size_t max_group_size = 6;
    double intra_density = 0.6;
    double reciprocity = 0.5;
    std::string adoption_scaling = "spread";
    double adoption_ugt = 12.0;
    double adoption_intercept = -2.0;

    std::uint64_t seed = 1;
    std::size_t workers = 0;
};

namespace detail {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParameterError("cli", "config key '" + key + "': bad value '" + text + "'");
    return v;
}

struct ConfigField {
    std::string key;
    std::string help;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
ConfigField field(std::string key, std::string help, T RunConfig::*member) {
    ConfigField f;
    f.key = key;
    f.help = std::move(help);
    f.get = [member](const RunConfig& c) {
        if constexpr (std::is_same_v<T, std::string>) return c.*member;
        else if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
        else return std::to_string(c.*member);
    };
    f.set = [member, key](RunConfig& c, const std::string& v) {
        if constexpr (std::is_same_v<T, std::string>) c.*member = v;
        else c.*member = parse_number<T>(key, v);
    };
    return f;
}

}  // namespace detail

inline const std::vector<detail::ConfigField>& config_fields() {
    using detail::field;
    static const std::vector<detail::ConfigField> fields = {
        field("graph", "edge list or snapshot", &RunConfig::graph),
        field("targets", "file of target node names; empty means every node with a source", &RunConfig::targets),
        field("labels", "event outcome file", &RunConfig::labels),
        field("embeddings", "embedding table to import; empty trains node2vec", &RunConfig::embeddings),
        field("features", "feature file", &RunConfig::features),
        field("model", "trained model file", &RunConfig::model),
        field("output_dir", "artifact directory; env SITC_OUTPUT_DIR beats the config file, a flag beats both", &RunConfig::output_dir),
        field("weight_policy", "reject | clamp | minmax_rescale", &RunConfig::weight_policy),
        field("alpha", "restart probability", &RunConfig::alpha),
        field("eps", "series truncation tolerance", &RunConfig::eps),
        field("ppr_push_threshold", "forward-push residual threshold (0: power iteration)", &RunConfig::ppr_push_threshold),
        field("walk_length", "nodes per walk", &RunConfig::walk_length),
        field("walks_per_node", "walks started at each node", &RunConfig::walks_per_node),
        field("p", "node2vec return parameter", &RunConfig::p),
        field("q", "node2vec in-out parameter", &RunConfig::q),
        field("dim", "embedding dimension", &RunConfig::dim),
        field("window", "skip-gram window", &RunConfig::window),
        field("negatives", "negative samples per context", &RunConfig::negatives),
        field("epochs", "skip-gram epochs", &RunConfig::epochs),
        field("embed_lr", "skip-gram initial learning rate", &RunConfig::embed_lr),
        field("behavior", "adoption | invitation", &RunConfig::behavior),
        field("feature_set", "sit | sit_sum | sit_euc | competitors | individual | all | only_<measure>", &RunConfig::feature_set),
        field("rounds", "boosting rounds T", &RunConfig::rounds),
        field("max_depth", "tree depth h", &RunConfig::max_depth),
        field("lr", "shrinkage", &RunConfig::lr),
        field("lambda", "L2 penalty on leaf values", &RunConfig::lambda),
        field("gamma", "penalty per leaf", &RunConfig::gamma),
        field("min_child_weight", "minimum hessian per child", &RunConfig::min_child_weight),
        field("repetitions", "evaluation repetitions in analyze", &RunConfig::repetitions),
        field("k", "feed window size", &RunConfig::k),
        field("exposure", "random | recommender (simulate)", &RunConfig::exposure),
        field("family", "two_clique | planted_groups | random_power_law", &RunConfig::family),
        field("nodes", "generated node count", &RunConfig::nodes),
        field("edges", "generated edge count (power law)", &RunConfig::edges),
        field("exponent", "degree exponent (power law)", &RunConfig::exponent),
        field("sim_targets", "planted target count", &RunConfig::sim_targets),
        field("min_groups", "planted groups per target, lower bound", &RunConfig::min_groups),
        field("max_groups", "planted groups per target, upper bound", &RunConfig::max_groups),
        field("min_group_size", "planted community size, lower bound", &RunConfig::min_group_size),
        field("max_group_size", "planted community size, upper bound", &RunConfig::max_group_size),
        field("intra_density", "edge probability inside a community", &RunConfig::intra_density),
        field("reciprocity", "probability of a target-to-source edge", &RunConfig::reciprocity),
        field("adoption_scaling", "spread (coefficients relative to the ugt spread) | raw", &RunConfig::adoption_scaling),
        field("adoption_ugt", "ground-truth adoption coefficient on ugt", &RunConfig::adoption_ugt),
        field("adoption_intercept", "ground-truth adoption intercept (spread: logit at the median)", &RunConfig::adoption_intercept),
        field("seed", "root seed", &RunConfig::seed),
        field("workers", "worker threads (0: hardware concurrency)", &RunConfig::workers),
    };
    return fields;
}

inline const detail::ConfigField& config_field(const std::string& key) {
    for (const auto& f : config_fields())
        if (f.key == key) return f;
    throw ParameterError("cli", "unknown config key '" + key + "'");
}

inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    config_field(key).set(c, value);
}

inline std::string get_config_value(const RunConfig& c, const std::string& key) { return config_field(key).get(c); }

/// `key = value` lines; '#' starts a comment line.
inline void write_config(const RunConfig& c, std::ostream& out) {
    for (const auto& f : config_fields()) out << f.key << " = " << f.get(c) << '\n';
}

inline std::string config_text(const RunConfig& c) {
    std::ostringstream out;
    write_config(c, out);
    return out.str();
}

inline void read_config(std::istream& in, RunConfig& c, const std::string& origin = "<config>") {
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("cli", origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        set_config_value(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cli", "cannot open config '" + path + "'");
    RunConfig c;
    read_config(in, c, path);
    return c;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a(config_text(c)); }

// ---------------------------------------------------------------------------
// Translation into module parameters
// ---------------------------------------------------------------------------

inline MeasureConfig measure_config(const RunConfig& c) {
    MeasureConfig m;
    m.alpha = c.alpha;
    m.eps = c.eps;
    m.ppr_push_threshold = c.ppr_push_threshold;
    m.workers = c.workers;
    return m;
}

inline WalkConfig walk_config(const RunConfig& c) {
    WalkConfig w;
    w.length = c.walk_length;
    w.walks_per_node = c.walks_per_node;
    w.p = c.p;
    w.q = c.q;
    w.seed = derive_seed(c.seed, "walks");
    return w;
}

inline SkipGramConfig skipgram_config(const RunConfig& c) {
    SkipGramConfig s;
    s.dim = c.dim;
    s.window = c.window;
    s.negatives = c.negatives;
    s.epochs = c.epochs;
    s.learning_rate = c.embed_lr;
    s.seed = derive_seed(c.seed, "skipgram");
    return s;
}

inline BoostingParams boosting_params(const RunConfig& c) {
    BoostingParams b;
    b.rounds = c.rounds;
    b.max_depth = c.max_depth;
    b.learning_rate = c.lr;
    b.lambda = c.lambda;
    b.gamma = c.gamma;
    b.min_child_weight = c.min_child_weight;
    b.seed = derive_seed(c.seed, "learner");
    return b;
}

inline GeneratorConfig generator_config(const RunConfig& c) {
    GeneratorConfig g;
    g.family = parse_graph_family(c.family);
    g.nodes = c.nodes;
    g.edges = c.edges;
    g.exponent = c.exponent;
    g.targets = c.sim_targets;
    g.min_groups = c.min_groups;
    g.max_groups = c.max_groups;
    g.min_group_size = c.min_group_size;
    g.max_group_size = c.max_group_size;
    g.intra_density = c.intra_density;
    g.reciprocity = c.reciprocity;
    g.seed = derive_seed(c.seed, "generator");
    g.adoption = {{{Measure::ugt, c.adoption_ugt}}, c.adoption_intercept};
    return g;
}

/// Ground-truth adoption model for `simulate`, fitted to the event's records
/// unless scaling is raw.
inline BehaviorModel adoption_model(const RunConfig& c, const std::vector<MeasureRecord>& records) {
    if (c.adoption_scaling == "raw") return {{{Measure::ugt, c.adoption_ugt}}, c.adoption_intercept};
    if (c.adoption_scaling != "spread")
        throw ParameterError("cli", "adoption_scaling must be spread or raw, got '" + c.adoption_scaling + "'");
    return spread_scaled_behavior(records, Measure::ugt, c.adoption_ugt, c.adoption_intercept);
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct Manifest {
    std::string subcommand;
    std::string config_hash;
    std::string graph_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> artifacts;

    std::string file_name() const { return "manifest-" + subcommand + ".json"; }

    nlohmann::ordered_json to_json(const RunConfig& c) const {
        nlohmann::ordered_json j;
        j["subcommand"] = subcommand;
        j["config_hash"] = config_hash;
        j["graph_hash"] = graph_hash;
        j["seed"] = seed;
        j["artifacts"] = artifacts;
        nlohmann::ordered_json cfg;
        for (const auto& f : config_fields()) cfg[f.key] = f.get(c);
        j["config"] = cfg;
        return j;
    }
};

}  // namespace sitc

#pragma once

#include "sitc/graph.hpp"
#include "sitc/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sitc {

// ---------------------------------------------------------------------------
// Biased second-order walks
// ---------------------------------------------------------------------------

struct WalkConfig {
    std::size_t length = 20;       // nodes per walk, >= 2
    std::size_t walks_per_node = 4;
    double p = 1.0;                // return parameter
    double q = 1.0;                // in-out parameter
    std::uint64_t seed = 1;

    void validate() const {
        if (length < 2) throw ParameterError("embed-sim", "walk length must be >= 2");
        if (walks_per_node < 1) throw ParameterError("embed-sim", "walks per node must be >= 1");
        if (!(p > 0.0) || !(q > 0.0)) throw ParameterError("embed-sim", "p and q must be positive");
    }
};

using Walk = std::vector<NodeId>;
using WalkCorpus = std::vector<Walk>;

/// Unnormalized next-step weights over the target neighbors of `cur`, given
/// the node visited before it (if any): w/p back to `prev`, w to common target
/// neighbors of `prev`, w/q otherwise.
inline std::vector<double> transition_weights(const Graph& g, std::optional<NodeId> prev, NodeId cur, double p,
                                              double q) {
    auto out = g.target_neighbors(cur);
    std::vector<double> w(out.weights.begin(), out.weights.end());
    if (!prev || (p == 1.0 && q == 1.0)) return w;
    auto prev_out = g.target_neighbors(*prev);
    for (std::size_t i = 0; i < out.size(); ++i) {
        NodeId x = out.ids[i];
        if (x == *prev) w[i] /= p;
        else if (!std::binary_search(prev_out.ids.begin(), prev_out.ids.end(), x)) w[i] /= q;
    }
    return w;
}

inline std::vector<double> transition_probabilities(const Graph& g, std::optional<NodeId> prev, NodeId cur, double p,
                                                    double q) {
    auto w = transition_weights(g, prev, cur, p, q);
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return w;
}

namespace detail {

inline std::size_t sample_index(const std::vector<double>& cumulative, double u) {
    double r = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace detail

/// `walks_per_node` walks from every node, ordered by (start node, walk
/// index). Each walk draws from its own substream keyed by (seed, start, walk
/// index), so the corpus does not depend on generation order.
inline WalkCorpus generate_walks(const Graph& g, const WalkConfig& cfg) {
    cfg.validate();
    const auto n = g.num_nodes();
    const bool first_order = cfg.p == 1.0 && cfg.q == 1.0;

    // Prefix sums of out-weights per node serve the unbiased case directly.
    std::vector<double> prefix(g.num_edges());
    for (NodeId v = 0; v < n; ++v) {
        double acc = 0.0;
        for (auto k = g.out_offsets()[v]; k < g.out_offsets()[v + 1]; ++k) prefix[k] = acc += g.out_weights()[k];
    }
    auto weighted_step = [&](NodeId v, double u) -> NodeId {
        auto b = g.out_offsets()[v], e = g.out_offsets()[v + 1];
        double r = u * prefix[e - 1];
        auto it = std::upper_bound(prefix.begin() + static_cast<std::ptrdiff_t>(b),
                                   prefix.begin() + static_cast<std::ptrdiff_t>(e), r);
        if (it == prefix.begin() + static_cast<std::ptrdiff_t>(e)) --it;
        return g.out_ids()[static_cast<std::size_t>(it - prefix.begin())];
    };

    WalkCorpus corpus;
    corpus.reserve(n * cfg.walks_per_node);
    std::vector<double> cumulative;
    for (NodeId start = 0; start < n; ++start) {
        for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
            Rng rng(derive_seed(cfg.seed, {0x77616c6bULL, start, r}));
            Walk walk;
            walk.reserve(cfg.length);
            walk.push_back(start);
            while (walk.size() < cfg.length) {
                NodeId cur = walk.back();
                if (g.out_degree(cur) == 0) break;
                double u = uniform01(rng);
                if (first_order || walk.size() == 1) {
                    walk.push_back(weighted_step(cur, u));
                    continue;
                }
                auto w = transition_weights(g, walk[walk.size() - 2], cur, cfg.p, cfg.q);
                cumulative.resize(w.size());
                double acc = 0.0;
                for (std::size_t i = 0; i < w.size(); ++i) cumulative[i] = acc += w[i];
                walk.push_back(g.target_neighbors(cur).ids[detail::sample_index(cumulative, u)]);
            }
            corpus.push_back(std::move(walk));
        }
    }
    return corpus;
}

inline void write_walks(const WalkCorpus& corpus, std::ostream& out) {
    for (const auto& w : corpus) {
        for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Embedding table
// ---------------------------------------------------------------------------

struct EmbeddingProvenance {
    enum class Kind { trained, imported } kind = Kind::trained;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    WalkConfig walks;
    std::string path;
};

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t n, std::size_t dim) : n_(n), dim_(dim), data_(n * dim, 0.0) {
        if (dim < 2) throw ParameterError("embed-sim", "embedding dimension must be >= 2");
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<double> row(NodeId v) { return {data_.data() + static_cast<std::size_t>(v) * dim_, dim_}; }
    std::span<const double> row(NodeId v) const {
        if (v >= n_) throw IndexError("embed-sim", "node " + std::to_string(v) + " has no embedding");
        return {data_.data() + static_cast<std::size_t>(v) * dim_, dim_};
    }

    const std::vector<double>& data() const noexcept { return data_; }

    EmbeddingProvenance provenance;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

struct SkipGramConfig {
    std::size_t dim = 32;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 1;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;
};

/// Skip-gram with negative sampling over a walk corpus. Single writer with a
/// fixed update order, so a seed fully determines the table.
inline EmbeddingTable train_embeddings(const WalkCorpus& corpus, std::size_t num_nodes, const SkipGramConfig& cfg) {
    std::size_t tokens = 0;
    for (const auto& w : corpus) tokens += w.size();
    if (corpus.empty() || tokens == 0) throw StateError("embed-sim", "training error: empty walk corpus");
    if (cfg.dim < 2) throw ParameterError("embed-sim", "embedding dimension must be >= 2");
    if (cfg.window < 1 || cfg.epochs < 1) throw ParameterError("embed-sim", "window and epochs must be >= 1");

    const std::size_t dim = cfg.dim;
    EmbeddingTable table(num_nodes, dim);
    std::vector<double> context(num_nodes * dim, 0.0);
    Rng rng(derive_seed(cfg.seed, "skipgram"));
    for (NodeId v = 0; v < num_nodes; ++v)
        for (double& x : table.row(v)) x = (uniform01(rng) - 0.5) / static_cast<double>(dim);

    // Negative-sampling distribution: corpus frequency ^ 0.75.
    std::vector<double> freq(num_nodes, 0.0);
    for (const auto& w : corpus)
        for (NodeId v : w) {
            if (v >= num_nodes) throw IndexError("embed-sim", "walk node out of range");
            freq[v] += 1.0;
        }
    std::vector<double> noise(num_nodes);
    double acc = 0.0;
    for (std::size_t v = 0; v < num_nodes; ++v) noise[v] = acc += std::pow(freq[v], 0.75);

    auto sigmoid = [](double x) {
        if (x > 30.0) return 1.0;
        if (x < -30.0) return 0.0;
        return 1.0 / (1.0 + std::exp(-x));
    };

    std::vector<double> grad(dim);
    const double total_steps = static_cast<double>(tokens * cfg.epochs);
    double processed = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& walk : corpus) {
            for (std::size_t pos = 0; pos < walk.size(); ++pos, processed += 1.0) {
                double lr = std::max(cfg.learning_rate * (1.0 - processed / total_steps), cfg.learning_rate * 1e-4);
                NodeId center = walk[pos];
                auto lo = pos >= cfg.window ? pos - cfg.window : 0;
                auto hi = std::min(walk.size() - 1, pos + cfg.window);
                for (auto c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    auto in = table.row(walk[c]);
                    std::fill(grad.begin(), grad.end(), 0.0);
                    for (std::size_t k = 0; k <= cfg.negatives; ++k) {
                        NodeId out_node;
                        double label;
                        if (k == 0) {
                            out_node = center;
                            label = 1.0;
                        } else {
                            out_node = static_cast<NodeId>(detail::sample_index(noise, uniform01(rng)));
                            if (out_node == center) continue;
                            label = 0.0;
                        }
                        double* out = context.data() + static_cast<std::size_t>(out_node) * dim;
                        double dot = 0.0;
                        for (std::size_t d = 0; d < dim; ++d) dot += in[d] * out[d];
                        double gcoef = (label - sigmoid(dot)) * lr;
                        for (std::size_t d = 0; d < dim; ++d) {
                            grad[d] += gcoef * out[d];
                            out[d] += gcoef * in[d];
                        }
                    }
                    for (std::size_t d = 0; d < dim; ++d) in[d] += grad[d];
                }
            }
        }
    }
    table.provenance.kind = EmbeddingProvenance::Kind::trained;
    table.provenance.seed = cfg.seed;
    table.provenance.epochs = cfg.epochs;
    return table;
}

inline EmbeddingTable train_embeddings(const Graph& g, const WalkConfig& walks, const SkipGramConfig& sg) {
    auto corpus = generate_walks(g, walks);
    auto table = train_embeddings(corpus, g.num_nodes(), sg);
    table.provenance.walks = walks;
    return table;
}

inline void write_embeddings(const Graph& g, const EmbeddingTable& emb, std::ostream& out) {
    char buf[32];
    for (NodeId v = 0; v < emb.size(); ++v) {
        out << g.name(v);
        for (double x : emb.row(v)) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

/// Reads `node v1 ... vdim` rows; every node of the dictionary must appear
/// exactly once and all rows must share one dimension.
inline EmbeddingTable import_embeddings(const std::string& path, const IdDictionary& dict) {
    std::ifstream in(path);
    if (!in) throw IoError("embed-sim", "cannot open embedding file '" + path + "'");
    std::vector<std::vector<double>> rows(dict.size());
    std::vector<bool> seen(dict.size(), false);
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name) || name[0] == '#') continue;
        auto where = path + ":" + std::to_string(lineno);
        auto id = dict.find(name);
        if (!id) throw ParseError("embed-sim", where + ": unknown node '" + name + "'");
        if (seen[*id]) throw ParseError("embed-sim", where + ": duplicate row for node '" + name + "'");
        seen[*id] = true;
        std::vector<double> v;
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            double x = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size() || !std::isfinite(x))
                throw ParseError("embed-sim", where + ": bad value '" + tok + "'");
            v.push_back(x);
        }
        if (dim == 0) dim = v.size();
        if (v.size() != dim || dim < 2) throw ParseError("embed-sim", where + ": ragged or too-short row");
        rows[*id] = std::move(v);
    }
    for (std::size_t v = 0; v < dict.size(); ++v)
        if (!seen[v])
            throw ValidationError("embed-sim", "coverage error: node '" + dict.name(static_cast<NodeId>(v)) +
                                                   "' missing from '" + path + "'");
    EmbeddingTable table(dict.size(), dim);
    for (NodeId v = 0; v < dict.size(); ++v) std::copy(rows[v].begin(), rows[v].end(), table.row(v).begin());
    table.provenance.kind = EmbeddingProvenance::Kind::imported;
    table.provenance.path = path;
    return table;
}

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

enum class SimilarityKind { cosine, euclidean };

inline double raw_cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    // sqrt(na)*sqrt(nb) keeps the expression symmetric in (a, b)
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double raw_euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// delta(i,j) in [0,1]: min-max normalized cosine, or one minus the min-max
/// normalized euclidean distance. Statistics come from fit() over a declared
/// pair population; a degenerate fit (min == max) maps every pair to 0.5.
class SimilarityProvider {
public:
    explicit SimilarityProvider(SimilarityKind kind = SimilarityKind::cosine) : kind_(kind) {}

    SimilarityKind kind() const noexcept { return kind_; }
    bool fitted() const noexcept { return fitted_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

    double raw(const EmbeddingTable& emb, NodeId i, NodeId j) const {
        return kind_ == SimilarityKind::cosine ? raw_cosine(emb.row(i), emb.row(j))
                                               : raw_euclidean(emb.row(i), emb.row(j));
    }

    /// Fits directly from raw statistics.
    void fit_range(double lo, double hi) {
        if (!(lo <= hi)) throw ParameterError("embed-sim", "min-max fit requires min <= max");
        min_ = lo;
        max_ = hi;
        fitted_ = true;
    }

    void observe(double raw_value) {
        if (!observing_) {
            min_ = max_ = raw_value;
            observing_ = true;
        } else {
            min_ = std::min(min_, raw_value);
            max_ = std::max(max_, raw_value);
        }
    }

    void finish_fit() {
        if (!observing_) throw StateError("embed-sim", "similarity fit over an empty pair population");
        fitted_ = true;
    }

    template <typename PairRange>
    void fit(const EmbeddingTable& emb, const PairRange& pairs) {
        observing_ = false;
        for (const auto& [i, j] : pairs) observe(raw(emb, i, j));
        finish_fit();
    }

    double normalize(double raw_value) const {
        if (!fitted_) throw StateError("embed-sim", "similarity provider used before fit");
        if (max_ == min_) return 0.5;
        double x = std::clamp((raw_value - min_) / (max_ - min_), 0.0, 1.0);
        return kind_ == SimilarityKind::cosine ? x : 1.0 - x;
    }

    double operator()(const EmbeddingTable& emb, NodeId i, NodeId j) const {
        if (!fitted_) throw StateError("embed-sim", "similarity provider used before fit");
        return normalize(raw(emb, i, j));
    }

private:
    SimilarityKind kind_;
    double min_ = 0.0;
    double max_ = 0.0;
    bool fitted_ = false;
    bool observing_ = false;
};

inline double similarity(const SimilarityProvider& provider, const EmbeddingTable& emb, NodeId i, NodeId j) {
    return provider(emb, i, j);
}

}  // namespace sitc

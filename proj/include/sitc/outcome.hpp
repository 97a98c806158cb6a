#pragma once

#include "sitc/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

namespace sitc {

struct PairOutcome {
    NodeId source = 0;
    NodeId target = 0;
    bool exposed = false;
    bool invited = false;
    bool adopted = false;

    friend bool operator==(const PairOutcome&, const PairOutcome&) = default;
};

/// Labels of one event over its eligible pairs, sorted by (source, target).
/// adopted implies invited implies exposed.
struct EventOutcome {
    std::vector<PairOutcome> pairs;

    std::size_t exposed_sources() const {
        std::size_t count = 0;
        for (std::size_t i = 0; i < pairs.size();) {
            std::size_t j = i;
            bool any = false;
            for (; j < pairs.size() && pairs[j].source == pairs[i].source; ++j) any = any || pairs[j].exposed;
            count += any;
            i = j;
        }
        return count;
    }

    std::size_t count_exposed() const {
        return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.exposed; }));
    }
    std::size_t count_invited() const {
        return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.invited; }));
    }
    std::size_t count_adopted() const {
        return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.adopted; }));
    }

    bool causal_chain_holds() const {
        return std::all_of(pairs.begin(), pairs.end(), [](const PairOutcome& p) {
            return (!p.adopted || p.invited) && (!p.invited || p.exposed);
        });
    }

    const PairOutcome* find(NodeId s, NodeId t) const {
        auto it = std::lower_bound(pairs.begin(), pairs.end(), std::pair{s, t}, [](const PairOutcome& p, const auto& key) {
            return std::pair{p.source, p.target} < key;
        });
        if (it == pairs.end() || it->source != s || it->target != t) return nullptr;
        return &*it;
    }
};

inline void write_outcome(const Graph& g, const EventOutcome& o, std::ostream& out) {
    for (const auto& p : o.pairs)
        out << g.name(p.source) << '\t' << g.name(p.target) << '\t' << p.exposed << '\t' << p.invited << '\t'
            << p.adopted << '\n';
}

inline EventOutcome read_outcome(std::istream& in, const IdDictionary& dict, const std::string& origin = "<outcome>") {
    EventOutcome o;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string s, t;
        int e = 0, i = 0, a = 0;
        auto where = origin + ":" + std::to_string(lineno);
        if (!(ls >> s >> t >> e >> i >> a)) throw ParseError("eventsim", where + ": expected 'source target exposed invited adopted'");
        auto sid = dict.find(s), tid = dict.find(t);
        if (!sid || !tid) throw LookupError("eventsim", where + ": unknown node");
        o.pairs.push_back({*sid, *tid, e != 0, i != 0, a != 0});
    }
    std::sort(o.pairs.begin(), o.pairs.end(), [](const auto& x, const auto& y) {
        return std::tie(x.source, x.target) < std::tie(y.source, y.target);
    });
    if (!o.causal_chain_holds()) throw ValidationError("eventsim", origin + ": adoption/invitation without exposure");
    return o;
}

/// Adoptions over exposed sources. One source can yield several adoptions, so
/// the rate may exceed 1.
inline double e2e_rate(const EventOutcome& o) {
    auto exposed = o.exposed_sources();
    if (exposed == 0) throw StateError("recommend", "E2E rate undefined: no exposed sources");
    return static_cast<double>(o.count_adopted()) / static_cast<double>(exposed);
}

struct E2EReport {
    std::size_t exposed_sources = 0;
    std::size_t adoptions = 0;
    double rate = 0.0;
};

inline E2EReport e2e_report(const EventOutcome& o) {
    return {o.exposed_sources(), o.count_adopted(), e2e_rate(o)};
}

}  // namespace sitc

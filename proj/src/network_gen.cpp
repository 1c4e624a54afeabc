#include "socnet/rng.hpp"
#include "socnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace socnet {

std::string_view to_string(Generator g) {
    switch (g) {
    case Generator::erdos_renyi: return "erdos_renyi";
    case Generator::watts_strogatz: return "watts_strogatz";
    case Generator::configuration_model: return "configuration_model";
    }
    return "?";
}

Generator parse_generator(std::string_view s) {
    if (s == "erdos_renyi" || s == "er") return Generator::erdos_renyi;
    if (s == "watts_strogatz" || s == "ws") return Generator::watts_strogatz;
    if (s == "configuration_model" || s == "cm") return Generator::configuration_model;
    throw DataError("unknown generator '" + std::string(s) + "'");
}

namespace {

using Edge = std::pair<NodeIndex, NodeIndex>;

std::uint64_t key(NodeIndex a, NodeIndex b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(a) << 32) | b;
}

bool valid_probability(double p) { return p >= 0 && p <= 1; }

std::vector<Edge> erdos_renyi(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> edges;
    if (p <= 0 || n < 2) return edges;
    // geometric skipping over the n(n-1)/2 pair slots
    if (p >= 1) {
        for (NodeIndex a = 0; a < n; ++a)
            for (NodeIndex b = a + 1; b < n; ++b) edges.emplace_back(a, b);
        return edges;
    }
    const double lq = std::log1p(-p);
    long long v = 1, w = -1;
    const long long N = static_cast<long long>(n);
    while (v < N) {
        const double r = uniform01(rng);
        w += 1 + static_cast<long long>(std::floor(std::log1p(-r) / lq));
        while (w >= v && v < N) {
            w -= v;
            ++v;
        }
        if (v < N) edges.emplace_back(NodeIndex(w), NodeIndex(v));
    }
    return edges;
}

std::vector<Edge> watts_strogatz(std::size_t n, int k, double beta, Rng& rng) {
    const int half = k / 2;
    std::unordered_set<std::uint64_t> present;
    std::vector<std::vector<NodeIndex>> adj(n);
    auto link = [&](NodeIndex a, NodeIndex b) {
        present.insert(key(a, b));
        adj[a].push_back(b);
        adj[b].push_back(a);
    };
    auto unlink = [&](NodeIndex a, NodeIndex b) {
        present.erase(key(a, b));
        std::erase(adj[a], b);
        std::erase(adj[b], a);
    };
    for (NodeIndex u = 0; u < n; ++u)
        for (int j = 1; j <= half; ++j) link(u, NodeIndex((u + std::size_t(j)) % n));
    // rewire each lattice edge (u, u+j) to (u, w) with probability beta
    for (int j = 1; j <= half; ++j) {
        for (NodeIndex u = 0; u < n; ++u) {
            const auto v = NodeIndex((u + std::size_t(j)) % n);
            if (!bernoulli(rng, beta)) continue;
            if (!present.count(key(u, v))) continue;
            if (adj[u].size() >= n - 1) continue;
            NodeIndex w;
            do {
                w = uniform_index<NodeIndex>(rng, NodeIndex(n));
            } while (w == u || present.count(key(u, w)));
            unlink(u, v);
            link(u, w);
        }
    }
    std::vector<Edge> edges;
    edges.reserve(present.size());
    for (auto k2 : present) edges.emplace_back(NodeIndex(k2 >> 32), NodeIndex(k2 & 0xffffffffu));
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::vector<Edge> configuration_model(const std::vector<int>& degrees, Rng& rng) {
    std::vector<NodeIndex> stubs;
    for (std::size_t i = 0; i < degrees.size(); ++i)
        for (int d = 0; d < degrees[i]; ++d) stubs.push_back(NodeIndex(i));
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<Edge> edges;
    // self-loops and multi-edges are erased
    for (std::size_t s = 0; s + 1 < stubs.size(); s += 2)
        if (stubs[s] != stubs[s + 1]) edges.emplace_back(stubs[s], stubs[s + 1]);
    return edges;
}

void validate(const SyntheticNetworkSpec& spec) {
    if (!valid_probability(spec.reciprocity)) throw DataError("reciprocity must lie in [0, 1]");
    switch (spec.generator) {
    case Generator::erdos_renyi:
        if (!valid_probability(spec.p)) throw DataError("erdos_renyi: p must lie in [0, 1]");
        break;
    case Generator::watts_strogatz:
        if (!valid_probability(spec.beta)) throw DataError("watts_strogatz: rewiring probability must lie in [0, 1]");
        if (spec.k < 0 || spec.k % 2 != 0) throw DataError("watts_strogatz: k must be even and non-negative");
        if (std::size_t(spec.k) >= spec.n) throw DataError("watts_strogatz: k must be smaller than n");
        break;
    case Generator::configuration_model: {
        if (spec.degrees.size() != spec.n) throw DataError("configuration_model: degree sequence length must equal n");
        long long sum = 0;
        for (int d : spec.degrees) {
            if (d < 0) throw DataError("configuration_model: negative degree");
            sum += d;
        }
        if (sum % 2 != 0) throw DataError("configuration_model: degree sum must be even");
        break;
    }
    }
}

} // namespace

NetworkSnapshot generate_network(const SyntheticNetworkSpec& spec) {
    validate(spec);
    auto rng = make_rng(spec.seed, {0});
    std::vector<Edge> edges;
    switch (spec.generator) {
    case Generator::erdos_renyi: edges = erdos_renyi(spec.n, spec.p, rng); break;
    case Generator::watts_strogatz: edges = watts_strogatz(spec.n, spec.k, spec.beta, rng); break;
    case Generator::configuration_model: edges = configuration_model(spec.degrees, rng); break;
    }
    NetworkSnapshot g(spec.n, edges);

    auto nom_rng = make_rng(spec.seed, {1});
    std::vector<std::vector<NodeIndex>> noms(spec.n);
    std::vector<TypedEdge> typed;
    for (auto [a, b] : g.edges()) {
        typed.push_back({a, b, TieType::friend_tie});
        if (bernoulli(nom_rng, spec.reciprocity)) {
            noms[a].push_back(b);
            noms[b].push_back(a);
        } else if (bernoulli(nom_rng, 0.5)) {
            noms[a].push_back(b);
        } else {
            noms[b].push_back(a);
        }
    }
    g.set_nominations(std::move(noms));
    g.set_typed_edges(std::move(typed));
    return g;
}

// ============================================================================
// Sampling frames
// ============================================================================

std::string SamplingFrame::label() const {
    char buf[64];
    switch (kind) {
    case FrameKind::node_sampling: std::snprintf(buf, sizeof buf, "node:%g", q); break;
    case FrameKind::edge_sampling: std::snprintf(buf, sizeof buf, "edge:%g", q); break;
    case FrameKind::out_degree_censoring: std::snprintf(buf, sizeof buf, "censor:%d", limit); break;
    }
    return buf;
}

SamplingFrame SamplingFrame::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw DataError("sampling frame '" + std::string(text) + "' needs kind:param");
    const auto kind = text.substr(0, colon);
    const std::string param(text.substr(colon + 1));
    SamplingFrame f;
    char* end = nullptr;
    if (kind == "node" || kind == "node_sampling" || kind == "edge" || kind == "edge_sampling") {
        f.kind = kind.starts_with("node") ? FrameKind::node_sampling : FrameKind::edge_sampling;
        f.q = std::strtod(param.c_str(), &end);
        if (end == param.c_str() || *end || !valid_probability(f.q))
            throw DataError("sampling frame '" + std::string(text) + "': q must lie in [0, 1]");
    } else if (kind == "censor" || kind == "out_degree_censoring") {
        f.kind = FrameKind::out_degree_censoring;
        const long v = std::strtol(param.c_str(), &end, 10);
        if (end == param.c_str() || *end || v < 0)
            throw DataError("sampling frame '" + std::string(text) + "': limit must be a non-negative integer");
        f.limit = int(v);
    } else {
        throw DataError("unknown sampling frame '" + std::string(kind) + "' (node, edge or censor)");
    }
    return f;
}

std::vector<char> node_sample_mask(std::size_t n, double q, std::uint64_t seed, std::span<const NodeIndex> retain) {
    if (!valid_probability(q)) throw DataError("node sampling: q must lie in [0, 1]");
    auto rng = make_rng(seed, {0});
    std::vector<char> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = bernoulli(rng, q);
    for (auto r : retain) {
        if (r >= n) throw DataError("retained node outside the network");
        keep[r] = 1;
    }
    return keep;
}

NetworkSnapshot sample_network(const NetworkSnapshot& g, const SamplingFrame& frame, std::uint64_t seed,
                               std::span<const NodeIndex> retain) {
    const auto n = g.size();
    std::vector<Edge> kept;
    std::vector<std::vector<NodeIndex>> noms(n);
    switch (frame.kind) {
    case FrameKind::node_sampling: {
        const auto mask = node_sample_mask(n, frame.q, seed, retain);
        for (auto [a, b] : g.edges())
            if (mask[a] && mask[b]) kept.emplace_back(a, b);
        for (NodeIndex i = 0; i < n; ++i)
            if (mask[i])
                for (auto j : g.nominations_of(i))
                    if (mask[j]) noms[i].push_back(j);
        break;
    }
    case FrameKind::edge_sampling: {
        if (!valid_probability(frame.q)) throw DataError("edge sampling: q must lie in [0, 1]");
        auto rng = make_rng(seed, {1});
        for (auto [a, b] : g.edges())
            if (bernoulli(rng, frame.q)) kept.emplace_back(a, b);
        NetworkSnapshot probe(n, kept);
        for (NodeIndex i = 0; i < n; ++i)
            for (auto j : g.nominations_of(i))
                if (probe.has_edge(i, j)) noms[i].push_back(j);
        break;
    }
    case FrameKind::out_degree_censoring: {
        if (frame.limit < 0) throw DataError("out-degree censoring: limit must be >= 0");
        bool any = false;
        for (NodeIndex i = 0; i < n && !any; ++i) any = !g.nominations_of(i).empty();
        if (!any && g.edge_count() > 0) throw DataError("out-degree censoring needs nominations");
        auto rng = make_rng(seed, {2});
        for (NodeIndex i = 0; i < n; ++i) {
            std::vector<NodeIndex> out(g.nominations_of(i).begin(), g.nominations_of(i).end());
            if (out.size() > std::size_t(frame.limit)) {
                std::shuffle(out.begin(), out.end(), rng);
                out.resize(std::size_t(frame.limit));
                std::sort(out.begin(), out.end());
            }
            for (auto j : out) kept.emplace_back(i, j);
            noms[i] = std::move(out);
        }
        break;
    }
    }
    NetworkSnapshot s(n, kept, g.ids());
    s.wave = g.wave;
    std::vector<TypedEdge> typed;
    for (const auto& e : g.typed_edges())
        if (s.has_edge(e.a, e.b)) typed.push_back(e);
    s.set_nominations(std::move(noms));
    s.set_typed_edges(std::move(typed));
    return s;
}

} // namespace socnet

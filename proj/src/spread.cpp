#include "socnet/rng.hpp"
#include "socnet/sim.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <numeric>

namespace socnet {

std::size_t InfectionTrace::infected_count() const {
    return std::size_t(std::count_if(infection_time.begin(), infection_time.end(), [](int t) { return t != kUnreached; }));
}

InfectionTrace simulate_spread(const NetworkSnapshot& g, NodeIndex source, double transmission_p, std::uint64_t seed,
                               int max_steps) {
    const auto n = g.size();
    if (source >= n) throw DataError("spread source outside the network");
    if (!(transmission_p > 0 && transmission_p <= 1)) throw DataError("transmission_p must lie in (0, 1]");

    InfectionTrace tr;
    tr.source = source;
    tr.infection_time.assign(n, kUnreached);
    tr.parent.assign(n, kNoParent);
    tr.depth.assign(n, kUnreached);
    tr.infection_time[source] = 0;
    tr.depth[source] = 0;

    auto rng = make_rng(seed, {0});
    // infected nodes that may still have susceptible neighbors, ascending
    std::vector<NodeIndex> active{source};
    std::vector<NodeIndex> fresh;
    for (int step = 1; step <= max_steps && !active.empty(); ++step) {
        fresh.clear();
        for (auto u : active)
            for (auto v : g.neighbors(u)) {
                if (tr.infection_time[v] != kUnreached) continue;
                if (!bernoulli(rng, transmission_p)) continue;
                // first success in ascending infector order = smallest successful infector
                tr.infection_time[v] = step;
                tr.parent[v] = u;
                tr.depth[v] = tr.depth[u] + 1;
                fresh.push_back(v);
            }
        active.insert(active.end(), fresh.begin(), fresh.end());
        std::sort(active.begin(), active.end());
        std::erase_if(active, [&](NodeIndex u) {
            return std::none_of(g.neighbors(u).begin(), g.neighbors(u).end(),
                                [&](NodeIndex v) { return tr.infection_time[v] == kUnreached; });
        });
    }
    return tr;
}

// ============================================================================
// Path-bias experiment
// ============================================================================

namespace {

// BFS restricted to kept nodes.
std::vector<int> masked_bfs(const NetworkSnapshot& g, NodeIndex src, const std::vector<char>& keep) {
    std::vector<int> dist(g.size(), kUnreached);
    std::deque<NodeIndex> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop_front();
        for (auto v : g.neighbors(u))
            if (keep[v] && dist[v] == kUnreached) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return dist;
}

// Shortest source-target length when the target is forced into the kept set:
// its own distance if kept, otherwise one step past its nearest kept neighbor.
int retained_target_distance(const NetworkSnapshot& g, NodeIndex t, const std::vector<char>& keep,
                             const std::vector<int>& dist) {
    if (keep[t]) return dist[t];
    int best = INT_MAX;
    for (auto u : g.neighbors(t))
        if (keep[u] && dist[u] != kUnreached) best = std::min(best, dist[u] + 1);
    return best == INT_MAX ? kUnreached : best;
}

} // namespace

PathBiasResult path_bias_experiment(const SyntheticNetworkSpec& spec, double transmission_p,
                                    const std::vector<SamplingFrame>& frames, std::size_t n_sources,
                                    std::uint64_t seed) {
    if (frames.empty()) throw DataError("path-bias experiment needs at least one sampling frame");
    const auto g = generate_network(spec);
    const auto n = g.size();
    if (n_sources < 1 || n_sources > n) throw DataError("number of sources must lie in [1, n]");

    PathBiasResult res;
    res.frames = frames;
    res.n_nodes = n;
    res.n_edges = g.edge_count();

    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex(0));
    auto pick = make_rng(seed, {0});
    std::shuffle(order.begin(), order.end(), pick);
    order.resize(n_sources);

    for (std::size_t si = 0; si < n_sources; ++si) {
        const auto src = order[si];
        const auto trace = simulate_spread(g, src, transmission_p, derive_seed(seed, {1, si}));
        const auto full = bfs_distances(g, src, INT_MAX);
        for (std::size_t fi = 0; fi < frames.size(); ++fi) {
            const auto& frame = frames[fi];
            const auto fseed = derive_seed(seed, {2, si, fi});
            std::vector<int> dist;
            std::vector<char> keep;
            if (frame.kind == FrameKind::node_sampling) {
                // one draw per node shared by all targets; each target is
                // retained in addition to the source
                const NodeIndex retain[] = {src};
                keep = node_sample_mask(n, frame.q, fseed, retain);
                dist = masked_bfs(g, src, keep);
            } else {
                const NodeIndex retain[] = {src};
                dist = bfs_distances(sample_network(g, frame, fseed, retain), src, INT_MAX);
            }
            for (NodeIndex t = 0; t < n; ++t) {
                if (t == src || !trace.infected(t)) continue;
                PathBiasRecord r;
                r.source = src;
                r.target = t;
                r.actual_len = trace.depth[t];
                r.full_shortest_len = full[t];
                r.sampled_shortest_len =
                    frame.kind == FrameKind::node_sampling ? retained_target_distance(g, t, keep, dist) : dist[t];
                r.frame = fi;
                res.records.push_back(r);
            }
        }
    }

    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
        FrameSummary s;
        s.frame = frames[fi].label();
        double a = 0, f = 0, sm = 0, ratio = 0;
        for (const auto& r : res.records) {
            if (r.frame != fi) continue;
            ++s.n_records;
            if (r.disconnected()) continue;
            ++s.n_defined;
            a += r.actual_len;
            f += r.full_shortest_len;
            sm += r.sampled_shortest_len;
            ratio += double(r.actual_len) / double(r.sampled_shortest_len);
        }
        if (s.n_records) s.disconnect_rate = double(s.n_records - s.n_defined) / double(s.n_records);
        if (s.n_defined) {
            const double k = double(s.n_defined);
            s.mean_actual = a / k;
            s.mean_full_shortest = f / k;
            s.mean_sampled_shortest = sm / k;
            s.mean_actual_over_sampled = ratio / k;
            s.pct_actual_shorter = 100.0 * (1.0 - s.mean_actual / s.mean_sampled_shortest);
        } else {
            s.mean_actual = s.mean_full_shortest = s.mean_sampled_shortest = kMissing;
            s.mean_actual_over_sampled = s.pct_actual_shorter = kMissing;
        }
        res.summary.push_back(s);
    }
    return res;
}

} // namespace socnet

#pragma once

// Ground-truth spreading simulations: synthetic networks, discrete-time SI
// spread with transmission trees, partial-observation sampling frames and the
// actual-vs-shortest path-length experiment.

#include "socnet/panel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace socnet {

// ============================================================================
// Synthetic networks
// ============================================================================

enum class Generator { erdos_renyi, watts_strogatz, configuration_model };

std::string_view to_string(Generator g);
Generator parse_generator(std::string_view s);

struct SyntheticNetworkSpec {
    Generator generator = Generator::watts_strogatz;
    std::size_t n = 100;
    double p = 0.05;                 // erdos_renyi edge probability
    int k = 4;                       // watts_strogatz ring degree (even)
    double beta = 0.1;               // watts_strogatz rewiring probability
    std::vector<int> degrees;        // configuration_model degree sequence
    double reciprocity = 0.5;        // share of edges nominated in both directions
    std::uint64_t seed = 1;
};

// Friend-typed undirected graph with nominations: each edge is mutual with
// probability `reciprocity`, otherwise nominated by one random endpoint.
NetworkSnapshot generate_network(const SyntheticNetworkSpec& spec);

// ============================================================================
// Spread
// ============================================================================

inline constexpr NodeIndex kNoParent = ~NodeIndex(0);

struct InfectionTrace {
    NodeIndex source = 0;
    std::vector<int> infection_time; // kUnreached when never infected
    std::vector<NodeIndex> parent;   // kNoParent for the source and the uninfected
    std::vector<int> depth;          // transmission-tree depth = actual path length

    bool infected(NodeIndex i) const { return infection_time[i] != kUnreached; }
    std::size_t infected_count() const;
};

// Discrete-time SI: every infected node infects each susceptible neighbor with
// probability `transmission_p` per step. The smallest-index successful
// infector becomes the parent.
InfectionTrace simulate_spread(const NetworkSnapshot& g, NodeIndex source, double transmission_p, std::uint64_t seed,
                               int max_steps = 1 << 20);

// ============================================================================
// Sampling frames
// ============================================================================

enum class FrameKind { node_sampling, edge_sampling, out_degree_censoring };

struct SamplingFrame {
    FrameKind kind = FrameKind::node_sampling;
    double q = 1.0; // retention probability (node / edge sampling)
    int limit = 1;  // nominations kept per node (censoring)

    std::string label() const;
    static SamplingFrame parse(std::string_view text); // node:0.3, edge:0.5, censor:1
};

// Per-node retention draws for node sampling; `retain` nodes are always kept.
std::vector<char> node_sample_mask(std::size_t n, double q, std::uint64_t seed, std::span<const NodeIndex> retain = {});

// Partially observed copy of `g` over the same node index space. Dropped
// nodes stay as isolated indices.
NetworkSnapshot sample_network(const NetworkSnapshot& g, const SamplingFrame& frame, std::uint64_t seed,
                               std::span<const NodeIndex> retain = {});

// ============================================================================
// Path-bias experiment
// ============================================================================

struct PathBiasRecord {
    NodeIndex source = 0;
    NodeIndex target = 0;
    int actual_len = 0;
    int full_shortest_len = 0;
    int sampled_shortest_len = kUnreached; // kUnreached = disconnected
    std::size_t frame = 0;

    bool disconnected() const { return sampled_shortest_len == kUnreached; }
};

struct FrameSummary {
    std::string frame;
    std::size_t n_records = 0;
    std::size_t n_defined = 0;
    double disconnect_rate = 0;
    double mean_actual = 0;          // over defined records
    double mean_full_shortest = 0;   // over defined records
    double mean_sampled_shortest = 0;
    double mean_actual_over_sampled = 0;
    // 100 (1 - mean_actual / mean_sampled): positive when actual paths are shorter.
    double pct_actual_shorter = 0;
};

struct PathBiasResult {
    std::vector<SamplingFrame> frames;
    std::vector<PathBiasRecord> records;
    std::vector<FrameSummary> summary;
    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;
};

PathBiasResult path_bias_experiment(const SyntheticNetworkSpec& spec, double transmission_p,
                                    const std::vector<SamplingFrame>& frames, std::size_t n_sources,
                                    std::uint64_t seed);

} // namespace socnet

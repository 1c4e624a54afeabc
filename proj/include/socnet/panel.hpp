#pragma once

// Longitudinal network panel: nodes, typed tie records with wave spans,
// per-wave trait observations and geolocations, plus wave snapshots and the
// graph queries built on them.

#include "socnet/common.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace socnet {

// ============================================================================
// Ties
// ============================================================================

enum class TieType : std::uint8_t { spouse, sibling, parent, child, friend_tie, coworker, neighbor };

inline constexpr std::array<TieType, 7> kAllTieTypes{TieType::spouse,     TieType::sibling,  TieType::parent,
                                                     TieType::child,      TieType::friend_tie, TieType::coworker,
                                                     TieType::neighbor};

std::string_view to_string(TieType t);
TieType parse_tie_type(std::string_view s);

// Set of tie types; empty string / "all" parses to every type.
class TieFilter {
public:
    constexpr TieFilter() = default;
    static constexpr TieFilter all() { return TieFilter(0x7f); }
    static constexpr TieFilter only(TieType t) { return TieFilter(std::uint8_t(1u << unsigned(t))); }
    static TieFilter parse(std::string_view list);

    constexpr bool contains(TieType t) const { return (mask_ >> unsigned(t)) & 1u; }
    constexpr TieFilter& add(TieType t) {
        mask_ |= std::uint8_t(1u << unsigned(t));
        return *this;
    }
    constexpr bool empty() const { return mask_ == 0; }
    std::string to_string() const;
    friend constexpr bool operator==(TieFilter, TieFilter) = default;

private:
    constexpr explicit TieFilter(std::uint8_t m) : mask_(m) {}
    std::uint8_t mask_ = 0;
};

struct TieRecord {
    NodeIndex ego = 0;
    NodeIndex alter = 0;
    TieType type = TieType::friend_tie;
    int wave_first = 1;
    int wave_last = 1;
    // Friend ties only: true when ego named alter, false when alter named ego.
    bool nominated_by_ego = false;

    bool active_at(int wave) const { return wave_first <= wave && wave <= wave_last; }
};

struct NodeInfo {
    NodeId id;
    bool in_sample = true;
    std::string sex;
    std::optional<int> birth_year;
};

struct GeoLocation {
    double latitude = 0;
    double longitude = 0;
};

// ============================================================================
// Panel
// ============================================================================

class Panel {
public:
    std::size_t size() const { return nodes_.size(); }
    int num_waves() const { return num_waves_; }

    const NodeInfo& node(NodeIndex i) const { return nodes_.at(i); }
    std::span<const NodeInfo> nodes() const { return nodes_; }
    std::optional<NodeIndex> index_of(std::string_view id) const;
    NodeIndex require_index(std::string_view id) const;
    std::shared_ptr<const std::vector<NodeId>> ids() const { return ids_; }

    std::span<const TieRecord> ties() const { return ties_; }

    bool has_trait(const std::string& name) const { return traits_.count(name) != 0; }
    std::vector<std::string> trait_names() const;
    // n x W matrix, NaN where unobserved.
    const Eigen::MatrixXd& trait(const std::string& name) const;
    Eigen::VectorXd trait_at(const std::string& name, int wave) const;
    std::size_t trait_observation_count() const;

    std::optional<GeoLocation> location(NodeIndex i, int wave) const;
    bool has_geo() const { return geo_lat_.size() != 0; }

    const std::map<std::string, std::string>& metadata() const { return metadata_; }

private:
    friend class PanelBuilder;
    friend Panel derive_neighbor_ties(const Panel&, double);
    std::vector<NodeInfo> nodes_;
    std::shared_ptr<const std::vector<NodeId>> ids_;
    std::vector<TieRecord> ties_;
    std::map<std::string, Eigen::MatrixXd> traits_;
    Eigen::MatrixXd geo_lat_, geo_lon_;
    std::map<std::string, std::string> metadata_;
    int num_waves_ = 1;
};

// Collects nodes, ties, traits and locations by NodeId and validates every
// panel invariant in build().
class PanelBuilder {
public:
    void add_node(NodeInfo info, std::string where = {});
    void add_tie(const NodeId& ego, const NodeId& alter, TieType type, int wave_first, int wave_last,
                 bool nominated_by_ego, std::string where = {});
    void add_trait(const NodeId& node, int wave, const std::string& trait, double value, std::string where = {});
    void add_location(const NodeId& node, int wave, double latitude, double longitude, std::string where = {});
    void set_metadata(const std::string& key, const std::string& value) { metadata_[key] = value; }
    // Forces at least this many waves (e.g. trailing waves with no data).
    void set_min_waves(int w) { min_waves_ = w; }

    Panel build() const;

private:
    struct PendingTie {
        NodeId ego, alter;
        TieType type;
        int first, last;
        bool nominated;
        std::string where;
    };
    struct PendingTrait {
        NodeId node;
        int wave;
        std::string trait;
        double value;
        std::string where;
    };
    struct PendingGeo {
        NodeId node;
        int wave;
        double lat, lon;
        std::string where;
    };
    std::vector<NodeInfo> nodes_;
    std::vector<std::string> node_where_;
    std::vector<PendingTie> ties_;
    std::vector<PendingTrait> traits_;
    std::vector<PendingGeo> geo_;
    std::map<std::string, std::string> metadata_;
    int min_waves_ = 1;
};

struct PanelFiles {
    std::filesystem::path nodes, ties, traits;
    std::optional<std::filesystem::path> geo;
    std::optional<std::filesystem::path> meta;

    // nodes.csv, ties.csv, traits.csv, geo.csv and meta.csv inside `dir`;
    // geo.csv and meta.csv are used only when present.
    static PanelFiles in_directory(const std::filesystem::path& dir);
};

Panel load_panel(const PanelFiles& files);
void save_panel(const Panel& panel, const std::filesystem::path& dir);

// Adds neighbor ties between nodes living within `radius_miles` of each other
// at a wave. Consecutive waves are merged into one record.
Panel derive_neighbor_ties(const Panel& panel, double radius_miles = 100.0 / 1609.344);

// Node-level covariate at a wave. "sex" (female = 1) and "birth_year" come
// from static node attributes and are time-invariant; any other name is read
// as a trait at `wave` and is time-varying. NaN where unobserved.
struct CovariateColumn {
    std::string name;
    Eigen::VectorXd values;
    bool time_varying = false;
};
CovariateColumn resolve_covariate(const Panel& panel, const std::string& name, int wave);

// ============================================================================
// Snapshots
// ============================================================================

struct TypedEdge {
    NodeIndex a = 0; // a < b
    NodeIndex b = 0;
    TieType type = TieType::friend_tie;
};

// Static wave view: symmetric adjacency for distances plus directed friend
// nominations. Node indices follow the (naturally sorted) id list.
class NetworkSnapshot {
public:
    NetworkSnapshot() = default;
    // Builds from undirected edges; duplicates and orientation are collapsed.
    NetworkSnapshot(std::size_t n, std::span<const std::pair<NodeIndex, NodeIndex>> edges,
                    std::shared_ptr<const std::vector<NodeId>> ids = nullptr);

    int wave = 0;

    std::size_t size() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    std::span<const NodeIndex> neighbors(NodeIndex i) const { return adjacency_[i]; }
    std::span<const NodeIndex> nominations_of(NodeIndex i) const { return nominations_[i]; }
    bool has_edge(NodeIndex a, NodeIndex b) const;
    bool has_nomination(NodeIndex from, NodeIndex to) const;
    std::span<const TypedEdge> typed_edges() const { return typed_edges_; }
    std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;

    const NodeId& id(NodeIndex i) const { return (*ids_)[i]; }
    std::shared_ptr<const std::vector<NodeId>> ids() const { return ids_; }
    std::optional<NodeIndex> index_of(std::string_view id) const;

    // Replaces nominations (sorted, deduplicated, self-nominations dropped).
    void set_nominations(std::vector<std::vector<NodeIndex>> out);
    void set_typed_edges(std::vector<TypedEdge> typed);

private:
    std::vector<std::vector<NodeIndex>> adjacency_;
    std::vector<std::vector<NodeIndex>> nominations_;
    std::vector<TypedEdge> typed_edges_;
    std::shared_ptr<const std::vector<NodeId>> ids_;
    std::size_t edge_count_ = 0;
};

NetworkSnapshot snapshot(const Panel& panel, int wave, TieFilter filter = TieFilter::all());

inline constexpr int kUnreached = -1;

// Breadth-first distances from `source`, kUnreached beyond max_d.
std::vector<int> bfs_distances(const NetworkSnapshot& g, NodeIndex source, int max_d);
std::map<NodeId, int, NodeIdLess> geodesic_distances(const NetworkSnapshot& g, const NodeId& source, int max_d);

enum class FriendshipClass { mutual, ego_perceived, alter_perceived, none };
std::string_view to_string(FriendshipClass c);
FriendshipClass classify_friendship(const NetworkSnapshot& g, NodeIndex ego, NodeIndex alter);
FriendshipClass classify_friendship(const NetworkSnapshot& g, const NodeId& ego, const NodeId& alter);

// ============================================================================
// Geography
// ============================================================================

inline constexpr double kEarthRadiusMiles = 3958.8;

double haversine_miles(const GeoLocation& a, const GeoLocation& b);
double geographic_distance(const Panel& panel, const NodeId& a, const NodeId& b, int wave);

// ============================================================================
// Descriptive statistics
// ============================================================================

struct DegreeStats {
    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;
    double mean_degree = 0;
    double median_degree = 0;
    double pct_with_friend = 0;
    std::map<TieType, std::size_t> tie_type_counts;
    double friend_ties_per_node = 0;
};

DegreeStats degree_stats(const NetworkSnapshot& g);
// Over the whole panel: distinct typed ties per in-sample subject.
DegreeStats degree_stats(const Panel& panel);

} // namespace socnet

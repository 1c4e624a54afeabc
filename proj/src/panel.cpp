#include "socnet/panel.hpp"

#include "socnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <tuple>
#include <unordered_map>

namespace socnet {

// ============================================================================
// Tie types
// ============================================================================

std::string_view to_string(TieType t) {
    switch (t) {
    case TieType::spouse: return "spouse";
    case TieType::sibling: return "sibling";
    case TieType::parent: return "parent";
    case TieType::child: return "child";
    case TieType::friend_tie: return "friend";
    case TieType::coworker: return "coworker";
    case TieType::neighbor: return "neighbor";
    }
    return "?";
}

TieType parse_tie_type(std::string_view s) {
    for (auto t : kAllTieTypes)
        if (to_string(t) == s) return t;
    throw DataError("unknown tie type '" + std::string(s) + "'");
}

TieFilter TieFilter::parse(std::string_view list) {
    if (list.empty() || list == "all") return all();
    TieFilter f;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = list.find(',', pos);
        const auto item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (!item.empty()) f.add(parse_tie_type(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (f.empty()) throw DataError("empty tie filter");
    return f;
}

std::string TieFilter::to_string() const {
    if (*this == all()) return "all";
    std::string out;
    for (auto t : kAllTieTypes) {
        if (!contains(t)) continue;
        if (!out.empty()) out += ',';
        out += socnet::to_string(t);
    }
    return out;
}

// ============================================================================
// Panel
// ============================================================================

std::optional<NodeIndex> Panel::index_of(std::string_view id) const {
    const auto& ids = *ids_;
    auto it = std::lower_bound(ids.begin(), ids.end(), id, NodeIdLess{});
    if (it == ids.end() || *it != id) return std::nullopt;
    return NodeIndex(it - ids.begin());
}

NodeIndex Panel::require_index(std::string_view id) const {
    if (auto i = index_of(id)) return *i;
    throw DataError("unknown node '" + std::string(id) + "'");
}

std::vector<std::string> Panel::trait_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : traits_) out.push_back(k);
    return out;
}

const Eigen::MatrixXd& Panel::trait(const std::string& name) const {
    auto it = traits_.find(name);
    if (it == traits_.end()) throw DataError("trait '" + name + "' not present in panel");
    return it->second;
}

Eigen::VectorXd Panel::trait_at(const std::string& name, int wave) const {
    if (wave < 1 || wave > num_waves_)
        throw DataError("wave " + std::to_string(wave) + " out of range 1.." + std::to_string(num_waves_));
    return trait(name).col(wave - 1);
}

std::size_t Panel::trait_observation_count() const {
    std::size_t n = 0;
    for (const auto& [k, m] : traits_) n += std::size_t((m.array() == m.array()).count());
    return n;
}

std::optional<GeoLocation> Panel::location(NodeIndex i, int wave) const {
    if (!has_geo() || wave < 1 || wave > num_waves_) return std::nullopt;
    const double lat = geo_lat_(i, wave - 1);
    if (std::isnan(lat)) return std::nullopt;
    return GeoLocation{lat, geo_lon_(i, wave - 1)};
}

// ============================================================================
// PanelBuilder
// ============================================================================

namespace {

std::string at(const std::string& where) { return where.empty() ? std::string() : where + ": "; }

} // namespace

void PanelBuilder::add_node(NodeInfo info, std::string where) {
    if (info.id.empty()) throw DataError(at(where) + "empty node id");
    nodes_.push_back(std::move(info));
    node_where_.push_back(std::move(where));
}

void PanelBuilder::add_tie(const NodeId& ego, const NodeId& alter, TieType type, int wave_first, int wave_last,
                           bool nominated_by_ego, std::string where) {
    ties_.push_back({ego, alter, type, wave_first, wave_last, nominated_by_ego, std::move(where)});
}

void PanelBuilder::add_trait(const NodeId& node, int wave, const std::string& trait, double value,
                             std::string where) {
    traits_.push_back({node, wave, trait, value, std::move(where)});
}

void PanelBuilder::add_location(const NodeId& node, int wave, double latitude, double longitude,
                                std::string where) {
    geo_.push_back({node, wave, latitude, longitude, std::move(where)});
}

Panel PanelBuilder::build() const {
    Panel p;
    std::vector<std::size_t> order(nodes_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return node_id_less(nodes_[a].id, nodes_[b].id); });
    auto ids = std::make_shared<std::vector<NodeId>>();
    std::unordered_map<std::string, NodeIndex> index;
    for (auto k : order) {
        if (!index.emplace(nodes_[k].id, NodeIndex(p.nodes_.size())).second)
            throw DataError(at(node_where_[k]) + "duplicate node id '" + nodes_[k].id + "'");
        p.nodes_.push_back(nodes_[k]);
        ids->push_back(nodes_[k].id);
    }
    p.ids_ = ids;

    auto lookup = [&](const NodeId& id, const std::string& where) {
        auto it = index.find(id);
        if (it == index.end()) throw DataError(at(where) + "dangling reference to unknown node '" + id + "'");
        return it->second;
    };
    auto check_wave = [](int w, const std::string& where) {
        if (w < 1) throw DataError(at(where) + "wave must be >= 1, got " + std::to_string(w));
    };

    int waves = min_waves_;
    for (const auto& t : ties_) {
        const auto e = lookup(t.ego, t.where);
        const auto a = lookup(t.alter, t.where);
        if (e == a) throw DataError(at(t.where) + "self-tie on node '" + t.ego + "'");
        check_wave(t.first, t.where);
        if (t.first > t.last)
            throw DataError(at(t.where) + "wave_first " + std::to_string(t.first) + " > wave_last " +
                            std::to_string(t.last));
        p.ties_.push_back({e, a, t.type, t.first, t.last, t.type == TieType::friend_tie && t.nominated});
        waves = std::max(waves, t.last);
    }
    for (const auto& t : traits_) {
        check_wave(t.wave, t.where);
        waves = std::max(waves, t.wave);
    }
    for (const auto& g : geo_) {
        check_wave(g.wave, g.where);
        waves = std::max(waves, g.wave);
    }
    p.num_waves_ = waves;

    const auto n = Eigen::Index(p.nodes_.size());
    for (const auto& t : traits_) {
        const auto i = lookup(t.node, t.where);
        if (!p.nodes_[i].in_sample)
            throw DataError(at(t.where) + "trait observation for out-of-sample node '" + t.node + "'");
        if (!std::isfinite(t.value)) throw DataError(at(t.where) + "non-finite trait value");
        if (t.trait.empty()) throw DataError(at(t.where) + "empty trait name");
        auto [it, fresh] = p.traits_.try_emplace(t.trait);
        if (fresh) it->second = Eigen::MatrixXd::Constant(n, waves, kMissing);
        double& slot = it->second(i, t.wave - 1);
        if (!std::isnan(slot))
            throw DataError(at(t.where) + "duplicate observation of trait '" + t.trait + "' for node '" + t.node +
                            "' at wave " + std::to_string(t.wave));
        slot = t.value;
    }
    if (!geo_.empty()) {
        p.geo_lat_ = Eigen::MatrixXd::Constant(n, waves, kMissing);
        p.geo_lon_ = Eigen::MatrixXd::Constant(n, waves, kMissing);
        for (const auto& g : geo_) {
            const auto i = lookup(g.node, g.where);
            if (!(g.lat >= -90 && g.lat <= 90)) throw DataError(at(g.where) + "latitude outside [-90, 90]");
            if (!(g.lon >= -180 && g.lon <= 180)) throw DataError(at(g.where) + "longitude outside [-180, 180]");
            if (!std::isnan(p.geo_lat_(i, g.wave - 1)))
                throw DataError(at(g.where) + "duplicate location for node '" + g.node + "' at wave " +
                                std::to_string(g.wave));
            p.geo_lat_(i, g.wave - 1) = g.lat;
            p.geo_lon_(i, g.wave - 1) = g.lon;
        }
    }
    p.metadata_ = metadata_;
    return p;
}

// ============================================================================
// File I/O
// ============================================================================

PanelFiles PanelFiles::in_directory(const std::filesystem::path& dir) {
    PanelFiles f{dir / "nodes.csv", dir / "ties.csv", dir / "traits.csv", std::nullopt, std::nullopt};
    if (std::filesystem::exists(dir / "geo.csv")) f.geo = dir / "geo.csv";
    if (std::filesystem::exists(dir / "meta.csv")) f.meta = dir / "meta.csv";
    return f;
}

Panel load_panel(const PanelFiles& files) {
    PanelBuilder b;
    {
        const auto t = csv::read(files.nodes);
        const auto c_id = t.require_column("node_id");
        const auto c_in = t.require_column("in_sample");
        const auto c_sex = t.column("sex");
        const auto c_by = t.column("birth_year");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            NodeInfo info;
            info.id = t.rows[r][c_id];
            info.in_sample = csv::parse_flag(t, r, c_in);
            if (c_sex) info.sex = t.rows[r][*c_sex];
            if (c_by && !t.rows[r][*c_by].empty()) info.birth_year = int(csv::parse_int(t, r, *c_by));
            b.add_node(std::move(info), t.where(r));
        }
    }
    {
        const auto t = csv::read(files.ties);
        const auto c_e = t.require_column("ego_id");
        const auto c_a = t.require_column("alter_id");
        const auto c_t = t.require_column("tie_type");
        const auto c_f = t.require_column("wave_first");
        const auto c_l = t.require_column("wave_last");
        const auto c_n = t.column("nominated_by_ego");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            TieType type;
            try {
                type = parse_tie_type(t.rows[r][c_t]);
            } catch (const DataError& e) {
                throw DataError(t.where(r) + ": " + e.what());
            }
            const bool nom = c_n ? csv::parse_flag(t, r, *c_n) : false;
            b.add_tie(t.rows[r][c_e], t.rows[r][c_a], type, int(csv::parse_int(t, r, c_f)),
                      int(csv::parse_int(t, r, c_l)), nom, t.where(r));
        }
    }
    {
        const auto t = csv::read(files.traits);
        const auto c_id = t.require_column("node_id");
        const auto c_w = t.require_column("wave");
        const auto c_t = t.require_column("trait");
        const auto c_v = t.require_column("value");
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            b.add_trait(t.rows[r][c_id], int(csv::parse_int(t, r, c_w)), t.rows[r][c_t],
                        csv::parse_double(t, r, c_v), t.where(r));
    }
    if (files.geo) {
        const auto t = csv::read(*files.geo);
        const auto c_id = t.require_column("node_id");
        const auto c_w = t.require_column("wave");
        const auto c_lat = t.require_column("latitude");
        const auto c_lon = t.require_column("longitude");
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            b.add_location(t.rows[r][c_id], int(csv::parse_int(t, r, c_w)), csv::parse_double(t, r, c_lat),
                           csv::parse_double(t, r, c_lon), t.where(r));
    }
    if (files.meta) {
        const auto t = csv::read(*files.meta);
        const auto c_k = t.require_column("key");
        const auto c_v = t.require_column("value");
        for (const auto& row : t.rows) b.set_metadata(row[c_k], row[c_v]);
        for (const auto& row : t.rows)
            if (row[c_k] == "num_waves") b.set_min_waves(std::stoi(row[c_v]));
    }
    return b.build();
}

void save_panel(const Panel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("nodes.csv");
        out << "node_id,in_sample,sex,birth_year\n";
        for (const auto& n : panel.nodes())
            out << csv::escape(n.id) << ',' << (n.in_sample ? 1 : 0) << ',' << csv::escape(n.sex) << ','
                << (n.birth_year ? std::to_string(*n.birth_year) : std::string()) << '\n';
    }
    {
        auto out = open("ties.csv");
        out << "ego_id,alter_id,tie_type,wave_first,wave_last,nominated_by_ego\n";
        for (const auto& t : panel.ties())
            out << csv::escape(panel.node(t.ego).id) << ',' << csv::escape(panel.node(t.alter).id) << ','
                << to_string(t.type) << ',' << t.wave_first << ',' << t.wave_last << ','
                << (t.nominated_by_ego ? 1 : 0) << '\n';
    }
    {
        auto out = open("traits.csv");
        out << "node_id,wave,trait,value\n";
        for (const auto& name : panel.trait_names()) {
            const auto& m = panel.trait(name);
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index w = 0; w < m.cols(); ++w)
                    if (!std::isnan(m(i, w)))
                        out << csv::escape(panel.node(NodeIndex(i)).id) << ',' << (w + 1) << ','
                            << csv::escape(name) << ',' << csv::format_number(m(i, w)) << '\n';
        }
    }
    if (panel.has_geo()) {
        auto out = open("geo.csv");
        out << "node_id,wave,latitude,longitude\n";
        for (NodeIndex i = 0; i < panel.size(); ++i)
            for (int w = 1; w <= panel.num_waves(); ++w)
                if (auto loc = panel.location(i, w))
                    out << csv::escape(panel.node(i).id) << ',' << w << ',' << csv::format_number(loc->latitude)
                        << ',' << csv::format_number(loc->longitude) << '\n';
    }
    auto meta = panel.metadata();
    meta["num_waves"] = std::to_string(panel.num_waves());
    auto out = open("meta.csv");
    out << "key,value\n";
    for (const auto& [k, v] : meta) out << csv::escape(k) << ',' << csv::escape(v) << '\n';
}

Panel derive_neighbor_ties(const Panel& panel, double radius_miles) {
    Panel out = panel;
    if (!panel.has_geo()) return out;
    const auto n = NodeIndex(panel.size());
    // open[(a,b)] = first wave of the current run of proximity
    std::map<std::pair<NodeIndex, NodeIndex>, int> open;
    for (int w = 1; w <= panel.num_waves() + 1; ++w) {
        std::set<std::pair<NodeIndex, NodeIndex>> near;
        if (w <= panel.num_waves()) {
            for (NodeIndex a = 0; a < n; ++a) {
                const auto la = panel.location(a, w);
                if (!la) continue;
                for (NodeIndex b = a + 1; b < n; ++b) {
                    const auto lb = panel.location(b, w);
                    if (lb && haversine_miles(*la, *lb) <= radius_miles) near.insert({a, b});
                }
            }
        }
        for (auto it = open.begin(); it != open.end();) {
            if (!near.count(it->first)) {
                out.ties_.push_back({it->first.first, it->first.second, TieType::neighbor, it->second, w - 1, false});
                it = open.erase(it);
            } else {
                ++it;
            }
        }
        for (const auto& pr : near) open.try_emplace(pr, w);
    }
    return out;
}

CovariateColumn resolve_covariate(const Panel& panel, const std::string& name, int wave) {
    CovariateColumn c{name, Eigen::VectorXd::Constant(Eigen::Index(panel.size()), kMissing), false};
    if (name == "sex") {
        for (NodeIndex i = 0; i < panel.size(); ++i) {
            const auto& s = panel.node(i).sex;
            if (s.empty()) continue;
            if (s == "F" || s == "f" || s == "female" || s == "Female" || s == "1")
                c.values(i) = 1.0;
            else if (s == "M" || s == "m" || s == "male" || s == "Male" || s == "0")
                c.values(i) = 0.0;
            else
                throw DataError("node '" + panel.node(i).id + "': unrecognised sex code '" + s + "'");
        }
        return c;
    }
    if (name == "birth_year") {
        for (NodeIndex i = 0; i < panel.size(); ++i)
            if (const auto& by = panel.node(i).birth_year) c.values(i) = double(*by);
        return c;
    }
    c.values = panel.trait_at(name, wave);
    c.time_varying = true;
    return c;
}

// ============================================================================
// NetworkSnapshot
// ============================================================================

namespace {

std::shared_ptr<const std::vector<NodeId>> default_ids(std::size_t n) {
    auto ids = std::make_shared<std::vector<NodeId>>();
    ids->reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids->push_back(std::to_string(i));
    return ids;
}

} // namespace

NetworkSnapshot::NetworkSnapshot(std::size_t n, std::span<const std::pair<NodeIndex, NodeIndex>> edges,
                                 std::shared_ptr<const std::vector<NodeId>> ids)
    : adjacency_(n), nominations_(n), ids_(ids ? std::move(ids) : default_ids(n)) {
    if (ids_->size() != n) throw DataError("snapshot id list does not match node count");
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw DataError("edge endpoint out of range");
        if (a == b) continue;
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& nb : adjacency_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        edge_count_ += nb.size();
    }
    edge_count_ /= 2;
}

bool NetworkSnapshot::has_edge(NodeIndex a, NodeIndex b) const {
    const auto& nb = adjacency_.at(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

bool NetworkSnapshot::has_nomination(NodeIndex from, NodeIndex to) const {
    const auto& nb = nominations_.at(from);
    return std::binary_search(nb.begin(), nb.end(), to);
}

std::vector<std::pair<NodeIndex, NodeIndex>> NetworkSnapshot::edges() const {
    std::vector<std::pair<NodeIndex, NodeIndex>> out;
    out.reserve(edge_count_);
    for (NodeIndex a = 0; a < adjacency_.size(); ++a)
        for (auto b : adjacency_[a])
            if (a < b) out.emplace_back(a, b);
    return out;
}

std::optional<NodeIndex> NetworkSnapshot::index_of(std::string_view id) const {
    const auto& ids = *ids_;
    auto it = std::lower_bound(ids.begin(), ids.end(), id, NodeIdLess{});
    if (it == ids.end() || *it != id) return std::nullopt;
    return NodeIndex(it - ids.begin());
}

void NetworkSnapshot::set_nominations(std::vector<std::vector<NodeIndex>> out) {
    if (out.size() != adjacency_.size()) throw DataError("nomination list does not match node count");
    for (NodeIndex i = 0; i < out.size(); ++i) {
        auto& v = out[i];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        std::erase(v, i);
    }
    nominations_ = std::move(out);
}

void NetworkSnapshot::set_typed_edges(std::vector<TypedEdge> typed) {
    for (auto& e : typed)
        if (e.a > e.b) std::swap(e.a, e.b);
    std::sort(typed.begin(), typed.end(),
              [](const TypedEdge& x, const TypedEdge& y) { return std::tie(x.a, x.b, x.type) < std::tie(y.a, y.b, y.type); });
    typed.erase(std::unique(typed.begin(), typed.end(),
                            [](const TypedEdge& x, const TypedEdge& y) {
                                return x.a == y.a && x.b == y.b && x.type == y.type;
                            }),
                typed.end());
    typed_edges_ = std::move(typed);
}

NetworkSnapshot snapshot(const Panel& panel, int wave, TieFilter filter) {
    if (wave < 1 || wave > panel.num_waves())
        throw DataError("wave " + std::to_string(wave) + " out of range 1.." + std::to_string(panel.num_waves()));
    std::vector<std::pair<NodeIndex, NodeIndex>> edges;
    std::vector<TypedEdge> typed;
    std::vector<std::vector<NodeIndex>> noms(panel.size());
    for (const auto& t : panel.ties()) {
        if (!t.active_at(wave) || !filter.contains(t.type)) continue;
        edges.emplace_back(t.ego, t.alter);
        typed.push_back({t.ego, t.alter, t.type});
        if (t.type == TieType::friend_tie) {
            if (t.nominated_by_ego)
                noms[t.ego].push_back(t.alter);
            else
                noms[t.alter].push_back(t.ego);
        }
    }
    NetworkSnapshot g(panel.size(), edges, panel.ids());
    g.wave = wave;
    g.set_nominations(std::move(noms));
    g.set_typed_edges(std::move(typed));
    return g;
}

std::vector<int> bfs_distances(const NetworkSnapshot& g, NodeIndex source, int max_d) {
    if (source >= g.size()) throw DataError("unknown source node index " + std::to_string(source));
    std::vector<int> dist(g.size(), kUnreached);
    std::vector<NodeIndex> frontier{source}, next;
    dist[source] = 0;
    for (int d = 1; d <= max_d && !frontier.empty(); ++d) {
        next.clear();
        for (auto u : frontier)
            for (auto v : g.neighbors(u))
                if (dist[v] == kUnreached) {
                    dist[v] = d;
                    next.push_back(v);
                }
        frontier.swap(next);
    }
    return dist;
}

std::map<NodeId, int, NodeIdLess> geodesic_distances(const NetworkSnapshot& g, const NodeId& source, int max_d) {
    const auto s = g.index_of(source);
    if (!s) throw DataError("unknown source node '" + source + "'");
    const auto dist = bfs_distances(g, *s, max_d);
    std::map<NodeId, int, NodeIdLess> out;
    for (NodeIndex i = 0; i < dist.size(); ++i)
        if (dist[i] != kUnreached) out.emplace(g.id(i), dist[i]);
    return out;
}

std::string_view to_string(FriendshipClass c) {
    switch (c) {
    case FriendshipClass::mutual: return "mutual";
    case FriendshipClass::ego_perceived: return "ego_perceived";
    case FriendshipClass::alter_perceived: return "alter_perceived";
    case FriendshipClass::none: return "none";
    }
    return "?";
}

FriendshipClass classify_friendship(const NetworkSnapshot& g, NodeIndex ego, NodeIndex alter) {
    const bool out = g.has_nomination(ego, alter);
    const bool in = g.has_nomination(alter, ego);
    if (out && in) return FriendshipClass::mutual;
    if (out) return FriendshipClass::ego_perceived;
    if (in) return FriendshipClass::alter_perceived;
    return FriendshipClass::none;
}

FriendshipClass classify_friendship(const NetworkSnapshot& g, const NodeId& ego, const NodeId& alter) {
    const auto e = g.index_of(ego);
    const auto a = g.index_of(alter);
    if (!e || !a) throw DataError("unknown node in friendship query");
    return classify_friendship(g, *e, *a);
}

// ============================================================================
// Geography
// ============================================================================

double haversine_miles(const GeoLocation& a, const GeoLocation& b) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (b.latitude - a.latitude) * rad;
    const double dlon = (b.longitude - a.longitude) * rad;
    const double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
    double h = s * s + std::cos(a.latitude * rad) * std::cos(b.latitude * rad) * t * t;
    h = std::clamp(h, 0.0, 1.0);
    return 2 * kEarthRadiusMiles * std::asin(std::sqrt(h));
}

double geographic_distance(const Panel& panel, const NodeId& a, const NodeId& b, int wave) {
    const auto ia = panel.require_index(a);
    const auto ib = panel.require_index(b);
    const auto la = panel.location(ia, wave);
    const auto lb = panel.location(ib, wave);
    if (!la || !lb)
        throw DataError("missing location for '" + (la ? b : a) + "' at wave " + std::to_string(wave));
    return haversine_miles(*la, *lb);
}

// ============================================================================
// Descriptive statistics
// ============================================================================

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

DegreeStats degree_stats(const NetworkSnapshot& g) {
    DegreeStats s;
    s.n_nodes = g.size();
    s.n_edges = g.edge_count();
    if (g.size() == 0) return s;
    std::vector<double> deg(g.size());
    for (NodeIndex i = 0; i < g.size(); ++i) deg[i] = double(g.neighbors(i).size());
    s.mean_degree = 2.0 * double(g.edge_count()) / double(g.size());
    s.median_degree = median_of(deg);
    std::vector<char> has_friend(g.size(), 0);
    for (const auto& e : g.typed_edges()) {
        ++s.tie_type_counts[e.type];
        if (e.type == TieType::friend_tie) has_friend[e.a] = has_friend[e.b] = 1;
    }
    s.pct_with_friend = 100.0 * double(std::count(has_friend.begin(), has_friend.end(), 1)) / double(g.size());
    s.friend_ties_per_node = 2.0 * double(s.tie_type_counts[TieType::friend_tie]) / double(g.size());
    return s;
}

DegreeStats degree_stats(const Panel& panel) {
    DegreeStats s;
    std::set<std::tuple<NodeIndex, NodeIndex, TieType>> typed;
    std::set<std::pair<NodeIndex, NodeIndex>> pairs;
    for (const auto& t : panel.ties()) {
        const auto a = std::min(t.ego, t.alter), b = std::max(t.ego, t.alter);
        typed.emplace(a, b, t.type);
        pairs.emplace(a, b);
    }
    std::vector<double> deg(panel.size(), 0.0);
    std::vector<char> has_friend(panel.size(), 0);
    for (const auto& [a, b, type] : typed) {
        deg[a] += 1;
        deg[b] += 1;
        ++s.tie_type_counts[type];
        if (type == TieType::friend_tie) has_friend[a] = has_friend[b] = 1;
    }
    std::vector<double> in_deg;
    std::size_t friends = 0, friend_incidences = 0;
    for (NodeIndex i = 0; i < panel.size(); ++i) {
        if (!panel.node(i).in_sample) continue;
        in_deg.push_back(deg[i]);
        friends += has_friend[i];
    }
    for (const auto& [a, b, type] : typed)
        if (type == TieType::friend_tie)
            friend_incidences += std::size_t(panel.node(a).in_sample) + std::size_t(panel.node(b).in_sample);
    s.n_nodes = in_deg.size();
    s.n_edges = pairs.size();
    if (in_deg.empty()) return s;
    double sum = 0;
    for (double d : in_deg) sum += d;
    s.mean_degree = sum / double(in_deg.size());
    s.median_degree = median_of(in_deg);
    s.pct_with_friend = 100.0 * double(friends) / double(in_deg.size());
    s.friend_ties_per_node = double(friend_incidences) / double(in_deg.size());
    return s;
}

} // namespace socnet

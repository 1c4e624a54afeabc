#include "socnet/abm.hpp"

#include "socnet/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace socnet {

namespace {

using nlohmann::json;

bool is_probability(double p) { return p >= 0 && p <= 1; }

void require_probability(double p, const char* name) {
    if (!is_probability(p)) throw DataError(std::string("abm spec: ") + name + " must lie in [0, 1]");
}

double logit(double p) { return std::log(p / (1 - p)); }
double logistic(double x) { return 1 / (1 + std::exp(-x)); }

// Shifts a probability on the logit scale; exact 0 / 1 stay put.
double shift(double p, double delta) {
    if (p <= 0 || p >= 1 || delta == 0) return p;
    return logistic(logit(p) + delta);
}

} // namespace

void ABMSpec::validate() const {
    if (n < 4) throw DataError("abm spec: n must be >= 4");
    if (waves < 2) throw DataError("abm spec: waves must be >= 2");
    if (burn_in_waves < 0) throw DataError("abm spec: burn_in_waves must be >= 0");
    if (substeps < 1) throw DataError("abm spec: substeps must be >= 1");
    if (k < 0 || std::size_t(k) >= n) throw DataError("abm spec: k must lie in [0, n)");
    if (generator == Generator::watts_strogatz && k % 2 != 0) throw DataError("abm spec: k must be even for watts_strogatz");
    if (generator == Generator::configuration_model) throw DataError("abm spec: generator must be watts_strogatz or erdos_renyi");
    require_probability(rewire, "rewire");
    require_probability(reciprocity, "reciprocity");
    require_probability(out_of_sample_fraction, "out_of_sample_fraction");
    require_probability(baseline_adoption, "baseline_adoption");
    require_probability(abandonment, "abandonment");
    require_probability(influence_p, "influence_p");
    require_probability(tie_turnover, "tie_turnover");
    require_probability(local_fraction, "local_fraction");
    if (weight_mutual < 0 || weight_ego_perceived < 0 || weight_alter_perceived < 0)
        throw DataError("abm spec: class weights must be >= 0");
    if (influence_max_distance_miles < 0) throw DataError("abm spec: influence_max_distance_miles must be >= 0");
    if (candidates < 1) throw DataError("abm spec: candidates must be >= 1");
    if (groups < 1) throw DataError("abm spec: groups must be >= 1");
    if (context_shock_sd < 0 || continuous_noise < 0 || latent_strength < 0 || homophily_strength < 0)
        throw DataError("abm spec: scale parameters must be >= 0");
    if (continuous_reversion < 0 || continuous_reversion > 1)
        throw DataError("abm spec: continuous_reversion must lie in [0, 1]");
    if (local_radius_miles < 0 || far_radius_miles < local_radius_miles)
        throw DataError("abm spec: need 0 <= local_radius_miles <= far_radius_miles");
    if (trait_name.empty()) throw DataError("abm spec: trait_name must be non-empty");
}

// ============================================================================
// JSON
// ============================================================================

namespace {

template <typename T>
void read_into(const json& v, T& out, const std::string& key) {
    try {
        out = v.get<T>();
    } catch (const json::exception&) {
        throw DataError("abm spec: bad value for '" + key + "'");
    }
}

struct Field {
    std::function<void(ABMSpec&, const json&, const std::string&)> read;
    std::function<json(const ABMSpec&)> write;
};

template <typename M>
Field field(M ABMSpec::*member) {
    return {[member](ABMSpec& s, const json& v, const std::string& k) { read_into(v, s.*member, k); },
            [member](const ABMSpec& s) { return json(s.*member); }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = [] {
        std::map<std::string, Field> m;
        m["influence"] = field(&ABMSpec::influence);
        m["observable_homophily"] = field(&ABMSpec::observable_homophily);
        m["latent_homophily"] = field(&ABMSpec::latent_homophily);
        m["shared_context"] = field(&ABMSpec::shared_context);
        m["n"] = field(&ABMSpec::n);
        m["waves"] = field(&ABMSpec::waves);
        m["burn_in_waves"] = field(&ABMSpec::burn_in_waves);
        m["generator"] = {[](ABMSpec& s, const json& v, const std::string& k) {
                              std::string g;
                              read_into(v, g, k);
                              s.generator = parse_generator(g);
                          },
                          [](const ABMSpec& s) { return json(std::string(to_string(s.generator))); }};
        m["k"] = field(&ABMSpec::k);
        m["rewire"] = field(&ABMSpec::rewire);
        m["reciprocity"] = field(&ABMSpec::reciprocity);
        m["out_of_sample_fraction"] = field(&ABMSpec::out_of_sample_fraction);
        m["trait_kind"] = {[](ABMSpec& s, const json& v, const std::string& k) {
                               std::string t;
                               read_into(v, t, k);
                               if (t == "binary") s.trait_kind = TraitKind::binary;
                               else if (t == "continuous") s.trait_kind = TraitKind::continuous;
                               else throw DataError("abm spec: trait_kind must be binary or continuous");
                           },
                           [](const ABMSpec& s) {
                               return json(s.trait_kind == TraitKind::binary ? "binary" : "continuous");
                           }};
        m["trait_name"] = field(&ABMSpec::trait_name);
        m["substeps"] = field(&ABMSpec::substeps);
        m["baseline_adoption"] = field(&ABMSpec::baseline_adoption);
        m["abandonment"] = field(&ABMSpec::abandonment);
        m["influence_p"] = field(&ABMSpec::influence_p);
        m["weight_mutual"] = field(&ABMSpec::weight_mutual);
        m["weight_ego_perceived"] = field(&ABMSpec::weight_ego_perceived);
        m["weight_alter_perceived"] = field(&ABMSpec::weight_alter_perceived);
        m["influence_max_distance_miles"] = field(&ABMSpec::influence_max_distance_miles);
        m["continuous_mean"] = field(&ABMSpec::continuous_mean);
        m["continuous_noise"] = field(&ABMSpec::continuous_noise);
        m["continuous_reversion"] = field(&ABMSpec::continuous_reversion);
        m["tie_turnover"] = field(&ABMSpec::tie_turnover);
        m["candidates"] = field(&ABMSpec::candidates);
        m["homophily_strength"] = field(&ABMSpec::homophily_strength);
        m["latent_strength"] = field(&ABMSpec::latent_strength);
        m["groups"] = field(&ABMSpec::groups);
        m["context_shock_sd"] = field(&ABMSpec::context_shock_sd);
        m["local_fraction"] = field(&ABMSpec::local_fraction);
        m["local_radius_miles"] = field(&ABMSpec::local_radius_miles);
        m["far_radius_miles"] = field(&ABMSpec::far_radius_miles);
        m["seed"] = field(&ABMSpec::seed);
        return m;
    }();
    return f;
}

} // namespace

ABMSpec parse_abm_spec(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("abm spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("abm spec: expected a JSON object");
    ABMSpec s;
    for (const auto& [key, value] : j.items()) {
        auto it = fields().find(key);
        if (it == fields().end()) throw DataError("abm spec: unknown key '" + key + "'");
        it->second.read(s, value, key);
    }
    s.validate();
    return s;
}

std::string abm_spec_json(const ABMSpec& spec) {
    json j = json::object();
    for (const auto& [key, f] : fields()) j[key] = f.write(spec);
    return j.dump();
}

// ============================================================================
// Generator
// ============================================================================

namespace {

struct LiveTie {
    NodeIndex a, b; // a < b
    bool a_names_b, b_names_a;
    int first;
};

struct Influence {
    NodeIndex alter;
    double weight;
};

GeoLocation place(Rng& rng, const ABMSpec& s) {
    constexpr double lat0 = 42.28, lon0 = -71.42, miles_per_degree = 69.05;
    const bool local = bernoulli(rng, s.local_fraction);
    const double u = uniform01(rng);
    const double d = local ? s.local_radius_miles * std::sqrt(u)
                           : s.local_radius_miles + (s.far_radius_miles - s.local_radius_miles) * u;
    const double bearing = 2 * M_PI * uniform01(rng);
    const double lat = lat0 + d * std::cos(bearing) / miles_per_degree;
    const double lon = lon0 + d * std::sin(bearing) / (miles_per_degree * std::cos(lat0 * M_PI / 180));
    return {std::clamp(lat, -90.0, 90.0), lon};
}

class Simulation {
public:
    explicit Simulation(const ABMSpec& s) : s_(s), n_(s.n) {}

    Panel run();

private:
    void init_population();
    void init_traits();
    void init_network();
    void transition(int w); // traits and ties from wave w to w + 1
    void record_wave(int w);
    std::vector<std::vector<Influence>> influence_lists() const;
    void turnover(int w);
    double similarity(NodeIndex i, NodeIndex j, double y_sd) const;
    void add_tie(NodeIndex chooser, NodeIndex target, int first);
    void close(const LiveTie& t, int last);

    const ABMSpec& s_;
    std::size_t n_;
    std::vector<NodeInfo> info_;
    std::vector<double> z_;
    std::vector<int> group_;
    std::vector<GeoLocation> geo_;
    std::vector<double> y_;
    std::map<std::uint64_t, LiveTie> live_;
    std::vector<TieRecord> closed_;
    Rng dyn_;
    PanelBuilder builder_;
};

std::uint64_t tie_key(NodeIndex a, NodeIndex b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(a) << 32) | b;
}

void Simulation::init_population() {
    auto rng = make_rng(s_.seed, {0});
    std::normal_distribution<double> norm;
    info_.resize(n_);
    z_.resize(n_);
    geo_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        info_[i].id = std::to_string(i);
        info_[i].in_sample = !bernoulli(rng, s_.out_of_sample_fraction);
        info_[i].sex = bernoulli(rng, 0.5) ? "F" : "M";
        info_[i].birth_year = 1920 + int(uniform_index<unsigned>(rng, 41));
        z_[i] = norm(rng);
        geo_[i] = place(rng, s_);
    }
}

void Simulation::init_traits() {
    auto rng = make_rng(s_.seed, {1});
    y_.resize(n_);
    std::normal_distribution<double> norm;
    const double lz = s_.latent_homophily ? s_.latent_strength : 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (s_.trait_kind == TraitKind::binary) {
            const double b = shift(s_.baseline_adoption, lz * z_[i]);
            const double a = shift(s_.abandonment, -lz * z_[i]);
            y_[i] = bernoulli(rng, a + b > 0 ? b / (a + b) : 0.0) ? 1.0 : 0.0;
        } else {
            y_[i] = s_.continuous_mean + lz * z_[i] + s_.continuous_noise * norm(rng);
        }
    }
}

void Simulation::init_network() {
    // ring positions follow a homophily key so initial neighbors are similar on
    // whatever drives selection; groups are contiguous arcs of the ring
    auto rng = make_rng(s_.seed, {2});
    std::normal_distribution<double> norm;
    std::vector<double> key(n_);
    const bool sorted = s_.observable_homophily || s_.latent_homophily;
    double y_sd = 1;
    if (s_.observable_homophily && s_.trait_kind == TraitKind::continuous) {
        std::vector<double> yy(y_);
        const double m = std::accumulate(yy.begin(), yy.end(), 0.0) / double(n_);
        double v = 0;
        for (double x : yy) v += (x - m) * (x - m);
        y_sd = std::max(std::sqrt(v / double(n_)), 1e-12);
    }
    for (std::size_t i = 0; i < n_; ++i) {
        key[i] = sorted ? norm(rng) : double(i);
        if (s_.observable_homophily) key[i] += s_.homophily_strength * y_[i] / y_sd;
        if (s_.latent_homophily) key[i] += s_.homophily_strength * z_[i];
    }
    std::vector<NodeIndex> at(n_); // ring position -> node
    std::iota(at.begin(), at.end(), NodeIndex(0));
    std::stable_sort(at.begin(), at.end(), [&](NodeIndex a, NodeIndex b) { return key[a] < key[b]; });
    group_.resize(n_);
    for (std::size_t p = 0; p < n_; ++p) group_[at[p]] = int(p * std::size_t(s_.groups) / n_);

    SyntheticNetworkSpec net;
    net.generator = s_.generator;
    net.n = n_;
    net.k = s_.k;
    net.beta = s_.rewire;
    net.p = double(s_.k) / double(n_ - 1);
    net.reciprocity = s_.reciprocity;
    net.seed = derive_seed(s_.seed, {2, 1});
    const auto g = generate_network(net);
    const int first = 1 - s_.burn_in_waves;
    for (auto [p, q] : g.edges()) {
        const NodeIndex a = at[p], b = at[q];
        LiveTie t{std::min(a, b), std::max(a, b), false, false, first};
        const bool p_names_q = g.has_nomination(p, q), q_names_p = g.has_nomination(q, p);
        t.a_names_b = a < b ? p_names_q : q_names_p;
        t.b_names_a = a < b ? q_names_p : p_names_q;
        live_[tie_key(a, b)] = t;
    }
}

std::vector<std::vector<Influence>> Simulation::influence_lists() const {
    std::vector<std::vector<Influence>> out(n_);
    for (const auto& [key, t] : live_) {
        if (s_.influence_max_distance_miles > 0 &&
            haversine_miles(geo_[t.a], geo_[t.b]) >= s_.influence_max_distance_miles)
            continue;
        // weight seen by ego a from alter b, and by ego b from alter a
        auto weight = [&](bool ego_names, bool alter_names) {
            if (ego_names && alter_names) return s_.weight_mutual;
            if (ego_names) return s_.weight_ego_perceived;
            return s_.weight_alter_perceived;
        };
        const double wab = weight(t.a_names_b, t.b_names_a), wba = weight(t.b_names_a, t.a_names_b);
        if (wab > 0) out[t.a].push_back({t.b, wab});
        if (wba > 0) out[t.b].push_back({t.a, wba});
    }
    return out;
}

void Simulation::transition(int w) {
    const int K = s_.substeps;
    std::normal_distribution<double> norm;

    // group shocks for this transition
    std::vector<double> shock(std::size_t(s_.groups), 0.0);
    if (s_.shared_context) {
        auto srng = make_rng(s_.seed, {4, std::uint64_t(w + (1 << 20))});
        for (auto& x : shock) x = s_.context_shock_sd * norm(srng);
    }
    const double lz = s_.latent_homophily ? s_.latent_strength : 0.0;
    std::vector<std::vector<Influence>> infl;
    if (s_.influence) infl = influence_lists();

    std::vector<double> next(n_);
    for (int step = 0; step < K; ++step) {
        for (std::size_t i = 0; i < n_; ++i) {
            const double drive = lz * z_[i] + shock[std::size_t(group_[i])];
            if (s_.trait_kind == TraitKind::binary) {
                double p;
                if (y_[i] == 0.0) {
                    double exposure = 0;
                    if (s_.influence)
                        for (const auto& e : infl[i]) exposure += e.weight * y_[e.alter];
                    const double stay = std::pow(1 - shift(s_.baseline_adoption, drive), 1.0 / K) *
                                        std::pow(1 - s_.influence_p, exposure / K);
                    p = 1 - stay;
                } else {
                    p = 1 - std::pow(1 - shift(s_.abandonment, -drive), 1.0 / K);
                }
                const bool flip = bernoulli(dyn_, p);
                next[i] = flip ? 1.0 - y_[i] : y_[i];
            } else {
                double pull = s_.continuous_reversion * (s_.continuous_mean + drive - y_[i]);
                if (s_.influence && !infl[i].empty()) {
                    double sw = 0, sy = 0;
                    for (const auto& e : infl[i]) {
                        sw += e.weight;
                        sy += e.weight * y_[e.alter];
                    }
                    if (sw > 0) pull += s_.influence_p * (sy / sw - y_[i]);
                }
                next[i] = y_[i] + pull / K + s_.continuous_noise / std::sqrt(double(K)) * norm(dyn_);
            }
        }
        y_.swap(next);
    }
    turnover(w);
}

double Simulation::similarity(NodeIndex i, NodeIndex j, double y_sd) const {
    double s = 0;
    if (s_.observable_homophily) {
        if (s_.trait_kind == TraitKind::binary) s += y_[i] == y_[j] ? 1.0 : 0.0;
        else s -= std::abs(y_[i] - y_[j]) / y_sd;
    }
    if (s_.latent_homophily) s -= std::abs(z_[i] - z_[j]);
    return s;
}

void Simulation::add_tie(NodeIndex chooser, NodeIndex target, int first) {
    LiveTie t{std::min(chooser, target), std::max(chooser, target), false, false, first};
    bool chooser_names = true, target_names = true;
    if (!bernoulli(dyn_, s_.reciprocity)) {
        chooser_names = bernoulli(dyn_, 0.5);
        target_names = !chooser_names;
    }
    t.a_names_b = t.a == chooser ? chooser_names : target_names;
    t.b_names_a = t.a == chooser ? target_names : chooser_names;
    live_[tie_key(chooser, target)] = t;
}

void Simulation::turnover(int w) {
    if (s_.tie_turnover <= 0) return;
    std::vector<LiveTie> dissolved;
    for (auto it = live_.begin(); it != live_.end();) {
        if (bernoulli(dyn_, s_.tie_turnover)) {
            dissolved.push_back(it->second);
            it = live_.erase(it);
        } else {
            ++it;
        }
    }
    double y_sd = 1;
    if (s_.trait_kind == TraitKind::continuous) {
        const double m = std::accumulate(y_.begin(), y_.end(), 0.0) / double(n_);
        double v = 0;
        for (double x : y_) v += (x - m) * (x - m);
        y_sd = std::max(std::sqrt(v / double(n_)), 1e-12);
    }
    const bool selective = s_.observable_homophily || s_.latent_homophily;
    for (const auto& t : dissolved) {
        if (w >= 1) close(t, w);
        const NodeIndex chooser = bernoulli(dyn_, 0.5) ? t.a : t.b;
        std::vector<NodeIndex> cands;
        std::vector<double> weights;
        for (int tries = 0; tries < 10 * s_.candidates && int(cands.size()) < s_.candidates; ++tries) {
            const auto j = uniform_index<NodeIndex>(dyn_, NodeIndex(n_));
            if (j == chooser || live_.count(tie_key(chooser, j)) ||
                std::find(cands.begin(), cands.end(), j) != cands.end())
                continue;
            cands.push_back(j);
            weights.push_back(selective ? std::exp(s_.homophily_strength * similarity(chooser, j, y_sd)) : 1.0);
        }
        if (cands.empty()) continue;
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        add_tie(chooser, cands[pick(dyn_)], w + 1);
    }
}

// One friend record per nomination direction.
void Simulation::close(const LiveTie& t, int last) {
    const int first = std::max(t.first, 1);
    if (t.a_names_b) closed_.push_back({t.a, t.b, TieType::friend_tie, first, last, true});
    if (t.b_names_a) closed_.push_back({t.b, t.a, TieType::friend_tie, first, last, true});
}

void Simulation::record_wave(int w) {
    for (std::size_t i = 0; i < n_; ++i) {
        if (info_[i].in_sample) builder_.add_trait(info_[i].id, w, s_.trait_name, y_[i]);
        builder_.add_location(info_[i].id, w, geo_[i].latitude, geo_[i].longitude);
    }
}

Panel Simulation::run() {
    s_.validate();
    dyn_ = make_rng(s_.seed, {3});
    init_population();
    init_traits();
    init_network();
    for (int w = 1 - s_.burn_in_waves; w < 1; ++w) transition(w);
    for (const auto& n : info_) builder_.add_node(n);
    for (int w = 1; w <= s_.waves; ++w) {
        record_wave(w);
        if (w < s_.waves) transition(w);
    }
    for (const auto& [key, t] : live_)
        if (t.first <= s_.waves) close(t, s_.waves);
    for (const auto& r : closed_)
        builder_.add_tie(info_[r.ego].id, info_[r.alter].id, r.type, r.wave_first, r.wave_last, r.nominated_by_ego);

    builder_.set_metadata("generator", "abm");
    builder_.set_metadata("trait", s_.trait_name);
    builder_.set_metadata("process.influence", s_.influence ? "1" : "0");
    builder_.set_metadata("process.observable_homophily", s_.observable_homophily ? "1" : "0");
    builder_.set_metadata("process.latent_homophily", s_.latent_homophily ? "1" : "0");
    builder_.set_metadata("process.shared_context", s_.shared_context ? "1" : "0");
    builder_.set_metadata("seed", std::to_string(s_.seed));
    builder_.set_metadata("abm_spec", abm_spec_json(s_));
    builder_.set_min_waves(s_.waves);
    return builder_.build();
}

} // namespace

Panel abm_generate_panel(const ABMSpec& spec) {
    return Simulation(spec).run();
}

} // namespace socnet

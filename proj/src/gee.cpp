#include "socnet/gee.hpp"

#include "socnet/rng.hpp"
#include "socnet/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <tuple>

namespace socnet {

// ============================================================================
// Dyad rows
// ============================================================================

namespace {

std::optional<TieType> pair_type(const NetworkSnapshot& g, NodeIndex a, NodeIndex b) {
    const auto lo = std::min(a, b), hi = std::max(a, b);
    const auto typed = g.typed_edges();
    auto it = std::lower_bound(typed.begin(), typed.end(), std::make_pair(lo, hi),
                               [](const TypedEdge& e, const std::pair<NodeIndex, NodeIndex>& k) {
                                   return std::tie(e.a, e.b) < std::tie(k.first, k.second);
                               });
    if (it == typed.end() || it->a != lo || it->b != hi) return std::nullopt;
    return it->type;
}

bool has_friend_type(const NetworkSnapshot& g, NodeIndex a, NodeIndex b) {
    const auto lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& e : g.typed_edges())
        if (e.a == lo && e.b == hi && e.type == TieType::friend_tie) return true;
    return false;
}

DyadSet build_rows(const Panel& panel, const std::string& trait, TieFilter filter,
                   const std::vector<std::string>& covariates, bool lagged) {
    const int W = panel.num_waves();
    if (lagged ? W < 3 : W < 2)
        throw DataError(lagged ? "lagged-change model needs at least 3 waves" : "dyad rows need at least 2 waves");
    const Eigen::MatrixXd& Y = panel.trait(trait);

    DyadSet out;
    out.trait = trait;
    out.filter = filter;
    out.covariate_names = covariates;
    for (const auto& c : covariates) out.covariate_time_varying.push_back(resolve_covariate(panel, c, 1).time_varying);
    std::set<std::string> seen;
    for (const auto& c : covariates)
        if (!seen.insert(c).second) throw DataError("covariate '" + c + "' listed twice");

    auto bump = [&](const char* reason) { ++out.drops.by_reason[reason]; };

    std::vector<NetworkSnapshot> snaps;
    for (int w = 1; w <= W; ++w) snaps.push_back(snapshot(panel, w, filter));

    const int t_first = lagged ? 2 : 1;
    for (int t = t_first; t <= W - 1; ++t) {
        const auto& g0 = snaps[std::size_t(t - 1)];
        const auto& g1 = snaps[std::size_t(t)];
        std::vector<CovariateColumn> cov;
        for (const auto& c : covariates) cov.push_back(resolve_covariate(panel, c, t));
        const auto wi = Eigen::Index(t - 1);
        for (auto [a, b] : g0.edges()) {
            if (!g1.has_edge(a, b)) continue;
            if (lagged && !snaps[std::size_t(t - 2)].has_edge(a, b)) continue;
            for (auto [ego, alter] : {std::pair{a, b}, std::pair{b, a}}) {
                ++out.drops.candidates;
                if (!panel.node(ego).in_sample) {
                    bump("ego_out_of_sample");
                    continue;
                }
                if (!panel.node(alter).in_sample) {
                    bump("alter_out_of_sample");
                    continue;
                }
                DyadRow row;
                row.ego = ego;
                row.alter = alter;
                row.wave_t = t;
                row.y_ego_t = Y(ego, wi);
                row.y_ego_t1 = Y(ego, wi + 1);
                row.y_alter_t = Y(alter, wi);
                row.y_alter_t1 = Y(alter, wi + 1);
                if (lagged) row.y_alter_tm1 = Y(alter, wi - 1);
                if (std::isnan(row.y_ego_t) || std::isnan(row.y_ego_t1)) {
                    bump("missing_ego_trait");
                    continue;
                }
                if (std::isnan(row.y_alter_t) || std::isnan(row.y_alter_t1) ||
                    (lagged && std::isnan(row.y_alter_tm1))) {
                    bump("missing_alter_trait");
                    continue;
                }
                row.x.resize(Eigen::Index(cov.size()));
                bool complete = true;
                for (std::size_t k = 0; k < cov.size(); ++k) {
                    row.x(Eigen::Index(k)) = cov[k].values(ego);
                    complete = complete && !std::isnan(row.x(Eigen::Index(k)));
                }
                if (!complete) {
                    bump("missing_covariate");
                    continue;
                }
                row.tie_type = pair_type(g0, ego, alter).value_or(TieType::friend_tie);
                if (has_friend_type(g0, ego, alter)) row.directionality = classify_friendship(g0, ego, alter);
                const auto le = panel.location(ego, t), la = panel.location(alter, t);
                if (le && la) row.geo_distance_t = haversine_miles(*le, *la);
                out.rows.push_back(std::move(row));
                ++out.drops.kept;
            }
        }
    }
    if (out.rows.empty()) throw DataError("no eligible dyad rows for trait '" + trait + "'");
    return out;
}

} // namespace

DyadSet build_dyad_rows(const Panel& panel, const std::string& trait, TieFilter filter,
                        const std::vector<std::string>& covariates) {
    return build_rows(panel, trait, filter, covariates, false);
}

DyadSet build_lagged_rows(const Panel& panel, const std::string& trait, TieFilter filter,
                          const std::vector<std::string>& covariates) {
    return build_rows(panel, trait, filter, covariates, true);
}

void standardize_covariates(DyadSet& dyads) {
    for (std::size_t k = 0; k < dyads.covariate_names.size(); ++k) {
        const auto K = Eigen::Index(k);
        bool binary = true;
        std::vector<double> col;
        for (const auto& r : dyads.rows) {
            col.push_back(r.x(K));
            binary = binary && (r.x(K) == 0.0 || r.x(K) == 1.0);
        }
        if (binary) continue;
        const auto m = stats::moments(col);
        const double sd = std::sqrt(m.variance);
        if (!(sd > 0)) continue;
        for (auto& r : dyads.rows) r.x(K) = (r.x(K) - m.mean) / sd;
    }
}

// ============================================================================
// Model specification
// ============================================================================

ModelSpec basic_model(Link link, const std::vector<std::string>& covariates) {
    ModelSpec s;
    s.link = link;
    s.terms = {{"intercept", {}},
               {"y_ego_t", {"y_ego_t"}},
               {kAlterContemporaneous, {kAlterContemporaneous}},
               {"y_alter_t", {"y_alter_t"}}};
    for (const auto& c : covariates) s.terms.push_back({c, {c}});
    return s;
}

namespace {

enum class Var {
    y_ego_t, y_ego_t1, y_alter_t, y_alter_t1, y_alter_tm1, delta_y_ego, delta_y_alter, geo_distance,
    mutual, ego_perceived, alter_perceived, covariate
};

struct VarRef {
    Var kind = Var::covariate;
    Eigen::Index cov = 0;
};

VarRef resolve(const DyadSet& d, const std::string& name) {
    static const std::map<std::string, Var> builtin{
        {"y_ego_t", Var::y_ego_t},         {"y_ego_t1", Var::y_ego_t1},
        {"y_alter_t", Var::y_alter_t},     {"y_alter_t1", Var::y_alter_t1},
        {"y_alter_tm1", Var::y_alter_tm1}, {"delta_y_ego", Var::delta_y_ego},
        {"delta_y_alter", Var::delta_y_alter}, {"geo_distance", Var::geo_distance},
        {"mutual", Var::mutual},           {"ego_perceived", Var::ego_perceived},
        {"alter_perceived", Var::alter_perceived}};
    if (auto it = builtin.find(name); it != builtin.end()) return {it->second, 0};
    for (std::size_t k = 0; k < d.covariate_names.size(); ++k)
        if (d.covariate_names[k] == name) return {Var::covariate, Eigen::Index(k)};
    throw DataError("unknown model variable '" + name + "'");
}

double value(const VarRef& v, const DyadRow& r) {
    switch (v.kind) {
    case Var::y_ego_t: return r.y_ego_t;
    case Var::y_ego_t1: return r.y_ego_t1;
    case Var::y_alter_t: return r.y_alter_t;
    case Var::y_alter_t1: return r.y_alter_t1;
    case Var::y_alter_tm1: return r.y_alter_tm1;
    case Var::delta_y_ego: return r.y_ego_t1 - r.y_ego_t;
    case Var::delta_y_alter: return r.y_alter_t - r.y_alter_tm1;
    case Var::geo_distance: return r.geo_distance_t;
    case Var::mutual: return r.directionality == FriendshipClass::mutual ? 1.0 : 0.0;
    case Var::ego_perceived: return r.directionality == FriendshipClass::ego_perceived ? 1.0 : 0.0;
    case Var::alter_perceived: return r.directionality == FriendshipClass::alter_perceived ? 1.0 : 0.0;
    case Var::covariate: return r.x(v.cov);
    }
    return kMissing;
}

bool time_varying(const DyadSet& d, const VarRef& v) {
    return v.kind != Var::covariate || d.covariate_time_varying.at(std::size_t(v.cov));
}

void check_terms(const ModelSpec& spec) {
    if (spec.terms.empty()) throw DataError("model has no terms");
    std::set<std::string> names;
    for (const auto& t : spec.terms)
        if (!names.insert(t.name).second) throw DataError("duplicate term name '" + t.name + "'");
}

} // namespace

double row_variable(const DyadSet& dyads, const DyadRow& row, const std::string& name) {
    return value(resolve(dyads, name), row);
}

Eigen::MatrixXd design_matrix(const DyadSet& dyads, const ModelSpec& spec) {
    check_terms(spec);
    std::vector<std::vector<VarRef>> refs;
    for (const auto& t : spec.terms) {
        refs.emplace_back();
        for (const auto& f : t.factors) refs.back().push_back(resolve(dyads, f));
    }
    Eigen::MatrixXd X(Eigen::Index(dyads.rows.size()), Eigen::Index(spec.terms.size()));
    for (std::size_t i = 0; i < dyads.rows.size(); ++i)
        for (std::size_t j = 0; j < refs.size(); ++j) {
            double v = 1.0;
            for (const auto& r : refs[j]) v *= value(r, dyads.rows[i]);
            X(Eigen::Index(i), Eigen::Index(j)) = v;
        }
    if (!X.allFinite()) throw DataError("design matrix contains missing values");
    return X;
}

Eigen::VectorXd outcome_vector(const DyadSet& dyads, const ModelSpec& spec) {
    const auto ref = resolve(dyads, spec.outcome);
    Eigen::VectorXd y(Eigen::Index(dyads.rows.size()));
    for (std::size_t i = 0; i < dyads.rows.size(); ++i) y(Eigen::Index(i)) = value(ref, dyads.rows[i]);
    return y;
}

std::vector<long> cluster_ids(const DyadSet& dyads, ClusterKey key) {
    std::vector<long> out;
    out.reserve(dyads.rows.size());
    for (const auto& r : dyads.rows) {
        if (key == ClusterKey::ego) {
            out.push_back(long(r.ego));
        } else {
            const auto lo = long(std::min(r.ego, r.alter)), hi = long(std::max(r.ego, r.alter));
            out.push_back(lo * (long(1) << 32) + hi);
        }
    }
    return out;
}

std::map<std::string, double> variable_means(const DyadSet& dyads, const ModelSpec& spec) {
    std::map<std::string, double> out;
    for (const auto& t : spec.terms)
        for (const auto& f : t.factors) {
            if (out.count(f)) continue;
            const auto ref = resolve(dyads, f);
            double s = 0;
            for (const auto& r : dyads.rows) s += value(ref, r);
            out[f] = dyads.rows.empty() ? 0.0 : s / double(dyads.rows.size());
        }
    return out;
}

// ============================================================================
// Fitting
// ============================================================================

std::optional<std::size_t> FitResult::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

std::size_t FitResult::require(const std::string& name) const {
    if (auto i = index_of(name)) return *i;
    throw DataError("fit has no term '" + name + "'");
}

double FitResult::std_error(std::size_t i) const {
    return std::sqrt(std::max(0.0, robust_covariance(Eigen::Index(i), Eigen::Index(i))));
}

double FitResult::p_value(std::size_t i) const {
    const double se = std_error(i);
    if (!(se > 0)) return coefficients(Eigen::Index(i)) == 0 ? 1.0 : 0.0;
    return stats::normal_two_sided_p(z(i));
}

FitResult fit_gee(const DyadSet& dyads, const ModelSpec& spec) {
    check_terms(spec);
    const Eigen::MatrixXd X = design_matrix(dyads, spec);
    const Eigen::VectorXd y = outcome_vector(dyads, spec);
    const auto clusters = cluster_ids(dyads, spec.cluster);
    {
        std::set<long> distinct(clusters.begin(), clusters.end());
        if (distinct.size() < 2) throw DataError("GEE needs at least 2 clusters");
    }
    FitResult fit;
    fit.link = spec.link;
    fit.outcome = spec.outcome;
    for (const auto& t : spec.terms) {
        fit.names.push_back(t.name);
        bool tv = false;
        for (const auto& f : t.factors) tv = tv || time_varying(dyads, resolve(dyads, f));
        fit.time_varying.push_back(tv);
    }
    const auto sol = solve_gee(X, y, clusters, spec.link, spec.solver, fit.names);
    fit.coefficients = sol.beta;
    fit.robust_covariance = sol.covariance;
    fit.n_rows = dyads.rows.size();
    fit.n_clusters = sol.n_clusters;
    fit.iterations = sol.iterations;
    fit.converged = true;
    fit.drops = dyads.drops;
    return fit;
}

SerialTestResult lm_serial_test(const FitResult& fit, const DyadSet& dyads, const ModelSpec& spec) {
    const Eigen::MatrixXd X = design_matrix(dyads, spec);
    const Eigen::VectorXd y = outcome_vector(dyads, spec);
    if (X.cols() != fit.coefficients.size()) throw DataError("fit does not match model spec");
    const Eigen::VectorXd eta = X * fit.coefficients;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = inverse_link(fit.link, eta(i));
        resid(i) = fit.link == Link::identity ? y(i) - mu : (y(i) - mu) / std::max(mu * (1 - mu), 1e-12);
    }
    std::map<std::tuple<NodeIndex, NodeIndex, int>, Eigen::Index> where;
    for (std::size_t i = 0; i < dyads.rows.size(); ++i) {
        const auto& r = dyads.rows[i];
        where[{r.ego, r.alter, r.wave_t}] = Eigen::Index(i);
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> lagged; // (row, previous row)
    for (std::size_t i = 0; i < dyads.rows.size(); ++i) {
        const auto& r = dyads.rows[i];
        if (auto it = where.find({r.ego, r.alter, r.wave_t - 1}); it != where.end())
            lagged.emplace_back(Eigen::Index(i), it->second);
    }
    const auto p = X.cols();
    if (Eigen::Index(lagged.size()) < p + 2)
        throw DataError("serial-correlation test needs consecutive residuals within ego-alter series");
    Eigen::MatrixXd A(Eigen::Index(lagged.size()), p + 1);
    Eigen::VectorXd e(Eigen::Index(lagged.size()));
    for (std::size_t k = 0; k < lagged.size(); ++k) {
        const auto K = Eigen::Index(k);
        A.row(K).head(p) = X.row(lagged[k].first);
        A(K, p) = resid(lagged[k].second);
        e(K) = resid(lagged[k].first);
    }
    const Eigen::VectorXd coef = linalg::least_squares(A, e);
    const double ssr = (e - A * coef).squaredNorm();
    const double sst = (e.array() - e.mean()).matrix().squaredNorm();
    SerialTestResult out;
    out.n_lagged = lagged.size();
    const double r2 = sst > 0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
    out.statistic = double(lagged.size()) * r2;
    out.p_value = stats::chi2_1_sf(out.statistic);
    return out;
}

FirstDifferenceResult first_difference(const FitResult& fit, const ModelSpec& spec,
                                       const std::map<std::string, double>& means, std::size_t n_draws,
                                       std::uint64_t seed) {
    if (n_draws == 0) throw DataError("first difference needs at least one draw");
    const auto p = fit.coefficients.size();
    if (Eigen::Index(spec.terms.size()) != p) throw DataError("fit does not match model spec");
    Eigen::VectorXd x0(p), x1(p);
    bool has_alter = false;
    for (Eigen::Index j = 0; j < p; ++j) {
        double other = 1.0;
        bool alter = false;
        for (const auto& f : spec.terms[std::size_t(j)].factors) {
            if (f == kAlterContemporaneous) {
                alter = true;
                continue;
            }
            auto it = means.find(f);
            if (it == means.end()) throw DataError("no mean supplied for variable '" + f + "'");
            other *= it->second;
        }
        has_alter = has_alter || alter;
        x0(j) = alter ? 0.0 : other;
        x1(j) = other;
    }
    if (!has_alter) throw DataError("model has no term involving " + kAlterContemporaneous);
    if (!fit.robust_covariance.allFinite()) throw NumericalError("coefficient covariance is not finite");

    FirstDifferenceResult out;
    out.n_draws = n_draws;
    out.seed = seed;
    const Eigen::MatrixXd root = linalg::symmetric_sqrt(fit.robust_covariance, &out.covariance_projected);
    std::vector<double> diffs(n_draws);
    Eigen::VectorXd z(p);
    for (std::size_t k = 0; k < n_draws; ++k) {
        auto rng = make_rng(seed, {k});
        std::normal_distribution<double> normal;
        for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
        const Eigen::VectorXd b = fit.coefficients + root * z;
        diffs[k] = inverse_link(fit.link, x1.dot(b)) - inverse_link(fit.link, x0.dot(b));
    }
    double s = 0;
    for (double d : diffs) s += d;
    out.point = s / double(n_draws);
    out.ci_low = stats::percentile(diffs, 0.025);
    out.ci_high = stats::percentile(diffs, 0.975);
    return out;
}

// ============================================================================
// Directional friendship contrast
// ============================================================================

namespace {

constexpr std::array<FriendshipClass, 3> kClasses{FriendshipClass::mutual, FriendshipClass::ego_perceived,
                                                  FriendshipClass::alter_perceived};

std::string class_term(FriendshipClass c) { return kAlterContemporaneous + ":" + std::string(to_string(c)); }

} // namespace

DirectionalContrast directional_contrast(const DyadSet& friend_rows, Link link,
                                         const std::vector<std::string>& covariates, ClusterKey cluster) {
    DyadSet d = friend_rows;
    d.rows.clear();
    std::map<FriendshipClass, std::size_t> counts;
    for (const auto& r : friend_rows.rows)
        if (r.directionality != FriendshipClass::none) {
            d.rows.push_back(r);
            ++counts[r.directionality];
        }
    DirectionalContrast out;
    std::vector<FriendshipClass> present;
    for (auto c : kClasses) (counts[c] ? present : out.excluded).push_back(c);
    if (present.size() < 2) {
        std::string missing;
        for (auto c : out.excluded) missing += (missing.empty() ? "" : ", ") + std::string(to_string(c));
        throw DataError("directional contrast needs at least 2 friendship classes; missing: " + missing);
    }

    ModelSpec spec;
    spec.link = link;
    spec.cluster = cluster;
    spec.terms = {{"intercept", {}}, {"y_ego_t", {"y_ego_t"}}, {"y_alter_t", {"y_alter_t"}}};
    for (std::size_t k = 1; k < present.size(); ++k)
        spec.terms.push_back({std::string(to_string(present[k])), {std::string(to_string(present[k]))}});
    for (auto c : present)
        spec.terms.push_back({class_term(c), {kAlterContemporaneous, std::string(to_string(c))}});
    for (const auto& c : covariates) spec.terms.push_back({c, {c}});

    out.fit = fit_gee(d, spec);
    const auto& V = out.fit.robust_covariance;
    for (auto c : present) {
        const auto i = out.fit.require(class_term(c));
        out.effects.push_back({c, counts[c], out.fit.coefficients(Eigen::Index(i)), out.fit.std_error(i),
                               out.fit.p_value(i)});
    }
    for (std::size_t a = 0; a < present.size(); ++a)
        for (std::size_t b = a + 1; b < present.size(); ++b) {
            const auto i = Eigen::Index(out.fit.require(class_term(present[a])));
            const auto j = Eigen::Index(out.fit.require(class_term(present[b])));
            PairwiseDifference pd;
            pd.a = present[a];
            pd.b = present[b];
            pd.difference = out.fit.coefficients(i) - out.fit.coefficients(j);
            pd.std_error = std::sqrt(std::max(0.0, V(i, i) + V(j, j) - 2 * V(i, j)));
            pd.p_value = pd.std_error > 0 ? stats::normal_two_sided_p(pd.difference / pd.std_error) : 1.0;
            out.differences.push_back(pd);
        }
    out.expected_ordering = true;
    for (std::size_t k = 1; k < out.effects.size(); ++k)
        out.expected_ordering = out.expected_ordering && out.effects[k - 1].estimate >= out.effects[k].estimate;
    return out;
}

// ============================================================================
// Geography and lagged change
// ============================================================================

FitResult distance_interaction(const DyadSet& dyads, const ModelSpec& spec) {
    DyadSet d = dyads;
    d.rows.clear();
    std::size_t missing = 0;
    for (const auto& r : dyads.rows) {
        if (std::isnan(r.geo_distance_t))
            ++missing;
        else
            d.rows.push_back(r);
    }
    if (missing) {
        d.drops.by_reason["missing_geo_distance"] += missing;
        d.drops.kept -= missing;
    }
    if (d.rows.empty()) throw DataError("no dyad rows carry a geographic distance");
    ModelSpec s = spec;
    s.terms.push_back({"geo_distance", {"geo_distance"}});
    s.terms.push_back({kGeoInteraction, {"geo_distance", kAlterContemporaneous}});
    return fit_gee(d, s);
}

FitResult lagged_change_model(const Panel& panel, const std::string& trait, TieFilter filter,
                              const std::vector<std::string>& covariates, ClusterKey cluster) {
    if (panel.num_waves() < 3) throw DataError("lagged-change model needs at least 3 waves (fewer than 3 usable)");
    const auto rows = build_lagged_rows(panel, trait, filter, covariates);
    ModelSpec spec;
    spec.link = Link::identity;
    spec.outcome = "delta_y_ego";
    spec.cluster = cluster;
    spec.terms = {{"intercept", {}}, {"delta_y_alter", {"delta_y_alter"}}};
    for (const auto& c : covariates) spec.terms.push_back({c, {c}});
    return fit_gee(rows, spec);
}

} // namespace socnet

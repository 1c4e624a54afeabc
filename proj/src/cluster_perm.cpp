#include "socnet/cluster_perm.hpp"

#include "socnet/linalg.hpp"
#include "socnet/rng.hpp"
#include "socnet/stats.hpp"

#include <algorithm>
#include <cmath>

namespace socnet {

std::string_view to_string(ClusterStatistic s) {
    return s == ClusterStatistic::risk_ratio ? "risk_ratio" : "pearson";
}

std::string_view to_string(CiConvention c) {
    return c == CiConvention::observed_minus_null ? "observed_minus_null" : "centered_null_range";
}

DistancePairs::DistancePairs(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int max_d) {
    if (max_d < 1) throw DataError("max_d must be >= 1");
    if (trait.size() != Eigen::Index(g.size())) throw DataError("trait vector does not match snapshot size");
    by_distance_.resize(std::size_t(max_d));
    for (NodeIndex s = 0; s < g.size(); ++s) {
        if (std::isnan(trait(s))) continue;
        const auto dist = bfs_distances(g, s, max_d);
        for (NodeIndex v = s + 1; v < g.size(); ++v)
            if (dist[v] >= 1 && !std::isnan(trait(v))) by_distance_[std::size_t(dist[v] - 1)].emplace_back(s, v);
    }
}

PairStatistic risk_ratio(std::span<const NodePair> pairs, const Eigen::VectorXd& values) {
    PairStatistic out;
    double both = 0, sum = 0;
    for (auto [i, j] : pairs) {
        const double a = values(i), b = values(j);
        both += a * b;
        sum += a + b;
    }
    const double m = double(pairs.size());
    const double mixed = sum - 2 * both;
    const double none = m - both - mixed;
    const double alter_has = 2 * both + mixed;   // ordered pairs, alter = 1
    const double alter_lacks = 2 * none + mixed; // ordered pairs, alter = 0
    out.n_alter_has = std::size_t(alter_has + 0.5);
    out.n_alter_lacks = std::size_t(alter_lacks + 0.5);
    if (alter_has <= 0 || alter_lacks <= 0 || mixed <= 0) return out;
    const double p_has = 2 * both / alter_has;
    const double p_lacks = mixed / alter_lacks;
    out.value = p_has / p_lacks;
    out.defined = true;
    return out;
}

PairStatistic pair_correlation(std::span<const NodePair> pairs, const Eigen::VectorXd& values) {
    PairStatistic out;
    if (pairs.empty()) return out;
    double s = 0, s2 = 0, cross = 0;
    for (auto [i, j] : pairs) {
        const double a = values(i), b = values(j);
        s += a + b;
        s2 += a * a + b * b;
        cross += 2 * a * b;
    }
    const double m = 2.0 * double(pairs.size());
    const double mean = s / m;
    const double var = s2 / m - mean * mean;
    const double cov = cross / m - mean * mean;
    out.n_alter_has = out.n_alter_lacks = std::size_t(m);
    if (!(var > 1e-300)) return out;
    out.value = cov / var;
    out.defined = true;
    return out;
}

namespace {

void require_binary(const Eigen::VectorXd& trait) {
    for (Eigen::Index i = 0; i < trait.size(); ++i)
        if (!std::isnan(trait(i)) && trait(i) != 0.0 && trait(i) != 1.0)
            throw DataError("risk ratio needs a binary (0/1) trait; dichotomize it or use the pearson statistic");
}

PairStatistic evaluate(ClusterStatistic s, std::span<const NodePair> pairs, const Eigen::VectorXd& v) {
    return s == ClusterStatistic::risk_ratio ? risk_ratio(pairs, v) : pair_correlation(pairs, v);
}

} // namespace

PairStatistic risk_ratio_at_distance(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int d) {
    if (d < 1) throw DataError("distance must be >= 1");
    require_binary(trait);
    DistancePairs pairs(g, trait, d);
    return risk_ratio(pairs.at(d), trait);
}

Eigen::VectorXd permute_observed(const Eigen::VectorXd& trait, std::uint64_t seed, std::size_t replicate) {
    std::vector<Eigen::Index> slots;
    std::vector<double> vals;
    for (Eigen::Index i = 0; i < trait.size(); ++i)
        if (!std::isnan(trait(i))) {
            slots.push_back(i);
            vals.push_back(trait(i));
        }
    auto rng = make_rng(seed, {replicate});
    std::shuffle(vals.begin(), vals.end(), rng);
    Eigen::VectorXd out = trait;
    for (std::size_t k = 0; k < slots.size(); ++k) out(slots[k]) = vals[k];
    return out;
}

std::vector<double> permutation_null(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int d,
                                     std::size_t replicates, std::uint64_t seed, ClusterStatistic statistic) {
    if (replicates < 1) throw DataError("replicates must be >= 1");
    if (statistic == ClusterStatistic::risk_ratio) require_binary(trait);
    DistancePairs pairs(g, trait, d);
    std::vector<double> out(replicates);
    for (std::size_t r = 0; r < replicates; ++r)
        out[r] = evaluate(statistic, pairs.at(d), permute_observed(trait, seed, r)).value;
    return out;
}

ClusterTestResult cluster_test(const NetworkSnapshot& g, const Eigen::VectorXd& trait,
                               const ClusterTestOptions& opt) {
    if (opt.max_d < 1) throw DataError("max_d must be >= 1");
    if (opt.replicates < 1) throw DataError("replicates must be >= 1");
    if (opt.statistic == ClusterStatistic::risk_ratio) require_binary(trait);
    std::size_t n_obs = 0;
    double lo = INFINITY, hi = -INFINITY;
    for (Eigen::Index i = 0; i < trait.size(); ++i)
        if (!std::isnan(trait(i))) {
            ++n_obs;
            lo = std::min(lo, trait(i));
            hi = std::max(hi, trait(i));
        }
    if (n_obs < 2 || !(lo < hi))
        throw DataError("degenerate prevalence: the trait must be observed on >= 2 nodes with both values present");

    const DistancePairs pairs(g, trait, opt.max_d);
    ClusterTestResult res;
    res.wave = g.wave;
    res.statistic = opt.statistic;
    res.convention = opt.convention;
    res.replicates = opt.replicates;
    res.seed = opt.seed;
    res.distances.resize(std::size_t(opt.max_d));
    for (int d = 1; d <= opt.max_d; ++d) {
        auto& dr = res.distances[std::size_t(d - 1)];
        dr.distance = d;
        const auto obs = evaluate(opt.statistic, pairs.at(d), trait);
        dr.observed = obs.value;
        dr.observed_defined = obs.defined;
        dr.n_pairs = pairs.at(d).size();
        dr.n_pairs_alter_has = obs.n_alter_has;
        dr.n_pairs_alter_lacks = obs.n_alter_lacks;
        if (obs.defined && opt.statistic == ClusterStatistic::risk_ratio) dr.pct_increase = 100.0 * (obs.value - 1.0);
        dr.null_values.resize(opt.replicates);
    }
    for (std::size_t r = 0; r < opt.replicates; ++r) {
        const auto perm = permute_observed(trait, opt.seed, r);
        for (int d = 1; d <= opt.max_d; ++d)
            res.distances[std::size_t(d - 1)].null_values[r] = evaluate(opt.statistic, pairs.at(d), perm).value;
    }
    for (auto& dr : res.distances) {
        const auto m = stats::moments(dr.null_values);
        dr.n_null_undefined = dr.null_values.size() - m.n;
        dr.null_mean = m.n ? m.mean : kMissing;
        if (!dr.observed_defined || m.n == 0) continue;
        std::vector<double> shifted;
        shifted.reserve(m.n);
        if (opt.convention == CiConvention::observed_minus_null) {
            for (double v : dr.null_values)
                if (!std::isnan(v)) shifted.push_back(dr.observed - v);
            dr.ci_low = stats::percentile(shifted, 0.025);
            dr.ci_high = stats::percentile(shifted, 0.975);
            dr.significant = dr.ci_low > 0 || dr.ci_high < 0;
            dr.significant_positive = dr.ci_low > 0;
        } else {
            for (double v : dr.null_values)
                if (!std::isnan(v)) shifted.push_back(v - m.mean);
            dr.ci_low = stats::percentile(shifted, 0.025);
            dr.ci_high = stats::percentile(shifted, 0.975);
            const double centred = dr.observed - m.mean;
            dr.significant = centred < dr.ci_low || centred > dr.ci_high;
            dr.significant_positive = centred > dr.ci_high;
        }
    }
    return res;
}

int reach(const ClusterTestResult& result) {
    int r = 0;
    for (const auto& d : result.distances) {
        if (!d.significant_positive) break;
        r = d.distance;
    }
    return r;
}

Eigen::VectorXd residualize_trait(const Panel& panel, const std::string& trait,
                                  const std::vector<std::string>& covariates, int wave) {
    const Eigen::VectorXd y = panel.trait_at(trait, wave);
    std::vector<CovariateColumn> cols;
    for (const auto& c : covariates) cols.push_back(resolve_covariate(panel, c, wave));

    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (std::isnan(y(i))) continue;
        for (const auto& c : cols)
            if (std::isnan(c.values(i)))
                throw DataError("covariate '" + c.name + "' unobserved for node '" +
                                panel.node(NodeIndex(i)).id + "' at wave " + std::to_string(wave));
        rows.push_back(i);
    }
    if (rows.empty()) throw DataError("trait '" + trait + "' has no observations at wave " + std::to_string(wave));

    Eigen::MatrixXd X(Eigen::Index(rows.size()), Eigen::Index(cols.size() + 1));
    Eigen::VectorXd yy(Eigen::Index(rows.size()));
    std::vector<std::string> names{"intercept"};
    for (const auto& c : cols) names.push_back(c.name);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        X(r, 0) = 1.0;
        for (std::size_t k = 0; k < cols.size(); ++k) X(r, Eigen::Index(k + 1)) = cols[k].values(rows[std::size_t(r)]);
        yy(r) = y(rows[std::size_t(r)]);
    }
    linalg::require_full_rank(X, names);
    const Eigen::VectorXd beta = linalg::least_squares(X, yy);
    const Eigen::VectorXd resid = yy - X * beta;
    Eigen::VectorXd out = Eigen::VectorXd::Constant(y.size(), kMissing);
    for (std::size_t r = 0; r < rows.size(); ++r) out(rows[r]) = resid(Eigen::Index(r));
    return out;
}

Eigen::VectorXd dichotomize(const Eigen::VectorXd& values, double threshold) {
    return values.unaryExpr([threshold](double v) { return std::isnan(v) ? v : (v > threshold ? 1.0 : 0.0); });
}

std::vector<DecayRow> decay_profile(std::span<const double> observed_rr) {
    if (observed_rr.empty() || std::isnan(observed_rr[0]))
        throw DataError("decay profile needs a defined risk ratio at distance 1");
    const double rr1 = observed_rr[0];
    std::vector<DecayRow> out;
    for (std::size_t k = 0; k < observed_rr.size(); ++k) {
        DecayRow row;
        row.distance = int(k + 1);
        row.observed_rr = observed_rr[k];
        row.multiplicative_rr = std::pow(rr1, double(k + 1));
        row.ratio = row.multiplicative_rr / row.observed_rr;
        row.slower_than_multiplicative = row.ratio > 1.0 + 1e-12;
        out.push_back(row);
    }
    return out;
}

std::vector<DecayRow> decay_profile(const ClusterTestResult& result) {
    if (result.statistic != ClusterStatistic::risk_ratio) throw DataError("decay profile needs risk-ratio results");
    std::vector<double> rr;
    for (const auto& d : result.distances) rr.push_back(d.observed_defined ? d.observed : kMissing);
    return decay_profile(rr);
}

double chained_probability(std::span<const double> step_probabilities) {
    double p = 1.0;
    for (double s : step_probabilities) {
        if (!(s >= 0 && s <= 1)) throw DataError("step probabilities must lie in [0, 1]");
        p *= s;
    }
    return p;
}

} // namespace socnet

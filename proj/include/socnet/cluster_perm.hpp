#pragma once

// Permutation clustering tests: how much more likely an ego is to carry a
// trait when an alter at geodesic distance d carries it, compared against
// trait shuffles that hold topology and prevalence fixed.

#include "socnet/panel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace socnet {

enum class ClusterStatistic { risk_ratio, pearson };
enum class CiConvention {
    // [P2.5, P97.5] of (observed - permuted); significant iff it excludes 0.
    observed_minus_null,
    // [P2.5, P97.5] of (permuted - mean permuted); significant iff
    // (observed - mean permuted) lies outside it.
    centered_null_range,
};

std::string_view to_string(ClusterStatistic s);
std::string_view to_string(CiConvention c);

using NodePair = std::pair<NodeIndex, NodeIndex>;

// Unordered pairs (i < j) of trait-observed nodes grouped by exact geodesic
// distance 1..max_d. Unobserved nodes still carry paths.
class DistancePairs {
public:
    DistancePairs(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int max_d);

    int max_distance() const { return int(by_distance_.size()); }
    std::span<const NodePair> at(int d) const { return by_distance_.at(std::size_t(d - 1)); }

private:
    std::vector<std::vector<NodePair>> by_distance_;
};

struct PairStatistic {
    double value = kMissing; // NaN when undefined
    bool defined = false;
    std::size_t n_alter_has = 0;   // ordered pairs whose alter carries the trait
    std::size_t n_alter_lacks = 0; // ordered pairs whose alter lacks it
};

// Ordered-pair risk ratio P(ego=1 | alter=1) / P(ego=1 | alter=0) over the
// given unordered pairs (each counted once per role).
PairStatistic risk_ratio(std::span<const NodePair> pairs, const Eigen::VectorXd& values);
// Pearson correlation of ego and alter values over the same ordered pairs.
PairStatistic pair_correlation(std::span<const NodePair> pairs, const Eigen::VectorXd& values);

PairStatistic risk_ratio_at_distance(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int d);

// Trait vector with observed entries shuffled uniformly; replicate r depends
// only on (seed, r). Missing entries stay in place.
Eigen::VectorXd permute_observed(const Eigen::VectorXd& trait, std::uint64_t seed, std::size_t replicate);

// R permuted statistics at distance d (NaN marks undefined replicates).
std::vector<double> permutation_null(const NetworkSnapshot& g, const Eigen::VectorXd& trait, int d,
                                     std::size_t replicates, std::uint64_t seed,
                                     ClusterStatistic statistic = ClusterStatistic::risk_ratio);

struct DistanceResult {
    int distance = 0;
    double observed = kMissing;
    bool observed_defined = false;
    double pct_increase = kMissing; // 100 (rr - 1); risk ratio only
    std::vector<double> null_values;
    std::size_t n_null_undefined = 0;
    double null_mean = kMissing;
    double ci_low = kMissing;
    double ci_high = kMissing;
    bool significant = false;
    // Positive side: observed above the permutation distribution.
    bool significant_positive = false;
    std::size_t n_pairs = 0;
    std::size_t n_pairs_alter_has = 0;
    std::size_t n_pairs_alter_lacks = 0;
};

struct ClusterTestOptions {
    int max_d = 4;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    ClusterStatistic statistic = ClusterStatistic::risk_ratio;
    CiConvention convention = CiConvention::observed_minus_null;
};

struct ClusterTestResult {
    std::string trait;
    int wave = 0;
    ClusterStatistic statistic = ClusterStatistic::risk_ratio;
    CiConvention convention = CiConvention::observed_minus_null;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<DistanceResult> distances;
};

ClusterTestResult cluster_test(const NetworkSnapshot& g, const Eigen::VectorXd& trait,
                               const ClusterTestOptions& options);

// Largest d with every distance 1..d significantly positive; 0 if d=1 is not.
int reach(const ClusterTestResult& result);

// Least-squares residuals of the trait on an intercept plus covariates at a
// wave; NaN for nodes without the trait. Throws when a trait-observed node
// lacks a covariate or the design is singular.
Eigen::VectorXd residualize_trait(const Panel& panel, const std::string& trait,
                                  const std::vector<std::string>& covariates, int wave);

// 1 where value > threshold, 0 otherwise; NaN stays NaN.
Eigen::VectorXd dichotomize(const Eigen::VectorXd& values, double threshold = 0.0);

struct DecayRow {
    int distance = 0;
    double observed_rr = kMissing;
    double multiplicative_rr = kMissing; // rr(1)^d
    double ratio = kMissing;             // multiplicative / observed
    bool slower_than_multiplicative = false;
};

// Compares each distance's risk ratio with the independent-path benchmark
// rr(1)^d. Throws when rr(1) is undefined.
std::vector<DecayRow> decay_profile(const ClusterTestResult& result);
std::vector<DecayRow> decay_profile(std::span<const double> observed_rr);

// Probability that influence traverses a chain of independent steps.
double chained_probability(std::span<const double> step_probabilities);

} // namespace socnet

#pragma once

// Dyadic longitudinal regression:
//
//   g(E[y_ego(t+1)]) = a + b1 y_ego(t) + b2 y_alter(t+1) + b3 y_alter(t) + sum_k c_k x_k
//
// fit by generalized estimating equations with an independence working
// correlation and a cluster-robust sandwich covariance (clusters = egos by
// default). Also: serial-correlation LM test, simulated first differences,
// directional friendship contrasts, geographic-distance interactions and the
// lagged-change variant.

#include "socnet/gee_solver.hpp"
#include "socnet/panel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace socnet {

// ============================================================================
// Dyad rows
// ============================================================================

struct DyadRow {
    NodeIndex ego = 0;
    NodeIndex alter = 0;
    int wave_t = 1;
    double y_ego_t = kMissing;
    double y_ego_t1 = kMissing;
    double y_alter_t = kMissing;
    double y_alter_t1 = kMissing;
    double y_alter_tm1 = kMissing; // lagged-change rows only
    Eigen::VectorXd x;             // covariates, ordered as DyadSet::covariate_names
    TieType tie_type = TieType::friend_tie;
    FriendshipClass directionality = FriendshipClass::none;
    double geo_distance_t = kMissing; // miles; NaN when either location is unknown
};

struct DropReport {
    std::size_t candidates = 0;
    std::size_t kept = 0;
    std::map<std::string, std::size_t> by_reason;

    std::size_t dropped() const { return candidates - kept; }
};

struct DyadSet {
    std::string trait;
    TieFilter filter;
    std::vector<std::string> covariate_names;
    std::vector<bool> covariate_time_varying;
    std::vector<DyadRow> rows;
    DropReport drops;
};

// One row per ordered (ego, alter, t) whose tie passes the filter at both t
// and t+1 and whose outcome, alter values and ego covariates are complete.
DyadSet build_dyad_rows(const Panel& panel, const std::string& trait, TieFilter filter,
                        const std::vector<std::string>& covariates);

// Rows for the lagged-change model: the tie is active at t-1, t and t+1 and
// the alter is also observed at t-1.
DyadSet build_lagged_rows(const Panel& panel, const std::string& trait, TieFilter filter,
                          const std::vector<std::string>& covariates);

// z-scores every non-binary covariate column in place.
void standardize_covariates(DyadSet& dyads);

// ============================================================================
// Model specification
// ============================================================================

// A regressor is the product of named row variables; no factors = intercept.
// Row variables: y_ego_t, y_ego_t1, y_alter_t, y_alter_t1, y_alter_tm1,
// delta_y_ego, delta_y_alter, geo_distance, mutual, ego_perceived,
// alter_perceived, and every covariate by name.
struct Term {
    std::string name;
    std::vector<std::string> factors;
};

struct ModelSpec {
    Link link = Link::identity;
    std::string outcome = "y_ego_t1";
    std::vector<Term> terms;
    ClusterKey cluster = ClusterKey::ego;
    SolverOptions solver;
};

inline const std::string kAlterContemporaneous = "y_alter_t1";

// intercept, y_ego_t, y_alter_t1, y_alter_t, covariates.
ModelSpec basic_model(Link link, const std::vector<std::string>& covariates);

double row_variable(const DyadSet& dyads, const DyadRow& row, const std::string& name);
Eigen::MatrixXd design_matrix(const DyadSet& dyads, const ModelSpec& spec);
Eigen::VectorXd outcome_vector(const DyadSet& dyads, const ModelSpec& spec);
std::vector<long> cluster_ids(const DyadSet& dyads, ClusterKey key);
// Mean of every row variable used by the spec's terms.
std::map<std::string, double> variable_means(const DyadSet& dyads, const ModelSpec& spec);

// ============================================================================
// Fitting
// ============================================================================

struct FitResult {
    Link link = Link::identity;
    std::string outcome;
    std::vector<std::string> names;
    std::vector<bool> time_varying;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd robust_covariance;
    std::size_t n_rows = 0;
    std::size_t n_clusters = 0;
    int iterations = 0;
    bool converged = false;
    DropReport drops;

    std::optional<std::size_t> index_of(const std::string& name) const;
    std::size_t require(const std::string& name) const;
    double coefficient(const std::string& name) const { return coefficients(Eigen::Index(require(name))); }
    double std_error(std::size_t i) const;
    double std_error(const std::string& name) const { return std_error(require(name)); }
    double z(std::size_t i) const { return coefficients(Eigen::Index(i)) / std_error(i); }
    double p_value(std::size_t i) const;
    double p_value(const std::string& name) const { return p_value(require(name)); }
};

FitResult fit_gee(const DyadSet& dyads, const ModelSpec& spec);

struct SerialTestResult {
    double statistic = 0; // n R^2 of the auxiliary regression
    double p_value = 1;   // chi-square, 1 df
    std::size_t n_lagged = 0;
};

SerialTestResult lm_serial_test(const FitResult& fit, const DyadSet& dyads, const ModelSpec& spec);

struct FirstDifferenceResult {
    double point = 0;
    double ci_low = 0;
    double ci_high = 0;
    std::size_t n_draws = 0;
    std::uint64_t seed = 0;
    bool covariance_projected = false; // nearest-PSD fallback was needed
};

// Simulated change in the expected outcome when y_alter_t1 moves 0 -> 1, every
// other variable held at `means`, over coefficient draws from
// N(estimate, robust covariance).
FirstDifferenceResult first_difference(const FitResult& fit, const ModelSpec& spec,
                                       const std::map<std::string, double>& means, std::size_t n_draws,
                                       std::uint64_t seed);

// ============================================================================
// Directional friendship contrast
// ============================================================================

struct ClassEffect {
    FriendshipClass cls = FriendshipClass::none;
    std::size_t n_rows = 0;
    double estimate = 0;
    double std_error = 0;
    double p_value = 1;
};

struct PairwiseDifference {
    FriendshipClass a = FriendshipClass::none;
    FriendshipClass b = FriendshipClass::none;
    double difference = 0; // effect(a) - effect(b)
    double std_error = 0;
    double p_value = 1;
};

struct DirectionalContrast {
    std::vector<ClassEffect> effects;
    std::vector<PairwiseDifference> differences;
    std::vector<FriendshipClass> excluded;
    // effect(mutual) >= effect(ego_perceived) >= effect(alter_perceived)
    bool expected_ordering = false;
    FitResult fit;
};

// One pooled model with class dummies and class x y_alter_t1 interactions;
// class effects and their pairwise differences use the joint sandwich.
DirectionalContrast directional_contrast(const DyadSet& friend_rows, Link link,
                                         const std::vector<std::string>& covariates,
                                         ClusterKey cluster = ClusterKey::ego);

// ============================================================================
// Geography and lagged change
// ============================================================================

inline const std::string kGeoInteraction = "geo_distance:y_alter_t1";

// Adds geo_distance and geo_distance x y_alter_t1 to the spec; rows without a
// distance are dropped and counted in the result's drop report.
FitResult distance_interaction(const DyadSet& dyads, const ModelSpec& spec);

// Change in ego (t -> t+1) regressed on the alter's preceding change
// (t-1 -> t) plus covariates, identity link, clustered sandwich.
FitResult lagged_change_model(const Panel& panel, const std::string& trait, TieFilter filter,
                              const std::vector<std::string>& covariates, ClusterKey cluster = ClusterKey::ego);

} // namespace socnet

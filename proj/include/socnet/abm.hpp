#pragma once

// Agent-based panel generator with known ground truth (influence, observable
// homophily, latent homophily, shared context) and the sensitivity /
// specificity harness that runs the estimators on its output.

#include "socnet/cluster_perm.hpp"
#include "socnet/gee.hpp"
#include "socnet/panel.hpp"
#include "socnet/sim.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace socnet {

enum class TraitKind { binary, continuous };

struct ABMSpec {
    // processes
    bool influence = false;
    bool observable_homophily = false;
    bool latent_homophily = false;
    bool shared_context = false;

    // population and network
    std::size_t n = 500;
    int waves = 4;
    int burn_in_waves = 0; // unrecorded transitions before wave 1
    Generator generator = Generator::watts_strogatz;
    int k = 6;             // initial ring degree / ER expected degree
    double rewire = 0.1;   // watts_strogatz beta
    double reciprocity = 0.4; // share of ties nominated both ways; rest is one-way
    double out_of_sample_fraction = 0.0;

    // trait dynamics; per-wave probabilities split over `substeps`
    TraitKind trait_kind = TraitKind::binary;
    std::string trait_name = "trait";
    int substeps = 4;
    double baseline_adoption = 0.1;
    double abandonment = 0.2;
    // binary: 1 - (1 - p)^(weighted adopting neighbors) per wave
    // continuous: pull rate toward the weighted neighbor mean
    double influence_p = 0.1;
    double weight_mutual = 1.0;
    double weight_ego_perceived = 1.0;  // ego names alter
    double weight_alter_perceived = 1.0; // alter names ego
    double influence_max_distance_miles = 0; // 0 = no limit

    // continuous trait
    double continuous_mean = 25.0;
    double continuous_noise = 1.0;
    double continuous_reversion = 0.5;

    // tie turnover and selection
    double tie_turnover = 0.1;   // share of ties dissolved per wave, each replaced
    int candidates = 10;         // partners considered per new tie
    double homophily_strength = 3.0; // log-weight on similarity
    double latent_strength = 1.5;    // z effect on the adoption logit

    // shared context
    int groups = 10;
    double context_shock_sd = 1.0;

    // geography: share of nodes within `local_radius_miles` of a common
    // centre, the rest scattered up to `far_radius_miles`
    double local_fraction = 0.5;
    double local_radius_miles = 2.0;
    double far_radius_miles = 600.0;

    std::uint64_t seed = 1;

    void validate() const;
};

ABMSpec parse_abm_spec(std::string_view json_text); // unknown keys are errors
std::string abm_spec_json(const ABMSpec& spec);

// Deterministic multi-wave panel for (spec, seed). Ties are friend ties with
// per-direction nomination records; metadata carries the process labels.
Panel abm_generate_panel(const ABMSpec& spec);

// ============================================================================
// Validation harness
// ============================================================================

struct HarnessCell {
    std::string label;
    ABMSpec spec;
};

struct AnalysisConfig {
    Link link = Link::logit;
    TieFilter filter = TieFilter::only(TieType::friend_tie);
    std::vector<std::string> covariates;
    ClusterKey cluster = ClusterKey::ego;
    double alpha = 0.05;
    bool run_cluster_test = false;
    int cluster_max_d = 4;
    std::size_t cluster_replicates = 200;
    bool run_directional = false;
};

struct CellReport {
    std::string label;
    std::string condition; // see condition_of
    std::string rate_kind; // sensitivity | specificity | bias
    std::size_t replicates = 0;
    std::size_t fitted = 0;
    std::size_t detections = 0; // beta2 > 0 at p < alpha
    double detection_rate = kMissing;
    double rate = kMissing;      // sensitivity, specificity or NaN (bias cells)
    double mean_beta2 = kMissing;
    double sd_beta2 = kMissing;
    std::vector<double> beta2;
    std::vector<double> p_values;
    // optional analyses
    double mean_reach = kMissing;
    std::vector<int> reaches;
    std::size_t directional_fitted = 0;
    std::size_t ordering_holds = 0;
    std::size_t all_differences_nonsignificant = 0;
    std::size_t differences_tested = 0;
    std::size_t differences_nonsignificant = 0;
    std::vector<std::string> errors;
};

struct HarnessReport {
    AnalysisConfig config;
    std::uint64_t seed = 0;
    std::vector<CellReport> cells;
};

// influence | latent_homophily | shared_context | observable_homophily | null
std::string condition_of(const ABMSpec& spec);

// Replicate r of cell c uses seed derive_seed(seed, {c, r}); cells may run
// concurrently with identical results.
HarnessReport validation_harness(const std::vector<HarnessCell>& grid, const AnalysisConfig& config,
                                 std::size_t replicates, std::uint64_t seed, unsigned threads = 1);

struct ValidationGrid {
    std::vector<HarnessCell> cells;
    AnalysisConfig analysis;
    std::size_t replicates = 50;
    std::uint64_t seed = 1;
};

// {"replicates", "seed", "analysis": {...}, "base": {abm spec},
//  "cells": [{"label", "spec": {overrides of base}}]}
ValidationGrid parse_validation_grid(std::string_view json_text);

} // namespace socnet

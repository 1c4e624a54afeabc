#include "socnet/abm.hpp"

#include "socnet/rng.hpp"
#include "socnet/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace socnet {

std::string condition_of(const ABMSpec& spec) {
    if (spec.influence) return "influence";
    if (spec.latent_homophily) return "latent_homophily";
    if (spec.shared_context) return "shared_context";
    if (spec.observable_homophily) return "observable_homophily";
    return "null";
}

namespace {

struct ReplicateOutcome {
    bool fitted = false;
    double beta2 = kMissing;
    double p = kMissing;
    int reach = -1;
    bool directional = false;
    bool ordering = false;
    std::size_t diffs = 0;
    std::size_t diffs_nonsig = 0;
    std::vector<std::string> errors;
};

ReplicateOutcome run_replicate(const ABMSpec& base, const AnalysisConfig& cfg, std::uint64_t seed) {
    ReplicateOutcome out;
    ABMSpec spec = base;
    spec.seed = seed;
    Panel panel;
    try {
        panel = abm_generate_panel(spec);
    } catch (const std::exception& e) {
        out.errors.push_back(std::string("generate: ") + e.what());
        return out;
    }
    std::optional<DyadSet> dyads;
    try {
        dyads = build_dyad_rows(panel, spec.trait_name, cfg.filter, cfg.covariates);
        auto model = basic_model(cfg.link, cfg.covariates);
        model.cluster = cfg.cluster;
        const auto fit = fit_gee(*dyads, model);
        out.beta2 = fit.coefficient(kAlterContemporaneous);
        out.p = fit.p_value(kAlterContemporaneous);
        out.fitted = true;
    } catch (const std::exception& e) {
        out.errors.push_back(std::string("fit_gee: ") + e.what());
    }
    if (cfg.run_cluster_test) {
        try {
            ClusterTestOptions opt;
            opt.max_d = cfg.cluster_max_d;
            opt.replicates = cfg.cluster_replicates;
            opt.seed = derive_seed(seed, {7});
            opt.statistic =
                spec.trait_kind == TraitKind::binary ? ClusterStatistic::risk_ratio : ClusterStatistic::pearson;
            const int w = panel.num_waves();
            out.reach = reach(cluster_test(snapshot(panel, w, cfg.filter), panel.trait_at(spec.trait_name, w), opt));
        } catch (const std::exception& e) {
            out.errors.push_back(std::string("cluster_test: ") + e.what());
        }
    }
    if (cfg.run_directional && dyads) {
        try {
            const auto dc = directional_contrast(*dyads, cfg.link, cfg.covariates, cfg.cluster);
            out.directional = true;
            out.ordering = dc.expected_ordering;
            for (const auto& d : dc.differences) {
                ++out.diffs;
                if (!(d.p_value < cfg.alpha)) ++out.diffs_nonsig;
            }
        } catch (const std::exception& e) {
            out.errors.push_back(std::string("directional_contrast: ") + e.what());
        }
    }
    return out;
}

} // namespace

HarnessReport validation_harness(const std::vector<HarnessCell>& grid, const AnalysisConfig& config,
                                 std::size_t replicates, std::uint64_t seed, unsigned threads) {
    if (grid.empty()) throw DataError("validation grid is empty");
    if (replicates < 1) throw DataError("replicates must be >= 1");
    for (const auto& c : grid) c.spec.validate();

    const std::size_t total = grid.size() * replicates;
    std::vector<ReplicateOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job; (job = next++) < total;) {
            const std::size_t c = job / replicates, r = job % replicates;
            outcomes[job] = run_replicate(grid[c].spec, config, derive_seed(seed, {c, r}));
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    HarnessReport rep;
    rep.config = config;
    rep.seed = seed;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        CellReport cell;
        cell.label = grid[c].label;
        cell.condition = condition_of(grid[c].spec);
        cell.rate_kind = cell.condition == "influence"          ? "sensitivity"
                         : cell.condition == "latent_homophily" ? "bias"
                                                                : "specificity";
        cell.replicates = replicates;
        for (std::size_t r = 0; r < replicates; ++r) {
            const auto& o = outcomes[c * replicates + r];
            for (const auto& e : o.errors) cell.errors.push_back("replicate " + std::to_string(r) + ": " + e);
            if (o.fitted) {
                ++cell.fitted;
                cell.beta2.push_back(o.beta2);
                cell.p_values.push_back(o.p);
                if (o.beta2 > 0 && o.p < config.alpha) ++cell.detections;
            }
            if (o.reach >= 0) cell.reaches.push_back(o.reach);
            if (o.directional) {
                ++cell.directional_fitted;
                cell.ordering_holds += o.ordering;
                cell.differences_tested += o.diffs;
                cell.differences_nonsignificant += o.diffs_nonsig;
                cell.all_differences_nonsignificant += o.diffs == o.diffs_nonsig;
            }
        }
        if (cell.fitted) {
            cell.detection_rate = double(cell.detections) / double(cell.fitted);
            const auto m = stats::moments(cell.beta2);
            cell.mean_beta2 = m.mean;
            cell.sd_beta2 = m.n > 1 ? std::sqrt(m.variance) : kMissing;
            if (cell.rate_kind == "sensitivity") cell.rate = cell.detection_rate;
            else if (cell.rate_kind == "specificity") cell.rate = 1.0 - cell.detection_rate;
        }
        if (!cell.reaches.empty()) {
            double s = 0;
            for (int x : cell.reaches) s += x;
            cell.mean_reach = s / double(cell.reaches.size());
        }
        rep.cells.push_back(std::move(cell));
    }
    return rep;
}

ValidationGrid parse_validation_grid(std::string_view json_text) {
    using nlohmann::json;
    ValidationGrid grid;
    try {
        const auto j = json::parse(json_text);
        for (const auto& [key, v] : j.items())
            if (key != "replicates" && key != "seed" && key != "analysis" && key != "base" && key != "cells")
                throw DataError("validation grid: unknown key '" + key + "'");
        grid.replicates = j.value("replicates", std::size_t(50));
        grid.seed = j.value("seed", std::uint64_t(1));
        if (j.contains("analysis")) {
            const auto& a = j["analysis"];
            for (const auto& [key, v] : a.items()) {
                auto& c = grid.analysis;
                if (key == "link") c.link = parse_link(v.get<std::string>());
                else if (key == "tie_filter") c.filter = TieFilter::parse(v.get<std::string>());
                else if (key == "covariates") c.covariates = v.get<std::vector<std::string>>();
                else if (key == "cluster") c.cluster = v.get<std::string>() == "dyad" ? ClusterKey::dyad : ClusterKey::ego;
                else if (key == "alpha") c.alpha = v.get<double>();
                else if (key == "cluster_test") c.run_cluster_test = v.get<bool>();
                else if (key == "cluster_max_d") c.cluster_max_d = v.get<int>();
                else if (key == "cluster_replicates") c.cluster_replicates = v.get<std::size_t>();
                else if (key == "directional") c.run_directional = v.get<bool>();
                else throw DataError("validation grid: unknown analysis key '" + key + "'");
            }
        }
        const json base = j.value("base", json::object());
        if (!j.contains("cells") || !j["cells"].is_array() || j["cells"].empty())
            throw DataError("validation grid: 'cells' must be a non-empty array");
        for (const auto& cell : j["cells"]) {
            json spec = base;
            if (cell.contains("spec")) spec.update(cell["spec"]);
            HarnessCell hc;
            hc.label = cell.value("label", "cell" + std::to_string(grid.cells.size()));
            hc.spec = parse_abm_spec(spec.dump());
            grid.cells.push_back(std::move(hc));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("validation grid: ") + e.what());
    }
    return grid;
}

} // namespace socnet

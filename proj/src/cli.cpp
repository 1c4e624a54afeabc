#include "socnet/cli.hpp"

#include "socnet/abm.hpp"
#include "socnet/cluster_perm.hpp"
#include "socnet/csv.hpp"
#include "socnet/gee.hpp"
#include "socnet/manifest.hpp"
#include "socnet/panel.hpp"
#include "socnet/rng.hpp"
#include "socnet/sim.hpp"
#include "socnet/viz.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace socnet {

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    out << text;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// --config FILE: every key becomes --key VALUE unless given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw DataError("--config needs a file");
            config = args[++i];
        } else if (args[i].starts_with("--config=")) {
            config = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config.empty()) return out;
    inputs.push_back(config);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(config));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("config '" + config + "': " + e.what());
    }
    if (!j.is_object()) throw DataError("config '" + config + "' must be a JSON object");
    for (const auto& [raw, v] : j.items()) {
        std::string key = raw;
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        const bool given = std::any_of(out.begin(), out.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
        if (given) continue;
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back(flag);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            out.push_back(flag);
            out.push_back(joined);
        } else {
            out.push_back(flag);
            out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return out;
}

// Output location and thread count never change results, so they stay out
// of the manifest; `-o FILE` keeps only its file name.
std::vector<std::string> manifest_argv(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--out" || a == "--threads") {
            ++i;
            continue;
        }
        if (a.starts_with("--out=") || a.starts_with("--threads=")) continue;
        if ((a == "-o" || a == "--output") && i + 1 < args.size()) {
            out.push_back(a);
            out.push_back(fs::path(args[++i]).filename().string());
            continue;
        }
        out.push_back(a);
    }
    return out;
}

// Absolute paths for input options so a manifest replays from any directory.
std::vector<std::string> absolutize_inputs(std::vector<std::string> args) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--panel" || args[i] == "--spec" || args[i] == "--grid") args[i + 1] = absolute(args[i + 1]);
    return args;
}

// Commands hash their inputs before producing output, so the id read while
// stamping outputs is final.
struct Context {
    RunManifest manifest;
    fs::path out_dir = ".";
    std::vector<std::pair<fs::path, std::string>> outputs;
    std::string stamped;

    const std::string& id() {
        const auto now = manifest.compute_id();
        if (!stamped.empty() && stamped != now) throw std::logic_error("manifest changed after outputs were stamped");
        stamped = now;
        return stamped;
    }
    std::string csv_header() { return "# manifest: " + id() + "\n"; }
    void emit(const fs::path& name, const std::string& text) { outputs.emplace_back(out_dir / name, text); }
    void emit_json(const fs::path& name, ojson j) {
        ojson wrapped;
        wrapped["manifest_id"] = id();
        for (auto& [k, v] : j.items()) wrapped[k] = v;
        emit(name, wrapped.dump(2) + "\n");
    }
};

ojson num(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

Panel load_panel_dir(const std::string& dir, RunManifest& m, double neighbor_radius) {
    const auto files = PanelFiles::in_directory(dir);
    m.add_input(files.nodes);
    m.add_input(files.ties);
    m.add_input(files.traits);
    if (files.geo) m.add_input(*files.geo);
    if (files.meta) m.add_input(*files.meta);
    Panel p = load_panel(files);
    if (neighbor_radius > 0) p = derive_neighbor_ties(p, neighbor_radius);
    return p;
}

// ============================================================================
// cluster-test
// ============================================================================

struct ClusterArgs {
    std::string panel, trait, filter = "all", statistic = "risk_ratio", ci = "observed_minus_null", residualize;
    int wave = 1, max_d = 4;
    std::size_t replicates = 1000;
    std::optional<double> threshold;
    double neighbor_radius = 0;
};

void cluster_command(const ClusterArgs& a, Context& ctx) {
    Panel panel = load_panel_dir(a.panel, ctx.manifest, a.neighbor_radius);
    ClusterTestOptions opt;
    opt.max_d = a.max_d;
    opt.replicates = a.replicates;
    opt.seed = ctx.manifest.seed;
    if (a.statistic == "risk_ratio") opt.statistic = ClusterStatistic::risk_ratio;
    else if (a.statistic == "pearson") opt.statistic = ClusterStatistic::pearson;
    else throw DataError("unknown statistic '" + a.statistic + "' (risk_ratio or pearson)");
    if (a.ci == "observed_minus_null") opt.convention = CiConvention::observed_minus_null;
    else if (a.ci == "centered_null_range") opt.convention = CiConvention::centered_null_range;
    else throw DataError("unknown CI convention '" + a.ci + "'");

    const auto g = snapshot(panel, a.wave, TieFilter::parse(a.filter));
    const auto covs = split_list(a.residualize);
    Eigen::VectorXd y = covs.empty() ? panel.trait_at(a.trait, a.wave) : residualize_trait(panel, a.trait, covs, a.wave);
    if (a.threshold) y = dichotomize(y, *a.threshold);
    else if (!covs.empty() && opt.statistic == ClusterStatistic::risk_ratio) y = dichotomize(y, 0.0);

    auto res = cluster_test(g, y, opt);
    res.trait = a.trait;

    ojson j;
    j["trait"] = a.trait;
    j["wave"] = a.wave;
    j["tie_filter"] = TieFilter::parse(a.filter).to_string();
    j["statistic"] = to_string(res.statistic);
    j["ci_convention"] = to_string(res.convention);
    j["replicates"] = res.replicates;
    j["seed"] = res.seed;
    j["residualized_on"] = covs;
    j["reach"] = reach(res);
    std::string table = ctx.csv_header() +
                        "distance,observed,defined,pct_increase,null_mean,ci_low,ci_high,significant,n_pairs,"
                        "n_null_undefined\n";
    j["distances"] = ojson::array();
    for (const auto& d : res.distances) {
        j["distances"].push_back({{"distance", d.distance},
                                  {"observed", num(d.observed)},
                                  {"defined", d.observed_defined},
                                  {"pct_increase", num(d.pct_increase)},
                                  {"null_mean", num(d.null_mean)},
                                  {"ci_low", num(d.ci_low)},
                                  {"ci_high", num(d.ci_high)},
                                  {"significant", d.significant},
                                  {"significant_positive", d.significant_positive},
                                  {"n_pairs", d.n_pairs},
                                  {"n_pairs_alter_has", d.n_pairs_alter_has},
                                  {"n_pairs_alter_lacks", d.n_pairs_alter_lacks},
                                  {"n_null_undefined", d.n_null_undefined}});
        table += std::to_string(d.distance) + "," + csv::format_number(d.observed) + "," +
                 (d.observed_defined ? "1" : "0") + "," + csv::format_number(d.pct_increase) + "," +
                 csv::format_number(d.null_mean) + "," + csv::format_number(d.ci_low) + "," +
                 csv::format_number(d.ci_high) + "," + (d.significant ? "1" : "0") + "," + std::to_string(d.n_pairs) +
                 "," + std::to_string(d.n_null_undefined) + "\n";
    }
    if (opt.statistic == ClusterStatistic::risk_ratio && res.distances.front().observed_defined) {
        j["decay"] = ojson::array();
        for (const auto& row : decay_profile(res))
            j["decay"].push_back({{"distance", row.distance},
                                  {"observed_rr", num(row.observed_rr)},
                                  {"multiplicative_rr", num(row.multiplicative_rr)},
                                  {"ratio", num(row.ratio)},
                                  {"slower_than_multiplicative", row.slower_than_multiplicative}});
    }
    ctx.emit_json("cluster_test.json", j);
    ctx.emit("cluster_test.csv", table);
}

// ============================================================================
// gee-fit
// ============================================================================

struct GeeArgs {
    std::string panel, trait, filter = "all", link = "identity", covariates, cluster = "ego", model = "basic";
    bool small_sample = false, standardize = false, serial = false;
    std::size_t first_difference = 0;
    double neighbor_radius = 0;
};

ojson fit_json(const FitResult& f) {
    ojson j;
    j["link"] = to_string(f.link);
    j["outcome"] = f.outcome;
    j["n_rows"] = f.n_rows;
    j["n_clusters"] = f.n_clusters;
    j["iterations"] = f.iterations;
    j["converged"] = f.converged;
    j["coefficients"] = ojson::array();
    for (std::size_t k = 0; k < f.names.size(); ++k)
        j["coefficients"].push_back({{"term", f.names[k]},
                                     {"estimate", num(f.coefficients(Eigen::Index(k)))},
                                     {"std_error", num(f.std_error(k))},
                                     {"z", num(f.z(k))},
                                     {"p_value", num(f.p_value(k))},
                                     {"time_varying", k < f.time_varying.size() && f.time_varying[k]}});
    ojson drops;
    drops["candidates"] = f.drops.candidates;
    drops["kept"] = f.drops.kept;
    drops["by_reason"] = f.drops.by_reason;
    j["drops"] = drops;
    return j;
}

std::string coefficient_csv(const FitResult& f, const std::string& header) {
    std::string out = header + "term,estimate,std_error,z,p_value\n";
    for (std::size_t k = 0; k < f.names.size(); ++k)
        out += csv::escape(f.names[k]) + "," + csv::format_number(f.coefficients(Eigen::Index(k))) + "," +
               csv::format_number(f.std_error(k)) + "," + csv::format_number(f.z(k)) + "," +
               csv::format_number(f.p_value(k)) + "\n";
    return out;
}

void gee_command(const GeeArgs& a, Context& ctx) {
    Panel panel = load_panel_dir(a.panel, ctx.manifest, a.neighbor_radius);
    const auto filter = TieFilter::parse(a.filter);
    const auto covs = split_list(a.covariates);
    const Link link = parse_link(a.link);
    ClusterKey cluster;
    if (a.cluster == "ego") cluster = ClusterKey::ego;
    else if (a.cluster == "dyad") cluster = ClusterKey::dyad;
    else throw DataError("unknown cluster key '" + a.cluster + "' (ego or dyad)");

    ojson j;
    j["trait"] = a.trait;
    j["model"] = a.model;
    j["tie_filter"] = filter.to_string();
    j["cluster"] = to_string(cluster);

    if (a.model == "lagged-change") {
        const auto fit = lagged_change_model(panel, a.trait, filter, covs, cluster);
        j["fit"] = fit_json(fit);
        ctx.emit_json("gee_fit.json", j);
        ctx.emit("coefficients.csv", coefficient_csv(fit, ctx.csv_header()));
        return;
    }

    auto dyads = build_dyad_rows(panel, a.trait, filter, covs);
    if (a.standardize) standardize_covariates(dyads);
    auto spec = basic_model(link, covs);
    spec.cluster = cluster;
    spec.solver.small_sample_correction = a.small_sample;

    FitResult fit;
    if (a.model == "basic") {
        fit = fit_gee(dyads, spec);
    } else if (a.model == "geo") {
        fit = distance_interaction(dyads, spec);
    } else if (a.model == "directional") {
        const auto dc = directional_contrast(dyads, link, covs, cluster);
        fit = dc.fit;
        ojson d;
        d["effects"] = ojson::array();
        for (const auto& e : dc.effects)
            d["effects"].push_back({{"class", to_string(e.cls)},
                                    {"n_rows", e.n_rows},
                                    {"estimate", num(e.estimate)},
                                    {"std_error", num(e.std_error)},
                                    {"p_value", num(e.p_value)}});
        d["differences"] = ojson::array();
        for (const auto& e : dc.differences)
            d["differences"].push_back({{"a", to_string(e.a)},
                                        {"b", to_string(e.b)},
                                        {"difference", num(e.difference)},
                                        {"std_error", num(e.std_error)},
                                        {"p_value", num(e.p_value)}});
        d["excluded"] = ojson::array();
        for (auto c : dc.excluded) d["excluded"].push_back(to_string(c));
        d["expected_ordering"] = dc.expected_ordering;
        j["directional"] = d;
    } else {
        throw DataError("unknown model '" + a.model + "' (basic, directional, geo or lagged-change)");
    }
    j["fit"] = fit_json(fit);
    if (a.serial) {
        if (a.model != "basic") throw DataError("--serial-test applies to the basic model");
        const auto s = lm_serial_test(fit, dyads, spec);
        j["serial_test"] = {{"statistic", num(s.statistic)}, {"p_value", num(s.p_value)}, {"n_lagged", s.n_lagged}};
    }
    if (a.first_difference > 0) {
        if (a.model != "basic") throw DataError("--first-difference applies to the basic model");
        const auto fd = first_difference(fit, spec, variable_means(dyads, spec), a.first_difference,
                                         derive_seed(ctx.manifest.seed, {1}));
        j["first_difference"] = {{"point", num(fd.point)},
                                 {"ci_low", num(fd.ci_low)},
                                 {"ci_high", num(fd.ci_high)},
                                 {"n_draws", fd.n_draws},
                                 {"covariance_projected", fd.covariance_projected}};
    }
    ctx.emit_json("gee_fit.json", j);
    ctx.emit("coefficients.csv", coefficient_csv(fit, ctx.csv_header()));
}

// ============================================================================
// simulate
// ============================================================================

struct PathBiasArgs {
    std::string generator = "watts_strogatz", frames = "node:0.1,node:0.2,node:0.3,node:0.4,node:0.5", degrees;
    std::size_t n = 1000, sources = 10;
    double p = 0.01, beta = 0.1, reciprocity = 0.5, transmission_p = 0.3;
    int k = 10;
};

void path_bias_command(const PathBiasArgs& a, Context& ctx) {
    SyntheticNetworkSpec spec;
    spec.generator = parse_generator(a.generator);
    spec.n = a.n;
    spec.p = a.p;
    spec.k = a.k;
    spec.beta = a.beta;
    spec.reciprocity = a.reciprocity;
    for (const auto& d : split_list(a.degrees)) spec.degrees.push_back(std::stoi(d));
    spec.seed = derive_seed(ctx.manifest.seed, {0});
    std::vector<SamplingFrame> frames;
    for (const auto& f : split_list(a.frames)) frames.push_back(SamplingFrame::parse(f));
    const auto res = path_bias_experiment(spec, a.transmission_p, frames, a.sources, derive_seed(ctx.manifest.seed, {1}));

    std::string table = ctx.csv_header() + "source,target,frame,actual_len,full_shortest_len,sampled_shortest_len,disconnected\n";
    for (const auto& r : res.records)
        table += std::to_string(r.source) + "," + std::to_string(r.target) + "," + res.frames[r.frame].label() + "," +
                 std::to_string(r.actual_len) + "," + std::to_string(r.full_shortest_len) + "," +
                 (r.disconnected() ? "" : std::to_string(r.sampled_shortest_len)) + "," +
                 (r.disconnected() ? "1" : "0") + "\n";
    ojson j;
    j["generator"] = to_string(spec.generator);
    j["n_nodes"] = res.n_nodes;
    j["n_edges"] = res.n_edges;
    j["transmission_p"] = a.transmission_p;
    j["sources"] = a.sources;
    j["frames"] = ojson::array();
    for (const auto& s : res.summary)
        j["frames"].push_back({{"frame", s.frame},
                               {"n_records", s.n_records},
                               {"n_defined", s.n_defined},
                               {"disconnect_rate", num(s.disconnect_rate)},
                               {"mean_actual", num(s.mean_actual)},
                               {"mean_full_shortest", num(s.mean_full_shortest)},
                               {"mean_sampled_shortest", num(s.mean_sampled_shortest)},
                               {"mean_actual_over_sampled", num(s.mean_actual_over_sampled)},
                               {"pct_actual_shorter", num(s.pct_actual_shorter)}});
    ctx.emit("path_bias.csv", table);
    ctx.emit_json("path_bias_summary.json", j);
}

void abm_command(const std::string& spec_path, std::optional<std::uint64_t> seed, Context& ctx) {
    ctx.manifest.add_input(spec_path);
    auto spec = parse_abm_spec(read_text(spec_path));
    if (seed) spec.seed = *seed;
    ctx.manifest.seed = spec.seed;
    const Panel panel = abm_generate_panel(spec);
    // save through a scratch directory, then stamp each file
    const auto scratch = fs::temp_directory_path() / ("socnet-abm-" + hex64(derive_seed(spec.seed, {std::uint64_t(::getpid())})));
    fs::create_directories(scratch);
    save_panel(panel, scratch);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scratch)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ctx.emit(f.filename(), ctx.csv_header() + read_text(f));
    fs::remove_all(scratch);
}

std::string format_rate(double v) { return csv::format_number(v); }

void validate_grid_command(const std::string& grid_path, std::optional<std::size_t> replicates,
                           std::optional<std::uint64_t> seed, unsigned threads, Context& ctx) {
    ctx.manifest.add_input(grid_path);
    auto grid = parse_validation_grid(read_text(grid_path));
    if (replicates) grid.replicates = *replicates;
    if (seed) grid.seed = *seed;
    ctx.manifest.seed = grid.seed;
    const auto rep = validation_harness(grid.cells, grid.analysis, grid.replicates, grid.seed, threads);

    std::string table = ctx.csv_header() +
                        "label,condition,rate_kind,replicates,fitted,detections,detection_rate,rate,mean_beta2,"
                        "sd_beta2,mean_reach,ordering_rate,all_differences_nonsignificant_rate,errors\n";
    ojson j;
    j["replicates"] = grid.replicates;
    j["seed"] = grid.seed;
    j["cells"] = ojson::array();
    for (const auto& c : rep.cells) {
        const double ordering = c.directional_fitted ? double(c.ordering_holds) / double(c.directional_fitted) : kMissing;
        const double nonsig =
            c.directional_fitted ? double(c.all_differences_nonsignificant) / double(c.directional_fitted) : kMissing;
        table += csv::escape(c.label) + "," + c.condition + "," + c.rate_kind + "," + std::to_string(c.replicates) +
                 "," + std::to_string(c.fitted) + "," + std::to_string(c.detections) + "," +
                 format_rate(c.detection_rate) + "," + format_rate(c.rate) + "," + format_rate(c.mean_beta2) + "," +
                 format_rate(c.sd_beta2) + "," + format_rate(c.mean_reach) + "," + format_rate(ordering) + "," +
                 format_rate(nonsig) + "," + std::to_string(c.errors.size()) + "\n";
        j["cells"].push_back({{"label", c.label},
                              {"condition", c.condition},
                              {"rate_kind", c.rate_kind},
                              {"replicates", c.replicates},
                              {"fitted", c.fitted},
                              {"detections", c.detections},
                              {"detection_rate", num(c.detection_rate)},
                              {"rate", num(c.rate)},
                              {"mean_beta2", num(c.mean_beta2)},
                              {"sd_beta2", num(c.sd_beta2)},
                              {"mean_reach", num(c.mean_reach)},
                              {"ordering_rate", num(ordering)},
                              {"all_differences_nonsignificant_rate", num(nonsig)},
                              {"errors", c.errors}});
    }
    ctx.emit("validation.csv", table);
    ctx.emit_json("validation.json", j);
}

// ============================================================================
// export-viz and validate
// ============================================================================

struct VizArgs {
    std::string panel, filter = "all", trait, format = "graphml", output, nodes;
    int wave = 1;
    bool smooth = false, largest = false;
    double neighbor_radius = 0;
};

void viz_command(const VizArgs& a, Context& ctx) {
    Panel panel = load_panel_dir(a.panel, ctx.manifest, a.neighbor_radius);
    const auto format = parse_graph_format(a.format);
    const auto g = snapshot(panel, a.wave, TieFilter::parse(a.filter));
    std::vector<NodeIndex> subset;
    for (const auto& id : split_list(a.nodes)) subset.push_back(panel.require_index(id));
    if (a.largest) {
        auto lc = largest_component(g);
        if (!subset.empty()) {
            std::sort(subset.begin(), subset.end());
            std::vector<NodeIndex> both;
            std::set_intersection(lc.begin(), lc.end(), subset.begin(), subset.end(), std::back_inserter(both));
            subset = both;
            if (subset.empty()) throw DataError("node subset does not meet the largest component");
        } else {
            subset = lc;
        }
    }
    auto doc = make_document(g, subset, panel_annotations(panel, a.wave, a.trait, a.smooth, g));
    doc.graph_attributes["manifest_id"] = ctx.id();
    std::string name = a.output.empty() ? "graph." + a.format : fs::path(a.output).filename().string();
    ctx.emit(name, export_graph(doc, format));
}

void validate_command(const std::string& dir, double neighbor_radius, Context& ctx) {
    Panel panel = load_panel_dir(dir, ctx.manifest, neighbor_radius);
    ojson j;
    j["nodes"] = panel.size();
    std::size_t in_sample = 0;
    for (NodeIndex i = 0; i < panel.size(); ++i) in_sample += panel.node(i).in_sample;
    j["in_sample"] = in_sample;
    j["waves"] = panel.num_waves();
    j["tie_records"] = panel.ties().size();
    j["has_geo"] = panel.has_geo();
    j["traits"] = ojson::object();
    for (const auto& t : panel.trait_names())
        j["traits"][t] = (panel.trait(t).array() == panel.trait(t).array()).count();
    j["trait_observations"] = panel.trait_observation_count();
    const auto ds = degree_stats(panel);
    ojson counts = ojson::object();
    for (const auto& [type, c] : ds.tie_type_counts) counts[std::string(to_string(type))] = c;
    j["subjects"] = {{"n_nodes", ds.n_nodes},
                     {"mean_degree", num(ds.mean_degree)},
                     {"median_degree", num(ds.median_degree)},
                     {"pct_with_friend", num(ds.pct_with_friend)},
                     {"friend_ties_per_node", num(ds.friend_ties_per_node)},
                     {"tie_type_counts", counts}};
    j["snapshots"] = ojson::array();
    for (int w = 1; w <= panel.num_waves(); ++w) {
        const auto s = degree_stats(snapshot(panel, w));
        j["snapshots"].push_back({{"wave", w},
                                  {"n_edges", s.n_edges},
                                  {"mean_degree", num(s.mean_degree)},
                                  {"median_degree", num(s.median_degree)}});
    }
    ctx.emit_json("validate.json", j);
}

// ============================================================================
// Dispatch
// ============================================================================

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err);

int replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const auto m = RunManifest::from_json(read_text(manifest_path));
    for (const auto& [path, hash] : m.input_hashes) {
        if (!fs::exists(path)) throw DataError("manifest input '" + path + "' is missing");
        if (hash_file(path) != hash) throw DataError("manifest input '" + path + "' changed since the run");
    }
    std::vector<std::string> args;
    bool named_output = false;
    for (std::size_t i = 0; i < m.argv.size(); ++i) {
        if ((m.argv[i] == "-o" || m.argv[i] == "--output") && i + 1 < m.argv.size()) {
            args.push_back(m.argv[i]);
            args.push_back((fs::path(out_dir) / m.argv[++i]).string());
            named_output = true;
            continue;
        }
        args.push_back(m.argv[i]);
    }
    if (!named_output) {
        args.push_back("--out");
        args.push_back(out_dir);
    }
    return run(args, out, err);
}

void add_radius(CLI::App* sub, double& r) {
    sub->add_option("--neighbor-radius", r, "add neighbor ties between nodes within this many miles");
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> config_inputs;
    const auto args = absolutize_inputs(merge_config(raw_args, config_inputs));

    CLI::App app{"Longitudinal social-network analysis"};
    app.name("socnet");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "master seed");
    };

    ClusterArgs ca;
    auto* cluster = app.add_subcommand("cluster-test", "permutation test of clustering by geodesic distance");
    cluster->add_option("--panel", ca.panel, "panel directory")->required();
    cluster->add_option("--trait", ca.trait)->required();
    cluster->add_option("--wave", ca.wave);
    cluster->add_option("--tie-filter", ca.filter);
    cluster->add_option("--max-d", ca.max_d);
    cluster->add_option("--replicates", ca.replicates);
    cluster->add_option("--statistic", ca.statistic, "risk_ratio or pearson");
    cluster->add_option("--ci", ca.ci, "observed_minus_null or centered_null_range");
    cluster->add_option("--residualize,--adjust-for", ca.residualize, "comma-separated covariates");
    cluster->add_option("--dichotomize", ca.threshold, "threshold for a continuous trait");
    add_radius(cluster, ca.neighbor_radius);
    common(cluster);

    GeeArgs ga;
    auto* gee = app.add_subcommand("gee-fit", "dyadic longitudinal GEE");
    gee->add_option("--panel", ga.panel)->required();
    gee->add_option("--trait", ga.trait)->required();
    gee->add_option("--tie-filter", ga.filter);
    gee->add_option("--link", ga.link, "identity or logit");
    gee->add_option("--covariates", ga.covariates, "comma-separated");
    gee->add_option("--cluster", ga.cluster, "ego or dyad");
    gee->add_option("--model", ga.model, "basic, directional, geo or lagged-change");
    gee->add_flag("--small-sample", ga.small_sample, "G/(G-1) sandwich correction");
    gee->add_flag("--standardize", ga.standardize, "z-score continuous covariates");
    gee->add_flag("--serial-test", ga.serial, "LM test for serial correlation");
    gee->add_option("--first-difference", ga.first_difference, "coefficient draws (0 = off)");
    add_radius(gee, ga.neighbor_radius);
    common(gee);

    auto* simulate = app.add_subcommand("simulate", "ground-truth simulators");
    simulate->require_subcommand(1);
    PathBiasArgs pa;
    auto* pb = simulate->add_subcommand("path-bias", "actual vs shortest path lengths under sampling");
    pb->add_option("--generator", pa.generator);
    pb->add_option("--n", pa.n);
    pb->add_option("--p", pa.p, "erdos_renyi edge probability");
    pb->add_option("--k", pa.k, "watts_strogatz degree");
    pb->add_option("--beta", pa.beta, "watts_strogatz rewiring probability");
    pb->add_option("--degrees", pa.degrees, "configuration_model degree sequence");
    pb->add_option("--reciprocity", pa.reciprocity);
    pb->add_option("--transmission-p", pa.transmission_p);
    pb->add_option("--frames", pa.frames, "e.g. node:0.3,edge:0.5,censor:1");
    pb->add_option("--sources", pa.sources);
    common(pb);
    std::string spec_path;
    std::optional<std::uint64_t> abm_seed;
    auto* abm = simulate->add_subcommand("abm", "agent-based panel");
    abm->add_option("--spec", spec_path)->required();
    abm->add_option("--seed", abm_seed);
    abm->add_option("--out", out_dir);
    std::string grid_path;
    std::optional<std::size_t> grid_reps;
    std::optional<std::uint64_t> grid_seed;
    unsigned threads = 1;
    auto* val = simulate->add_subcommand("validate", "sensitivity / specificity grid");
    val->add_option("--grid", grid_path)->required();
    val->add_option("--replicates", grid_reps);
    val->add_option("--seed", grid_seed);
    val->add_option("--threads", threads);
    val->add_option("--out", out_dir);

    VizArgs va;
    auto* viz = app.add_subcommand("export-viz", "graph export for external renderers");
    viz->add_option("--panel", va.panel)->required();
    viz->add_option("--wave", va.wave);
    viz->add_option("--tie-filter", va.filter);
    viz->add_option("--trait", va.trait);
    viz->add_flag("--smooth", va.smooth, "add the closed-neighborhood mean of --trait");
    viz->add_flag("--largest-component", va.largest);
    viz->add_option("--nodes", va.nodes, "comma-separated node subset");
    viz->add_option("--format", va.format, "dot, graphml or json");
    viz->add_option("-o,--output", va.output, "output file");
    add_radius(viz, va.neighbor_radius);
    common(viz);

    std::string validate_dir;
    double validate_radius = 0;
    auto* validate = app.add_subcommand("validate", "load and summarize a panel");
    validate->add_option("--panel", validate_dir)->required();
    add_radius(validate, validate_radius);
    common(validate);

    std::string manifest_path;
    auto* rep = app.add_subcommand("replay", "rerun a manifest");
    rep->add_option("manifest", manifest_path)->required();
    rep->add_option("--out", out_dir);

    if (!args.empty() && !args.front().starts_with('-') && !app.get_subcommand_no_throw(args.front())) {
        err << "unknown subcommand '" << args.front() << "'\n" << app.help();
        return 1;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, x;
        const int rc = app.exit(e, o, x);
        out << o.str();
        err << x.str();
        if (rc != 0) err << app.help();
        return rc == 0 ? 0 : 1;
    }

    if (rep->parsed()) return replay(manifest_path, out_dir, out, err);

    Context ctx;
    ctx.out_dir = out_dir;
    auto& m = ctx.manifest;
    m.argv = manifest_argv(args);
    m.seed = seed;
    for (const auto& c : config_inputs) m.add_input(c);
    CLI::App* chosen = app.get_subcommands().front();
    m.command = chosen->get_name();
    if (chosen == simulate) {
        chosen = simulate->get_subcommands().front();
        m.command += " " + chosen->get_name();
    }
    for (const auto* opt : chosen->get_options()) {
        const auto name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "out" || name == "output" || name == "threads") continue;
        const auto& res = opt->results();
        std::string v;
        for (const auto& r : res) v += (v.empty() ? "" : ",") + r;
        if (res.empty()) v = opt->get_default_str();
        m.parameters[name] = v;
    }

    if (chosen == cluster) cluster_command(ca, ctx);
    else if (chosen == gee) gee_command(ga, ctx);
    else if (chosen == pb) path_bias_command(pa, ctx);
    else if (chosen == abm) abm_command(spec_path, abm_seed, ctx);
    else if (chosen == val) validate_grid_command(grid_path, grid_reps, grid_seed, threads, ctx);
    else if (chosen == viz) {
        if (!va.output.empty()) ctx.out_dir = fs::path(va.output).parent_path().empty() ? fs::path(".") : fs::path(va.output).parent_path();
        viz_command(va, ctx);
    } else if (chosen == validate) validate_command(validate_dir, validate_radius, ctx);
    else throw DataError("unhandled subcommand");

    m.finalize();
    if (!ctx.stamped.empty() && ctx.stamped != m.id) throw std::logic_error("manifest changed after outputs were stamped");
    for (const auto& [path, text] : ctx.outputs) write_text(path, text);
    const std::string manifest_name =
        chosen == viz && !va.output.empty() ? fs::path(va.output).filename().string() + ".manifest.json" : "manifest.json";
    write_text(ctx.out_dir / manifest_name, m.to_json());
    out << m.command << ": wrote " << ctx.outputs.size() << " file(s) to " << ctx.out_dir.string() << " (manifest "
        << m.id << ")\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(args, out, err);
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace socnet

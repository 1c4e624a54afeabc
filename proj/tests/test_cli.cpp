#include "socnet/cli.hpp"
#include "socnet/manifest.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace socnet;
namespace fs = std::filesystem;

namespace {

fs::path toy_dir() { return fs::path(SOCNET_TEST_DATA) / "toy"; }

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("socnet_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Every regular file in `a` except manifests has a byte-identical twin in `b`.
void check_same_outputs(const fs::path& a, const fs::path& b) {
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename().string();
        if (name.ends_with("manifest.json")) continue;
        REQUIRE(fs::exists(b / name));
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / name), name);
        ++compared;
    }
    CHECK(compared > 0);
}

// Pairs whose members share the trait from wave 2 on: y_ego(t+1) == y_alter(t+1).
fs::path separated_panel() {
    const auto d = scratch("separated");
    std::ofstream nodes(d / "nodes.csv"), ties(d / "ties.csv"), traits(d / "traits.csv");
    nodes << "node_id,in_sample,sex,birth_year\n";
    ties << "ego_id,alter_id,tie_type,wave_first,wave_last,nominated_by_ego\n";
    traits << "node_id,wave,trait,value\n";
    int id = 1;
    for (int pattern = 0; pattern < 16; ++pattern) {
        const int a = id++, b = id++;
        nodes << a << ",1,F,1950\n" << b << ",1,M,1950\n";
        ties << a << "," << b << ",friend,1,3,1\n";
        traits << a << ",1,obese," << (pattern & 1) << "\n" << b << ",1,obese," << ((pattern >> 1) & 1) << "\n";
        for (int w = 2; w <= 3; ++w) {
            const int v = (pattern >> w) & 1;
            traits << a << "," << w << ",obese," << v << "\n" << b << "," << w << ",obese," << v << "\n";
        }
    }
    return d;
}

} // namespace

TEST_CASE("unknown subcommand is a usage error") {
    const auto r = cli({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cluster-test") != std::string::npos);
    CHECK(r.err.find("unknown subcommand 'frobnicate'") != std::string::npos);
    CHECK(cli({}).code == 1);
    CHECK(cli({"cluster-test", "--panel", toy_dir().string(), "--trait", "obese", "--bogus"}).code == 1);
}

TEST_CASE("missing input is a data error") {
    const auto r = cli({"cluster-test", "--panel", "/nonexistent/dir", "--trait", "obese", "--out",
                        scratch("missing").string()});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("cluster-test output is deterministic and stamped") {
    const auto a = scratch("ct_a"), b = scratch("ct_b");
    const std::vector<std::string> base{"cluster-test", "--panel", toy_dir().string(), "--trait", "obese",
                                        "--wave", "1", "--max-d", "2", "--replicates", "50", "--seed", "3"};
    auto args = base;
    args.insert(args.end(), {"--out", a.string()});
    REQUIRE(cli(args).code == 0);
    args = base;
    args.insert(args.end(), {"--out", b.string()});
    REQUIRE(cli(args).code == 0);
    check_same_outputs(a, b);

    const auto manifest = RunManifest::from_json(slurp(a / "manifest.json"));
    const auto result = nlohmann::json::parse(slurp(a / "cluster_test.json"));
    CHECK(result.at("manifest_id") == manifest.id);
    CHECK(slurp(a / "cluster_test.csv").starts_with("# manifest: " + manifest.id));
    CHECK(manifest.id == manifest.compute_id());
    CHECK(manifest.input_hashes.size() >= 3);
}

TEST_CASE("separated logit data exits with a numerical error") {
    const auto r = cli({"gee-fit", "--panel", separated_panel().string(), "--trait", "obese", "--link", "logit",
                        "--out", scratch("sep_out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("separation") != std::string::npos);
}

TEST_CASE("replay reproduces every pipeline") {
    const auto root = scratch("replay");
    const auto spec = root / "spec.json";
    std::ofstream(spec) << R"({"influence": true, "n": 120, "waves": 3, "influence_p": 0.3})";
    const auto panel = root / "panel";
    REQUIRE(cli({"simulate", "abm", "--spec", spec.string(), "--seed", "4", "--out", panel.string()}).code == 0);
    REQUIRE(fs::exists(panel / "nodes.csv"));

    const auto grid = root / "grid.json";
    std::ofstream(grid) << R"({"replicates": 2, "seed": 3, "base": {"n": 100, "waves": 3},
        "cells": [{"label": "inf", "spec": {"influence": true}}]})";

    const std::vector<std::pair<std::string, std::vector<std::string>>> pipelines{
        {"ct", {"cluster-test", "--panel", panel.string(), "--trait", "trait", "--wave", "3", "--replicates", "40"}},
        {"gee",
         {"gee-fit", "--panel", panel.string(), "--trait", "trait", "--link", "logit", "--first-difference", "200",
          "--serial-test"}},
        {"dir", {"gee-fit", "--panel", panel.string(), "--trait", "trait", "--model", "directional"}},
        {"pb",
         {"simulate", "path-bias", "--generator", "ws", "--n", "300", "--k", "6", "--frames", "node:0.5,edge:0.5",
          "--sources", "2", "--seed", "9"}},
        {"abm", {"simulate", "abm", "--spec", spec.string(), "--seed", "4"}},
        {"grid", {"simulate", "validate", "--grid", grid.string()}},
        {"val", {"validate", "--panel", panel.string()}},
    };
    for (const auto& [name, args] : pipelines) {
        CAPTURE(name);
        const auto first = root / (name + "_1"), second = root / (name + "_2");
        auto a = args;
        a.insert(a.end(), {"--out", first.string()});
        const auto r = cli(a);
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto rr = cli({"replay", (first / "manifest.json").string(), "--out", second.string()});
        REQUIRE_MESSAGE(rr.code == 0, rr.err);
        check_same_outputs(first, second);
        CHECK(RunManifest::from_json(slurp(first / "manifest.json")).id ==
              RunManifest::from_json(slurp(second / "manifest.json")).id);
    }

    // export-viz names its file explicitly
    const auto viz_a = root / "viz_1", viz_b = root / "viz_2";
    fs::create_directories(viz_a);
    REQUIRE(cli({"export-viz", "--panel", panel.string(), "--wave", "2", "--trait", "trait", "--smooth",
                 "--largest-component", "--format", "graphml", "-o", (viz_a / "g.graphml").string()})
                .code == 0);
    REQUIRE(cli({"replay", (viz_a / "g.graphml.manifest.json").string(), "--out", viz_b.string()}).code == 0);
    check_same_outputs(viz_a, viz_b);
    CHECK(slurp(viz_a / "g.graphml").find("manifest_id") != std::string::npos);
}

TEST_CASE("replay refuses changed inputs") {
    const auto root = scratch("replay_changed");
    fs::copy(toy_dir(), root / "panel", fs::copy_options::recursive);
    REQUIRE(cli({"validate", "--panel", (root / "panel").string(), "--out", (root / "a").string()}).code == 0);
    std::ofstream(root / "panel" / "traits.csv", std::ios::app) << "3,1,bmi,28\n";
    const auto r = cli({"replay", (root / "a" / "manifest.json").string(), "--out", (root / "b").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("changed") != std::string::npos);
}

TEST_CASE("config file supplies flags and command line wins") {
    const auto root = scratch("config");
    const auto cfg = root / "cfg.json";
    std::ofstream(cfg) << R"({"trait": "obese", "max_d": 2, "replicates": 30, "seed": 8})";
    REQUIRE(cli({"cluster-test", "--config", cfg.string(), "--panel", toy_dir().string(), "--replicates", "20",
                 "--out", (root / "a").string()})
                .code == 0);
    const auto m = RunManifest::from_json(slurp(root / "a" / "manifest.json"));
    CHECK(m.parameters.at("replicates") == "20");
    CHECK(m.parameters.at("max-d") == "2");
    CHECK(m.seed == 8);
    CHECK(m.input_hashes.count(fs::absolute(cfg).string()) == 1);
}

TEST_CASE("manifest id ignores the timestamp") {
    RunManifest m;
    m.command = "x";
    m.argv = {"x", "--seed", "1"};
    m.finalize();
    auto n = RunManifest::from_json(m.to_json());
    CHECK(n.id == m.id);
    n.timestamp = "1999-01-01T00:00:00Z";
    CHECK(n.compute_id() == m.id);
    n.seed = 2;
    CHECK(n.compute_id() != m.id);
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
}

#include "socnet/abm.hpp"
#include "socnet/viz.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace socnet;
namespace pt = boost::property_tree;

namespace {

NetworkSnapshot graph(std::size_t n, std::vector<std::pair<NodeIndex, NodeIndex>> e) {
    return NetworkSnapshot(n, e);
}

NetworkSnapshot star4() { return graph(4, {{0, 1}, {0, 2}, {0, 3}}); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Structural GraphML check: declared keys, key domains, node references.
void check_graphml(const std::string& xml, std::size_t nodes, std::size_t edges) {
    std::istringstream in(xml);
    pt::ptree tree;
    REQUIRE_NOTHROW(pt::read_xml(in, tree));
    const auto& root = tree.get_child("graphml");
    std::map<std::string, std::string> key_domain;
    for (const auto& [tag, child] : root)
        if (tag == "key") key_domain[child.get<std::string>("<xmlattr>.id")] = child.get<std::string>("<xmlattr>.for");
    const auto& g = root.get_child("graph");
    CHECK(g.get<std::string>("<xmlattr>.edgedefault") == "undirected");
    std::set<std::string> ids;
    std::size_t n_edges = 0;
    auto check_data = [&](const pt::ptree& elem, const std::string& domain) {
        for (const auto& [tag, d] : elem)
            if (tag == "data") {
                const auto key = d.get<std::string>("<xmlattr>.key");
                REQUIRE(key_domain.count(key));
                CHECK(key_domain[key] == domain);
            }
    };
    check_data(g, "graph");
    for (const auto& [tag, child] : g) {
        if (tag == "node") {
            CHECK(ids.insert(child.get<std::string>("<xmlattr>.id")).second);
            check_data(child, "node");
        }
    }
    for (const auto& [tag, child] : g) {
        if (tag != "edge") continue;
        ++n_edges;
        CHECK(ids.count(child.get<std::string>("<xmlattr>.source")));
        CHECK(ids.count(child.get<std::string>("<xmlattr>.target")));
        check_data(child, "edge");
    }
    CHECK(ids.size() == nodes);
    CHECK(n_edges == edges);
}

} // namespace

TEST_CASE("largest component") {
    const auto two_triangles = graph(7, {{3, 4}, {4, 5}, {3, 5}, {0, 1}, {1, 2}, {0, 2}});
    CHECK(largest_component(two_triangles) == std::vector<NodeIndex>{0, 1, 2});
    CHECK(largest_component(star4()) == std::vector<NodeIndex>{0, 1, 2, 3});
    CHECK(largest_component(graph(3, {})) == std::vector<NodeIndex>{0});
    CHECK(largest_component(NetworkSnapshot()).empty());
}

TEST_CASE("geodesic smoothing") {
    const auto s = geodesic_smooth(star4(), vec({1, 0, 0, 0}));
    CHECK(*s.at(0) == 0.25);
    CHECK(*s.at(1) == 0.5);
    CHECK(*s.at(3) == 0.5);

    const auto c = geodesic_smooth(star4(), vec({2.5, 2.5, 2.5, 2.5}));
    for (NodeIndex i = 0; i < 4; ++i) CHECK(*c.at(i) == 2.5);

    const auto iso = geodesic_smooth(graph(2, {}), vec({7, kMissing}));
    CHECK(*iso.at(0) == 7);
    CHECK_FALSE(iso.at(1).has_value());

    // missing neighbors are left out of the mean
    const auto m = geodesic_smooth(star4(), vec({1, kMissing, 0, 0}));
    CHECK(*m.at(0) == doctest::Approx(1.0 / 3));
    CHECK(*m.at(1) == 1.0);
}

TEST_CASE("smoothing stays within the closed-neighborhood range") {
    SyntheticNetworkSpec spec;
    spec.n = 300;
    spec.k = 6;
    const auto g = generate_network(spec);
    Eigen::VectorXd t = Eigen::VectorXd::Random(300);
    const auto s = geodesic_smooth(g, t);
    for (NodeIndex i = 0; i < g.size(); ++i) {
        double lo = t(i), hi = t(i);
        for (auto j : g.neighbors(i)) {
            lo = std::min(lo, t(j));
            hi = std::max(hi, t(j));
        }
        CHECK(*s.at(i) >= lo - 1e-12);
        CHECK(*s.at(i) <= hi + 1e-12);
    }
}

TEST_CASE("dot export") {
    auto ids = std::make_shared<std::vector<NodeId>>(std::vector<NodeId>{"a", "b"});
    std::vector<std::pair<NodeIndex, NodeIndex>> e{{0, 1}};
    const NetworkSnapshot g(2, e, ids);
    NodeAnnotations ann;
    ann.trait_name = "obese";
    ann.trait = vec({1, 0});
    const auto dot = export_graph(make_document(g, {}, ann), GraphFormat::dot);
    std::size_t edges = 0;
    for (std::size_t p = dot.find("--"); p != std::string::npos; p = dot.find("--", p + 2)) ++edges;
    CHECK(edges == 1);
    CHECK(dot.find("graph") != std::string::npos);
    CHECK(dot.find("\"a\"") != std::string::npos);
    CHECK(export_graph(make_document(g, {}, ann), GraphFormat::dot) == dot);
    CHECK_THROWS_AS(parse_graph_format("png"), DataError);
}

TEST_CASE("node-link json round trip is byte identical") {
    ABMSpec spec;
    spec.n = 80;
    spec.waves = 2;
    spec.trait_kind = TraitKind::continuous;
    spec.trait_name = "bmi";
    spec.out_of_sample_fraction = 0.1;
    const Panel p = abm_generate_panel(spec);
    const auto g = snapshot(p, 2, TieFilter::only(TieType::friend_tie));
    auto doc = make_document(g, {}, panel_annotations(p, 2, "bmi", true, g));
    doc.graph_attributes["manifest_id"] = "0123456789abcdef";
    const auto first = export_graph(doc, GraphFormat::json);
    const auto second = export_graph(import_node_link(first), GraphFormat::json);
    CHECK(first == second);
    const auto back = import_node_link(first);
    CHECK(back.wave == 2);
    CHECK(back.trait_name == "bmi");
    CHECK(back.graph_attributes.at("manifest_id") == "0123456789abcdef");
    CHECK(back.nodes.size() == 80);
}

TEST_CASE("graphml for a synthetic obesity view") {
    ABMSpec spec;
    spec.n = 200;
    spec.waves = 3;
    spec.trait_kind = TraitKind::continuous;
    spec.trait_name = "bmi";
    spec.influence = true;
    spec.out_of_sample_fraction = 0.05;
    const Panel p = abm_generate_panel(spec);
    const auto filter = TieFilter::parse("friend,spouse,sibling");
    const auto g = snapshot(p, 3, filter);
    const auto lc = largest_component(p, 3, filter);
    CHECK(lc == largest_component(g));
    const auto doc = make_document(g, lc, panel_annotations(p, 3, "bmi", true, g));
    std::size_t expect_edges = 0;
    const std::set<NodeIndex> in(lc.begin(), lc.end());
    for (auto [a, b] : g.edges()) expect_edges += in.count(a) && in.count(b);
    const auto xml = export_graph(doc, GraphFormat::graphml);
    check_graphml(xml, lc.size(), expect_edges);
    CHECK(xml.find("attr.name=\"smoothed\"") != std::string::npos);
}

TEST_CASE("edge annotations") {
    PanelBuilder b;
    for (auto id : {"1", "2", "3"}) b.add_node({id});
    b.add_tie("1", "2", TieType::friend_tie, 1, 1, true);
    b.add_tie("1", "2", TieType::coworker, 1, 1, false);
    b.add_tie("2", "3", TieType::sibling, 1, 1, false);
    b.add_trait("1", 1, "y", 1);
    const Panel p = b.build();
    const auto g = snapshot(p, 1);
    const auto doc = make_document(g, {}, panel_annotations(p, 1, "y", false, g));
    REQUIRE(doc.edges.size() == 2);
    CHECK(doc.edges[0].tie_type.find('+') != std::string::npos);
    CHECK(doc.edges[0].directionality == "ego_perceived");
    CHECK(doc.edges[1].tie_type == "sibling");
    CHECK(doc.edges[1].directionality == "none");
    CHECK(doc.nodes[0].trait == 1.0);
    CHECK_FALSE(doc.nodes[1].trait.has_value());
}

#include "socnet/viz.hpp"

#include "socnet/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace socnet {

std::vector<NodeIndex> largest_component(const NetworkSnapshot& g) {
    const auto n = g.size();
    std::vector<int> comp(n, -1);
    std::vector<NodeIndex> best;
    for (NodeIndex s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<NodeIndex> members{s};
        comp[s] = int(s);
        for (std::size_t h = 0; h < members.size(); ++h)
            for (auto v : g.neighbors(members[h]))
                if (comp[v] < 0) {
                    comp[v] = int(s);
                    members.push_back(v);
                }
        // components are discovered in order of their smallest index, so a
        // strict comparison keeps the earliest on ties
        if (members.size() > best.size()) best = std::move(members);
    }
    std::sort(best.begin(), best.end());
    return best;
}

std::vector<NodeIndex> largest_component(const Panel& panel, int wave, TieFilter filter) {
    return largest_component(snapshot(panel, wave, filter));
}

std::optional<double> SmoothedTrait::at(NodeIndex i) const {
    if (i >= values_.size()) throw DataError("node index outside smoothed trait");
    if (std::isnan(values_[i])) return std::nullopt;
    return values_[i];
}

SmoothedTrait geodesic_smooth(const NetworkSnapshot& g, const Eigen::VectorXd& trait) {
    if (trait.size() != Eigen::Index(g.size())) throw DataError("trait vector does not match snapshot size");
    SmoothedTrait out;
    out.values_.assign(g.size(), kMissing);
    for (NodeIndex i = 0; i < g.size(); ++i) {
        double sum = 0;
        int count = 0;
        auto take = [&](NodeIndex j) {
            if (std::isnan(trait(j))) return;
            sum += trait(j);
            ++count;
        };
        take(i);
        for (auto j : g.neighbors(i)) take(j);
        if (count) out.values_[i] = sum / count;
    }
    return out;
}

GraphFormat parse_graph_format(std::string_view s) {
    if (s == "dot") return GraphFormat::dot;
    if (s == "graphml") return GraphFormat::graphml;
    if (s == "json") return GraphFormat::json;
    throw DataError("unknown graph format '" + std::string(s) + "' (dot, graphml or json)");
}

// ============================================================================
// Documents
// ============================================================================

NodeAnnotations panel_annotations(const Panel& panel, int wave, const std::string& trait, bool smooth,
                                  const NetworkSnapshot& g) {
    NodeAnnotations a;
    if (!trait.empty()) {
        a.trait_name = trait;
        a.trait = panel.trait_at(trait, wave);
        if (smooth) a.smoothed = geodesic_smooth(g, *a.trait);
    } else if (smooth) {
        throw DataError("smoothing needs a trait");
    }
    for (NodeIndex i = 0; i < panel.size(); ++i) {
        a.sex.push_back(panel.node(i).sex);
        a.in_sample.push_back(panel.node(i).in_sample);
    }
    return a;
}

GraphDocument make_document(const NetworkSnapshot& g, std::span<const NodeIndex> subset,
                            const NodeAnnotations& ann) {
    const auto n = g.size();
    std::vector<char> keep(n, subset.empty() ? 1 : 0);
    for (auto i : subset) {
        if (i >= n) throw DataError("node subset references an index outside the graph");
        keep[i] = 1;
    }
    if (ann.trait && ann.trait->size() != Eigen::Index(n)) throw DataError("trait annotation size mismatch");
    if (ann.smoothed && ann.smoothed->size() != n) throw DataError("smoothed annotation size mismatch");

    GraphDocument doc;
    doc.trait_name = ann.trait_name;
    doc.wave = g.wave;
    for (NodeIndex i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        ExportNode node;
        node.id = g.id(i);
        if (ann.trait && !std::isnan((*ann.trait)(i))) node.trait = (*ann.trait)(i);
        if (ann.smoothed) node.smoothed = ann.smoothed->at(i);
        if (i < ann.sex.size()) node.sex = ann.sex[i];
        if (i < ann.in_sample.size()) node.in_sample = ann.in_sample[i];
        doc.nodes.push_back(std::move(node));
    }
    const auto typed = g.typed_edges();
    for (auto [a, b] : g.edges()) {
        if (!keep[a] || !keep[b]) continue;
        ExportEdge e;
        e.source = g.id(a);
        e.target = g.id(b);
        bool is_friend = false;
        for (const auto& t : typed)
            if (t.a == a && t.b == b) {
                if (!e.tie_type.empty()) e.tie_type += '+';
                e.tie_type += to_string(t.type);
                is_friend = is_friend || t.type == TieType::friend_tie;
            }
        if (e.tie_type.empty()) e.tie_type = "unknown";
        e.directionality = is_friend ? std::string(to_string(classify_friendship(g, a, b))) : "none";
        doc.edges.push_back(std::move(e));
    }
    return doc;
}

// ============================================================================
// Serialization
// ============================================================================

namespace {

std::string quote_dot(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string to_dot(const GraphDocument& doc) {
    std::string out = "graph G {\n";
    if (!doc.trait_name.empty()) out += "  graph [trait_name=" + quote_dot(doc.trait_name) + "];\n";
    for (const auto& [k, v] : doc.graph_attributes) out += "  graph [" + quote_dot(k) + "=" + quote_dot(v) + "];\n";
    for (const auto& v : doc.nodes) {
        std::vector<std::string> attrs;
        if (v.trait) attrs.push_back("trait=" + csv::format_number(*v.trait));
        if (v.smoothed) attrs.push_back("smoothed=" + csv::format_number(*v.smoothed));
        if (!v.sex.empty()) attrs.push_back("sex=" + quote_dot(v.sex));
        attrs.push_back(std::string("in_sample=") + (v.in_sample ? "1" : "0"));
        out += "  " + quote_dot(v.id) + " [";
        for (std::size_t k = 0; k < attrs.size(); ++k) out += (k ? ", " : "") + attrs[k];
        out += "];\n";
    }
    for (const auto& e : doc.edges)
        out += "  " + quote_dot(e.source) + " -- " + quote_dot(e.target) + " [tie_type=" + quote_dot(e.tie_type) +
               ", directionality=" + quote_dot(e.directionality) + "];\n";
    return out + "}\n";
}

std::string to_graphml(const GraphDocument& doc) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
        "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
        "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
        "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
        "  <key id=\"trait\" for=\"node\" attr.name=\"trait\" attr.type=\"double\"/>\n"
        "  <key id=\"smoothed\" for=\"node\" attr.name=\"smoothed\" attr.type=\"double\"/>\n"
        "  <key id=\"sex\" for=\"node\" attr.name=\"sex\" attr.type=\"string\"/>\n"
        "  <key id=\"in_sample\" for=\"node\" attr.name=\"in_sample\" attr.type=\"boolean\"/>\n"
        "  <key id=\"tie_type\" for=\"edge\" attr.name=\"tie_type\" attr.type=\"string\"/>\n"
        "  <key id=\"directionality\" for=\"edge\" attr.name=\"directionality\" attr.type=\"string\"/>\n"
        "  <key id=\"trait_name\" for=\"graph\" attr.name=\"trait_name\" attr.type=\"string\"/>\n";
    for (const auto& [k, v] : doc.graph_attributes)
        out += "  <key id=\"g_" + xml_escape(k) + "\" for=\"graph\" attr.name=\"" + xml_escape(k) +
               "\" attr.type=\"string\"/>\n";
    out += "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    if (!doc.trait_name.empty())
        out += "    <data key=\"trait_name\">" + xml_escape(doc.trait_name) + "</data>\n";
    for (const auto& [k, v] : doc.graph_attributes)
        out += "    <data key=\"g_" + xml_escape(k) + "\">" + xml_escape(v) + "</data>\n";
    for (const auto& v : doc.nodes) {
        out += "    <node id=\"" + xml_escape(v.id) + "\">\n";
        if (v.trait) out += "      <data key=\"trait\">" + csv::format_number(*v.trait) + "</data>\n";
        if (v.smoothed) out += "      <data key=\"smoothed\">" + csv::format_number(*v.smoothed) + "</data>\n";
        if (!v.sex.empty()) out += "      <data key=\"sex\">" + xml_escape(v.sex) + "</data>\n";
        out += std::string("      <data key=\"in_sample\">") + (v.in_sample ? "true" : "false") + "</data>\n";
        out += "    </node>\n";
    }
    for (std::size_t k = 0; k < doc.edges.size(); ++k) {
        const auto& e = doc.edges[k];
        out += "    <edge id=\"e" + std::to_string(k) + "\" source=\"" + xml_escape(e.source) + "\" target=\"" +
               xml_escape(e.target) + "\">\n";
        out += "      <data key=\"tie_type\">" + xml_escape(e.tie_type) + "</data>\n";
        out += "      <data key=\"directionality\">" + xml_escape(e.directionality) + "</data>\n";
        out += "    </edge>\n";
    }
    return out + "  </graph>\n</graphml>\n";
}

using nlohmann::ordered_json;

std::string to_node_link(const GraphDocument& doc) {
    ordered_json j;
    j["directed"] = false;
    j["multigraph"] = false;
    j["graph"] = ordered_json::object();
    if (!doc.trait_name.empty()) j["graph"]["trait_name"] = doc.trait_name;
    j["graph"]["wave"] = doc.wave;
    for (const auto& [k, v] : doc.graph_attributes) j["graph"][k] = v;
    j["nodes"] = ordered_json::array();
    for (const auto& v : doc.nodes) {
        ordered_json node;
        node["id"] = v.id;
        if (v.trait) node["trait"] = *v.trait;
        if (v.smoothed) node["smoothed"] = *v.smoothed;
        if (!v.sex.empty()) node["sex"] = v.sex;
        node["in_sample"] = v.in_sample;
        j["nodes"].push_back(std::move(node));
    }
    j["links"] = ordered_json::array();
    for (const auto& e : doc.edges)
        j["links"].push_back({{"source", e.source},
                              {"target", e.target},
                              {"tie_type", e.tie_type},
                              {"directionality", e.directionality}});
    return j.dump(2) + "\n";
}

} // namespace

std::string export_graph(const GraphDocument& doc, GraphFormat format) {
    switch (format) {
    case GraphFormat::dot: return to_dot(doc);
    case GraphFormat::graphml: return to_graphml(doc);
    case GraphFormat::json: return to_node_link(doc);
    }
    throw DataError("unknown graph format");
}

GraphDocument import_node_link(std::string_view json_text) {
    GraphDocument doc;
    try {
        const auto j = nlohmann::json::parse(json_text);
        const auto& g = j.at("graph");
        if (g.contains("trait_name")) doc.trait_name = g["trait_name"].get<std::string>();
        if (g.contains("wave")) doc.wave = g["wave"].get<int>();
        for (const auto& [k, v] : g.items())
            if (k != "trait_name" && k != "wave") doc.graph_attributes[k] = v.get<std::string>();
        for (const auto& v : j.at("nodes")) {
            ExportNode node;
            node.id = v.at("id").get<std::string>();
            if (v.contains("trait")) node.trait = v["trait"].get<double>();
            if (v.contains("smoothed")) node.smoothed = v["smoothed"].get<double>();
            if (v.contains("sex")) node.sex = v["sex"].get<std::string>();
            node.in_sample = v.value("in_sample", true);
            doc.nodes.push_back(std::move(node));
        }
        for (const auto& e : j.at("links"))
            doc.edges.push_back({e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                                 e.value("tie_type", std::string("unknown")),
                                 e.value("directionality", std::string("none"))});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("node-link JSON: ") + e.what());
    }
    return doc;
}

} // namespace socnet

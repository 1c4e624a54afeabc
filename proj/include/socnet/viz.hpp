#pragma once

// Visualization preprocessing and export. Nothing here feeds the statistical
// modules: SmoothedTrait deliberately has no conversion to a trait vector.

#include "socnet/panel.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace socnet {

// Node indices of the largest connected component, ascending; ties between
// equal-size components go to the one holding the smallest index.
std::vector<NodeIndex> largest_component(const NetworkSnapshot& g);
std::vector<NodeIndex> largest_component(const Panel& panel, int wave, TieFilter filter);

class SmoothedTrait {
public:
    // nullopt when nothing in the closed neighborhood was observed
    std::optional<double> at(NodeIndex i) const;
    std::size_t size() const { return values_.size(); }

private:
    friend SmoothedTrait geodesic_smooth(const NetworkSnapshot&, const Eigen::VectorXd&);
    std::vector<double> values_;
};

// Unweighted mean over the node and its observed distance-1 neighbors.
SmoothedTrait geodesic_smooth(const NetworkSnapshot& g, const Eigen::VectorXd& trait);

enum class GraphFormat { dot, graphml, json };
GraphFormat parse_graph_format(std::string_view s);

struct ExportNode {
    NodeId id;
    std::optional<double> trait;
    std::optional<double> smoothed;
    std::string sex;
    bool in_sample = true;
};

struct ExportEdge {
    NodeId source;
    NodeId target;
    std::string tie_type;       // "+"-joined when several types share the pair
    std::string directionality; // from source's side; "none" for non-friend pairs
};

struct GraphDocument {
    std::string trait_name;
    int wave = 0;
    std::map<std::string, std::string> graph_attributes;
    std::vector<ExportNode> nodes; // NodeId order
    std::vector<ExportEdge> edges; // (source, target) NodeId order
};

struct NodeAnnotations {
    std::string trait_name;
    std::optional<Eigen::VectorXd> trait; // NaN = missing
    std::optional<SmoothedTrait> smoothed;
    std::vector<std::string> sex;    // empty = unknown
    std::vector<char> in_sample;     // empty = all in sample
};

// Induced subgraph on `subset` (empty = every node) with annotations.
GraphDocument make_document(const NetworkSnapshot& g, std::span<const NodeIndex> subset,
                            const NodeAnnotations& annotations);
NodeAnnotations panel_annotations(const Panel& panel, int wave, const std::string& trait, bool smooth,
                                  const NetworkSnapshot& g);

std::string export_graph(const GraphDocument& doc, GraphFormat format);
// Inverse of the JSON node-link export.
GraphDocument import_node_link(std::string_view json_text);

} // namespace socnet

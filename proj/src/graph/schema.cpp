#include "gsim/graph/schema.hpp"

namespace gsim::graph {

Schema::Schema(std::vector<NodeTypeDef> node_types, std::vector<EdgeTypeDef> edge_types)
    : node_types_(std::move(node_types)), edge_types_(std::move(edge_types)) {
    for (int i = 0; i < static_cast<int>(node_types_.size()); ++i) {
        const auto& nt = node_types_[i];
        if (nt.name.empty()) {
            throw GraphError("schema: empty node type name");
        }
        if (nt.feature_dim < 0) {
            throw GraphError("schema: negative feature dim for node type '" + nt.name + "'");
        }
        if (!node_index_.emplace(nt.name, i).second) {
            throw GraphError("schema: duplicate node type '" + nt.name + "'");
        }
    }
    for (int i = 0; i < static_cast<int>(edge_types_.size()); ++i) {
        const auto& et = edge_types_[i];
        if (et.name.empty()) {
            throw GraphError("schema: empty edge type name");
        }
        if (et.feature_dim < 0) {
            throw GraphError("schema: negative feature dim for edge type '" + et.name + "'");
        }
        if (!edge_index_.emplace(et.name, i).second) {
            throw GraphError("schema: duplicate edge type '" + et.name + "'");
        }
        if (node_index_.find(et.src_kind) == node_index_.end()) {
            throw GraphError("schema: edge type '" + et.name + "' references unknown source kind '" +
                             et.src_kind + "'");
        }
        if (node_index_.find(et.dst_kind) == node_index_.end()) {
            throw GraphError("schema: edge type '" + et.name + "' references unknown target kind '" +
                             et.dst_kind + "'");
        }
    }
}

int Schema::node_type_index(std::string_view name) const {
    auto it = node_index_.find(std::string(name));
    return it == node_index_.end() ? -1 : it->second;
}

int Schema::edge_type_index(std::string_view name) const {
    auto it = edge_index_.find(std::string(name));
    return it == edge_index_.end() ? -1 : it->second;
}

} // namespace gsim::graph

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gsim::graph {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NodeTypeDef {
    std::string name;
    int feature_dim = 0;

    friend bool operator==(const NodeTypeDef&, const NodeTypeDef&) = default;
};

struct EdgeTypeDef {
    std::string name;
    std::string src_kind;
    std::string dst_kind;
    int feature_dim = 0;

    friend bool operator==(const EdgeTypeDef&, const EdgeTypeDef&) = default;
};

/**
 * Type system of a heterogeneous graph: the ordered node kinds, the ordered
 * directed edge kinds with their declared endpoint kinds, and the feature
 * dimension of each kind. Immutable after construction; construction
 * validates uniqueness, endpoint resolution and non-negative dimensions.
 */
class Schema {
public:
    Schema(std::vector<NodeTypeDef> node_types, std::vector<EdgeTypeDef> edge_types);

    int node_type_count() const { return static_cast<int>(node_types_.size()); }
    int edge_type_count() const { return static_cast<int>(edge_types_.size()); }

    const NodeTypeDef& node_type(int index) const { return node_types_.at(index); }
    const EdgeTypeDef& edge_type(int index) const { return edge_types_.at(index); }
    const std::vector<NodeTypeDef>& node_types() const { return node_types_; }
    const std::vector<EdgeTypeDef>& edge_types() const { return edge_types_; }

    /// Index of a named kind, or -1 when the name is unknown.
    int node_type_index(std::string_view name) const;
    int edge_type_index(std::string_view name) const;

    int node_feature_dim(int type_index) const { return node_types_.at(type_index).feature_dim; }
    int edge_feature_dim(int type_index) const { return edge_types_.at(type_index).feature_dim; }

    bool operator==(const Schema& other) const {
        return node_types_ == other.node_types_ && edge_types_ == other.edge_types_;
    }

private:
    std::vector<NodeTypeDef> node_types_;
    std::vector<EdgeTypeDef> edge_types_;
    std::unordered_map<std::string, int> node_index_;
    std::unordered_map<std::string, int> edge_index_;
};

} // namespace gsim::graph

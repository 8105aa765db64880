#include "gsim/graph/snapshot.hpp"

#include <cmath>
#include <string>

namespace gsim::graph {

namespace {

std::uint64_t edge_key(std::uint64_t src, std::uint64_t dst, int type) {
    // FNV-style mix; collisions only cost a false duplicate at absurd sizes,
    // checked against the id space used here (dense small integers).
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint64_t w : {src, dst, static_cast<std::uint64_t>(type)}) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

} // namespace

GraphSnapshot::GraphSnapshot(std::shared_ptr<const Schema> schema, std::int64_t timestamp)
    : schema_(std::move(schema)), timestamp_(timestamp) {
    if (!schema_) {
        throw GraphError("snapshot: null schema");
    }
    if (timestamp_ < 0) {
        throw GraphError("snapshot: negative timestamp");
    }
}

GraphSnapshot GraphSnapshot::create(Schema schema, std::int64_t timestamp) {
    return GraphSnapshot(std::make_shared<const Schema>(std::move(schema)), timestamp);
}

void GraphSnapshot::require_unsealed(const char* op) const {
    if (sealed_) {
        throw GraphError(std::string(op) + ": snapshot is sealed");
    }
}

const GraphSnapshot::NodeRec& GraphSnapshot::node_rec(NodeRef v, const char* op) const {
    auto it = node_pos_.find(v.value);
    if (it == node_pos_.end()) {
        throw GraphError(std::string(op) + ": unknown node ref " + std::to_string(v.value));
    }
    return nodes_[it->second];
}

NodeRef GraphSnapshot::add_node(std::string_view kind, std::span<const double> features) {
    require_unsealed("add_node");
    const int type = schema_->node_type_index(kind);
    if (type < 0) {
        throw GraphError("add_node: unknown node kind '" + std::string(kind) + "'");
    }
    const int want = schema_->node_feature_dim(type);
    if (static_cast<int>(features.size()) != want) {
        throw GraphError("add_node: feature dimension mismatch for kind '" + std::string(kind) +
                         "' (got " + std::to_string(features.size()) + ", want " +
                         std::to_string(want) + ")");
    }
    for (double f : features) {
        if (!std::isfinite(f)) {
            throw GraphError("add_node: non-finite feature value");
        }
    }
    const NodeRef ref{next_node_id_++};
    node_pos_.emplace(ref.value, nodes_.size());
    nodes_.push_back(NodeRec{ref.value, type, {features.begin(), features.end()}});
    in_edges_.emplace_back();
    return ref;
}

EdgeRef GraphSnapshot::add_edge(NodeRef src, NodeRef dst, std::string_view kind,
                                std::span<const double> features) {
    require_unsealed("add_edge");
    const int type = schema_->edge_type_index(kind);
    if (type < 0) {
        throw GraphError("add_edge: unknown edge kind '" + std::string(kind) + "'");
    }
    if (src == dst) {
        throw GraphError("add_edge: self-loop rejected");
    }
    const auto& src_rec = node_rec(src, "add_edge");
    const auto& dst_rec = node_rec(dst, "add_edge");
    const auto& decl = schema_->edge_type(type);
    const auto& src_kind = schema_->node_type(src_rec.type).name;
    const auto& dst_kind = schema_->node_type(dst_rec.type).name;
    if (src_kind != decl.src_kind || dst_kind != decl.dst_kind) {
        throw GraphError("add_edge: endpoint kinds (" + src_kind + " -> " + dst_kind +
                         ") do not match declaration of '" + decl.name + "' (" + decl.src_kind +
                         " -> " + decl.dst_kind + ")");
    }
    const int want = decl.feature_dim;
    if (static_cast<int>(features.size()) != want) {
        throw GraphError("add_edge: feature dimension mismatch for kind '" + std::string(kind) +
                         "' (got " + std::to_string(features.size()) + ", want " +
                         std::to_string(want) + ")");
    }
    for (double f : features) {
        if (!std::isfinite(f)) {
            throw GraphError("add_edge: non-finite feature value");
        }
    }
    if (!edge_keys_.insert(edge_key(src.value, dst.value, type)).second) {
        throw GraphError("add_edge: duplicate '" + decl.name + "' edge between the same pair");
    }
    const EdgeRef ref{next_edge_id_++};
    in_edges_[node_pos_.at(dst.value)].push_back(edges_.size());
    edges_.push_back(EdgeRec{ref.value, src.value, dst.value, type,
                             {features.begin(), features.end()}});
    return ref;
}

std::vector<std::pair<NodeRef, EdgeRef>>
GraphSnapshot::in_neighbors(NodeRef v, std::optional<std::string_view> kind) const {
    const auto it = node_pos_.find(v.value);
    if (it == node_pos_.end()) {
        throw GraphError("in_neighbors: unknown node ref " + std::to_string(v.value));
    }
    int want_type = -1;
    if (kind) {
        want_type = schema_->edge_type_index(*kind);
        if (want_type < 0) {
            throw GraphError("in_neighbors: unknown edge kind '" + std::string(*kind) + "'");
        }
    }
    std::vector<std::pair<NodeRef, EdgeRef>> result;
    for (std::size_t e : in_edges_[it->second]) {
        const auto& rec = edges_[e];
        if (want_type >= 0 && rec.type != want_type) {
            continue;
        }
        result.emplace_back(NodeRef{rec.src}, EdgeRef{rec.id});
    }
    return result;
}

GraphSnapshot& GraphSnapshot::seal() {
    sealed_ = true;
    return *this;
}

NodeView GraphSnapshot::node_at(std::size_t index) const {
    const auto& rec = nodes_.at(index);
    return NodeView{NodeRef{rec.id}, rec.type, rec.features};
}

EdgeView GraphSnapshot::edge_at(std::size_t index) const {
    const auto& rec = edges_.at(index);
    return EdgeView{EdgeRef{rec.id}, NodeRef{rec.src}, NodeRef{rec.dst}, rec.type, rec.features};
}

NodeView GraphSnapshot::node(NodeRef v) const {
    const auto& rec = node_rec(v, "node");
    return NodeView{NodeRef{rec.id}, rec.type, rec.features};
}

std::size_t GraphSnapshot::index_of(NodeRef v) const {
    auto it = node_pos_.find(v.value);
    if (it == node_pos_.end()) {
        throw GraphError("index_of: unknown node ref " + std::to_string(v.value));
    }
    return it->second;
}

int GraphSnapshot::node_type_of(NodeRef v) const { return node_rec(v, "node_type_of").type; }

std::span<const double> GraphSnapshot::node_features(NodeRef v) const {
    return node_rec(v, "node_features").features;
}

const std::vector<std::size_t>& GraphSnapshot::in_edge_indices(NodeRef v) const {
    return in_edges_[index_of(v)];
}

} // namespace gsim::graph

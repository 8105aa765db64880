#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gsim/graph/schema.hpp"

namespace gsim::graph {

/// Opaque node handle, stable within one snapshot lineage. Never reused.
struct NodeRef {
    std::uint64_t value = UINT64_MAX;

    friend bool operator==(NodeRef a, NodeRef b) { return a.value == b.value; }
    friend bool operator!=(NodeRef a, NodeRef b) { return a.value != b.value; }
    friend bool operator<(NodeRef a, NodeRef b) { return a.value < b.value; }
};

struct EdgeRef {
    std::uint64_t value = UINT64_MAX;

    friend bool operator==(EdgeRef a, EdgeRef b) { return a.value == b.value; }
    friend bool operator!=(EdgeRef a, EdgeRef b) { return a.value != b.value; }
    friend bool operator<(EdgeRef a, EdgeRef b) { return a.value < b.value; }
};

struct NodeRefHash {
    std::size_t operator()(NodeRef r) const { return std::hash<std::uint64_t>{}(r.value); }
};

struct NodeView {
    NodeRef ref;
    int type = -1;
    std::span<const double> features;
};

struct EdgeView {
    EdgeRef ref;
    NodeRef src;
    NodeRef dst;
    int type = -1;
    std::span<const double> features;
};

/**
 * One timestamped static graph in the simulated sequence: typed nodes and
 * directed typed edges, each carrying a feature vector whose length is fixed
 * by the schema.
 *
 * A snapshot starts unsealed (single writer, no concurrent readers). seal()
 * freezes it; a sealed snapshot is an immutable value and may be read from
 * any number of threads. All iteration orders are insertion order, so
 * downstream numeric code is reproducible.
 *
 * Enforced at insertion: feature lengths match the type's declared dimension,
 * endpoints exist and match the edge type's declared kinds, feature scalars
 * are finite, no self-loops, and at most one edge of a given type per ordered
 * node pair.
 */
class GraphSnapshot {
public:
    GraphSnapshot(std::shared_ptr<const Schema> schema, std::int64_t timestamp);

    /// Convenience constructor validating and taking ownership of a schema.
    static GraphSnapshot create(Schema schema, std::int64_t timestamp);

    NodeRef add_node(std::string_view kind, std::span<const double> features);
    EdgeRef add_edge(NodeRef src, NodeRef dst, std::string_view kind,
                     std::span<const double> features);

    /// All (source, edge) pairs with an edge into `v`, in edge insertion
    /// order, optionally restricted to one edge kind.
    std::vector<std::pair<NodeRef, EdgeRef>>
    in_neighbors(NodeRef v, std::optional<std::string_view> kind = std::nullopt) const;

    /// Marks the snapshot immutable. Idempotent.
    GraphSnapshot& seal();
    bool sealed() const { return sealed_; }

    std::int64_t timestamp() const { return timestamp_; }
    const Schema& schema() const { return *schema_; }
    const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    bool has_node(NodeRef v) const { return node_pos_.count(v.value) != 0; }

    NodeView node_at(std::size_t index) const;
    EdgeView edge_at(std::size_t index) const;
    NodeView node(NodeRef v) const;
    std::size_t index_of(NodeRef v) const;

    int node_type_of(NodeRef v) const;
    std::span<const double> node_features(NodeRef v) const;

    /// Edge indices (into edge_at order) of edges whose target is `v`.
    const std::vector<std::size_t>& in_edge_indices(NodeRef v) const;

private:
    struct NodeRec {
        std::uint64_t id;
        int type;
        std::vector<double> features;
    };
    struct EdgeRec {
        std::uint64_t id;
        std::uint64_t src;
        std::uint64_t dst;
        int type;
        std::vector<double> features;
    };

    void require_unsealed(const char* op) const;
    const NodeRec& node_rec(NodeRef v, const char* op) const;

    std::shared_ptr<const Schema> schema_;
    std::int64_t timestamp_ = 0;
    bool sealed_ = false;

    std::vector<NodeRec> nodes_;
    std::vector<EdgeRec> edges_;
    std::unordered_map<std::uint64_t, std::size_t> node_pos_;
    std::vector<std::vector<std::size_t>> in_edges_;   // parallel to nodes_
    std::unordered_set<std::uint64_t> edge_keys_;      // (src, dst, type) dedup
    std::uint64_t next_node_id_ = 0;
    std::uint64_t next_edge_id_ = 0;
};

} // namespace gsim::graph

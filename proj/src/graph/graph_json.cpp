#include "gsim/graph/graph_json.hpp"

#include <json.hpp>

namespace gsim::graph {

using nlohmann::json;

nlohmann::json graph_to_json(const GraphSnapshot& g) {
    json doc;
    json node_types = json::array();
    for (const auto& nt : g.schema().node_types()) {
        node_types.push_back({{"name", nt.name}, {"feature_dim", nt.feature_dim}});
    }
    json edge_types = json::array();
    for (const auto& et : g.schema().edge_types()) {
        edge_types.push_back({{"name", et.name},
                              {"src_kind", et.src_kind},
                              {"dst_kind", et.dst_kind},
                              {"feature_dim", et.feature_dim}});
    }
    doc["schema"] = {{"node_types", node_types}, {"edge_types", edge_types}};
    doc["timestamp"] = g.timestamp();

    json nodes = json::array();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto v = g.node_at(i);
        nodes.push_back({{"id", v.ref.value},
                         {"type", g.schema().node_type(v.type).name},
                         {"features", std::vector<double>(v.features.begin(), v.features.end())}});
    }
    doc["nodes"] = std::move(nodes);

    json edges = json::array();
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const auto e = g.edge_at(i);
        edges.push_back({{"id", e.ref.value},
                         {"src", e.src.value},
                         {"dst", e.dst.value},
                         {"type", g.schema().edge_type(e.type).name},
                         {"features", std::vector<double>(e.features.begin(), e.features.end())}});
    }
    doc["edges"] = std::move(edges);
    return doc;
}

std::string serialize_graph(const GraphSnapshot& g) { return graph_to_json(g).dump(2) + "\n"; }

GraphSnapshot graph_from_json(const nlohmann::json& doc) {
    try {
        std::vector<NodeTypeDef> node_types;
        for (const auto& nt : doc.at("schema").at("node_types")) {
            node_types.push_back({nt.at("name").get<std::string>(), nt.at("feature_dim").get<int>()});
        }
        std::vector<EdgeTypeDef> edge_types;
        for (const auto& et : doc.at("schema").at("edge_types")) {
            edge_types.push_back({et.at("name").get<std::string>(),
                                  et.at("src_kind").get<std::string>(),
                                  et.at("dst_kind").get<std::string>(),
                                  et.at("feature_dim").get<int>()});
        }
        GraphSnapshot g = GraphSnapshot::create(Schema(std::move(node_types), std::move(edge_types)),
                                                doc.at("timestamp").get<std::int64_t>());

        // Ids in the file must match the refs assigned on rebuild (dense,
        // insertion-ordered), otherwise edge endpoints would silently shift.
        std::uint64_t expect_node = 0;
        for (const auto& n : doc.at("nodes")) {
            const auto feats = n.at("features").get<std::vector<double>>();
            const NodeRef ref = g.add_node(n.at("type").get<std::string>(), feats);
            if (ref.value != n.at("id").get<std::uint64_t>() || ref.value != expect_node++) {
                throw GraphError("parse_graph: node ids are not dense insertion-ordered");
            }
        }
        std::uint64_t expect_edge = 0;
        for (const auto& e : doc.at("edges")) {
            const auto feats = e.at("features").get<std::vector<double>>();
            const EdgeRef ref = g.add_edge(NodeRef{e.at("src").get<std::uint64_t>()},
                                           NodeRef{e.at("dst").get<std::uint64_t>()},
                                           e.at("type").get<std::string>(), feats);
            if (ref.value != e.at("id").get<std::uint64_t>() || ref.value != expect_edge++) {
                throw GraphError("parse_graph: edge ids are not dense insertion-ordered");
            }
        }
        g.seal();
        return g;
    } catch (const json::exception& e) {
        throw GraphError(std::string("parse_graph: malformed document: ") + e.what());
    }
}

GraphSnapshot parse_graph(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw GraphError(std::string("parse_graph: invalid JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

} // namespace gsim::graph

#pragma once

#include <string>

#include <json.hpp>

#include "gsim/graph/snapshot.hpp"

namespace gsim::graph {

/// Graph file format: a single JSON document holding the schema, the
/// timestamp, and the node/edge lists in insertion order. Numbers are written
/// with the shortest representation that round-trips, so
/// serialize -> parse -> serialize is byte-identical.
std::string serialize_graph(const GraphSnapshot& g);

/// Parses a graph document. The result is sealed.
GraphSnapshot parse_graph(const std::string& text);

/// JSON-object forms, for embedding graphs inside other documents.
nlohmann::json graph_to_json(const GraphSnapshot& g);
GraphSnapshot graph_from_json(const nlohmann::json& doc);

} // namespace gsim::graph

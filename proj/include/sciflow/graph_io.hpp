#pragma once

#include <string>
#include <string_view>

#include "sciflow/graph.hpp"
#include "sciflow/json_io.hpp"

namespace sciflow {

inline constexpr std::string_view kGraphSchema = "sciflow-graph/1";

/// Canonical graph document: fixed key order, arrays sorted by id, numbers
/// rounded to 6 decimals. Equal graphs (as id-keyed sets) give equal bytes.
std::string serialize_graph(const DiagramGraph& g);

/// Inverse of serialize_graph. Throws ParseError (with location) on malformed
/// input, duplicate ids or any other invariant violation, and VersionError on
/// a schema_version mismatch. The result is in canonical order.
DiagramGraph parse_graph_document(std::string_view text);

ordered_json graph_to_json(const DiagramGraph& g);
DiagramGraph graph_from_json(const json& doc, const std::string& path = "");

ordered_json node_to_json(const Node& n);
ordered_json edge_to_json(const Edge& e);
Node node_from_json(const json& v, const std::string& path);
Edge edge_from_json(const json& v, const std::string& path);
BBox bbox_from_json(const json& v, const std::string& path);
ordered_json bbox_to_json(const BBox& b);
LayoutMeta layout_from_json(const json& v, const std::string& path);
ordered_json layout_to_json(const LayoutMeta& l);

DiagramGraph load_graph_file(const std::string& path);

}  // namespace sciflow

#include "sciflow/graph_io.hpp"

#include <set>

namespace sciflow {

using namespace jsonio;

ordered_json bbox_to_json(const BBox& b) {
  return ordered_json::array({quantize(b.x0), quantize(b.y0), quantize(b.x1), quantize(b.y1)});
}

BBox bbox_from_json(const json& v, const std::string& path) {
  require_array(v, path);
  if (v.size() != 4) throw ParseError(path, "bbox must have 4 numbers [x0, y0, x1, y1]");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw ParseError(child(path, i), "expected a number");
    c[i] = v[i].get<double>();
  }
  BBox b{c[0], c[1], c[2], c[3]};
  if (!b.normalized()) throw ParseError(path, "bbox must satisfy 0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1");
  return b;
}

ordered_json node_to_json(const Node& n) {
  ordered_json j;
  j["id"] = n.id;
  j["label"] = n.label;
  j["node_type"] = std::string(to_string(n.node_type));
  j["bbox"] = n.bbox ? bbox_to_json(*n.bbox) : ordered_json(nullptr);
  j["human_added"] = n.human_added;
  return j;
}

ordered_json edge_to_json(const Edge& e) {
  ordered_json j;
  j["id"] = e.id;
  j["source"] = e.source;
  j["target"] = e.target;
  j["directed"] = e.directed;
  j["human_added"] = e.human_added;
  return j;
}

Node node_from_json(const json& v, const std::string& path) {
  require_object(v, path);
  Node n;
  n.id = get_string(v, "id", path);
  n.label = get_string(v, "label", path);
  const auto type = get_string(v, "node_type", path);
  auto t = parse_node_type(type);
  if (!t) throw ParseError(child(path, "node_type"), "unknown node_type '" + type + "'");
  n.node_type = *t;
  if (auto it = v.find("bbox"); it != v.end() && !it->is_null()) n.bbox = bbox_from_json(*it, child(path, "bbox"));
  n.human_added = get_bool_or(v, "human_added", false, path);
  return n;
}

Edge edge_from_json(const json& v, const std::string& path) {
  require_object(v, path);
  Edge e;
  e.id = get_string(v, "id", path);
  e.source = get_string(v, "source", path);
  e.target = get_string(v, "target", path);
  e.directed = get_bool_or(v, "directed", true, path);
  if (!e.directed) throw ParseError(child(path, "directed"), "undirected edges are not supported");
  e.human_added = get_bool_or(v, "human_added", false, path);
  return e;
}

ordered_json layout_to_json(const LayoutMeta& l) {
  ordered_json j;
  j["flow_direction"] = std::string(to_string(l.flow_direction));
  j["figure_size"] =
      l.figure_size ? ordered_json::array({l.figure_size->width, l.figure_size->height}) : ordered_json(nullptr);
  return j;
}

LayoutMeta layout_from_json(const json& v, const std::string& path) {
  require_object(v, path);
  LayoutMeta l;
  const auto dir = get_string(v, "flow_direction", path);
  auto d = parse_flow_direction(dir);
  if (!d) throw ParseError(child(path, "flow_direction"), "unknown flow_direction '" + dir + "'");
  l.flow_direction = *d;
  if (auto it = v.find("figure_size"); it != v.end() && !it->is_null()) {
    const auto p = child(path, "figure_size");
    require_array(*it, p);
    if (it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer())
      throw ParseError(p, "figure_size must be [width, height] in pixels");
    l.figure_size = FigureSize{(*it)[0].get<int>(), (*it)[1].get<int>()};
    if (l.figure_size->width <= 0 || l.figure_size->height <= 0) throw ParseError(p, "figure_size must be positive");
  }
  return l;
}

ordered_json graph_to_json(const DiagramGraph& input) {
  const DiagramGraph g = canonicalized(input);
  ordered_json doc;
  doc["schema_version"] = std::string(kGraphSchema);
  doc["graph_id"] = g.graph_id;
  doc["provenance"] = std::string(to_string(g.provenance));
  doc["nodes"] = ordered_json::array();
  for (const auto& n : g.nodes) doc["nodes"].push_back(node_to_json(n));
  doc["edges"] = ordered_json::array();
  for (const auto& e : g.edges) doc["edges"].push_back(edge_to_json(e));
  doc["groups"] = ordered_json::array();
  for (const auto& grp : g.groups) {
    ordered_json j;
    j["id"] = grp.id;
    j["label"] = grp.label;
    j["members"] = grp.members;
    j["parent"] = grp.parent ? ordered_json(*grp.parent) : ordered_json(nullptr);
    doc["groups"].push_back(std::move(j));
  }
  doc["layout"] = g.layout ? layout_to_json(*g.layout) : ordered_json(nullptr);
  return doc;
}

std::string serialize_graph(const DiagramGraph& g) { return dump_document(graph_to_json(g)); }

DiagramGraph graph_from_json(const json& doc, const std::string& path) {
  require_object(doc, path);
  if (path.empty()) require_schema(doc, kGraphSchema);
  DiagramGraph g;
  g.graph_id = get_string(doc, "graph_id", path);
  const auto prov = get_string(doc, "provenance", path);
  auto p = parse_provenance(prov);
  if (!p) throw ParseError(child(path, "provenance"), "unknown provenance '" + prov + "'");
  g.provenance = *p;

  std::set<std::string> seen;
  const auto nodes_path = child(path, "nodes");
  const auto& nodes = require_array(require(doc, "nodes", path), nodes_path);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto n = node_from_json(nodes[i], child(nodes_path, i));
    if (!seen.insert(n.id).second)
      throw ParseError(child(child(nodes_path, i), "id"), "duplicate node id '" + n.id + "'");
    g.nodes.push_back(std::move(n));
  }

  seen.clear();
  const auto edges_path = child(path, "edges");
  const auto& edges = require_array(require(doc, "edges", path), edges_path);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto e = edge_from_json(edges[i], child(edges_path, i));
    if (!seen.insert(e.id).second)
      throw ParseError(child(child(edges_path, i), "id"), "duplicate edge id '" + e.id + "'");
    g.edges.push_back(std::move(e));
  }

  seen.clear();
  const auto groups_path = child(path, "groups");
  const auto& groups = require_array(require(doc, "groups", path), groups_path);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto gp = child(groups_path, i);
    Group grp;
    grp.id = get_string(groups[i], "id", gp);
    grp.label = get_string(groups[i], "label", gp);
    const auto& members = require_array(require(groups[i], "members", gp), child(gp, "members"));
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!members[k].is_string()) throw ParseError(child(child(gp, "members"), k), "expected a string");
      grp.members.push_back(members[k].get<std::string>());
    }
    grp.parent = get_optional_string(groups[i], "parent", gp);
    if (!seen.insert(grp.id).second) throw ParseError(child(gp, "id"), "duplicate group id '" + grp.id + "'");
    g.groups.push_back(std::move(grp));
  }

  if (auto it = doc.find("layout"); it != doc.end() && !it->is_null())
    g.layout = layout_from_json(*it, child(path, "layout"));

  const auto report = validate_graph(g);
  if (!report.ok()) throw ParseError(path.empty() ? "/" : path, report.violations.front().message);
  return canonicalized(std::move(g));
}

DiagramGraph parse_graph_document(std::string_view text) { return graph_from_json(parse_json_text(text)); }

DiagramGraph load_graph_file(const std::string& path) { return parse_graph_document(read_text_file(path)); }

}  // namespace sciflow

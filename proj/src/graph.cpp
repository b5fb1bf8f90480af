#include "sciflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "sciflow/error.hpp"

namespace sciflow {

std::string_view to_string(NodeType t) noexcept {
  switch (t) {
    case NodeType::module: return "module";
    case NodeType::data: return "data";
    case NodeType::operation: return "operation";
    case NodeType::annotation: return "annotation";
    case NodeType::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::canonical: return "canonical";
    case Provenance::predicted: return "predicted";
    case Provenance::verified: return "verified";
  }
  return "canonical";
}

std::string_view to_string(FlowDirection d) noexcept {
  switch (d) {
    case FlowDirection::left_right: return "left_right";
    case FlowDirection::top_down: return "top_down";
    case FlowDirection::mixed: return "mixed";
    case FlowDirection::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Difficulty d) noexcept {
  switch (d) {
    case Difficulty::easy: return "Easy";
    case Difficulty::medium: return "Medium";
    case Difficulty::hard: return "Hard";
  }
  return "Medium";
}

std::optional<NodeType> parse_node_type(std::string_view s) noexcept {
  for (auto t : {NodeType::module, NodeType::data, NodeType::operation, NodeType::annotation, NodeType::unknown})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) noexcept {
  for (auto p : {Provenance::canonical, Provenance::predicted, Provenance::verified})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::optional<FlowDirection> parse_flow_direction(std::string_view s) noexcept {
  for (auto d : {FlowDirection::left_right, FlowDirection::top_down, FlowDirection::mixed, FlowDirection::unknown})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept {
  for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double distance_to(const BBox& box, double x, double y) noexcept {
  const double dx = std::max({box.x0 - x, 0.0, x - box.x1});
  const double dy = std::max({box.y0 - y, 0.0, y - box.y1});
  return std::hypot(dx, dy);
}

const Node* DiagramGraph::find_node(std::string_view id) const noexcept {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const Edge* DiagramGraph::find_edge(std::string_view id) const noexcept {
  auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.id == id; });
  return it == edges.end() ? nullptr : &*it;
}

DiagramGraph canonicalized(DiagramGraph g) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::stable_sort(g.nodes.begin(), g.nodes.end(), by_id);
  std::stable_sort(g.edges.begin(), g.edges.end(), by_id);
  std::stable_sort(g.groups.begin(), g.groups.end(), by_id);
  for (auto& grp : g.groups) std::sort(grp.members.begin(), grp.members.end());
  return g;
}

ValidationReport validate_graph(const DiagramGraph& g) {
  ValidationReport report;
  auto violation = [&](const std::string& id, std::string msg) {
    report.violations.push_back({id, std::move(msg)});
  };

  std::set<std::string> node_ids;
  for (const auto& n : g.nodes) {
    if (n.id.empty()) violation(n.id, "node has empty id");
    if (!node_ids.insert(n.id).second) violation(n.id, "duplicate node id '" + n.id + "'");
    if (n.bbox && !n.bbox->normalized())
      violation(n.id, "bbox of node '" + n.id + "' is outside the normalized unit square or inverted");
  }

  std::set<std::string> edge_ids;
  for (const auto& e : g.edges) {
    if (e.id.empty()) violation(e.id, "edge has empty id");
    if (!edge_ids.insert(e.id).second) violation(e.id, "duplicate edge id '" + e.id + "'");
    if (!e.directed) violation(e.id, "edge '" + e.id + "' is undirected");
    if (!node_ids.count(e.source))
      violation(e.source, "edge '" + e.id + "' references missing source node '" + e.source + "'");
    if (!node_ids.count(e.target))
      violation(e.target, "edge '" + e.id + "' references missing target node '" + e.target + "'");
    if (e.source == e.target)
      report.warnings.push_back({e.id, "edge '" + e.id + "' is a self-loop on '" + e.source + "'"});
  }

  std::map<std::string, std::optional<std::string>> parents;
  for (const auto& grp : g.groups) {
    if (grp.id.empty()) violation(grp.id, "group has empty id");
    if (parents.count(grp.id)) violation(grp.id, "duplicate group id '" + grp.id + "'");
    parents[grp.id] = grp.parent;
    if (grp.members.empty()) violation(grp.id, "group '" + grp.id + "' has no members");
    for (const auto& m : grp.members)
      if (!node_ids.count(m)) violation(m, "group '" + grp.id + "' references missing node '" + m + "'");
  }
  for (const auto& [id, parent] : parents) {
    if (parent && !parents.count(*parent)) {
      violation(id, "group '" + id + "' has missing parent '" + *parent + "'");
      continue;
    }
    // Walk the parent chain; more steps than groups means a cycle.
    std::optional<std::string> cur = parent;
    std::size_t steps = 0;
    while (cur && parents.count(*cur) && steps <= parents.size()) {
      if (*cur == id) break;
      cur = parents.at(*cur);
      ++steps;
    }
    if (cur && *cur == id) violation(id, "group nesting cycle through '" + id + "'");
  }
  return report;
}

GraphStats graph_stats(const DiagramGraph& g) {
  GraphStats s;
  s.node_count = g.nodes.size();
  s.edge_count = g.edges.size();
  s.branching_density = static_cast<double>(s.edge_count) / static_cast<double>(std::max<std::size_t>(s.node_count, 1));

  std::unordered_map<std::string, std::size_t> in, out;
  std::unordered_map<std::string, std::string> next;
  for (const auto& e : g.edges) {
    s.max_out_degree = std::max(s.max_out_degree, ++out[e.source]);
    s.max_in_degree = std::max(s.max_in_degree, ++in[e.target]);
    next[e.source] = e.target;
  }

  if (s.edge_count == 0) {
    s.is_linear = true;
  } else if (s.max_in_degree > 1 || s.max_out_degree > 1) {
    s.is_linear = false;
  } else {
    // In/out degrees <= 1: the edge set is a union of simple paths and cycles.
    // Linear iff there is exactly one path and it consumes every edge.
    std::vector<std::string> starts;
    for (const auto& [id, d] : out)
      if (d > 0 && !in.count(id)) starts.push_back(id);
    if (starts.size() != 1) {
      s.is_linear = false;
    } else {
      std::size_t walked = 0;
      std::string cur = starts.front();
      while (next.count(cur) && walked <= s.edge_count) {
        cur = next.at(cur);
        ++walked;
      }
      s.is_linear = walked == s.edge_count;
    }
  }

  std::map<std::string, const Group*> groups;
  for (const auto& grp : g.groups) groups[grp.id] = &grp;
  for (const auto& grp : g.groups) {
    std::size_t depth = 1;
    const Group* cur = &grp;
    while (cur->parent && groups.count(*cur->parent) && depth <= groups.size()) {
      cur = groups.at(*cur->parent);
      ++depth;
    }
    s.group_depth = std::max(s.group_depth, depth);
  }
  return s;
}

void DifficultyConfig::validate() const {
  if (easy_max_nodes >= hard_min_nodes)
    throw ConfigError("difficulty cut points must be strictly increasing (easy_max_nodes < hard_min_nodes)");
  if (!std::isfinite(hard_min_branching) || hard_min_branching <= 0)
    throw ConfigError("difficulty branching cutoff must be a positive finite number");
}

Difficulty difficulty_level(const GraphStats& stats, const DifficultyConfig& config) {
  config.validate();
  if (stats.node_count >= config.hard_min_nodes || stats.branching_density >= config.hard_min_branching)
    return Difficulty::hard;
  if (stats.node_count <= config.easy_max_nodes && stats.is_linear) return Difficulty::easy;
  return Difficulty::medium;
}

}  // namespace sciflow

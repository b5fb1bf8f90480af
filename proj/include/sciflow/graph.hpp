#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sciflow {

enum class NodeType { module, data, operation, annotation, unknown };
enum class Provenance { canonical, predicted, verified };
enum class FlowDirection { left_right, top_down, mixed, unknown };

std::string_view to_string(NodeType t) noexcept;
std::string_view to_string(Provenance p) noexcept;
std::string_view to_string(FlowDirection d) noexcept;
std::optional<NodeType> parse_node_type(std::string_view s) noexcept;
std::optional<Provenance> parse_provenance(std::string_view s) noexcept;
std::optional<FlowDirection> parse_flow_direction(std::string_view s) noexcept;

/// Axis-aligned rectangle in normalized figure coordinates.
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double area() const noexcept { return width() * height(); }
  double center_x() const noexcept { return 0.5 * (x0 + x1); }
  double center_y() const noexcept { return 0.5 * (y0 + y1); }
  bool contains(double x, double y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool normalized() const noexcept {
    return 0 <= x0 && x0 <= x1 && x1 <= 1 && 0 <= y0 && y0 <= y1 && y1 <= 1;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

double iou(const BBox& a, const BBox& b) noexcept;
/// Euclidean distance from a point to the rectangle (0 when inside).
double distance_to(const BBox& box, double x, double y) noexcept;

struct Node {
  std::string id;
  std::string label;
  NodeType node_type = NodeType::unknown;
  std::optional<BBox> bbox;
  bool human_added = false;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string id;
  std::string source;
  std::string target;
  bool directed = true;
  bool human_added = false;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Group {
  std::string id;
  std::string label;
  std::vector<std::string> members;
  std::optional<std::string> parent;

  friend bool operator==(const Group&, const Group&) = default;
};

struct FigureSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const FigureSize&, const FigureSize&) = default;
};

struct LayoutMeta {
  FlowDirection flow_direction = FlowDirection::unknown;
  std::optional<FigureSize> figure_size;

  friend bool operator==(const LayoutMeta&, const LayoutMeta&) = default;
};

struct DiagramGraph {
  std::string graph_id;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<Group> groups;
  std::optional<LayoutMeta> layout;
  Provenance provenance = Provenance::canonical;

  const Node* find_node(std::string_view id) const noexcept;
  const Edge* find_edge(std::string_view id) const noexcept;

  friend bool operator==(const DiagramGraph&, const DiagramGraph&) = default;
};

/// Returns a copy with nodes, edges, groups and group members sorted by id.
/// Two graphs that are equal as id-keyed sets have identical canonical forms.
DiagramGraph canonicalized(DiagramGraph g);

struct Violation {
  std::string element_id;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;  // self-loops

  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_graph(const DiagramGraph& g);

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t max_out_degree = 0;
  std::size_t max_in_degree = 0;
  double branching_density = 0;  // edge_count / max(node_count, 1)
  bool is_linear = true;
  std::size_t group_depth = 0;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

GraphStats graph_stats(const DiagramGraph& g);

enum class Difficulty { easy, medium, hard };

std::string_view to_string(Difficulty d) noexcept;
std::optional<Difficulty> parse_difficulty(std::string_view s) noexcept;

/// Easy: node_count <= easy_max_nodes and linear.
/// Hard: node_count >= hard_min_nodes or branching_density >= hard_min_branching.
struct DifficultyConfig {
  std::size_t easy_max_nodes = 8;
  std::size_t hard_min_nodes = 18;
  double hard_min_branching = 1.5;

  /// Throws ConfigError unless easy_max_nodes < hard_min_nodes and the
  /// branching cutoff is positive and finite.
  void validate() const;

  friend bool operator==(const DifficultyConfig&, const DifficultyConfig&) = default;
};

Difficulty difficulty_level(const GraphStats& stats, const DifficultyConfig& config = {});

}  // namespace sciflow

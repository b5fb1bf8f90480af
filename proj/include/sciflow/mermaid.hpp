#pragma once

// Mermaid flowchart subset used as the topology intermediate representation.
//
//   flowchart TD|LR
//   id[label]   id(label)   id{label}   id          (label may be "quoted")
//   a --> b     a -.-> b                           (endpoints may declare)
//   subgraph <label> ... end                       (one nesting level)
//   %% comment
//
// Anything else is rejected with a located diagnostic rather than skipped.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

enum class ShapeHint { rect, rounded, diamond, none };
enum class EdgeStyle { solid, dashed };
enum class IrDirection { top_down, left_right };

std::string_view to_string(ShapeHint s) noexcept;
std::string_view to_string(EdgeStyle s) noexcept;
std::optional<ShapeHint> parse_shape_hint(std::string_view s) noexcept;
std::optional<EdgeStyle> parse_edge_style(std::string_view s) noexcept;

struct IrNode {
  std::string id;
  std::string label;  // equals id for bare (shape none) nodes
  ShapeHint shape = ShapeHint::none;

  friend bool operator==(const IrNode&, const IrNode&) = default;
};

struct IrEdge {
  std::string source;
  std::string target;
  EdgeStyle style = EdgeStyle::solid;

  friend bool operator==(const IrEdge&, const IrEdge&) = default;
};

struct IrSubgraph {
  std::string label;
  std::vector<std::string> members;  // first-appearance order inside the block

  friend bool operator==(const IrSubgraph&, const IrSubgraph&) = default;
};

struct IrGraph {
  IrDirection direction = IrDirection::top_down;
  std::vector<IrNode> nodes;  // first-appearance order
  std::vector<IrEdge> edges;
  std::vector<IrSubgraph> subgraphs;

  const IrNode* find(std::string_view id) const noexcept;
};

/// Node declarations compare as an id-keyed set; edges and subgraphs in order.
bool operator==(const IrGraph& a, const IrGraph& b);

/// Throws SyntaxError (`line:col: message`). Unsupported Mermaid constructs
/// produce "unsupported construct: <name>".
IrGraph parse_mermaid(std::string_view text);

/// Writes the subset text for an IrGraph; parse_mermaid(emit_mermaid(ir)) == ir.
std::string emit_mermaid(const IrGraph& ir);

/// Default map: rect -> module, rounded -> data, diamond -> operation, none -> unknown.
struct ShapeTypeMap {
  NodeType rect = NodeType::module;
  NodeType rounded = NodeType::data;
  NodeType diamond = NodeType::operation;
  NodeType none = NodeType::unknown;

  NodeType operator()(ShapeHint s) const noexcept;
};

// ---------------------------------------------------------------------------
// Grounding

/// A perceived node after fusion: concrete id, text and position.
struct GroundedNode {
  std::string node_id;
  std::string label;
  NodeType node_type = NodeType::unknown;
  std::optional<BBox> bbox;
  double confidence = 1.0;

  friend bool operator==(const GroundedNode&, const GroundedNode&) = default;
};

struct GroundingOptions {
  double threshold = 0.6;  // on the rescaled [0, 1] similarity
  Provenance provenance = Provenance::predicted;
  std::string graph_id;
  ShapeTypeMap shape_types;
};

struct GroundingResult {
  DiagramGraph graph;
  /// IR id -> concrete node id, for bound nodes.
  std::vector<std::pair<std::string, std::string>> bindings;
  /// IR nodes with no grounded counterpart (kept as bbox-less nodes).
  std::vector<std::string> unbound_ir_ids;
  /// Grounded nodes the IR never referenced (not part of the graph).
  std::vector<std::string> unclaimed_grounded_ids;
  /// Subgraph labels dropped because they had no members.
  std::vector<std::string> dropped_subgraphs;
};

/// Binds IR nodes to grounded nodes one-to-one, greedily in descending
/// similarity (ties: grounded node_id, then IR id, ascending), keeping only
/// pairs at or above the threshold. Throws ContractError for a threshold
/// outside (0, 1]; provider errors propagate.
GroundingResult ground_ir(const IrGraph& ir, const std::vector<GroundedNode>& grounded,
                          const EmbeddingProvider& embedder, const GroundingOptions& options = {});

}  // namespace sciflow

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

struct MatchConfig {
  double node_threshold = 0.60;  // on the rescaled [0, 1] similarity
  bool allow_reachability = true;
  std::size_t max_path_length = 4;  // edges; reachable paths have length 2..max

  void validate() const;
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  friend bool operator==(const Prf&, const Prf&) = default;
};

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall) noexcept;

/// Counting form shared by every precision/recall in the toolkit:
/// precision = supported / predicted, recall = recovered / reference.
/// Empty reference makes recall 1; empty prediction makes precision 0 unless
/// the reference is empty too, in which case all three are 1.
Prf prf_from_counts(std::size_t supported, std::size_t predicted, std::size_t recovered, std::size_t reference);

struct NodePair {
  std::string pred_id;
  std::string ref_id;
  double similarity = 0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

struct NodeMatching {
  std::vector<NodePair> pairs;  // sorted by (pred_id, ref_id)
  std::set<std::string> recovered_ref;
  std::set<std::string> supported_pred;
  double threshold_used = 0;

  /// Reference ids matched to a predicted node (ascending).
  std::vector<std::string> refs_for(std::string_view pred_id) const;
};

enum class EdgeVerdictKind { exact, reachable, wrong_direction, unsupported };

std::string_view to_string(EdgeVerdictKind k) noexcept;

struct EdgeVerdict {
  std::string pred_edge_id;
  EdgeVerdictKind verdict = EdgeVerdictKind::unsupported;
  /// For reachable: the chosen reference path (>= 3 nodes).
  std::vector<std::string> witness_path;
  /// Reference edge ids this predicted edge accounts for (exact relations or
  /// the edges along the witness path). Empty unless the verdict is correct.
  std::vector<std::string> covered_ref_edges;

  bool correct() const noexcept {
    return verdict == EdgeVerdictKind::exact || verdict == EdgeVerdictKind::reachable;
  }
};

struct MatchResult {
  Prf node;
  Prf edge;
  double graph_score = 0;
  NodeMatching matching;
  std::vector<EdgeVerdict> edge_verdicts;
  MatchConfig config;
};

/// Rescaled cosine of filtered labels, or the coarse-type fallback.
double node_similarity(const Node& a, const Node& b, const EmbeddingProvider& embedder);

/// Records every (pred, ref) pair at or above the threshold. Many-to-many:
/// no one-to-one constraint. Throws ContractError for a threshold outside (0, 1].
NodeMatching match_nodes(const DiagramGraph& pred, const DiagramGraph& ref, const EmbeddingProvider& embedder,
                         double threshold = 0.60);

Prf score_nodes(const NodeMatching& m, const DiagramGraph& pred, const DiagramGraph& ref);

/// A predicted edge (u, v) is exact when some matched (a, b) is a reference
/// edge; otherwise reachable when a simple directed path a ~> b (a != b) with
/// 2..max_path_length edges exists; otherwise wrong_direction when (b, a)
/// satisfies either rule; otherwise unsupported. The witness is the shortest
/// candidate path, ties broken by lexicographic node-id sequence.
std::vector<EdgeVerdict> match_edges(const DiagramGraph& pred, const DiagramGraph& ref, const NodeMatching& m,
                                     bool allow_reachability = true, std::size_t max_path_length = 4);

/// precision = correct / predicted edges; recall = covered / reference edges.
Prf score_edges(const std::vector<EdgeVerdict>& verdicts, const DiagramGraph& pred, const DiagramGraph& ref);

/// 0.4 * node_f1 + 0.6 * edge_f1. Throws ContractError outside [0, 1].
double graph_score(double node_f1, double edge_f1);

struct GraphWeights {
  double node = 0.4;
  double edge = 0.6;

  void validate() const;
};

double graph_score(double node_f1, double edge_f1, const GraphWeights& weights);

/// Full graph-level evaluation of a predicted graph against a reference.
MatchResult match_graphs(const DiagramGraph& pred, const DiagramGraph& ref, const EmbeddingProvider& embedder,
                         const MatchConfig& config = {}, const GraphWeights& weights = {});

}  // namespace sciflow

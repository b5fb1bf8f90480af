#pragma once

#include <random>
#include <string>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/mermaid.hpp"
#include "sciflow/verify.hpp"

namespace sciflow::testing {

using Rng = std::mt19937_64;

struct RandomGraphSpec {
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 6;
  double edge_prob = 0.3;
  bool self_loops = false;
  bool acyclic = false;  // only i -> j with i < j
  bool groups = false;
  bool bboxes = false;
  /// Labels drawn from this pool; duplicates across nodes allowed. When
  /// empty, every node gets a distinct word label.
  std::vector<std::string> label_pool;
  /// Probability that a node carries a label that filter_label rejects.
  double noise_label_prob = 0.0;
};

/// Valid graph; node ids "v0".."vN", edge ids "e0".., group ids "g0"...
DiagramGraph random_graph(Rng& rng, const RandomGraphSpec& spec);

/// A (pred, ref) pair of small graphs drawing labels from a shared pool of
/// five words plus OCR noise, so that matches, duplicates and type fallbacks
/// all occur.
std::pair<DiagramGraph, DiagramGraph> random_match_pair(Rng& rng, std::size_t max_nodes = 6);

/// Complete directed graph (self-loops included) on the nodes of `g`, for
/// probing every edge verdict.
DiagramGraph all_pairs_probe(const DiagramGraph& g);

/// Node types other than unknown, for nodes that must stay matchable
/// without a label.
NodeType random_known_type(Rng& rng);

/// Random IrGraph satisfying the subset's emit contract.
IrGraph random_ir(Rng& rng, std::size_t max_nodes = 8);

struct EditScript {
  std::vector<Edit> edits;
  DiagramGraph final_graph;  // graph after applying the edits
};

/// Legal edit sequence over `auto_graph`: exclusions, additions with fresh
/// ids, and retractions of earlier additions. Applies them through the
/// library as it goes.
EditScript random_edit_script(Rng& rng, const DiagramGraph& auto_graph, std::size_t count);

/// A word from a fixed vocabulary of diagram-ish labels.
std::string vocabulary_word(std::size_t index);
std::size_t vocabulary_size();

}  // namespace sciflow::testing

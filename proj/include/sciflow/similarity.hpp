#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "sciflow/graph.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

/// What node similarity looks at: a description and a coarse type.
struct Described {
  std::string label;
  NodeType node_type = NodeType::unknown;
};

/// Pairwise similarity in [0, 1] (rows: `left`, cols: `right`).
///
/// When both labels survive filter_label and embed to non-zero vectors the
/// value is the rescaled cosine (cos + 1) / 2 of their embeddings. Otherwise
/// it is 1 when both types are equal and known, else 0. All distinct labels
/// are embedded in one provider call.
Eigen::MatrixXd similarity_matrix(std::span<const Described> left, std::span<const Described> right,
                                  const EmbeddingProvider& embedder);

}  // namespace sciflow

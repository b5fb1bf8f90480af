#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/json_io.hpp"
#include "sciflow/labels.hpp"
#include "sciflow/match.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

// ---------------------------------------------------------------------------
// Structured visual prompt

inline constexpr std::string_view kPromptSchema = "sciflow-prompt/1";

struct PromptComponent {
  std::string name;
  std::string description;
};

struct PromptRelation {
  std::string source;
  std::string target;
};

struct StructuredPrompt {
  std::string prompt_id;
  std::vector<PromptComponent> components;  // names unique
  std::vector<PromptRelation> relations;
  std::string style_constraints;
};

StructuredPrompt parse_prompt_document(std::string_view text);
std::string serialize_prompt(const StructuredPrompt& prompt);

// ---------------------------------------------------------------------------
// Text level

struct TextMatchScore {
  double value = 1.0;
  std::size_t matched = 0;
  std::size_t total = 0;
  bool vacuous = false;  // empty denominator, value forced to 1
};

/// Fraction of prompt components matched (same rule as match_nodes, on the
/// component name) by at least one predicted node whose label survives
/// filter_label. 1 with `vacuous` when the prompt has no components.
TextMatchScore coverage(const DiagramGraph& pred, const StructuredPrompt& prompt, const EmbeddingProvider& embedder,
                        double threshold = 0.60);

/// Fraction of filtered predicted nodes supported by some prompt component.
/// 1 with `vacuous` when no predicted node survives filtering.
TextMatchScore faithfulness(const DiagramGraph& pred, const StructuredPrompt& prompt,
                            const EmbeddingProvider& embedder, double threshold = 0.60);

// ---------------------------------------------------------------------------
// Aggregation

/// Convex weights for one aggregation level. Components in the order of the
/// corresponding scoring function's arguments.
struct LevelWeights {
  std::array<double, 3> w{};

  double apply(const std::array<double, 3>& x) const noexcept { return w[0] * x[0] + w[1] * x[1] + w[2] * x[2]; }
  double sum() const noexcept { return w[0] + w[1] + w[2]; }
  /// Throws ConfigError unless every weight is non-negative and they sum to 1.
  void validate(std::string_view level) const;
};

struct AggregationWeights {
  GraphWeights graph;                    // node F1, edge F1
  LevelWeights text{{0.3, 0.3, 0.4}};    // coverage, faithfulness, alignment
  LevelWeights image{{0.4, 0.4, 0.2}};   // semantic, flow, perceptual
  LevelWeights overall{{0.4, 0.3, 0.3}}; // graph, text, image

  void validate() const;
  bool is_default() const noexcept;
  static AggregationWeights from_json(const json& v, const std::string& path);
  ordered_json to_json() const;
};

/// 0.3 coverage + 0.3 faithfulness + 0.4 alignment; ContractError outside [0, 1].
double text_score(double coverage, double faithfulness, double alignment, const AggregationWeights& w = {});

/// Perceptual distance is clamped at 1 and inverted before weighting:
/// 0.4 semantic + 0.4 flow + 0.2 (1 - min(distance, 1)).
double image_score(double semantic, double flow, double perceptual_distance, const AggregationWeights& w = {});

/// 1 - min(distance, 1). ContractError for a negative or NaN distance.
double perceptual_similarity(double perceptual_distance);

double overall_score(double s_graph, double s_text, double s_image, const AggregationWeights& w = {});

// ---------------------------------------------------------------------------

struct ScoreReport {
  double s_graph = 0, s_text = 0, s_image = 0, s_overall = 0;
  std::optional<Prf> node, edge;  // absent when s_graph was supplied directly
  std::optional<TextMatchScore> coverage, faithfulness;
  std::optional<double> alignment, semantic, flow, perceptual;

  ordered_json to_json() const;
};

}  // namespace sciflow

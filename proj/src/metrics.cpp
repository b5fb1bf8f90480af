#include "sciflow/metrics.hpp"

#include <cmath>
#include <set>

#include "sciflow/error.hpp"
#include "sciflow/similarity.hpp"

namespace sciflow {

using namespace jsonio;

StructuredPrompt parse_prompt_document(std::string_view text) {
  const json doc = parse_json_text(text);
  require_object(doc, "");
  require_schema(doc, kPromptSchema);
  StructuredPrompt p;
  p.prompt_id = get_string(doc, "prompt_id", "");
  std::set<std::string> names;
  const auto& comps = require_array(require(doc, "components", ""), "/components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto path = child("/components", i);
    PromptComponent c;
    c.name = get_string(comps[i], "name", path);
    c.description = get_optional_string(comps[i], "description", path).value_or("");
    if (!names.insert(c.name).second) throw ParseError(child(path, "name"), "duplicate component name '" + c.name + "'");
    p.components.push_back(std::move(c));
  }
  if (auto it = doc.find("relations"); it != doc.end()) {
    require_array(*it, "/relations");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = child("/relations", i);
      p.relations.push_back({get_string((*it)[i], "source", path), get_string((*it)[i], "target", path)});
    }
  }
  p.style_constraints = get_optional_string(doc, "style_constraints", "").value_or("");
  return p;
}

std::string serialize_prompt(const StructuredPrompt& prompt) {
  ordered_json doc;
  doc["schema_version"] = std::string(kPromptSchema);
  doc["prompt_id"] = prompt.prompt_id;
  doc["components"] = ordered_json::array();
  for (const auto& c : prompt.components)
    doc["components"].push_back(ordered_json{{"name", c.name}, {"description", c.description}});
  doc["relations"] = ordered_json::array();
  for (const auto& r : prompt.relations)
    doc["relations"].push_back(ordered_json{{"source", r.source}, {"target", r.target}});
  doc["style_constraints"] = prompt.style_constraints;
  return dump_document(doc);
}

namespace {

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw ContractError("matching threshold must lie in (0, 1]");
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ContractError(std::string(what) + " must lie in [0, 1]");
}

std::vector<Described> filtered_nodes(const DiagramGraph& g) {
  std::vector<Described> out;
  for (const auto& n : g.nodes)
    if (auto label = filter_label(n.label)) out.push_back({*label, n.node_type});
  return out;
}

std::vector<Described> components(const StructuredPrompt& p) {
  std::vector<Described> out;
  for (const auto& c : p.components) out.push_back({c.name, NodeType::unknown});
  return out;
}

TextMatchScore fraction_matched(const std::vector<Described>& rows, const std::vector<Described>& cols,
                                const EmbeddingProvider& embedder, double threshold) {
  TextMatchScore s;
  s.total = rows.size();
  if (rows.empty()) {
    s.vacuous = true;
    s.value = 1.0;
    return s;
  }
  if (!cols.empty()) {
    const Eigen::MatrixXd sim = similarity_matrix(rows, cols, embedder);
    for (Eigen::Index i = 0; i < sim.rows(); ++i)
      if (sim.row(i).maxCoeff() >= threshold) ++s.matched;
  }
  s.value = static_cast<double>(s.matched) / static_cast<double>(s.total);
  return s;
}

}  // namespace

TextMatchScore coverage(const DiagramGraph& pred, const StructuredPrompt& prompt, const EmbeddingProvider& embedder,
                        double threshold) {
  check_threshold(threshold);
  return fraction_matched(components(prompt), filtered_nodes(pred), embedder, threshold);
}

TextMatchScore faithfulness(const DiagramGraph& pred, const StructuredPrompt& prompt,
                            const EmbeddingProvider& embedder, double threshold) {
  check_threshold(threshold);
  return fraction_matched(filtered_nodes(pred), components(prompt), embedder, threshold);
}

void LevelWeights::validate(std::string_view level) const {
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string(level) + " weights must be non-negative");
  if (std::abs(sum() - 1.0) > 1e-9) throw ConfigError(std::string(level) + " weights must sum to 1");
}

void AggregationWeights::validate() const {
  graph.validate();
  text.validate("text");
  image.validate("image");
  overall.validate("overall");
}

bool AggregationWeights::is_default() const noexcept {
  const AggregationWeights d;
  return graph.node == d.graph.node && graph.edge == d.graph.edge && text.w == d.text.w && image.w == d.image.w &&
         overall.w == d.overall.w;
}

AggregationWeights AggregationWeights::from_json(const json& v, const std::string& path) {
  AggregationWeights w;
  require_object(v, path);
  auto level = [&](const char* key, std::initializer_list<const char*> names, LevelWeights& out) {
    auto it = v.find(key);
    if (it == v.end()) return;
    const auto p = child(path, key);
    std::size_t i = 0;
    for (const char* name : names) out.w[i++] = get_number(*it, name, p);
  };
  if (auto it = v.find("graph"); it != v.end()) {
    const auto p = child(path, "graph");
    w.graph.node = get_number(*it, "node_f1", p);
    w.graph.edge = get_number(*it, "edge_f1", p);
  }
  level("text", {"coverage", "faithfulness", "alignment"}, w.text);
  level("image", {"semantic", "flow", "perceptual"}, w.image);
  level("overall", {"graph", "text", "image"}, w.overall);
  w.validate();
  return w;
}

ordered_json AggregationWeights::to_json() const {
  ordered_json j;
  j["graph"] = ordered_json{{"node_f1", graph.node}, {"edge_f1", graph.edge}};
  j["text"] = ordered_json{{"coverage", text.w[0]}, {"faithfulness", text.w[1]}, {"alignment", text.w[2]}};
  j["image"] = ordered_json{{"semantic", image.w[0]}, {"flow", image.w[1]}, {"perceptual", image.w[2]}};
  j["overall"] = ordered_json{{"graph", overall.w[0]}, {"text", overall.w[1]}, {"image", overall.w[2]}};
  return j;
}

double text_score(double cov, double faith, double alignment, const AggregationWeights& w) {
  check_unit(cov, "coverage");
  check_unit(faith, "faithfulness");
  check_unit(alignment, "alignment");
  return w.text.apply({cov, faith, alignment});
}

double perceptual_similarity(double perceptual_distance) {
  if (!(perceptual_distance >= 0.0)) throw ContractError("perceptual distance must be non-negative");
  return 1.0 - std::min(perceptual_distance, 1.0);
}

double image_score(double semantic, double flow, double perceptual_distance, const AggregationWeights& w) {
  check_unit(semantic, "semantic consistency");
  check_unit(flow, "flow consistency");
  return w.image.apply({semantic, flow, perceptual_similarity(perceptual_distance)});
}

double overall_score(double s_graph, double s_text, double s_image, const AggregationWeights& w) {
  check_unit(s_graph, "graph-level score");
  check_unit(s_text, "text-level score");
  check_unit(s_image, "image-level score");
  return w.overall.apply({s_graph, s_text, s_image});
}

namespace {

ordered_json prf_json(const Prf& p) {
  return ordered_json{{"precision", quantize(p.precision)}, {"recall", quantize(p.recall)}, {"f1", quantize(p.f1)}};
}

ordered_json ratio_json(const TextMatchScore& s) {
  return ordered_json{
      {"value", quantize(s.value)}, {"matched", s.matched}, {"total", s.total}, {"vacuous", s.vacuous}};
}

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(quantize(*v)) : ordered_json(nullptr); }

}  // namespace

ordered_json ScoreReport::to_json() const {
  ordered_json j;
  j["s_graph"] = quantize(s_graph);
  j["s_text"] = quantize(s_text);
  j["s_image"] = quantize(s_image);
  j["s_overall"] = quantize(s_overall);
  j["node"] = node ? prf_json(*node) : ordered_json(nullptr);
  j["edge"] = edge ? prf_json(*edge) : ordered_json(nullptr);
  j["coverage"] = coverage ? ratio_json(*coverage) : ordered_json(nullptr);
  j["faithfulness"] = faithfulness ? ratio_json(*faithfulness) : ordered_json(nullptr);
  j["alignment"] = opt(alignment);
  j["semantic"] = opt(semantic);
  j["flow"] = opt(flow);
  j["perceptual"] = opt(perceptual);
  return j;
}

}  // namespace sciflow

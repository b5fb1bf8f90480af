#include "sciflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <tuple>

#include "sciflow/error.hpp"
#include "sciflow/json_io.hpp"

namespace sciflow {

std::string_view to_string(Agent a) noexcept {
  switch (a) {
    case Agent::environment_curator: return "environment_curator";
    case Agent::shape_hunter: return "shape_hunter";
    case Agent::text_spotter: return "text_spotter";
  }
  return "shape_hunter";
}

std::optional<Agent> parse_agent(std::string_view s) noexcept {
  for (Agent a : {Agent::environment_curator, Agent::shape_hunter, Agent::text_spotter})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

Blackboard::Blackboard(const Blackboard& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

Blackboard& Blackboard::operator=(const Blackboard& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  entries_ = other.entries_;
  return *this;
}

void Blackboard::post(BlackboardEntry entry) {
  const bool kind_ok = (entry.agent == Agent::environment_curator && std::holds_alternative<LayoutMeta>(entry.payload)) ||
                       (entry.agent == Agent::shape_hunter && std::holds_alternative<PerceivedRegion>(entry.payload)) ||
                       (entry.agent == Agent::text_spotter && std::holds_alternative<PerceivedText>(entry.payload));
  if (!kind_ok) throw ContractError("entry '" + entry.entry_id + "' carries a payload its agent cannot post");
  if (!(entry.confidence >= 0.0 && entry.confidence <= 1.0))
    throw ContractError("entry '" + entry.entry_id + "' has confidence outside [0, 1]");
  if (entry.entry_id.empty()) throw ContractError("blackboard entry without id");
  std::lock_guard lock(mutex_);
  auto id = entry.entry_id;
  if (!entries_.emplace(id, std::move(entry)).second) throw ConflictError("duplicate blackboard entry '" + id + "'");
}

std::vector<BlackboardEntry> Blackboard::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<BlackboardEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

std::size_t Blackboard::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

Blackboard post(Blackboard board, BlackboardEntry entry) {
  board.post(std::move(entry));
  return board;
}

void PipelineConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) throw ConfigError("pipeline iou_threshold must lie in (0, 1)");
  if (!(grounding_radius >= 0.0) || !std::isfinite(grounding_radius))
    throw ConfigError("pipeline grounding_radius must be non-negative");
  if (!(grounding_threshold > 0.0 && grounding_threshold <= 1.0))
    throw ConfigError("pipeline grounding_threshold must lie in (0, 1]");
}

namespace {

struct Candidate {
  std::string key;  // entry id of the representative
  BBox bbox;
  std::string shape_class;
  double confidence = 0;
  std::vector<const PerceivedText*> texts;
  std::vector<std::string> text_keys;
};

struct TextItem {
  std::string key;
  PerceivedText text;
};

BBox union_box(const BBox& a, const BBox& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

/// Collapses whitespace and replaces characters the Mermaid subset cannot
/// carry inside a label.
std::string clean_label(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c == '"' ? '\'' : c;
  }
  return out;
}

template <class T>
std::vector<std::pair<std::string, T>> payloads(const std::vector<BlackboardEntry>& entries) {
  std::vector<std::pair<std::string, T>> out;
  for (const auto& e : entries)
    if (auto* p = std::get_if<T>(&e.payload)) out.emplace_back(e.entry_id, *p);
  return out;
}

bool by_confidence(double ca, const std::string& ka, double cb, const std::string& kb) {
  if (ca != cb) return ca > cb;
  return ka < kb;
}

struct Point {
  double x, y;
};

std::optional<std::pair<Point, Point>> arrow_ends(const PerceivedRegion& r) {
  const auto dir = arrow_direction(r.shape_class);
  if (!dir) return std::nullopt;
  const BBox& b = r.bbox;
  if (*dir == "right") return std::make_pair(Point{b.x0, b.center_y()}, Point{b.x1, b.center_y()});
  if (*dir == "left") return std::make_pair(Point{b.x1, b.center_y()}, Point{b.x0, b.center_y()});
  if (*dir == "down") return std::make_pair(Point{b.center_x(), b.y0}, Point{b.center_x(), b.y1});
  return std::make_pair(Point{b.center_x(), b.y1}, Point{b.center_x(), b.y0});
}

}  // namespace

FusionResult fuse_board(const Blackboard& board, const PipelineConfig& config) {
  config.validate();
  const auto entries = board.entries();
  FusionResult out;

  // Layout: most confident curator entry.
  {
    const BlackboardEntry* best = nullptr;
    for (const auto& e : entries)
      if (std::holds_alternative<LayoutMeta>(e.payload) &&
          (!best || by_confidence(e.confidence, e.entry_id, best->confidence, best->entry_id)))
        best = &e;
    if (best) out.layout = std::get<LayoutMeta>(best->payload);
  }

  // Regions, merged by overlap.
  std::vector<std::pair<std::string, PerceivedRegion>> regions, arrows;
  for (auto& [key, r] : payloads<PerceivedRegion>(entries))
    (arrow_direction(r.shape_class) ? arrows : regions).emplace_back(key, r);
  auto order = [](const auto& a, const auto& b) {
    return by_confidence(a.second.confidence, a.first, b.second.confidence, b.first);
  };
  std::sort(regions.begin(), regions.end(), order);
  std::sort(arrows.begin(), arrows.end(), order);

  std::vector<Candidate> kept;
  for (const auto& [key, r] : regions) {
    auto it = std::find_if(kept.begin(), kept.end(),
                           [&](const Candidate& c) { return iou(c.bbox, r.bbox) >= config.iou_threshold; });
    if (it == kept.end()) {
      kept.push_back({key, r.bbox, r.shape_class, r.confidence, {}, {}});
    } else if (!config.keep_higher_confidence_bbox) {
      it->bbox = union_box(it->bbox, r.bbox);
    }
  }

  // Texts, deduplicated.
  std::vector<TextItem> texts;
  {
    auto raw = payloads<PerceivedText>(entries);
    std::sort(raw.begin(), raw.end(), order);
    for (auto& [key, t] : raw) {
      t.text = clean_label(t.text);
      if (t.text.empty()) continue;
      const bool dup = std::any_of(texts.begin(), texts.end(), [&](const TextItem& k) {
        return k.text.text == t.text && iou(k.text.bbox, t.bbox) >= config.iou_threshold;
      });
      if (!dup) texts.push_back({key, t});
    }
  }

  // Ground texts to regions.
  std::vector<const TextItem*> loose;
  for (const auto& t : texts) {
    const double cx = t.text.bbox.center_x(), cy = t.text.bbox.center_y();
    Candidate* target = nullptr;
    for (auto& c : kept) {
      if (!c.bbox.contains(cx, cy)) continue;
      if (!target || c.bbox.area() < target->bbox.area() ||
          (c.bbox.area() == target->bbox.area() && c.key < target->key))
        target = &c;
    }
    if (!target) {
      double best = config.grounding_radius;
      for (auto& c : kept) {
        const double d = std::hypot(c.bbox.center_x() - cx, c.bbox.center_y() - cy);
        if (d > best) continue;
        if (!target || d < best || c.key < target->key) {
          best = d;
          target = &c;
        }
      }
    }
    if (target) {
      target->texts.push_back(&t.text);
      target->text_keys.push_back(t.key);
    } else {
      loose.push_back(&t);
    }
  }

  struct Provisional {
    std::string key;
    GroundedNode node;
  };
  std::vector<Provisional> nodes;
  for (auto& c : kept) {
    std::vector<std::size_t> idx(c.texts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::make_tuple(c.texts[a]->bbox.center_y(), c.texts[a]->bbox.center_x(), c.text_keys[a]) <
             std::make_tuple(c.texts[b]->bbox.center_y(), c.texts[b]->bbox.center_x(), c.text_keys[b]);
    });
    std::string label;
    for (auto i : idx) {
      if (!label.empty()) label += ' ';
      label += c.texts[i]->text;
    }
    nodes.push_back({c.key, {"", label, node_type_for_shape(c.shape_class), c.bbox, c.confidence}});
  }
  for (const auto* t : loose)
    nodes.push_back({t->key, {"", t->text.text, NodeType::annotation, t->text.bbox, t->text.confidence}});

  std::sort(nodes.begin(), nodes.end(), [](const Provisional& a, const Provisional& b) {
    return std::tie(a.node.bbox->y0, a.node.bbox->x0, a.key) < std::tie(b.node.bbox->y0, b.node.bbox->x0, b.key);
  });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].node.node_id = "n" + std::to_string(i + 1);
    out.nodes.push_back(std::move(nodes[i].node));
  }

  // Arrows become connectors between the nodes nearest their ends.
  auto nearest = [&](Point p, const std::string* exclude) -> const GroundedNode* {
    const GroundedNode* best = nullptr;
    double best_d = config.grounding_radius;
    for (const auto& n : out.nodes) {
      if (exclude && n.node_id == *exclude) continue;
      const double d = distance_to(*n.bbox, p.x, p.y);
      if (d > best_d) continue;
      if (!best || d < best_d || n.node_id < best->node_id) {
        best = &n;
        best_d = d;
      }
    }
    return best;
  };
  std::vector<BBox> arrow_boxes;
  for (const auto& [key, r] : arrows) {
    const bool dup = std::any_of(arrow_boxes.begin(), arrow_boxes.end(),
                                 [&](const BBox& b) { return iou(b, r.bbox) >= config.iou_threshold; });
    if (dup) continue;
    arrow_boxes.push_back(r.bbox);
    const auto ends = arrow_ends(r);
    const auto* tail = nearest(ends->first, nullptr);
    if (!tail) continue;
    const auto* head = nearest(ends->second, &tail->node_id);
    if (!head) continue;
    const bool seen = std::any_of(out.connectors.begin(), out.connectors.end(), [&](const Connector& c) {
      return c.source == tail->node_id && c.target == head->node_id;
    });
    if (!seen) out.connectors.push_back({tail->node_id, head->node_id, r.confidence});
  }
  std::sort(out.connectors.begin(), out.connectors.end(), [](const Connector& a, const Connector& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  return out;
}

std::vector<GroundedNode> fuse(const Blackboard& board, const PipelineConfig& config) {
  return fuse_board(board, config).nodes;
}

FixturePerceptionAgent::FixturePerceptionAgent(Agent agent, std::shared_ptr<const PerceptionBundle> bundle)
    : agent_(agent), bundle_(std::move(bundle)) {
  if (!bundle_) throw ContractError("fixture agent requires a perception bundle");
}

std::vector<BlackboardEntry> FixturePerceptionAgent::perceive(std::string_view) const {
  std::vector<BlackboardEntry> out;
  auto id = [&](std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", i);
    return std::string(to_string(agent_)) + "/" + buf;
  };
  switch (agent_) {
    case Agent::environment_curator:
      if (bundle_->layout != LayoutMeta{}) out.push_back({id(0), agent_, bundle_->layout, 1.0});
      break;
    case Agent::shape_hunter:
      for (std::size_t i = 0; i < bundle_->regions.size(); ++i)
        out.push_back({id(i), agent_, bundle_->regions[i], bundle_->regions[i].confidence});
      break;
    case Agent::text_spotter:
      for (std::size_t i = 0; i < bundle_->texts.size(); ++i)
        out.push_back({id(i), agent_, bundle_->texts[i], bundle_->texts[i].confidence});
      break;
  }
  return out;
}

std::string GeometricTopologyCoder::code(const FusionResult& fused) const {
  IrGraph ir;
  ir.direction = fused.layout && fused.layout->flow_direction == FlowDirection::left_right ? IrDirection::left_right
                                                                                           : IrDirection::top_down;
  for (const auto& n : fused.nodes) {
    ShapeHint shape = ShapeHint::rect;
    if (n.node_type == NodeType::data) shape = ShapeHint::rounded;
    if (n.node_type == NodeType::operation) shape = ShapeHint::diamond;
    ir.nodes.push_back({n.node_id, clean_label(n.label), shape});
  }
  for (const auto& c : fused.connectors) ir.edges.push_back({c.source, c.target, EdgeStyle::solid});
  return emit_mermaid(ir);
}

FigureBundle load_figure_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw NotFoundError("figure bundle '" + dir + "' is not a directory");
  FigureBundle b;
  b.name = root.filename().string();
  if (b.name.empty()) b.name = root.parent_path().filename().string();

  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_regular_file() && e.path().stem() == "figure") images.push_back(e.path());
  std::sort(images.begin(), images.end());
  if (!images.empty()) b.image_bytes = read_text_file(images.front());

  if (fs::exists(root / "perception.json"))
    b.perception = std::make_shared<const PerceptionBundle>(load_perception_fixture((root / "perception.json").string()));
  else
    b.perception = std::make_shared<const PerceptionBundle>();
  if (fs::exists(root / "topology.mmd")) b.topology_mermaid = read_text_file(root / "topology.mmd");
  return b;
}

RoundTripStages fixture_stages(const FigureBundle& bundle) {
  RoundTripStages s;
  auto perception = bundle.perception ? bundle.perception : std::make_shared<const PerceptionBundle>();
  for (Agent a : {Agent::environment_curator, Agent::shape_hunter, Agent::text_spotter})
    s.perception.push_back(std::make_shared<FixturePerceptionAgent>(a, perception));
  if (bundle.topology_mermaid)
    s.topology = std::make_shared<FixtureTopologyCoder>(*bundle.topology_mermaid);
  else
    s.topology = std::make_shared<GeometricTopologyCoder>();
  return s;
}

RoundTripResult run_round_trip(const FigureBundle& figure, const RoundTripStages& stages,
                               const EmbeddingProvider& embedder, const PipelineConfig& config) {
  config.validate();
  if (!stages.topology) throw PipelineError("topology_coder", "no topology stage supplied");

  std::vector<std::shared_ptr<const PerceptionAgent>> active;
  for (Agent a : {Agent::environment_curator, Agent::shape_hunter, Agent::text_spotter}) {
    if (!config.enabled(a)) continue;
    auto it = std::find_if(stages.perception.begin(), stages.perception.end(),
                           [&](const auto& p) { return p && p->agent() == a; });
    if (it == stages.perception.end())
      throw PipelineError(std::string(to_string(a)), "stage is enabled but no implementation was supplied");
    active.push_back(*it);
  }

  Blackboard board;
  std::vector<std::future<void>> running;
  for (const auto& agent : active)
    running.push_back(std::async(std::launch::async, [&board, &figure, agent] {
      for (auto& e : agent->perceive(figure.image_bytes)) board.post(std::move(e));
    }));
  for (std::size_t i = 0; i < running.size(); ++i) {
    try {
      running[i].get();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      for (std::size_t j = i + 1; j < running.size(); ++j) running[j].wait();
      throw PipelineError(std::string(to_string(active[i]->agent())), e.what());
    }
  }

  RoundTripResult r;
  r.board_entries = board.size();
  try {
    r.fused = fuse_board(board, config);
  } catch (const std::exception& e) {
    throw PipelineError("fusion_arbiter", e.what());
  }

  try {
    r.mermaid = stages.topology->code(r.fused);
  } catch (const std::exception& e) {
    throw PipelineError("topology_coder", e.what());
  }

  IrGraph ir;
  try {
    ir = parse_mermaid(r.mermaid);
  } catch (const ParseError& e) {
    throw PipelineError("topology_coder", std::string("invalid Mermaid: ") + e.what(), r.mermaid);
  }

  GroundingOptions opts;
  opts.threshold = config.grounding_threshold;
  opts.provenance = config.provenance;
  opts.graph_id = config.graph_id.empty() ? figure.name : config.graph_id;
  try {
    r.grounding = ground_ir(ir, r.fused.nodes, embedder, opts);
  } catch (const std::exception& e) {
    throw PipelineError("graph_architect", e.what());
  }
  r.graph = r.grounding.graph;
  if (r.fused.layout) {
    LayoutMeta layout = *r.fused.layout;
    if (layout.flow_direction == FlowDirection::unknown && r.graph.layout)
      layout.flow_direction = r.graph.layout->flow_direction;
    r.graph.layout = layout;
  }
  const auto report = validate_graph(r.graph);
  if (!report.ok())
    throw PipelineError("graph_architect",
                        "assembled graph is invalid: " + report.violations.front().element_id + ": " +
                            report.violations.front().message);
  r.graph = canonicalized(std::move(r.graph));
  return r;
}

}  // namespace sciflow

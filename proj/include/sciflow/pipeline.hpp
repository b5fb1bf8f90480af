#pragma once

// Round-trip parsing plumbing: perception agents post findings to a shared
// blackboard, the Fusion Arbiter turns them into grounded nodes and
// connectors, a topology stage writes Mermaid, and the Graph Architect grounds
// it into a DiagramGraph.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/mermaid.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

enum class Agent { environment_curator, shape_hunter, text_spotter };

std::string_view to_string(Agent a) noexcept;
std::optional<Agent> parse_agent(std::string_view s) noexcept;

using BlackboardPayload = std::variant<PerceivedRegion, PerceivedText, LayoutMeta>;

struct BlackboardEntry {
  std::string entry_id;
  Agent agent = Agent::shape_hunter;
  BlackboardPayload payload;
  double confidence = 1.0;

  friend bool operator==(const BlackboardEntry&, const BlackboardEntry&) = default;
};

/// Append-only store. Safe for concurrent posts; contents behave as a set
/// keyed by entry_id, so posting order never shows through.
class Blackboard {
 public:
  Blackboard() = default;
  Blackboard(const Blackboard& other);
  Blackboard& operator=(const Blackboard& other);

  /// Throws ConflictError on a duplicate entry_id and ContractError when the
  /// payload kind does not match the agent (curator: layout, hunter: region,
  /// spotter: text) or a confidence lies outside [0, 1].
  void post(BlackboardEntry entry);

  /// Entries sorted by entry_id.
  std::vector<BlackboardEntry> entries() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, BlackboardEntry> entries_;
};

/// Functional form: returns a new board with `entry` appended.
Blackboard post(Blackboard board, BlackboardEntry entry);

struct PipelineConfig {
  std::set<Agent> disabled;
  double iou_threshold = 0.5;
  /// Max distance (normalized units) for nearest-region text grounding and
  /// for attaching arrow ends to nodes.
  double grounding_radius = 0.15;
  /// When regions merge, keep the higher-confidence box (true) or the union.
  bool keep_higher_confidence_bbox = true;
  double grounding_threshold = 0.6;
  std::string graph_id;
  Provenance provenance = Provenance::predicted;

  bool enabled(Agent a) const { return !disabled.count(a); }
  void validate() const;
};

/// A directed connection recovered from an arrow region.
struct Connector {
  std::string source;  // grounded node ids
  std::string target;
  double confidence = 1.0;

  friend bool operator==(const Connector&, const Connector&) = default;
};

struct FusionResult {
  std::vector<GroundedNode> nodes;
  std::vector<Connector> connectors;
  std::optional<LayoutMeta> layout;
};

/// Fusion Arbiter.
///  1. Non-arrow regions, visited by (confidence desc, entry_id), merge into
///     the first kept region with IoU >= iou_threshold.
///  2. Duplicate texts (same string, IoU >= iou_threshold) collapse.
///  3. Each text goes to the smallest region containing its center, else the
///     nearest region center within grounding_radius, else becomes a
///     text-only annotation node.
///  4. Labels concatenate grounded texts top-to-bottom, left-to-right.
///  5. Nodes sort by (y0, x0, entry id) and are named n1, n2, ...
///  6. Arrow regions become connectors between the nodes nearest their tail
///     and head points.
FusionResult fuse_board(const Blackboard& board, const PipelineConfig& config = {});

/// Grounded nodes only (step 1-5 above).
std::vector<GroundedNode> fuse(const Blackboard& board, const PipelineConfig& config = {});

// ---------------------------------------------------------------------------
// Stages

class PerceptionAgent {
 public:
  virtual ~PerceptionAgent() = default;
  virtual Agent agent() const = 0;
  virtual std::vector<BlackboardEntry> perceive(std::string_view image_bytes) const = 0;
};

/// Replays one channel of a perception fixture. Entry ids are
/// "<agent>/<index>" with a zero-padded fixture index.
class FixturePerceptionAgent final : public PerceptionAgent {
 public:
  FixturePerceptionAgent(Agent agent, std::shared_ptr<const PerceptionBundle> bundle);
  Agent agent() const override { return agent_; }
  std::vector<BlackboardEntry> perceive(std::string_view image_bytes) const override;

 private:
  Agent agent_;
  std::shared_ptr<const PerceptionBundle> bundle_;
};

class TopologyCoder {
 public:
  virtual ~TopologyCoder() = default;
  virtual std::string id() const = 0;
  /// Mermaid text for the fused perception.
  virtual std::string code(const FusionResult& fused) const = 0;
};

/// Replays recorded topology output verbatim.
class FixtureTopologyCoder final : public TopologyCoder {
 public:
  explicit FixtureTopologyCoder(std::string mermaid) : mermaid_(std::move(mermaid)) {}
  std::string id() const override { return "fixture-topology"; }
  std::string code(const FusionResult&) const override { return mermaid_; }

 private:
  std::string mermaid_;
};

/// Deterministic offline coder: writes exactly the fused nodes and the
/// connectors recovered from arrows, nothing inferred.
class GeometricTopologyCoder final : public TopologyCoder {
 public:
  std::string id() const override { return "geometric-topology"; }
  std::string code(const FusionResult& fused) const override;
};

struct FigureBundle {
  std::string name;
  std::string image_bytes;
  std::shared_ptr<const PerceptionBundle> perception;  // never null
  std::optional<std::string> topology_mermaid;
};

/// Reads a bundle directory: an image file (figure.*), optional
/// perception.json, optional topology.mmd.
FigureBundle load_figure_bundle(const std::string& dir);

struct RoundTripStages {
  std::vector<std::shared_ptr<const PerceptionAgent>> perception;
  std::shared_ptr<const TopologyCoder> topology;
};

/// Fixture agents for all three perception channels, plus the fixture
/// topology when the bundle has one (geometric coder otherwise).
RoundTripStages fixture_stages(const FigureBundle& bundle);

struct RoundTripResult {
  DiagramGraph graph;
  std::string mermaid;
  FusionResult fused;
  GroundingResult grounding;
  std::size_t board_entries = 0;
};

/// Runs enabled perception agents concurrently, fuses after the barrier,
/// then topology, parse and grounding single-threaded. Disabled agents
/// contribute nothing. Throws PipelineError naming the failing stage; Mermaid
/// syntax failures carry the offending text.
RoundTripResult run_round_trip(const FigureBundle& figure, const RoundTripStages& stages,
                               const EmbeddingProvider& embedder, const PipelineConfig& config = {});

}  // namespace sciflow

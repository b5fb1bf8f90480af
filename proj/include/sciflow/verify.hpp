#pragma once

// Identity-consistent human verification: annotators may only remove
// auto-extracted elements or add new ones, so automatically and manually
// produced graphs stay comparable by element id.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/json_io.hpp"
#include "sciflow/match.hpp"

namespace sciflow {

enum class EditKind { exclude_node, exclude_edge, add_node, add_edge, retract };

std::string_view to_string(EditKind k) noexcept;
std::optional<EditKind> parse_edit_kind(std::string_view s) noexcept;

struct Edit {
  std::string edit_id;
  EditKind kind = EditKind::exclude_node;
  /// Element id for exclude_* and retract.
  std::string target;
  std::optional<Node> node;  // add_node
  std::optional<Edge> edge;  // add_edge
  std::int64_t timestamp_ms = 0;
  std::string annotator;

  friend bool operator==(const Edit&, const Edit&) = default;
};

Edit edit_from_json(const json& v, const std::string& path);
ordered_json edit_to_json(const Edit& e);

/// A log line: either a submitted edit or a cascade entry caused by one
/// (`cascade_of` set, id "<edit_id>/cascade/<edge_id>").
struct LogEntry {
  Edit edit;
  std::optional<std::string> cascade_of;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct EditOutcome {
  DiagramGraph graph;
  std::vector<LogEntry> entries;
};

/// Applies one edit. Excluding a node also excludes its incident edges (one
/// cascade entry each). Throws NotFoundError for a missing target,
/// ProtocolError for excluding a human-added element, retracting an
/// auto-extracted one, or adding an id already present (or in `reserved`).
/// Added elements are forced to human_added = true.
EditOutcome apply_edit(const DiagramGraph& graph, const Edit& edit,
                       const std::set<std::string>* reserved = nullptr);

struct EditSummary {
  std::size_t excluded_nodes = 0;
  std::size_t excluded_edges = 0;
  std::size_t added_nodes = 0;
  std::size_t added_edges = 0;
  std::size_t retracted = 0;
  std::size_t cascaded_edges = 0;
  /// Span between the first and last edit timestamp, in milliseconds.
  std::int64_t total_time_ms = 0;
};

EditSummary summarize(const std::vector<LogEntry>& log);

/// Replays a log over the automatic graph; cascade entries are re-derived
/// and must match the recorded ones.
DiagramGraph replay(const DiagramGraph& auto_graph, const std::vector<LogEntry>& log);

struct Agreement {
  std::size_t auto_count = 0;
  std::size_t verified_count = 0;
  std::size_t retained = 0;
  std::size_t removed = 0;
  std::size_t added = 0;
  Prf prf;
};

struct AgreementResult {
  Agreement nodes;
  Agreement edges;
};

/// Identity-set agreement of a verified graph with the automatic one.
/// retained = ids kept from auto; removed = auto ids missing from verified;
/// added = human_added ids in verified. precision = retained / auto count,
/// recall = retained / verified count. Throws ProvenanceError when the
/// verified graph holds a non-human-added id unknown to auto, or a
/// human-added id that collides with auto.
AgreementResult agreement(const DiagramGraph& auto_graph, const DiagramGraph& verified);

struct AgreementItem {
  std::string item_id;
  std::string domain;
  DiagramGraph auto_graph;
  DiagramGraph verified;
};

struct AgreementRow {
  std::string domain;  // "Overall" for the pooled row
  std::size_t items = 0;
  AgreementResult pooled;
};

/// Pools counts per domain (in first-appearance order) and overall, then
/// recomputes precision/recall/F1 from the pooled counts.
std::vector<AgreementRow> batch_agreement(const std::vector<AgreementItem>& items);

/// Fixed-width text table with node and edge P/R/F1 per row.
std::string render_agreement_table(const std::vector<AgreementRow>& rows);

ordered_json agreement_to_json(const AgreementResult& r);

// ---------------------------------------------------------------------------
// Persistent per-item sessions

struct ItemSnapshot {
  std::string item_id;
  DiagramGraph auto_graph;
  DiagramGraph current;
  std::vector<LogEntry> log;
  std::uint64_t version = 0;
  std::optional<std::filesystem::path> figure_path;
};

/// Items live under `<root>/<item_id>/` with `graph.json` (the automatic
/// graph), an optional `figure.png`/`figure.jpg`, and `edits.json` (the log,
/// written atomically after every accepted batch and replayed on load).
class VerificationStore {
 public:
  explicit VerificationStore(std::filesystem::path root);

  std::vector<std::string> item_ids() const;
  std::shared_ptr<const ItemSnapshot> snapshot(const std::string& item_id) const;

  /// Applies a batch atomically against `expected_version`. Throws
  /// ConflictError on a stale version; on any edit failure nothing changes.
  std::shared_ptr<const ItemSnapshot> submit(const std::string& item_id, std::uint64_t expected_version,
                                             const std::vector<Edit>& edits);

  /// Verified graph with provenance `verified`.
  DiagramGraph export_verified(const std::string& item_id) const;

 private:
  struct Slot {
    std::mutex write;
    mutable std::mutex read;
    std::shared_ptr<const ItemSnapshot> current;
  };
  Slot& slot(const std::string& item_id) const;

  std::filesystem::path root_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
};

inline constexpr std::string_view kEditLogSchema = "sciflow-edits/1";

std::string serialize_edit_log(const std::vector<LogEntry>& log, std::uint64_t version);
std::pair<std::vector<LogEntry>, std::uint64_t> parse_edit_log(std::string_view text);

}  // namespace sciflow

#include "sciflow/verify.hpp"

#include <algorithm>
#include <cstdio>

#include "sciflow/error.hpp"
#include "sciflow/graph_io.hpp"

namespace sciflow {

using namespace jsonio;

std::string_view to_string(EditKind k) noexcept {
  switch (k) {
    case EditKind::exclude_node: return "exclude_node";
    case EditKind::exclude_edge: return "exclude_edge";
    case EditKind::add_node: return "add_node";
    case EditKind::add_edge: return "add_edge";
    case EditKind::retract: return "retract";
  }
  return "retract";
}

std::optional<EditKind> parse_edit_kind(std::string_view s) noexcept {
  for (EditKind k : {EditKind::exclude_node, EditKind::exclude_edge, EditKind::add_node, EditKind::add_edge,
                     EditKind::retract})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

Edit edit_from_json(const json& v, const std::string& path) {
  require_object(v, path);
  Edit e;
  e.edit_id = get_string(v, "edit_id", path);
  if (e.edit_id.empty()) throw ParseError(child(path, "edit_id"), "edit_id must not be empty");
  const auto kind = get_string(v, "kind", path);
  auto k = parse_edit_kind(kind);
  if (!k) throw ParseError(child(path, "kind"), "unknown edit kind '" + kind + "'");
  e.kind = *k;
  switch (e.kind) {
    case EditKind::add_node: e.node = node_from_json(require(v, "node", path), child(path, "node")); break;
    case EditKind::add_edge: e.edge = edge_from_json(require(v, "edge", path), child(path, "edge")); break;
    default: e.target = get_string(v, "target", path);
  }
  if (auto it = v.find("timestamp_ms"); it != v.end()) {
    if (!it->is_number_integer()) throw ParseError(child(path, "timestamp_ms"), "expected an integer");
    e.timestamp_ms = it->get<std::int64_t>();
  }
  e.annotator = get_optional_string(v, "annotator", path).value_or("");
  return e;
}

ordered_json edit_to_json(const Edit& e) {
  ordered_json j;
  j["edit_id"] = e.edit_id;
  j["kind"] = std::string(to_string(e.kind));
  if (e.node) j["node"] = node_to_json(*e.node);
  if (e.edge) j["edge"] = edge_to_json(*e.edge);
  if (!e.node && !e.edge) j["target"] = e.target;
  j["timestamp_ms"] = e.timestamp_ms;
  j["annotator"] = e.annotator;
  return j;
}

namespace {

template <class T>
auto find_by_id(std::vector<T>& v, std::string_view id) {
  return std::find_if(v.begin(), v.end(), [&](const T& x) { return x.id == id; });
}

bool has_id(const DiagramGraph& g, std::string_view id) { return g.find_node(id) || g.find_edge(id); }

void remove_incident(DiagramGraph& g, const std::string& node_id, const Edit& cause, std::vector<LogEntry>& log) {
  std::vector<std::string> incident;
  for (const auto& e : g.edges)
    if (e.source == node_id || e.target == node_id) incident.push_back(e.id);
  std::sort(incident.begin(), incident.end());
  for (const auto& id : incident) {
    g.edges.erase(find_by_id(g.edges, id));
    Edit c;
    c.edit_id = cause.edit_id + "/cascade/" + id;
    c.kind = EditKind::exclude_edge;
    c.target = id;
    c.timestamp_ms = cause.timestamp_ms;
    c.annotator = cause.annotator;
    log.push_back({std::move(c), cause.edit_id});
  }
}

void remove_from_groups(DiagramGraph& g, const std::string& node_id) {
  for (auto& grp : g.groups) std::erase(grp.members, node_id);
  // Groups left empty go too, and so do references to them as parents.
  std::vector<std::string> gone;
  std::erase_if(g.groups, [&](const Group& grp) {
    if (!grp.members.empty()) return false;
    gone.push_back(grp.id);
    return true;
  });
  for (auto& grp : g.groups)
    if (grp.parent && std::find(gone.begin(), gone.end(), *grp.parent) != gone.end()) grp.parent.reset();
}

}  // namespace

EditOutcome apply_edit(const DiagramGraph& graph, const Edit& edit, const std::set<std::string>* reserved) {
  EditOutcome out{graph, {}};
  DiagramGraph& g = out.graph;
  out.entries.push_back({edit, std::nullopt});

  auto fresh = [&](const std::string& id) {
    if (id.empty()) throw ProtocolError(edit.edit_id + ": added element needs an id");
    if (has_id(g, id)) throw ProtocolError(edit.edit_id + ": id '" + id + "' is already in the graph");
    if (reserved && reserved->count(id))
      throw ProtocolError(edit.edit_id + ": id '" + id + "' belongs to an auto-extracted element");
  };

  switch (edit.kind) {
    case EditKind::exclude_node: {
      auto it = find_by_id(g.nodes, edit.target);
      if (it == g.nodes.end()) throw NotFoundError(edit.edit_id + ": no node '" + edit.target + "'");
      if (it->human_added) throw ProtocolError(edit.edit_id + ": '" + edit.target + "' is human-added; retract it instead");
      g.nodes.erase(it);
      remove_incident(g, edit.target, edit, out.entries);
      remove_from_groups(g, edit.target);
      break;
    }
    case EditKind::exclude_edge: {
      auto it = find_by_id(g.edges, edit.target);
      if (it == g.edges.end()) throw NotFoundError(edit.edit_id + ": no edge '" + edit.target + "'");
      if (it->human_added) throw ProtocolError(edit.edit_id + ": '" + edit.target + "' is human-added; retract it instead");
      g.edges.erase(it);
      break;
    }
    case EditKind::add_node: {
      if (!edit.node) throw ProtocolError(edit.edit_id + ": add_node without a node");
      fresh(edit.node->id);
      Node n = *edit.node;
      n.human_added = true;
      if (n.bbox && !n.bbox->normalized()) throw ProtocolError(edit.edit_id + ": bbox is not normalized");
      g.nodes.push_back(std::move(n));
      break;
    }
    case EditKind::add_edge: {
      if (!edit.edge) throw ProtocolError(edit.edit_id + ": add_edge without an edge");
      fresh(edit.edge->id);
      Edge e = *edit.edge;
      if (!g.find_node(e.source)) throw NotFoundError(edit.edit_id + ": no node '" + e.source + "'");
      if (!g.find_node(e.target)) throw NotFoundError(edit.edit_id + ": no node '" + e.target + "'");
      if (!e.directed) throw ProtocolError(edit.edit_id + ": undirected edges are not supported");
      e.human_added = true;
      g.edges.push_back(std::move(e));
      break;
    }
    case EditKind::retract: {
      if (auto it = find_by_id(g.nodes, edit.target); it != g.nodes.end()) {
        if (!it->human_added) throw ProtocolError(edit.edit_id + ": only human-added elements can be retracted");
        g.nodes.erase(it);
        remove_incident(g, edit.target, edit, out.entries);
        remove_from_groups(g, edit.target);
      } else if (auto et = find_by_id(g.edges, edit.target); et != g.edges.end()) {
        if (!et->human_added) throw ProtocolError(edit.edit_id + ": only human-added elements can be retracted");
        g.edges.erase(et);
      } else {
        throw NotFoundError(edit.edit_id + ": no element '" + edit.target + "'");
      }
      break;
    }
  }
  return out;
}

EditSummary summarize(const std::vector<LogEntry>& log) {
  EditSummary s;
  std::optional<std::int64_t> lo, hi;
  for (const auto& entry : log) {
    if (entry.cascade_of) {
      ++s.cascaded_edges;
      continue;
    }
    switch (entry.edit.kind) {
      case EditKind::exclude_node: ++s.excluded_nodes; break;
      case EditKind::exclude_edge: ++s.excluded_edges; break;
      case EditKind::add_node: ++s.added_nodes; break;
      case EditKind::add_edge: ++s.added_edges; break;
      case EditKind::retract: ++s.retracted; break;
    }
    const auto t = entry.edit.timestamp_ms;
    lo = lo ? std::min(*lo, t) : t;
    hi = hi ? std::max(*hi, t) : t;
  }
  if (lo) s.total_time_ms = *hi - *lo;
  return s;
}

namespace {

std::set<std::string> element_ids(const DiagramGraph& g) {
  std::set<std::string> ids;
  for (const auto& n : g.nodes) ids.insert(n.id);
  for (const auto& e : g.edges) ids.insert(e.id);
  return ids;
}

}  // namespace

DiagramGraph replay(const DiagramGraph& auto_graph, const std::vector<LogEntry>& log) {
  const auto reserved = element_ids(auto_graph);
  DiagramGraph g = auto_graph;
  std::size_t i = 0;
  while (i < log.size()) {
    if (log[i].cascade_of) throw ParseError("/log/" + std::to_string(i), "cascade entry without its cause");
    auto outcome = apply_edit(g, log[i].edit, &reserved);
    for (const auto& produced : outcome.entries) {
      if (i >= log.size() || !(log[i] == produced))
        throw ParseError("/log/" + std::to_string(i), "log does not replay against the automatic graph");
      ++i;
    }
    g = std::move(outcome.graph);
  }
  return g;
}

namespace {

template <class T>
Agreement agree(const std::vector<T>& auto_elems, const std::vector<T>& verified, const char* kind) {
  std::set<std::string> auto_ids;
  for (const auto& x : auto_elems) auto_ids.insert(x.id);
  Agreement a;
  a.auto_count = auto_elems.size();
  a.verified_count = verified.size();
  for (const auto& x : verified) {
    const bool known = auto_ids.count(x.id) > 0;
    if (x.human_added) {
      if (known) throw ProvenanceError(std::string(kind) + " '" + x.id + "' is human-added but its id is auto-extracted");
      ++a.added;
    } else {
      if (!known) throw ProvenanceError(std::string(kind) + " '" + x.id + "' is neither auto-extracted nor human-added");
      ++a.retained;
    }
  }
  a.removed = a.auto_count - a.retained;
  a.prf = prf_from_counts(a.retained, a.auto_count, a.retained, a.verified_count);
  return a;
}

void pool(Agreement& into, const Agreement& a) {
  into.auto_count += a.auto_count;
  into.verified_count += a.verified_count;
  into.retained += a.retained;
  into.removed += a.removed;
  into.added += a.added;
  into.prf = prf_from_counts(into.retained, into.auto_count, into.retained, into.verified_count);
}

}  // namespace

AgreementResult agreement(const DiagramGraph& auto_graph, const DiagramGraph& verified) {
  return {agree(auto_graph.nodes, verified.nodes, "node"), agree(auto_graph.edges, verified.edges, "edge")};
}

std::vector<AgreementRow> batch_agreement(const std::vector<AgreementItem>& items) {
  std::vector<AgreementRow> rows;
  AgreementRow overall{"Overall", 0, {}};
  overall.pooled.nodes.prf = prf_from_counts(0, 0, 0, 0);
  overall.pooled.edges.prf = prf_from_counts(0, 0, 0, 0);
  for (const auto& item : items) {
    const auto r = agreement(item.auto_graph, item.verified);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AgreementRow& row) { return row.domain == item.domain; });
    if (it == rows.end()) {
      rows.push_back({item.domain, 0, {}});
      it = std::prev(rows.end());
    }
    for (AgreementRow* row : {&*it, &overall}) {
      ++row->items;
      pool(row->pooled.nodes, r.nodes);
      pool(row->pooled.edges, r.edges);
    }
  }
  rows.push_back(std::move(overall));
  return rows;
}

std::string render_agreement_table(const std::vector<AgreementRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %5s | %6s %6s %6s | %6s %6s %6s\n", "Domain", "Items", "Node-P", "Node-R",
                "Node-F", "Edge-P", "Edge-R", "Edge-F");
  out += buf;
  for (const auto& r : rows) {
    const auto& n = r.pooled.nodes.prf;
    const auto& e = r.pooled.edges.prf;
    std::snprintf(buf, sizeof buf, "%-16s %5zu | %6.2f %6.2f %6.2f | %6.2f %6.2f %6.2f\n", r.domain.c_str(), r.items,
                  n.precision, n.recall, n.f1, e.precision, e.recall, e.f1);
    out += buf;
  }
  return out;
}

namespace {

ordered_json agreement_json(const Agreement& a) {
  return ordered_json{{"auto_count", a.auto_count},
                      {"verified_count", a.verified_count},
                      {"retained", a.retained},
                      {"removed", a.removed},
                      {"added", a.added},
                      {"precision", quantize(a.prf.precision)},
                      {"recall", quantize(a.prf.recall)},
                      {"f1", quantize(a.prf.f1)}};
}

}  // namespace

ordered_json agreement_to_json(const AgreementResult& r) {
  return ordered_json{{"nodes", agreement_json(r.nodes)}, {"edges", agreement_json(r.edges)}};
}

std::string serialize_edit_log(const std::vector<LogEntry>& log, std::uint64_t version) {
  ordered_json doc;
  doc["schema_version"] = std::string(kEditLogSchema);
  doc["version"] = version;
  doc["log"] = ordered_json::array();
  for (const auto& entry : log) {
    auto j = edit_to_json(entry.edit);
    j["cascade_of"] = entry.cascade_of ? ordered_json(*entry.cascade_of) : ordered_json(nullptr);
    doc["log"].push_back(std::move(j));
  }
  return dump_document(doc);
}

std::pair<std::vector<LogEntry>, std::uint64_t> parse_edit_log(std::string_view text) {
  const json doc = parse_json_text(text);
  require_object(doc, "");
  require_schema(doc, kEditLogSchema);
  const auto& v = require(doc, "version", "");
  if (!v.is_number_unsigned()) throw ParseError("/version", "expected a non-negative integer");
  std::vector<LogEntry> log;
  const auto& arr = require_array(require(doc, "log", ""), "/log");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto path = child("/log", i);
    LogEntry entry{edit_from_json(arr[i], path), get_optional_string(arr[i], "cascade_of", path)};
    log.push_back(std::move(entry));
  }
  return {std::move(log), v.get<std::uint64_t>()};
}

// ---------------------------------------------------------------------------

VerificationStore::VerificationStore(std::filesystem::path root) : root_(std::move(root)) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root_)) throw NotFoundError("data root '" + root_.string() + "' is not a directory");
  for (const auto& dir : fs::directory_iterator(root_)) {
    if (!dir.is_directory() || !fs::exists(dir.path() / "graph.json")) continue;
    auto snap = std::make_shared<ItemSnapshot>();
    snap->item_id = dir.path().filename().string();
    try {
      snap->auto_graph = load_graph_file((dir.path() / "graph.json").string());
    } catch (const ParseError& e) {
      throw ParseError(snap->item_id + "/graph.json" + (e.location().empty() ? "" : ":" + e.location()), e.message());
    }
    snap->current = snap->auto_graph;
    if (fs::exists(dir.path() / "edits.json")) {
      try {
        auto [log, version] = parse_edit_log(read_text_file(dir.path() / "edits.json"));
        snap->current = canonicalized(replay(snap->auto_graph, log));
        snap->log = std::move(log);
        snap->version = version;
      } catch (const Error& e) {
        throw ParseError(snap->item_id + "/edits.json", e.what());
      }
    }
    for (const char* name : {"figure.png", "figure.jpg", "figure.jpeg"})
      if (!snap->figure_path && fs::exists(dir.path() / name)) snap->figure_path = dir.path() / name;
    auto slot = std::make_unique<Slot>();
    slot->current = std::move(snap);
    slots_.emplace(dir.path().filename().string(), std::move(slot));
  }
}

std::vector<std::string> VerificationStore::item_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : slots_) ids.push_back(id);
  return ids;
}

VerificationStore::Slot& VerificationStore::slot(const std::string& item_id) const {
  auto it = slots_.find(item_id);
  if (it == slots_.end()) throw NotFoundError("no item '" + item_id + "'");
  return *it->second;
}

std::shared_ptr<const ItemSnapshot> VerificationStore::snapshot(const std::string& item_id) const {
  auto& s = slot(item_id);
  std::lock_guard lock(s.read);
  return s.current;
}

std::shared_ptr<const ItemSnapshot> VerificationStore::submit(const std::string& item_id,
                                                              std::uint64_t expected_version,
                                                              const std::vector<Edit>& edits) {
  auto& s = slot(item_id);
  std::lock_guard writer(s.write);
  const auto base = snapshot(item_id);
  if (base->version != expected_version)
    throw ConflictError("item '" + item_id + "' is at version " + std::to_string(base->version) + ", not " +
                        std::to_string(expected_version));

  std::set<std::string> used_edit_ids;
  for (const auto& entry : base->log) used_edit_ids.insert(entry.edit.edit_id);
  const auto reserved = element_ids(base->auto_graph);

  auto next = std::make_shared<ItemSnapshot>(*base);
  for (const auto& edit : edits) {
    if (edit.edit_id.empty() || edit.edit_id.find("/cascade/") != std::string::npos ||
        !used_edit_ids.insert(edit.edit_id).second)
      throw ProtocolError("edit id '" + edit.edit_id + "' is empty, reserved or already used");
    auto outcome = apply_edit(next->current, edit, &reserved);
    next->current = std::move(outcome.graph);
    for (auto& e : outcome.entries) next->log.push_back(std::move(e));
  }
  next->current = canonicalized(std::move(next->current));
  next->version = base->version + 1;

  write_text_file(root_ / item_id / "edits.json", serialize_edit_log(next->log, next->version));
  {
    std::lock_guard lock(s.read);
    s.current = next;
  }
  return next;
}

DiagramGraph VerificationStore::export_verified(const std::string& item_id) const {
  auto snap = snapshot(item_id);
  DiagramGraph g = snap->current;
  g.provenance = Provenance::verified;
  return g;
}

}  // namespace sciflow

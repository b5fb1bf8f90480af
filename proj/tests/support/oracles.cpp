#include "oracles.hpp"

#include <algorithm>
#include <regex>

namespace sciflow::testing {

namespace {

Prf ratio_prf(std::size_t supported, std::size_t predicted, std::size_t recovered, std::size_t reference) {
  if (predicted == 0 && reference == 0) return {1, 1, 1};
  const double p = predicted ? double(supported) / double(predicted) : 0.0;
  const double r = reference ? double(recovered) / double(reference) : 1.0;
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

bool known(NodeType t) { return t != NodeType::unknown; }

bool nodes_match(const Node& a, const Node& b) {
  const auto fa = oracle_filter(a.label), fb = oracle_filter(b.label);
  if (fa && fb) return *fa == *fb;
  return a.node_type == b.node_type && known(a.node_type);
}

void sequences(const std::vector<std::string>& ids, std::vector<std::string>& cur, std::size_t want,
               std::vector<std::vector<std::string>>& out) {
  if (cur.size() == want) {
    out.push_back(cur);
    return;
  }
  for (const auto& id : ids) {
    if (std::find(cur.begin(), cur.end(), id) != cur.end()) continue;
    cur.push_back(id);
    sequences(ids, cur, want, out);
    cur.pop_back();
  }
}

bool has_edge(const DiagramGraph& g, const std::string& a, const std::string& b) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) { return e.source == a && e.target == b; });
}

}  // namespace

std::optional<std::string> oracle_filter(const std::string& label) {
  static const std::regex trim(R"(^\s+|\s+$)");
  static const std::regex digits(R"(^[0-9]+$)");
  static const std::regex marker(R"(^(\([A-Za-z]\)|[A-Za-z]\)?)\.?$)");
  const std::string t = std::regex_replace(label, trim, "");
  if (t.size() <= 1 || std::regex_match(t, digits) || std::regex_match(t, marker)) return std::nullopt;
  return t;
}

bool oracle_is_linear(const DiagramGraph& g) {
  std::set<std::string> touched;
  for (const auto& e : g.edges) {
    touched.insert(e.source);
    touched.insert(e.target);
  }
  if (g.edges.empty()) return true;
  if (g.edges.size() + 1 != touched.size()) return false;
  std::vector<std::string> p(touched.begin(), touched.end());
  std::multiset<std::pair<std::string, std::string>> actual;
  for (const auto& e : g.edges) actual.insert({e.source, e.target});
  do {
    std::multiset<std::pair<std::string, std::string>> chain;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) chain.insert({p[i], p[i + 1]});
    if (chain == actual) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

std::vector<std::vector<std::string>> oracle_all_paths(const DiagramGraph& g, std::size_t max_len) {
  std::vector<std::string> ids;
  for (const auto& n : g.nodes) ids.push_back(n.id);
  std::vector<std::vector<std::string>> out;
  for (std::size_t len = 2; len <= max_len && len + 1 <= ids.size(); ++len) {
    std::vector<std::vector<std::string>> all;
    std::vector<std::string> cur;
    sequences(ids, cur, len + 1, all);
    for (auto& s : all) {
      bool ok = true;
      for (std::size_t i = 0; ok && i + 1 < s.size(); ++i) ok = has_edge(g, s[i], s[i + 1]);
      if (ok) out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> oracle_paths(const DiagramGraph& g, const std::string& a, const std::string& b,
                                                   std::size_t max_len) {
  auto all = oracle_all_paths(g, max_len);
  std::erase_if(all, [&](const auto& s) { return s.front() != a || s.back() != b; });
  return all;
}

OracleMatch oracle_match(const DiagramGraph& pred, const DiagramGraph& ref, std::size_t max_path_length) {
  OracleMatch out;
  std::map<std::string, std::vector<std::string>> refs_of;
  std::set<std::string> supported, recovered;
  for (const auto& p : pred.nodes)
    for (const auto& r : ref.nodes)
      if (nodes_match(p, r)) {
        refs_of[p.id].push_back(r.id);
        supported.insert(p.id);
        recovered.insert(r.id);
      }
  out.node = ratio_prf(supported.size(), pred.nodes.size(), recovered.size(), ref.nodes.size());

  auto direct = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::set<std::string> ids;
    for (const auto& e : ref.edges)
      if (std::count(from.begin(), from.end(), e.source) && std::count(to.begin(), to.end(), e.target))
        ids.insert(e.id);
    return ids;
  };
  const auto paths = oracle_all_paths(ref, max_path_length);
  auto best_path = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::optional<std::vector<std::string>> best;
    for (const auto& path : paths) {
      if (!std::count(from.begin(), from.end(), path.front()) || !std::count(to.begin(), to.end(), path.back()))
        continue;
      if (!best || path.size() < best->size() || (path.size() == best->size() && path < *best)) best = path;
    }
    return best;
  };

  std::size_t correct = 0;
  std::set<std::string> covered;
  for (const auto& e : pred.edges) {
    OracleEdge v;
    const auto from = refs_of[e.source], to = refs_of[e.target];
    if (auto ids = direct(from, to); !ids.empty()) {
      v.verdict = "exact";
      v.covered = ids;
    } else if (auto path = best_path(from, to)) {
      v.verdict = "reachable";
      v.witness = *path;
      for (std::size_t i = 0; i + 1 < path->size(); ++i)
        for (const auto& r : ref.edges)
          if (r.source == (*path)[i] && r.target == (*path)[i + 1]) v.covered.insert(r.id);
    } else if (!direct(to, from).empty() || best_path(to, from)) {
      v.verdict = "wrong_direction";
    } else {
      v.verdict = "unsupported";
    }
    if (v.verdict == "exact" || v.verdict == "reachable") ++correct;
    covered.insert(v.covered.begin(), v.covered.end());
    out.edges[e.id] = std::move(v);
  }
  out.edge = ratio_prf(correct, pred.edges.size(), covered.size(), ref.edges.size());
  return out;
}

SetState oracle_replay(const DiagramGraph& auto_graph, const std::vector<Edit>& edits) {
  SetState s;
  for (const auto& n : auto_graph.nodes) s.auto_nodes.insert(n.id);
  for (const auto& e : auto_graph.edges) {
    s.auto_edges.insert(e.id);
    s.endpoints[e.id] = {e.source, e.target};
  }
  auto drop_incident = [&](const std::string& node) {
    for (auto* set : {&s.auto_edges, &s.human_edges})
      for (auto it = set->begin(); it != set->end();) {
        const auto& [a, b] = s.endpoints[*it];
        it = (a == node || b == node) ? set->erase(it) : std::next(it);
      }
  };
  for (const auto& ed : edits) {
    switch (ed.kind) {
      case EditKind::exclude_node:
        s.auto_nodes.erase(ed.target);
        drop_incident(ed.target);
        break;
      case EditKind::exclude_edge:
        s.auto_edges.erase(ed.target);
        break;
      case EditKind::add_node:
        s.human_nodes.insert(ed.node->id);
        break;
      case EditKind::add_edge:
        s.human_edges.insert(ed.edge->id);
        s.endpoints[ed.edge->id] = {ed.edge->source, ed.edge->target};
        break;
      case EditKind::retract:
        if (s.human_nodes.erase(ed.target))
          drop_incident(ed.target);
        else
          s.human_edges.erase(ed.target);
        break;
    }
  }
  return s;
}

std::pair<OracleAgreement, OracleAgreement> oracle_agreement(const DiagramGraph& auto_graph, const SetState& s) {
  auto count = [](std::size_t total, const std::set<std::string>& kept, const std::set<std::string>& human) {
    OracleAgreement a{};
    a.auto_count = total;
    a.retained = kept.size();
    a.removed = total - kept.size();
    a.added = human.size();
    a.verified_count = kept.size() + human.size();
    a.prf = ratio_prf(a.retained, a.auto_count, a.retained, a.verified_count);
    return a;
  };
  return {count(auto_graph.nodes.size(), s.auto_nodes, s.human_nodes),
          count(auto_graph.edges.size(), s.auto_edges, s.human_edges)};
}

}  // namespace sciflow::testing

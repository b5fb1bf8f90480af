#include "sciflow/match.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sciflow/error.hpp"
#include "sciflow/similarity.hpp"

namespace sciflow {

void MatchConfig::validate() const {
  if (!(node_threshold > 0.0 && node_threshold <= 1.0)) throw ConfigError("node threshold must lie in (0, 1]");
  if (max_path_length < 2) throw ConfigError("max_path_length must be at least 2");
}

double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

Prf prf_from_counts(std::size_t supported, std::size_t predicted, std::size_t recovered, std::size_t reference) {
  if (predicted == 0 && reference == 0) return {1.0, 1.0, 1.0};
  Prf out;
  out.precision = predicted == 0 ? 0.0 : static_cast<double>(supported) / static_cast<double>(predicted);
  out.recall = reference == 0 ? 1.0 : static_cast<double>(recovered) / static_cast<double>(reference);
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

std::vector<std::string> NodeMatching::refs_for(std::string_view pred_id) const {
  std::vector<std::string> out;
  auto it = std::lower_bound(pairs.begin(), pairs.end(), pred_id,
                             [](const NodePair& p, std::string_view id) { return p.pred_id < id; });
  for (; it != pairs.end() && it->pred_id == pred_id; ++it) out.push_back(it->ref_id);
  return out;
}

std::string_view to_string(EdgeVerdictKind k) noexcept {
  switch (k) {
    case EdgeVerdictKind::exact: return "exact";
    case EdgeVerdictKind::reachable: return "reachable";
    case EdgeVerdictKind::wrong_direction: return "wrong_direction";
    case EdgeVerdictKind::unsupported: return "unsupported";
  }
  return "unsupported";
}

namespace {

std::vector<Described> describe(const DiagramGraph& g) {
  std::vector<Described> out;
  out.reserve(g.nodes.size());
  for (const auto& n : g.nodes) out.push_back({n.label, n.node_type});
  return out;
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ContractError(std::string(what) + " must lie in [0, 1]");
}

/// Reference topology with sorted adjacency for deterministic path search.
class RefIndex {
 public:
  explicit RefIndex(const DiagramGraph& ref) {
    for (const auto& e : ref.edges) {
      edge_ids_[{e.source, e.target}].push_back(e.id);
      succ_[e.source].push_back(e.target);
    }
    for (auto& [_, ids] : edge_ids_) std::sort(ids.begin(), ids.end());
    for (auto& [_, s] : succ_) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
  }

  const std::vector<std::string>* edges_between(const std::string& a, const std::string& b) const {
    auto it = edge_ids_.find({a, b});
    return it == edge_ids_.end() ? nullptr : &it->second;
  }

  /// Lexicographically smallest shortest simple path from some a in `from`
  /// to some b in `to` with 2..max_len edges.
  std::optional<std::vector<std::string>> witness(const std::vector<std::string>& from,
                                                  const std::vector<std::string>& to, std::size_t max_len) const {
    if (from.empty() || to.empty()) return std::nullopt;
    std::vector<std::string> path;
    for (std::size_t len = 2; len <= max_len; ++len) {
      for (const auto& a : from) {
        path.assign(1, a);
        if (extend(path, len, to)) return path;
      }
    }
    return std::nullopt;
  }

 private:
  bool extend(std::vector<std::string>& path, std::size_t len, const std::vector<std::string>& to) const {
    if (path.size() == len + 1) return std::binary_search(to.begin(), to.end(), path.back());
    auto it = succ_.find(path.back());
    if (it == succ_.end()) return false;
    for (const auto& next : it->second) {
      if (std::find(path.begin(), path.end(), next) != path.end()) continue;
      path.push_back(next);
      if (extend(path, len, to)) return true;
      path.pop_back();
    }
    return false;
  }

  std::map<std::pair<std::string, std::string>, std::vector<std::string>> edge_ids_;
  std::map<std::string, std::vector<std::string>> succ_;
};

}  // namespace

double node_similarity(const Node& a, const Node& b, const EmbeddingProvider& embedder) {
  const Described l[] = {{a.label, a.node_type}};
  const Described r[] = {{b.label, b.node_type}};
  return similarity_matrix(l, r, embedder)(0, 0);
}

NodeMatching match_nodes(const DiagramGraph& pred, const DiagramGraph& ref, const EmbeddingProvider& embedder,
                         double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ContractError("node threshold must lie in (0, 1]");
  const auto left = describe(pred), right = describe(ref);
  const Eigen::MatrixXd sim = similarity_matrix(left, right, embedder);

  NodeMatching m;
  m.threshold_used = threshold;
  for (std::size_t i = 0; i < pred.nodes.size(); ++i) {
    for (std::size_t j = 0; j < ref.nodes.size(); ++j) {
      const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (s < threshold) continue;
      m.pairs.push_back({pred.nodes[i].id, ref.nodes[j].id, s});
      m.supported_pred.insert(pred.nodes[i].id);
      m.recovered_ref.insert(ref.nodes[j].id);
    }
  }
  std::sort(m.pairs.begin(), m.pairs.end(), [](const NodePair& a, const NodePair& b) {
    return std::tie(a.pred_id, a.ref_id) < std::tie(b.pred_id, b.ref_id);
  });
  return m;
}

Prf score_nodes(const NodeMatching& m, const DiagramGraph& pred, const DiagramGraph& ref) {
  return prf_from_counts(m.supported_pred.size(), pred.nodes.size(), m.recovered_ref.size(), ref.nodes.size());
}

std::vector<EdgeVerdict> match_edges(const DiagramGraph& pred, const DiagramGraph& ref, const NodeMatching& m,
                                     bool allow_reachability, std::size_t max_path_length) {
  const RefIndex index(ref);
  std::vector<EdgeVerdict> out;
  out.reserve(pred.edges.size());

  auto direct = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::vector<std::string> ids;
    for (const auto& a : from)
      for (const auto& b : to)
        if (auto* e = index.edges_between(a, b)) ids.insert(ids.end(), e->begin(), e->end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  };

  for (const auto& e : pred.edges) {
    EdgeVerdict v;
    v.pred_edge_id = e.id;
    const auto from = m.refs_for(e.source);
    const auto to = m.refs_for(e.target);

    if (auto exact = direct(from, to); !exact.empty()) {
      v.verdict = EdgeVerdictKind::exact;
      v.covered_ref_edges = std::move(exact);
    } else if (auto path = allow_reachability ? index.witness(from, to, max_path_length) : std::nullopt) {
      v.verdict = EdgeVerdictKind::reachable;
      for (std::size_t i = 0; i + 1 < path->size(); ++i) {
        const auto* ids = index.edges_between((*path)[i], (*path)[i + 1]);
        v.covered_ref_edges.insert(v.covered_ref_edges.end(), ids->begin(), ids->end());
      }
      std::sort(v.covered_ref_edges.begin(), v.covered_ref_edges.end());
      v.witness_path = std::move(*path);
    } else if (!direct(to, from).empty() ||
               (allow_reachability && index.witness(to, from, max_path_length).has_value())) {
      v.verdict = EdgeVerdictKind::wrong_direction;
    } else {
      v.verdict = EdgeVerdictKind::unsupported;
    }
    out.push_back(std::move(v));
  }
  return out;
}

Prf score_edges(const std::vector<EdgeVerdict>& verdicts, const DiagramGraph& pred, const DiagramGraph& ref) {
  std::size_t correct = 0;
  std::set<std::string> covered;
  for (const auto& v : verdicts) {
    if (!v.correct()) continue;
    ++correct;
    covered.insert(v.covered_ref_edges.begin(), v.covered_ref_edges.end());
  }
  return prf_from_counts(correct, pred.edges.size(), covered.size(), ref.edges.size());
}

void GraphWeights::validate() const {
  if (!(node >= 0 && edge >= 0) || std::abs(node + edge - 1.0) > 1e-9)
    throw ConfigError("graph-level weights must be non-negative and sum to 1");
}

double graph_score(double node_f1, double edge_f1, const GraphWeights& weights) {
  check_unit(node_f1, "node F1");
  check_unit(edge_f1, "edge F1");
  weights.validate();
  return weights.node * node_f1 + weights.edge * edge_f1;
}

double graph_score(double node_f1, double edge_f1) { return graph_score(node_f1, edge_f1, GraphWeights{}); }

MatchResult match_graphs(const DiagramGraph& pred, const DiagramGraph& ref, const EmbeddingProvider& embedder,
                         const MatchConfig& config, const GraphWeights& weights) {
  config.validate();
  weights.validate();
  MatchResult r;
  r.config = config;
  r.matching = match_nodes(pred, ref, embedder, config.node_threshold);
  r.node = score_nodes(r.matching, pred, ref);
  r.edge_verdicts = match_edges(pred, ref, r.matching, config.allow_reachability, config.max_path_length);
  r.edge = score_edges(r.edge_verdicts, pred, ref);
  r.graph_score = graph_score(r.node.f1, r.edge.f1, weights);
  return r;
}

}  // namespace sciflow

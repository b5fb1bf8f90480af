#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "sciflow/error.hpp"
#include "sciflow/mermaid.hpp"
#include "sciflow/similarity.hpp"

namespace sciflow {

GroundingResult ground_ir(const IrGraph& ir, const std::vector<GroundedNode>& grounded,
                          const EmbeddingProvider& embedder, const GroundingOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold <= 1.0))
    throw ContractError("grounding threshold must lie in (0, 1]");

  std::vector<Described> left, right;
  left.reserve(ir.nodes.size());
  for (const auto& n : ir.nodes)
    left.push_back({n.shape == ShapeHint::none ? std::string() : n.label, options.shape_types(n.shape)});
  for (const auto& g : grounded) right.push_back({g.label, g.node_type});
  const Eigen::MatrixXd sim = similarity_matrix(left, right, embedder);

  struct Candidate {
    double sim;
    std::size_t ir, gr;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < ir.nodes.size(); ++i)
    for (std::size_t j = 0; j < grounded.size(); ++j)
      if (const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); s >= options.threshold)
        candidates.push_back({s, i, j});
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (grounded[a.gr].node_id != grounded[b.gr].node_id) return grounded[a.gr].node_id < grounded[b.gr].node_id;
    return ir.nodes[a.ir].id < ir.nodes[b.ir].id;
  });

  std::vector<std::optional<std::size_t>> bound(ir.nodes.size());
  std::vector<bool> claimed(grounded.size(), false);
  for (const auto& c : candidates) {
    if (bound[c.ir] || claimed[c.gr]) continue;
    bound[c.ir] = c.gr;
    claimed[c.gr] = true;
  }

  GroundingResult result;
  DiagramGraph& g = result.graph;
  g.graph_id = options.graph_id;
  g.provenance = options.provenance;
  g.layout = LayoutMeta{ir.direction == IrDirection::left_right ? FlowDirection::left_right : FlowDirection::top_down,
                        std::nullopt};

  std::set<std::string> used;
  for (std::size_t j = 0; j < grounded.size(); ++j)
    if (claimed[j]) used.insert(grounded[j].node_id);

  std::map<std::string, std::string> id_of;  // IR id -> graph node id
  for (std::size_t i = 0; i < ir.nodes.size(); ++i) {
    const auto& irn = ir.nodes[i];
    Node n;
    if (bound[i]) {
      const auto& gn = grounded[*bound[i]];
      n.id = gn.node_id;
      n.label = irn.shape != ShapeHint::none && !irn.label.empty() ? irn.label : gn.label;
      n.node_type = gn.node_type != NodeType::unknown ? gn.node_type : options.shape_types(irn.shape);
      n.bbox = gn.bbox;
      result.bindings.emplace_back(irn.id, gn.node_id);
    } else {
      n.id = irn.id;
      for (int k = 2; used.count(n.id); ++k) n.id = irn.id + "_" + std::to_string(k);
      n.label = irn.label;
      n.node_type = options.shape_types(irn.shape);
      result.unbound_ir_ids.push_back(irn.id);
    }
    used.insert(n.id);
    id_of[irn.id] = n.id;
    g.nodes.push_back(std::move(n));
  }
  for (std::size_t j = 0; j < grounded.size(); ++j)
    if (!claimed[j]) result.unclaimed_grounded_ids.push_back(grounded[j].node_id);

  for (std::size_t k = 0; k < ir.edges.size(); ++k) {
    const auto& e = ir.edges[k];
    auto s = id_of.find(e.source), t = id_of.find(e.target);
    if (s == id_of.end() || t == id_of.end()) throw ContractError("IR edge references an undeclared node");
    g.edges.push_back(Edge{"e" + std::to_string(k + 1), s->second, t->second, true, false});
  }

  std::size_t group_no = 0;
  for (const auto& sg : ir.subgraphs) {
    Group grp;
    grp.label = sg.label;
    for (const auto& m : sg.members)
      if (auto it = id_of.find(m); it != id_of.end() &&
                                   std::find(grp.members.begin(), grp.members.end(), it->second) == grp.members.end())
        grp.members.push_back(it->second);
    if (grp.members.empty()) {
      result.dropped_subgraphs.push_back(sg.label);
      continue;
    }
    grp.id = "g" + std::to_string(++group_no);
    g.groups.push_back(std::move(grp));
  }
  return result;
}

}  // namespace sciflow

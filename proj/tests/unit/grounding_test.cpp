#include <gtest/gtest.h>

#include "sciflow/error.hpp"
#include "sciflow/mermaid.hpp"

using namespace sciflow;

namespace {

GroundedNode gn(const char* id, const char* label, NodeType t) { return {id, label, t, BBox{0.1, 0.1, 0.2, 0.2}, 1.0}; }

using Pairs = std::vector<std::pair<std::string, std::string>>;
using Ids = std::vector<std::string>;

}  // namespace

TEST(Grounding, GreedyOneToOneWithDeterministicTies) {
  const auto ir = parse_mermaid(
      "flowchart LR\n"
      "subgraph S\n  a[Encoder]\n  c\nend\n"
      "subgraph Empty\nend\n"
      "b(Decoder)\nd[Ghost]\n"
      "a --> b\nc --> d\n");
  const std::vector<GroundedNode> grounded = {gn("n1", "Encoder", NodeType::module), gn("n2", "Decoder", NodeType::data),
                                              gn("n3", "Extra", NodeType::unknown), gn("d", "Encoder", NodeType::module)};
  GroundingOptions opts;
  opts.graph_id = "fig";
  const ExactLabelEmbedder exact;
  const auto r = ground_ir(ir, grounded, exact, opts);

  // Both "Encoder" detections tie at 1; the smaller grounded id wins.
  EXPECT_EQ(r.bindings, (Pairs{{"a", "d"}, {"b", "n2"}}));
  EXPECT_EQ(r.unbound_ir_ids, (Ids{"c", "d"}));
  EXPECT_EQ(r.unclaimed_grounded_ids, (Ids{"n1", "n3"}));
  EXPECT_EQ(r.dropped_subgraphs, (Ids{"Empty"}));

  const auto& g = r.graph;
  EXPECT_EQ(g.graph_id, "fig");
  EXPECT_EQ(g.provenance, Provenance::predicted);
  ASSERT_TRUE(g.layout);
  EXPECT_EQ(g.layout->flow_direction, FlowDirection::left_right);
  ASSERT_EQ(g.nodes.size(), 4u);
  const auto* enc = g.find_node("d");
  ASSERT_TRUE(enc);
  EXPECT_EQ(enc->label, "Encoder");
  EXPECT_TRUE(enc->bbox);
  const auto* ghost = g.find_node("d_2");  // unbound IR "d" renamed around the bound id
  ASSERT_TRUE(ghost);
  EXPECT_EQ(ghost->label, "Ghost");
  EXPECT_EQ(ghost->node_type, NodeType::module);
  EXPECT_FALSE(ghost->bbox);
  const auto* bare = g.find_node("c");
  ASSERT_TRUE(bare);
  EXPECT_EQ(bare->node_type, NodeType::unknown);

  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0].id, "e1");
  EXPECT_EQ(g.edges[0].source, "d");
  EXPECT_EQ(g.edges[0].target, "n2");
  EXPECT_EQ(g.edges[1].source, "c");
  EXPECT_EQ(g.edges[1].target, "d_2");

  ASSERT_EQ(g.groups.size(), 1u);
  EXPECT_EQ(g.groups[0].id, "g1");
  EXPECT_EQ(g.groups[0].label, "S");
  EXPECT_EQ(g.groups[0].members, (Ids{"d", "c"}));
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(Grounding, LabelAndTypePrecedence) {
  const auto ir = parse_mermaid("flowchart TD\ne[\"\"]\nx(Thing)\n");
  const std::vector<GroundedNode> grounded = {gn("g1", "Mystery", NodeType::module), gn("g2", "Thing", NodeType::unknown)};
  const ExactLabelEmbedder exact;
  const auto r = ground_ir(ir, grounded, exact);
  ASSERT_EQ(r.bindings, (Pairs{{"e", "g1"}, {"x", "g2"}}));
  EXPECT_EQ(r.graph.find_node("g1")->label, "Mystery");        // empty IR label falls back to perception
  EXPECT_EQ(r.graph.find_node("g2")->node_type, NodeType::data);  // unknown perceived type falls back to shape
}

TEST(Grounding, ThresholdGatesBindings) {
  const auto ir = parse_mermaid("flowchart TD\na[encoder]\n");
  const std::vector<GroundedNode> grounded = {gn("n1", "decoder", NodeType::module)};
  const TrigramEmbedder trigram;  // encoder vs decoder: 0.8
  GroundingOptions opts;
  opts.threshold = 0.79;
  EXPECT_EQ(ground_ir(ir, grounded, trigram, opts).bindings.size(), 1u);
  opts.threshold = 0.81;
  EXPECT_TRUE(ground_ir(ir, grounded, trigram, opts).bindings.empty());
  opts.threshold = 0;
  EXPECT_THROW(ground_ir(ir, grounded, trigram, opts), ContractError);
  opts.threshold = 1.01;
  EXPECT_THROW(ground_ir(ir, grounded, trigram, opts), ContractError);
}

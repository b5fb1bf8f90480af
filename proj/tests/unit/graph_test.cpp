#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "oracles.hpp"
#include "sciflow/error.hpp"
#include "sciflow/graph.hpp"

using namespace sciflow;
using namespace sciflow::testing;

namespace {

DiagramGraph chain(std::initializer_list<const char*> ids) {
  DiagramGraph g;
  for (auto id : ids) g.nodes.push_back({id, id, NodeType::module, std::nullopt, false});
  for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i)
    g.edges.push_back({"e" + std::to_string(i), g.nodes[i].id, g.nodes[i + 1].id, true, false});
  return g;
}

bool has_violation_for(const ValidationReport& r, const std::string& id) {
  return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.element_id == id; });
}

}  // namespace

TEST(BBox, IouOfDisjointTouchingAndNestedBoxes) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 0.2, 0.2}, {0.5, 0.5, 0.7, 0.7}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0.2, 0.2}, {0.2, 0, 0.4, 0.2}), 0.0);
  // Inner box covers a quarter of the outer one.
  EXPECT_DOUBLE_EQ(iou({0, 0, 0.4, 0.4}, {0, 0, 0.2, 0.2}), 0.25);
  // Half overlap: intersection 0.02, union 0.06.
  EXPECT_NEAR(iou({0, 0, 0.2, 0.2}, {0.1, 0, 0.3, 0.2}), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(iou({0.3, 0.3, 0.3, 0.3}, {0.3, 0.3, 0.3, 0.3}), 0.0);
}

TEST(BBox, DistanceToRectangle) {
  const BBox b{0.2, 0.2, 0.4, 0.4};
  EXPECT_DOUBLE_EQ(distance_to(b, 0.3, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(distance_to(b, 0.5, 0.3), 0.1);
  EXPECT_NEAR(distance_to(b, 0.7, 0.8), 0.5, 1e-12);  // 3-4-5 from the corner
}

TEST(Enums, StringRoundTrip) {
  for (auto t : {NodeType::module, NodeType::data, NodeType::operation, NodeType::annotation, NodeType::unknown})
    EXPECT_EQ(parse_node_type(to_string(t)), t);
  for (auto p : {Provenance::canonical, Provenance::predicted, Provenance::verified})
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  for (auto d : {FlowDirection::left_right, FlowDirection::top_down, FlowDirection::mixed, FlowDirection::unknown})
    EXPECT_EQ(parse_flow_direction(to_string(d)), d);
  for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) EXPECT_EQ(parse_difficulty(to_string(d)), d);
  EXPECT_FALSE(parse_node_type("Module"));
  EXPECT_FALSE(parse_difficulty("extreme"));
}

TEST(Canonical, InsensitiveToInputOrder) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    RandomGraphSpec spec;
    spec.groups = true;
    auto g = random_graph(rng, spec);
    auto shuffled = g;
    std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
    std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
    std::shuffle(shuffled.groups.begin(), shuffled.groups.end(), rng);
    for (auto& grp : shuffled.groups) std::shuffle(grp.members.begin(), grp.members.end(), rng);
    EXPECT_EQ(canonicalized(shuffled), g);
  }
}

TEST(Validate, AcceptsGeneratedGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    RandomGraphSpec spec;
    spec.groups = spec.bboxes = true;
    EXPECT_TRUE(validate_graph(random_graph(rng, spec)).ok());
  }
}

TEST(Validate, ReportsEachBrokenInvariant) {
  auto g = chain({"a", "b", "c"});
  EXPECT_TRUE(validate_graph(g).ok());

  auto dup = g;
  dup.nodes.push_back({"a", "again", NodeType::data, std::nullopt, false});
  EXPECT_TRUE(has_violation_for(validate_graph(dup), "a"));

  auto dangling = g;
  dangling.edges.push_back({"e9", "a", "zz", true, false});
  EXPECT_TRUE(has_violation_for(validate_graph(dangling), "zz"));

  auto undirected = g;
  undirected.edges[0].directed = false;
  EXPECT_TRUE(has_violation_for(validate_graph(undirected), "e0"));

  auto bad_box = g;
  bad_box.nodes[1].bbox = BBox{0.5, 0.5, 0.4, 0.9};
  EXPECT_TRUE(has_violation_for(validate_graph(bad_box), "b"));
  bad_box.nodes[1].bbox = BBox{0.5, 0.5, 1.2, 0.9};
  EXPECT_TRUE(has_violation_for(validate_graph(bad_box), "b"));

  auto empty_group = g;
  empty_group.groups.push_back({"g0", "Stage", {}, std::nullopt});
  EXPECT_TRUE(has_violation_for(validate_graph(empty_group), "g0"));

  auto cycle = g;
  cycle.groups.push_back({"g0", "A", {"a"}, "g1"});
  cycle.groups.push_back({"g1", "B", {"b"}, "g0"});
  EXPECT_FALSE(validate_graph(cycle).ok());

  auto orphan = g;
  orphan.groups.push_back({"g0", "A", {"a"}, "nope"});
  EXPECT_TRUE(has_violation_for(validate_graph(orphan), "g0"));
}

TEST(Validate, SelfLoopIsOnlyAWarning) {
  auto g = chain({"a", "b"});
  g.edges.push_back({"loop", "b", "b", true, false});
  const auto r = validate_graph(g);
  EXPECT_TRUE(r.ok());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].element_id, "loop");
}

TEST(Stats, CountsAndDegrees) {
  auto g = chain({"a", "b", "c", "d"});
  g.edges.push_back({"x", "a", "c", true, false});
  g.groups.push_back({"g0", "outer", {"a"}, std::nullopt});
  g.groups.push_back({"g1", "inner", {"b"}, "g0"});
  const auto s = graph_stats(g);
  EXPECT_EQ(s.node_count, 4u);
  EXPECT_EQ(s.edge_count, 4u);
  EXPECT_EQ(s.max_out_degree, 2u);
  EXPECT_EQ(s.max_in_degree, 2u);
  EXPECT_DOUBLE_EQ(s.branching_density, 1.0);
  EXPECT_FALSE(s.is_linear);
  EXPECT_EQ(s.group_depth, 2u);
}

TEST(Stats, LinearityHandPicked) {
  EXPECT_TRUE(graph_stats(chain({"a", "b", "c"})).is_linear);
  EXPECT_TRUE(graph_stats(chain({"a"})).is_linear);

  auto with_isolated = chain({"a", "b"});
  with_isolated.nodes.push_back({"lonely", "Lonely", NodeType::data, std::nullopt, false});
  EXPECT_TRUE(graph_stats(with_isolated).is_linear);

  auto ring = chain({"a", "b", "c"});
  ring.edges.push_back({"back", "c", "a", true, false});
  EXPECT_FALSE(graph_stats(ring).is_linear);

  auto two_paths = chain({"a", "b"});
  two_paths.nodes.push_back({"c", "c", NodeType::module, std::nullopt, false});
  two_paths.nodes.push_back({"d", "d", NodeType::module, std::nullopt, false});
  two_paths.edges.push_back({"cd", "c", "d", true, false});
  EXPECT_FALSE(graph_stats(two_paths).is_linear);

  // A path plus a disjoint cycle: one start, but the walk misses the cycle.
  auto path_and_cycle = chain({"a", "b"});
  path_and_cycle.nodes.push_back({"c", "c", NodeType::module, std::nullopt, false});
  path_and_cycle.nodes.push_back({"d", "d", NodeType::module, std::nullopt, false});
  path_and_cycle.edges.push_back({"cd", "c", "d", true, false});
  path_and_cycle.edges.push_back({"dc", "d", "c", true, false});
  EXPECT_FALSE(graph_stats(path_and_cycle).is_linear);

  auto loop = chain({"a"});
  loop.edges.push_back({"l", "a", "a", true, false});
  EXPECT_FALSE(graph_stats(loop).is_linear);

  auto parallel = chain({"a", "b"});
  parallel.edges.push_back({"again", "a", "b", true, false});
  EXPECT_FALSE(graph_stats(parallel).is_linear);
}

TEST(Stats, LinearityAgreesWithPermutationOracle) {
  Rng rng(23);
  int linear = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    RandomGraphSpec spec;
    spec.max_nodes = 7;
    spec.self_loops = trial % 3 == 0;
    spec.edge_prob = trial % 2 ? 0.15 : 0.3;
    const auto g = random_graph(rng, spec);
    const bool expected = oracle_is_linear(g);
    linear += expected;
    ASSERT_EQ(graph_stats(g).is_linear, expected) << "trial " << trial;
  }
  EXPECT_GT(linear, 100);  // the sample must exercise both outcomes
}

TEST(Difficulty, BinsFollowCutoffs) {
  GraphStats s;
  s.node_count = 8;
  s.is_linear = true;
  s.branching_density = 0.9;
  EXPECT_EQ(difficulty_level(s), Difficulty::easy);
  s.is_linear = false;
  EXPECT_EQ(difficulty_level(s), Difficulty::medium);
  s.is_linear = true;
  s.node_count = 9;
  EXPECT_EQ(difficulty_level(s), Difficulty::medium);
  s.node_count = 18;
  EXPECT_EQ(difficulty_level(s), Difficulty::hard);
  s.node_count = 4;
  s.branching_density = 1.5;
  EXPECT_EQ(difficulty_level(s), Difficulty::hard);

  DifficultyConfig custom;
  custom.easy_max_nodes = 3;
  custom.hard_min_nodes = 5;
  s.branching_density = 0.5;
  EXPECT_EQ(difficulty_level(s, custom), Difficulty::medium);
}

TEST(Difficulty, RejectsInconsistentCutoffs) {
  DifficultyConfig bad;
  bad.easy_max_nodes = 18;
  EXPECT_THROW(bad.validate(), ConfigError);
  DifficultyConfig branching;
  branching.hard_min_branching = 0;
  EXPECT_THROW(branching.validate(), ConfigError);
  EXPECT_THROW(difficulty_level(GraphStats{}, bad), ConfigError);
}

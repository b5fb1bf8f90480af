#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/mermaid.hpp"
#include "sciflow/pipeline.hpp"
#include "sciflow/providers.hpp"

namespace sciflow::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& text);

/// Labels whose pairwise trigram similarity stays below the default node
/// threshold, so each one matches only itself.
const std::vector<std::string>& distinct_labels();

/// A synthetic figure: boxes in a row or column joined by arrows, duplicate
/// region and text detections, free-floating annotation texts and one
/// unlabelled icon. `reference` is the graph a perfect parse should give.
struct SyntheticFigure {
  std::string name;
  PerceptionBundle perception;
  DiagramGraph reference;
  std::string image_bytes;
};

SyntheticFigure synthetic_figure(int index);

/// Writes figure.png and perception.json under dir/<name>.
std::filesystem::path write_figure_bundle(const std::filesystem::path& dir, const SyntheticFigure& figure);

/// Wraps a perception agent so that it posts its entries in a shuffled order.
std::shared_ptr<const PerceptionAgent> shuffled_agent(std::shared_ptr<const PerceptionAgent> inner, unsigned seed);

/// Fixture stages with every agent shuffled and listed in reverse order.
RoundTripStages shuffled_stages(const RoundTripStages& stages, unsigned seed);

/// Canonical DAGs spread over the difficulty bins.
DiagramGraph benchmark_graph(int index);

struct Benchmark {
  std::filesystem::path manifest;
  std::filesystem::path config;
  std::vector<std::string> systems;  // model ids
};

/// 20 canonical items, each predicted by a perfect system and three
/// corrupted ones (node_drop, edge_reversal, hallucinated_edge). Item ids are
/// "<system>-<index>".
Benchmark write_benchmark(const std::filesystem::path& dir, int items = 20);

/// Files in `dir` ending with `suffix`, sorted by name.
std::vector<std::filesystem::path> files_with_suffix(const std::filesystem::path& dir, const std::string& suffix);

/// Expected-IR document of the Mermaid corpus:
/// {"direction", "nodes": [{id, label, shape}], "edges": [{source, target, style}],
///  "subgraphs": [{label, members}]}.
IrGraph ir_from_expected(const std::string& json_text);

/// Reads the `%% expect-error: L:C` marker of a negative corpus file.
std::pair<std::size_t, std::size_t> expected_error_location(const std::string& text);

}  // namespace sciflow::testing

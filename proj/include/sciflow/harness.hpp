#pragma once

// Batch evaluation: manifest + config in, canonical report out.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sciflow/graph.hpp"
#include "sciflow/json_io.hpp"
#include "sciflow/match.hpp"
#include "sciflow/metrics.hpp"
#include "sciflow/pipeline.hpp"
#include "sciflow/providers.hpp"
#include "sciflow/remote.hpp"

namespace sciflow {

inline constexpr std::string_view kManifestSchema = "sciflow-manifest/1";
inline constexpr std::string_view kConfigSchema = "sciflow-config/1";
inline constexpr std::string_view kReportSchema = "sciflow-report/1";
inline constexpr std::string_view kStatsSchema = "sciflow-stats/1";

/// Provider scores supplied up front instead of computed. Level scores
/// (s_graph, s_text, s_image) replace the whole level.
struct Precomputed {
  std::optional<double> alignment, flow, semantic_cosine, perceptual_distance;
  std::optional<double> s_graph, s_text, s_image;
};

struct EvalItem {
  std::string item_id;
  std::string model_id;
  std::string domain;
  std::optional<std::filesystem::path> canonical;
  std::optional<std::filesystem::path> predicted;
  std::optional<std::filesystem::path> figure_bundle;
  std::optional<std::filesystem::path> prompt;
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> reference_image;
  std::optional<Difficulty> difficulty;
  Precomputed precomputed;
};

/// Paths resolve relative to the manifest's directory. Throws ParseError /
/// VersionError for a malformed document (including duplicate item ids).
std::vector<EvalItem> parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::vector<EvalItem> load_manifest(const std::filesystem::path& path);

struct ProviderSpec {
  std::string kind;  // trigram | exact | remote | constant | byte_histogram
  double value = 0;  // constant judge value or constant image-text cosine
  std::optional<RemoteEndpointConfig> remote;
};

struct EvalConfig {
  ProviderSpec embedding{"trigram", 0, std::nullopt};
  std::optional<ProviderSpec> judge;
  ProviderSpec perceptual{"byte_histogram", 0, std::nullopt};
  std::optional<ProviderSpec> image_text;
  MatchConfig match;
  double text_threshold = 0.60;
  AggregationWeights weights;
  DifficultyConfig difficulty;
  std::size_t workers = 1;
  PipelineConfig pipeline;

  /// Fully resolved form (defaults filled in) used for the fingerprint.
  ordered_json to_json() const;
  void validate() const;
};

/// Every key is optional; unknown provider kinds or bad values are
/// ConfigError, malformed JSON is ParseError.
EvalConfig parse_config(std::string_view text);
EvalConfig load_config(const std::filesystem::path& path);

/// Live provider instances built from a config (remote ones throttled to
/// their declared concurrency).
struct ProviderSet {
  std::shared_ptr<const EmbeddingProvider> embedding;
  std::shared_ptr<const JudgeProvider> judge;            // may be null
  std::shared_ptr<const PerceptualProvider> perceptual;
  std::shared_ptr<const ImageTextProvider> image_text;   // may be null

  std::map<std::string, std::string> ids() const;
};

ProviderSet make_providers(const EvalConfig& config);

struct ItemError {
  std::string kind;  // load | parse | provider:<kind> | pipeline:<stage> | contract
  std::string message;
};

struct ItemResult {
  std::string item_id;
  std::string model_id;
  std::string domain;
  std::optional<Difficulty> difficulty;
  bool evaluated = false;
  std::vector<ItemError> errors;
  std::optional<ScoreReport> scores;
  std::optional<MatchResult> match;
  std::optional<TextMatchScore> coverage_detail;
};

struct BinStat {
  std::size_t count = 0;
  double s_graph = 0;  // mean over the bin, 0 when empty
};

struct LeaderboardRow {
  std::string model_id;
  std::map<Difficulty, BinStat> bins;  // all three bins present
  /// Mean over every evaluated item, i.e. bin means weighted by bin counts.
  double s_graph_avg = 0;
  /// Unweighted mean of the non-empty bin means.
  double s_graph_bin_mean = 0;
  double s_text = 0, s_image = 0, s_overall = 0;
  std::size_t evaluated = 0;
  std::size_t unevaluated = 0;
};

std::vector<LeaderboardRow> build_leaderboard(const std::vector<ItemResult>& items);

struct Report {
  ordered_json config;
  std::string config_fingerprint;
  std::map<std::string, std::string> provider_ids;
  std::vector<ItemResult> items;  // sorted by item_id
  std::vector<LeaderboardRow> leaderboard;

  std::size_t evaluated() const;
  ordered_json to_json() const;
  std::string serialize() const;
};

/// Evaluates one item; never throws for item-level failures.
ItemResult evaluate_item(const EvalItem& item, const EvalConfig& config, const ProviderSet& providers);

/// Evaluates every item on `config.workers` threads. Deterministic: output
/// depends only on inputs and config, not on scheduling.
Report evaluate(const std::vector<EvalItem>& items, const EvalConfig& config, const ProviderSet& providers);
Report evaluate(const std::vector<EvalItem>& items, const EvalConfig& config);

/// Combines report documents. Throws ConfigError when provider ids differ
/// unless `allow_mixed_providers`, and on duplicate item ids.
std::string merge_reports(const std::vector<std::string>& report_documents, bool allow_mixed_providers = false);

struct StatsResult {
  std::size_t graphs = 0;
  std::map<std::size_t, std::size_t> node_histogram;
  std::map<std::size_t, std::size_t> edge_histogram;
  std::map<Difficulty, std::size_t> difficulty;
  std::size_t non_linear = 0;
  std::vector<std::pair<std::string, std::string>> errors;  // file, message

  double non_linear_fraction() const { return graphs ? static_cast<double>(non_linear) / graphs : 0.0; }
  ordered_json to_json(const DifficultyConfig& config) const;
};

/// Reads every *.json graph document under `dir` (recursively, in path
/// order). Unreadable files are recorded and skipped.
StatsResult collect_stats(const std::filesystem::path& dir, const DifficultyConfig& config = {});

/// FNV-1a 64 of the text, as 16 hex digits.
std::string fingerprint(std::string_view text);

}  // namespace sciflow

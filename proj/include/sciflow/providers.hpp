#pragma once

// Contracts for every model-backed signal, plus deterministic offline
// implementations so that evaluation runs without network access.

#include <Eigen/SparseCore>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sciflow/graph.hpp"

namespace sciflow {

/// Unit-norm embedding, or the zero vector when the text had nothing to embed.
using Embedding = Eigen::SparseVector<double>;

/// Cosine of two embeddings; 0 when either one is the zero vector.
double cosine(const Embedding& a, const Embedding& b);

/// (cos + 1) / 2, clamped to [0, 1].
double rescale_cosine(double cos) noexcept;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual Eigen::Index dimension() const = 0;
  /// One vector per input text, in input order. Deterministic per (id, text).
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) const = 0;
  /// 0 means any number of concurrent callers is fine.
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Lexical stand-in for a sentence-embedding model: hashed character
/// trigram counts, L2-normalized.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr Eigen::Index kDefaultDimension = Eigen::Index{1} << 20;

  explicit TrigramEmbedder(Eigen::Index dimension = kDefaultDimension);

  std::string id() const override;
  Eigen::Index dimension() const override { return dimension_; }
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;

  /// Lowercase, map every non-alphanumeric byte to a space, collapse runs of
  /// spaces and trim.
  static std::string normalize(std::string_view text);
  /// Contiguous 3-character windows of the normalized text; a normalized
  /// text shorter than 3 characters is its own single gram.
  static std::vector<std::string> trigrams(std::string_view text);

 private:
  Eigen::Index dimension_;
};

/// One-hot embedding of the exact text: identical strings have cosine 1,
/// different strings cosine 0. Used for exact-label matching.
class ExactLabelEmbedder final : public EmbeddingProvider {
 public:
  std::string id() const override { return "exact-label"; }
  Eigen::Index dimension() const override { return Eigen::Index{1} << 30; }
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
};

/// Limits concurrent calls into a wrapped provider to its declared
/// max_concurrency (or to `limit` when given).
class ThrottledEmbedder final : public EmbeddingProvider {
 public:
  ThrottledEmbedder(std::shared_ptr<const EmbeddingProvider> inner, std::ptrdiff_t limit);

  std::string id() const override { return inner_->id(); }
  Eigen::Index dimension() const override { return inner_->dimension(); }
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::size_t max_concurrency() const override { return static_cast<std::size_t>(limit_); }

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  std::ptrdiff_t limit_;
  mutable std::counting_semaphore<> slots_;
};

class JudgeProvider {
 public:
  virtual ~JudgeProvider() = default;
  virtual std::string id() const = 0;
  /// Global consistency of a predicted graph document with a prompt document, in [0, 1].
  virtual double alignment(std::string_view graph_document, std::string_view prompt_document) const = 0;
  /// Visual flow consistency of an image with a prompt document, in [0, 1].
  virtual double flow(std::string_view image_bytes, std::string_view prompt_document) const = 0;
  virtual std::size_t max_concurrency() const { return 0; }
};

class ConstantJudge final : public JudgeProvider {
 public:
  /// Throws ConfigError unless value is in [0, 1].
  explicit ConstantJudge(double value);

  std::string id() const override;
  double alignment(std::string_view, std::string_view) const override { return value_; }
  double flow(std::string_view, std::string_view) const override { return value_; }

 private:
  double value_;
};

class PerceptualProvider {
 public:
  virtual ~PerceptualProvider() = default;
  virtual std::string id() const = 0;
  /// Non-negative; distance(x, x) == 0.
  virtual double distance(std::string_view image_a, std::string_view image_b) const = 0;
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Offline stand-in: half the L1 distance between normalized byte
/// histograms. Lies in [0, 1]; zero for identical inputs.
class ByteHistogramPerceptual final : public PerceptualProvider {
 public:
  std::string id() const override { return "byte-histogram-l1"; }
  double distance(std::string_view image_a, std::string_view image_b) const override;
};

/// Image-text similarity (CLIP-style). Returns a raw cosine in [-1, 1].
class ImageTextProvider {
 public:
  virtual ~ImageTextProvider() = default;
  virtual std::string id() const = 0;
  virtual double cosine(std::string_view image_bytes, std::string_view text) const = 0;
  virtual std::size_t max_concurrency() const { return 0; }
};

class ConstantImageText final : public ImageTextProvider {
 public:
  /// Throws ConfigError unless cos is in [-1, 1].
  explicit ConstantImageText(double cos);
  std::string id() const override;
  double cosine(std::string_view, std::string_view) const override { return cos_; }

 private:
  double cos_;
};

// ---------------------------------------------------------------------------
// Perception fixtures

inline constexpr std::string_view kPerceptionSchema = "sciflow-perception/1";

struct PerceivedRegion {
  BBox bbox;
  /// rect, rounded, diamond, ellipse, cylinder, circle, note, or an arrow
  /// class "arrow:right|left|up|down". Anything else is kept verbatim.
  std::string shape_class;
  double confidence = 1.0;

  friend bool operator==(const PerceivedRegion&, const PerceivedRegion&) = default;
};

struct PerceivedText {
  BBox bbox;
  std::string text;
  double confidence = 1.0;

  friend bool operator==(const PerceivedText&, const PerceivedText&) = default;
};

struct PerceptionBundle {
  std::vector<PerceivedRegion> regions;
  std::vector<PerceivedText> texts;
  LayoutMeta layout;

  friend bool operator==(const PerceptionBundle&, const PerceptionBundle&) = default;
};

/// Node type suggested by a region shape class (unknown when unrecognized).
NodeType node_type_for_shape(std::string_view shape_class) noexcept;
/// Arrow direction for "arrow:<dir>" classes.
std::optional<std::string_view> arrow_direction(std::string_view shape_class) noexcept;

PerceptionBundle parse_perception_fixture(std::string_view text);
PerceptionBundle load_perception_fixture(const std::string& path);
std::string serialize_perception_fixture(const PerceptionBundle& bundle);

}  // namespace sciflow

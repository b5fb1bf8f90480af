#include "sciflow/providers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "sciflow/error.hpp"
#include "sciflow/graph_io.hpp"

namespace sciflow {

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << quantize(v);
  return os.str();
}

}  // namespace

const char* to_string(ProviderError::Kind kind) noexcept {
  switch (kind) {
    case ProviderError::Kind::timeout: return "timeout";
    case ProviderError::Kind::transport: return "transport";
    case ProviderError::Kind::malformed_response: return "malformed_response";
    case ProviderError::Kind::out_of_range: return "out_of_range";
    case ProviderError::Kind::unavailable: return "unavailable";
  }
  return "unavailable";
}

double cosine(const Embedding& a, const Embedding& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double rescale_cosine(double cos) noexcept { return std::clamp((cos + 1.0) / 2.0, 0.0, 1.0); }

TrigramEmbedder::TrigramEmbedder(Eigen::Index dimension) : dimension_(dimension) {
  if (dimension_ <= 0) throw ConfigError("trigram embedder dimension must be positive");
}

std::string TrigramEmbedder::id() const { return "trigram-fallback/" + std::to_string(dimension_); }

std::string TrigramEmbedder::normalize(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> TrigramEmbedder::trigrams(std::string_view text) {
  const auto norm = normalize(text);
  std::vector<std::string> grams;
  if (norm.empty()) return grams;
  if (norm.size() < 3) {
    grams.push_back(norm);
    return grams;
  }
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i) grams.push_back(norm.substr(i, 3));
  return grams;
}

std::vector<Embedding> TrigramEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding v(dimension_);
    for (const auto& gram : trigrams(text))
      v.coeffRef(static_cast<Eigen::Index>(fnv1a(gram) % static_cast<std::uint64_t>(dimension_))) += 1.0;
    if (const double n = v.norm(); n > 0) v /= n;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Embedding> ExactLabelEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding v(dimension());
    if (!text.empty()) v.insert(static_cast<Eigen::Index>(fnv1a(text) % static_cast<std::uint64_t>(dimension()))) = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

ThrottledEmbedder::ThrottledEmbedder(std::shared_ptr<const EmbeddingProvider> inner, std::ptrdiff_t limit)
    : inner_(std::move(inner)), limit_(limit), slots_(limit) {
  if (!inner_) throw ConfigError("throttled embedder needs a provider");
  if (limit_ <= 0) throw ConfigError("max concurrency must be positive");
}

std::vector<Embedding> ThrottledEmbedder::embed(std::span<const std::string> texts) const {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->embed(texts);
}

ConstantJudge::ConstantJudge(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("constant judge value must lie in [0, 1]");
}

std::string ConstantJudge::id() const { return "constant-judge/" + format_value(value_); }

double ByteHistogramPerceptual::distance(std::string_view image_a, std::string_view image_b) const {
  if (image_a.empty() && image_b.empty()) return 0.0;
  if (image_a.empty() || image_b.empty()) return 1.0;
  std::array<double, 256> ha{}, hb{};
  for (unsigned char c : image_a) ha[c] += 1.0;
  for (unsigned char c : image_b) hb[c] += 1.0;
  double l1 = 0;
  for (std::size_t i = 0; i < 256; ++i)
    l1 += std::abs(ha[i] / static_cast<double>(image_a.size()) - hb[i] / static_cast<double>(image_b.size()));
  return 0.5 * l1;
}

ConstantImageText::ConstantImageText(double cos) : cos_(cos) {
  if (!(cos >= -1.0 && cos <= 1.0)) throw ConfigError("constant image-text cosine must lie in [-1, 1]");
}

std::string ConstantImageText::id() const { return "constant-image-text/" + format_value(cos_); }

// ---------------------------------------------------------------------------

NodeType node_type_for_shape(std::string_view shape_class) noexcept {
  if (shape_class == "rect" || shape_class == "box") return NodeType::module;
  if (shape_class == "rounded" || shape_class == "ellipse" || shape_class == "cylinder") return NodeType::data;
  if (shape_class == "diamond" || shape_class == "circle") return NodeType::operation;
  if (shape_class == "note") return NodeType::annotation;
  return NodeType::unknown;
}

std::optional<std::string_view> arrow_direction(std::string_view shape_class) noexcept {
  constexpr std::string_view prefix = "arrow:";
  if (!shape_class.starts_with(prefix)) return std::nullopt;
  auto dir = shape_class.substr(prefix.size());
  if (dir == "right" || dir == "left" || dir == "up" || dir == "down") return dir;
  return std::nullopt;
}

namespace {

double confidence_from(const json& v, const std::string& path) {
  const double c = jsonio::get_number(v, "confidence", path);
  if (!(c >= 0.0 && c <= 1.0)) throw ParseError(jsonio::child(path, "confidence"), "confidence must lie in [0, 1]");
  return c;
}

}  // namespace

PerceptionBundle parse_perception_fixture(std::string_view text) {
  using namespace jsonio;
  const json doc = parse_json_text(text);
  require_object(doc, "");
  require_schema(doc, kPerceptionSchema);
  PerceptionBundle bundle;

  if (auto it = doc.find("regions"); it != doc.end()) {
    require_array(*it, "/regions");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto p = child("/regions", i);
      const auto& r = require_object((*it)[i], p);
      PerceivedRegion region;
      region.bbox = bbox_from_json(require(r, "bbox", p), child(p, "bbox"));
      region.shape_class = get_string(r, "shape_class", p);
      region.confidence = confidence_from(r, p);
      bundle.regions.push_back(std::move(region));
    }
  }
  if (auto it = doc.find("texts"); it != doc.end()) {
    require_array(*it, "/texts");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto p = child("/texts", i);
      const auto& t = require_object((*it)[i], p);
      PerceivedText txt;
      txt.bbox = bbox_from_json(require(t, "bbox", p), child(p, "bbox"));
      txt.text = get_string(t, "text", p);
      txt.confidence = confidence_from(t, p);
      bundle.texts.push_back(std::move(txt));
    }
  }
  if (auto it = doc.find("layout"); it != doc.end() && !it->is_null()) bundle.layout = layout_from_json(*it, "/layout");
  return bundle;
}

PerceptionBundle load_perception_fixture(const std::string& path) {
  return parse_perception_fixture(read_text_file(path));
}

std::string serialize_perception_fixture(const PerceptionBundle& bundle) {
  ordered_json doc;
  doc["schema_version"] = std::string(kPerceptionSchema);
  doc["regions"] = ordered_json::array();
  for (const auto& r : bundle.regions)
    doc["regions"].push_back(
        ordered_json{{"bbox", bbox_to_json(r.bbox)}, {"shape_class", r.shape_class}, {"confidence", quantize(r.confidence)}});
  doc["texts"] = ordered_json::array();
  for (const auto& t : bundle.texts)
    doc["texts"].push_back(
        ordered_json{{"bbox", bbox_to_json(t.bbox)}, {"text", t.text}, {"confidence", quantize(t.confidence)}});
  doc["layout"] = layout_to_json(bundle.layout);
  return dump_document(doc);
}

}  // namespace sciflow

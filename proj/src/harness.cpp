#include "sciflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <semaphore>
#include <thread>

#include "sciflow/error.hpp"
#include "sciflow/graph_io.hpp"

namespace sciflow {

using namespace jsonio;
namespace fs = std::filesystem;

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::optional<fs::path> optional_path(const json& v, std::string_view key, const std::string& path,
                                      const fs::path& base) {
  auto s = get_optional_string(v, key, path);
  if (!s) return std::nullopt;
  if (s->empty()) throw ParseError(child(path, key), "path must not be empty");
  return (base / *s).lexically_normal();
}

void check_unit(std::optional<double> v, const std::string& path) {
  if (v && !(*v >= 0.0 && *v <= 1.0)) throw ParseError(path, "value must lie in [0, 1]");
}

}  // namespace

std::vector<EvalItem> parse_manifest(std::string_view text, const fs::path& base_dir) {
  const json doc = parse_json_text(text);
  require_object(doc, "");
  require_schema(doc, kManifestSchema);
  const auto& arr = require_array(require(doc, "items", ""), "/items");
  std::vector<EvalItem> items;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto path = child("/items", i);
    const auto& v = require_object(arr[i], path);
    EvalItem it;
    it.item_id = get_string(v, "item_id", path);
    if (it.item_id.empty()) throw ParseError(child(path, "item_id"), "item_id must not be empty");
    if (!seen.insert(it.item_id).second) throw ParseError(child(path, "item_id"), "duplicate item id '" + it.item_id + "'");
    it.model_id = get_optional_string(v, "model_id", path).value_or("default");
    it.domain = get_optional_string(v, "domain", path).value_or("");
    it.canonical = optional_path(v, "canonical", path, base_dir);
    it.predicted = optional_path(v, "predicted", path, base_dir);
    it.figure_bundle = optional_path(v, "figure_bundle", path, base_dir);
    if (it.predicted && it.figure_bundle)
      throw ParseError(path, "give either 'predicted' or 'figure_bundle', not both");
    it.prompt = optional_path(v, "prompt", path, base_dir);
    it.image = optional_path(v, "image", path, base_dir);
    it.reference_image = optional_path(v, "reference_image", path, base_dir);
    if (auto d = get_optional_string(v, "difficulty", path)) {
      it.difficulty = parse_difficulty(*d);
      if (!it.difficulty) throw ParseError(child(path, "difficulty"), "unknown difficulty '" + *d + "'");
    }
    if (auto pc = v.find("precomputed"); pc != v.end()) {
      const auto pp = child(path, "precomputed");
      require_object(*pc, pp);
      auto& p = it.precomputed;
      p.alignment = get_optional_number(*pc, "alignment", pp);
      p.flow = get_optional_number(*pc, "flow", pp);
      p.semantic_cosine = get_optional_number(*pc, "semantic_cosine", pp);
      p.perceptual_distance = get_optional_number(*pc, "perceptual_distance", pp);
      p.s_graph = get_optional_number(*pc, "s_graph", pp);
      p.s_text = get_optional_number(*pc, "s_text", pp);
      p.s_image = get_optional_number(*pc, "s_image", pp);
      check_unit(p.alignment, child(pp, "alignment"));
      check_unit(p.flow, child(pp, "flow"));
      check_unit(p.s_graph, child(pp, "s_graph"));
      check_unit(p.s_text, child(pp, "s_text"));
      check_unit(p.s_image, child(pp, "s_image"));
      if (p.semantic_cosine && !(*p.semantic_cosine >= -1.0 && *p.semantic_cosine <= 1.0))
        throw ParseError(child(pp, "semantic_cosine"), "value must lie in [-1, 1]");
      if (p.perceptual_distance && !(*p.perceptual_distance >= 0.0))
        throw ParseError(child(pp, "perceptual_distance"), "value must be non-negative");
    }
    items.push_back(std::move(it));
  }
  std::sort(items.begin(), items.end(), [](const EvalItem& a, const EvalItem& b) { return a.item_id < b.item_id; });
  return items;
}

std::vector<EvalItem> load_manifest(const fs::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Config

namespace {

ProviderSpec provider_from_json(const json& v, const std::string& path, std::initializer_list<const char*> kinds) {
  if (!v.is_object()) throw ConfigError(path + ": expected an object");
  ProviderSpec s;
  try {
    s.kind = get_string(v, "kind", path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (std::find_if(kinds.begin(), kinds.end(), [&](const char* k) { return s.kind == k; }) == kinds.end())
    throw ConfigError(path + ": unsupported provider kind '" + s.kind + "'");
  if (s.kind == "remote") {
    s.remote = RemoteEndpointConfig::from_json(v, path);
    s.remote->validate();
  } else if (s.kind == "constant") {
    auto it = v.find("value");
    if (it == v.end() || !it->is_number()) throw ConfigError(path + ": constant provider needs a numeric 'value'");
    s.value = it->get<double>();
  }
  return s;
}

ordered_json provider_to_json(const ProviderSpec& s) {
  ordered_json j;
  j["kind"] = s.kind;
  if (s.kind == "constant") j["value"] = s.value;
  if (s.remote) {
    j["endpoint"] = s.remote->endpoint;
    j["auth_token_env"] = s.remote->auth_token_env;
    j["timeout_ms"] = s.remote->timeout_ms;
    j["retries"] = s.remote->retries;
    j["id"] = s.remote->id;
    j["max_concurrency"] = s.remote->max_concurrency;
  }
  return j;
}

template <class F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void EvalConfig::validate() const {
  match.validate();
  if (!(text_threshold > 0.0 && text_threshold <= 1.0)) throw ConfigError("text_threshold must lie in (0, 1]");
  weights.validate();
  difficulty.validate();
  if (workers == 0) throw ConfigError("workers must be at least 1");
  pipeline.validate();
}

EvalConfig parse_config(std::string_view text) {
  const json doc = parse_json_text(text);
  require_object(doc, "");
  require_schema(doc, kConfigSchema);
  EvalConfig c;
  if (auto p = doc.find("providers"); p != doc.end()) {
    if (!p->is_object()) throw ConfigError("/providers: expected an object");
    if (auto it = p->find("embedding"); it != p->end())
      c.embedding = provider_from_json(*it, "/providers/embedding", {"trigram", "exact", "remote"});
    if (auto it = p->find("judge"); it != p->end())
      c.judge = provider_from_json(*it, "/providers/judge", {"constant", "remote"});
    if (auto it = p->find("perceptual"); it != p->end())
      c.perceptual = provider_from_json(*it, "/providers/perceptual", {"byte_histogram", "remote"});
    if (auto it = p->find("image_text"); it != p->end())
      c.image_text = provider_from_json(*it, "/providers/image_text", {"constant", "remote"});
    if (c.judge && c.judge->kind == "constant" && !(c.judge->value >= 0 && c.judge->value <= 1))
      throw ConfigError("/providers/judge/value must lie in [0, 1]");
    if (c.image_text && c.image_text->kind == "constant" && !(c.image_text->value >= -1 && c.image_text->value <= 1))
      throw ConfigError("/providers/image_text/value must lie in [-1, 1]");
  }
  as_config_error([&] {
    if (auto m = doc.find("match"); m != doc.end()) {
      require_object(*m, "/match");
      c.match.node_threshold = get_optional_number(*m, "node_threshold", "/match").value_or(c.match.node_threshold);
      c.match.allow_reachability = get_bool_or(*m, "allow_reachability", c.match.allow_reachability, "/match");
      const double len = get_optional_number(*m, "max_path_length", "/match").value_or(double(c.match.max_path_length));
      if (len < 0 || len != std::floor(len)) throw ConfigError("/match/max_path_length must be a whole number");
      c.match.max_path_length = static_cast<std::size_t>(len);
    }
    c.text_threshold = get_optional_number(doc, "text_threshold", "").value_or(c.text_threshold);
    if (auto d = doc.find("difficulty"); d != doc.end()) {
      require_object(*d, "/difficulty");
      auto count = [&](const char* key, std::size_t fallback) {
        const double v = get_optional_number(*d, key, "/difficulty").value_or(double(fallback));
        if (v < 0 || v != std::floor(v)) throw ConfigError(std::string("/difficulty/") + key + " must be a whole number");
        return static_cast<std::size_t>(v);
      };
      c.difficulty.easy_max_nodes = count("easy_max_nodes", c.difficulty.easy_max_nodes);
      c.difficulty.hard_min_nodes = count("hard_min_nodes", c.difficulty.hard_min_nodes);
      c.difficulty.hard_min_branching =
          get_optional_number(*d, "hard_min_branching", "/difficulty").value_or(c.difficulty.hard_min_branching);
    }
    const double workers = get_optional_number(doc, "workers", "").value_or(1);
    if (workers < 1 || workers != std::floor(workers)) throw ConfigError("workers must be a positive whole number");
    c.workers = static_cast<std::size_t>(workers);
    if (auto p = doc.find("pipeline"); p != doc.end()) {
      require_object(*p, "/pipeline");
      if (auto ds = p->find("disabled_stages"); ds != p->end()) {
        require_array(*ds, "/pipeline/disabled_stages");
        for (const auto& s : *ds) {
          if (!s.is_string()) throw ConfigError("/pipeline/disabled_stages: expected stage names");
          auto a = parse_agent(s.get<std::string>());
          if (!a) throw ConfigError("stage '" + s.get<std::string>() + "' cannot be disabled");
          c.pipeline.disabled.insert(*a);
        }
      }
      c.pipeline.iou_threshold = get_optional_number(*p, "iou_threshold", "/pipeline").value_or(c.pipeline.iou_threshold);
      c.pipeline.grounding_radius =
          get_optional_number(*p, "grounding_radius", "/pipeline").value_or(c.pipeline.grounding_radius);
      c.pipeline.grounding_threshold =
          get_optional_number(*p, "grounding_threshold", "/pipeline").value_or(c.pipeline.grounding_threshold);
      c.pipeline.keep_higher_confidence_bbox =
          get_bool_or(*p, "keep_higher_confidence_bbox", c.pipeline.keep_higher_confidence_bbox, "/pipeline");
    }
    return 0;
  });
  if (auto w = doc.find("weights"); w != doc.end()) c.weights = as_config_error([&] { return AggregationWeights::from_json(*w, "/weights"); });
  c.validate();
  return c;
}

EvalConfig load_config(const fs::path& path) { return parse_config(read_text_file(path)); }

ordered_json EvalConfig::to_json() const {
  ordered_json j;
  j["schema_version"] = std::string(kConfigSchema);
  ordered_json p;
  p["embedding"] = provider_to_json(embedding);
  p["judge"] = judge ? provider_to_json(*judge) : ordered_json(nullptr);
  p["perceptual"] = provider_to_json(perceptual);
  p["image_text"] = image_text ? provider_to_json(*image_text) : ordered_json(nullptr);
  j["providers"] = p;
  j["match"] = ordered_json{{"node_threshold", match.node_threshold},
                            {"allow_reachability", match.allow_reachability},
                            {"max_path_length", match.max_path_length}};
  j["text_threshold"] = text_threshold;
  j["weights"] = weights.to_json();
  j["perceptual_normalization"] = "1 - min(distance, 1)";
  j["semantic_normalization"] = "(cos + 1) / 2";
  j["difficulty"] = ordered_json{{"easy_max_nodes", difficulty.easy_max_nodes},
                                 {"hard_min_nodes", difficulty.hard_min_nodes},
                                 {"hard_min_branching", difficulty.hard_min_branching}};
  j["workers"] = workers;
  auto disabled = ordered_json::array();
  for (Agent a : pipeline.disabled) disabled.push_back(std::string(to_string(a)));
  j["pipeline"] = ordered_json{{"disabled_stages", disabled},
                               {"iou_threshold", pipeline.iou_threshold},
                               {"grounding_radius", pipeline.grounding_radius},
                               {"grounding_threshold", pipeline.grounding_threshold},
                               {"keep_higher_confidence_bbox", pipeline.keep_higher_confidence_bbox},
                               {"grounding_mode", "containment_then_nearest"}};
  return j;
}

// ---------------------------------------------------------------------------
// Providers

namespace {

class Gate {
 public:
  explicit Gate(std::size_t limit) : slots_(static_cast<std::ptrdiff_t>(limit)) {}
  template <class F>
  auto run(F&& f) const {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return f();
  }

 private:
  mutable std::counting_semaphore<> slots_;
};

class ThrottledJudge final : public JudgeProvider {
 public:
  ThrottledJudge(std::shared_ptr<const JudgeProvider> inner, std::size_t limit)
      : inner_(std::move(inner)), gate_(limit) {}
  std::string id() const override { return inner_->id(); }
  double alignment(std::string_view g, std::string_view p) const override {
    return gate_.run([&] { return inner_->alignment(g, p); });
  }
  double flow(std::string_view i, std::string_view p) const override {
    return gate_.run([&] { return inner_->flow(i, p); });
  }

 private:
  std::shared_ptr<const JudgeProvider> inner_;
  Gate gate_;
};

class ThrottledPerceptual final : public PerceptualProvider {
 public:
  ThrottledPerceptual(std::shared_ptr<const PerceptualProvider> inner, std::size_t limit)
      : inner_(std::move(inner)), gate_(limit) {}
  std::string id() const override { return inner_->id(); }
  double distance(std::string_view a, std::string_view b) const override {
    return gate_.run([&] { return inner_->distance(a, b); });
  }

 private:
  std::shared_ptr<const PerceptualProvider> inner_;
  Gate gate_;
};

class ThrottledImageText final : public ImageTextProvider {
 public:
  ThrottledImageText(std::shared_ptr<const ImageTextProvider> inner, std::size_t limit)
      : inner_(std::move(inner)), gate_(limit) {}
  std::string id() const override { return inner_->id(); }
  double cosine(std::string_view i, std::string_view t) const override {
    return gate_.run([&] { return inner_->cosine(i, t); });
  }

 private:
  std::shared_ptr<const ImageTextProvider> inner_;
  Gate gate_;
};

template <class Wrapper, class P>
std::shared_ptr<const P> throttle(std::shared_ptr<const P> p) {
  const auto limit = p->max_concurrency();
  if (limit == 0) return p;
  return std::make_shared<Wrapper>(std::move(p), limit);
}

}  // namespace

std::map<std::string, std::string> ProviderSet::ids() const {
  std::map<std::string, std::string> out;
  out["embedding"] = embedding ? embedding->id() : "none";
  out["judge"] = judge ? judge->id() : "none";
  out["perceptual"] = perceptual ? perceptual->id() : "none";
  out["image_text"] = image_text ? image_text->id() : "none";
  return out;
}

ProviderSet make_providers(const EvalConfig& c) {
  ProviderSet s;
  if (c.embedding.kind == "trigram") {
    s.embedding = std::make_shared<TrigramEmbedder>();
  } else if (c.embedding.kind == "exact") {
    s.embedding = std::make_shared<ExactLabelEmbedder>();
  } else {
    auto e = std::make_shared<RemoteEmbedder>(*c.embedding.remote);
    const auto limit = e->max_concurrency();
    s.embedding = limit ? std::shared_ptr<const EmbeddingProvider>(
                              std::make_shared<ThrottledEmbedder>(e, static_cast<std::ptrdiff_t>(limit)))
                        : e;
  }
  if (c.judge) {
    if (c.judge->kind == "constant")
      s.judge = std::make_shared<ConstantJudge>(c.judge->value);
    else
      s.judge = throttle<ThrottledJudge>(std::shared_ptr<const JudgeProvider>(std::make_shared<RemoteJudge>(*c.judge->remote)));
  }
  if (c.perceptual.kind == "byte_histogram")
    s.perceptual = std::make_shared<ByteHistogramPerceptual>();
  else
    s.perceptual = throttle<ThrottledPerceptual>(
        std::shared_ptr<const PerceptualProvider>(std::make_shared<RemotePerceptual>(*c.perceptual.remote)));
  if (c.image_text) {
    if (c.image_text->kind == "constant")
      s.image_text = std::make_shared<ConstantImageText>(c.image_text->value);
    else
      s.image_text = throttle<ThrottledImageText>(
          std::shared_ptr<const ImageTextProvider>(std::make_shared<RemoteImageText>(*c.image_text->remote)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct ItemFailure {
  std::string kind;
  std::string message;
};

std::string read_required(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw ItemFailure{"load", std::string("no ") + what + " given"};
  try {
    return read_text_file(*p);
  } catch (const NotFoundError& e) {
    throw ItemFailure{"load", std::string(what) + ": " + e.what()};
  }
}

DiagramGraph parse_graph_at(const std::string& text, const fs::path& path) {
  try {
    return parse_graph_document(text);
  } catch (const Error& e) {
    throw ItemFailure{"parse", path.string() + ": " + e.what()};
  }
}

}  // namespace

ItemResult evaluate_item(const EvalItem& item, const EvalConfig& config, const ProviderSet& providers) {
  ItemResult r;
  r.item_id = item.item_id;
  r.model_id = item.model_id;
  r.domain = item.domain;
  r.difficulty = item.difficulty;

  std::optional<DiagramGraph> canonical, predicted;
  auto load_canonical = [&]() -> const DiagramGraph& {
    if (!canonical) canonical = parse_graph_at(read_required(item.canonical, "canonical graph"), *item.canonical);
    return *canonical;
  };
  auto load_predicted = [&]() -> const DiagramGraph& {
    if (predicted) return *predicted;
    if (item.predicted) {
      predicted = parse_graph_at(read_required(item.predicted, "predicted graph"), *item.predicted);
    } else if (item.figure_bundle) {
      FigureBundle bundle;
      try {
        bundle = load_figure_bundle(item.figure_bundle->string());
      } catch (const NotFoundError& e) {
        throw ItemFailure{"load", e.what()};
      } catch (const Error& e) {
        throw ItemFailure{"parse", item.figure_bundle->string() + ": " + e.what()};
      }
      PipelineConfig pc = config.pipeline;
      pc.graph_id = item.item_id;
      predicted = run_round_trip(bundle, fixture_stages(bundle), *providers.embedding, pc).graph;
    } else {
      throw ItemFailure{"load", "no predicted graph or figure bundle given"};
    }
    return *predicted;
  };

  try {
    ScoreReport s;
    if (item.precomputed.s_graph) {
      s.s_graph = *item.precomputed.s_graph;
    } else {
      const auto& ref = load_canonical();
      const auto& pred = load_predicted();
      auto m = match_graphs(pred, ref, *providers.embedding, config.match, config.weights.graph);
      s.s_graph = m.graph_score;
      s.node = m.node;
      s.edge = m.edge;
      r.match = std::move(m);
    }
    if (!r.difficulty && item.canonical) r.difficulty = difficulty_level(graph_stats(load_canonical()), config.difficulty);

    std::optional<std::string> prompt_text;
    auto load_prompt = [&]() -> const std::string& {
      if (!prompt_text) prompt_text = read_required(item.prompt, "prompt");
      return *prompt_text;
    };

    if (item.precomputed.s_text) {
      s.s_text = *item.precomputed.s_text;
    } else {
      StructuredPrompt prompt;
      try {
        prompt = parse_prompt_document(load_prompt());
      } catch (const ParseError& e) {
        throw ItemFailure{"parse", item.prompt->string() + ": " + e.what()};
      }
      const auto& pred = load_predicted();
      s.coverage = coverage(pred, prompt, *providers.embedding, config.text_threshold);
      s.faithfulness = faithfulness(pred, prompt, *providers.embedding, config.text_threshold);
      if (item.precomputed.alignment) {
        s.alignment = *item.precomputed.alignment;
      } else {
        if (!providers.judge) throw ItemFailure{"config", "alignment needs a judge provider or a precomputed value"};
        s.alignment = providers.judge->alignment(serialize_graph(pred), load_prompt());
      }
      s.s_text = text_score(s.coverage->value, s.faithfulness->value, *s.alignment, config.weights);
    }

    if (item.precomputed.s_image) {
      s.s_image = *item.precomputed.s_image;
    } else {
      std::optional<std::string> image;
      auto load_image = [&]() -> const std::string& {
        if (!image) image = read_required(item.image, "image");
        return *image;
      };
      double cos;
      if (item.precomputed.semantic_cosine) {
        cos = *item.precomputed.semantic_cosine;
      } else {
        if (!providers.image_text)
          throw ItemFailure{"config", "semantic consistency needs an image_text provider or a precomputed value"};
        cos = providers.image_text->cosine(load_image(), load_prompt());
      }
      s.semantic = rescale_cosine(cos);
      if (item.precomputed.flow) {
        s.flow = *item.precomputed.flow;
      } else {
        if (!providers.judge) throw ItemFailure{"config", "flow needs a judge provider or a precomputed value"};
        s.flow = providers.judge->flow(load_image(), load_prompt());
      }
      double distance;
      if (item.precomputed.perceptual_distance) {
        distance = *item.precomputed.perceptual_distance;
      } else {
        const auto reference = read_required(item.reference_image, "reference image");
        distance = providers.perceptual->distance(load_image(), reference);
      }
      s.perceptual = perceptual_similarity(distance);
      s.s_image = image_score(*s.semantic, *s.flow, distance, config.weights);
    }

    s.s_overall = overall_score(s.s_graph, s.s_text, s.s_image, config.weights);
    r.scores = std::move(s);
    r.evaluated = true;
  } catch (const ItemFailure& f) {
    r.errors.push_back({f.kind, f.message});
  } catch (const ProviderError& e) {
    r.errors.push_back({std::string("provider:") + to_string(e.kind()), e.what()});
  } catch (const PipelineError& e) {
    r.errors.push_back({"pipeline:" + e.stage(), e.what()});
  } catch (const ContractError& e) {
    r.errors.push_back({"contract", e.what()});
  } catch (const std::exception& e) {
    r.errors.push_back({"internal", e.what()});
  }
  if (!r.evaluated) {
    r.scores.reset();
    r.match.reset();
  }
  return r;
}

std::vector<LeaderboardRow> build_leaderboard(const std::vector<ItemResult>& items) {
  std::map<std::string, std::vector<const ItemResult*>> by_model;
  for (const auto& it : items) by_model[it.model_id].push_back(&it);
  std::vector<LeaderboardRow> rows;
  for (const auto& [model, list] : by_model) {
    LeaderboardRow row;
    row.model_id = model;
    for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) row.bins[d] = {};
    std::map<Difficulty, double> bin_sum;
    double g = 0, t = 0, im = 0, o = 0;
    for (const auto* it : list) {
      if (!it->evaluated) {
        ++row.unevaluated;
        continue;
      }
      ++row.evaluated;
      g += it->scores->s_graph;
      t += it->scores->s_text;
      im += it->scores->s_image;
      o += it->scores->s_overall;
      if (it->difficulty) {
        ++row.bins[*it->difficulty].count;
        bin_sum[*it->difficulty] += it->scores->s_graph;
      }
    }
    std::size_t nonempty = 0;
    double bin_mean_sum = 0;
    for (auto& [d, b] : row.bins) {
      if (!b.count) continue;
      b.s_graph = bin_sum[d] / static_cast<double>(b.count);
      bin_mean_sum += b.s_graph;
      ++nonempty;
    }
    if (row.evaluated) {
      const double n = static_cast<double>(row.evaluated);
      row.s_graph_avg = g / n;
      row.s_text = t / n;
      row.s_image = im / n;
      row.s_overall = o / n;
    }
    row.s_graph_bin_mean = nonempty ? bin_mean_sum / static_cast<double>(nonempty) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t Report::evaluated() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const ItemResult& r) { return r.evaluated; }));
}

namespace {

ordered_json prf_json(const Prf& p) {
  return ordered_json{{"precision", quantize(p.precision)}, {"recall", quantize(p.recall)}, {"f1", quantize(p.f1)}};
}

ordered_json match_json(const MatchResult& m) {
  ordered_json j;
  j["node"] = prf_json(m.node);
  j["edge"] = prf_json(m.edge);
  j["graph_score"] = quantize(m.graph_score);
  auto pairs = ordered_json::array();
  for (const auto& p : m.matching.pairs)
    pairs.push_back(ordered_json{{"pred", p.pred_id}, {"ref", p.ref_id}, {"similarity", quantize(p.similarity)}});
  j["node_pairs"] = pairs;
  auto verdicts = ordered_json::array();
  for (const auto& v : m.edge_verdicts)
    verdicts.push_back(ordered_json{{"edge", v.pred_edge_id},
                                    {"verdict", std::string(to_string(v.verdict))},
                                    {"witness_path", v.witness_path},
                                    {"covered_ref_edges", v.covered_ref_edges}});
  j["edge_verdicts"] = verdicts;
  return j;
}

ordered_json item_json(const ItemResult& r) {
  ordered_json j;
  j["item_id"] = r.item_id;
  j["model_id"] = r.model_id;
  j["domain"] = r.domain;
  j["difficulty"] = r.difficulty ? ordered_json(std::string(to_string(*r.difficulty))) : ordered_json(nullptr);
  j["status"] = r.evaluated ? "evaluated" : "unevaluated";
  auto errors = ordered_json::array();
  for (const auto& e : r.errors) errors.push_back(ordered_json{{"kind", e.kind}, {"message", e.message}});
  j["errors"] = errors;
  j["scores"] = r.scores ? r.scores->to_json() : ordered_json(nullptr);
  j["match"] = r.match ? match_json(*r.match) : ordered_json(nullptr);
  return j;
}

ordered_json leaderboard_json(const std::vector<LeaderboardRow>& rows) {
  auto arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j;
    j["model_id"] = row.model_id;
    ordered_json bins;
    for (const auto& [d, b] : row.bins)
      bins[std::string(to_string(d))] = ordered_json{{"count", b.count}, {"s_graph", quantize(b.s_graph)}};
    j["bins"] = bins;
    j["s_graph_avg"] = quantize(row.s_graph_avg);
    j["s_graph_bin_mean"] = quantize(row.s_graph_bin_mean);
    j["s_text"] = quantize(row.s_text);
    j["s_image"] = quantize(row.s_image);
    j["s_overall"] = quantize(row.s_overall);
    j["evaluated"] = row.evaluated;
    j["unevaluated"] = row.unevaluated;
    arr.push_back(std::move(j));
  }
  return arr;
}

ordered_json notes_json(const std::map<std::string, std::string>& provider_ids) {
  auto notes = ordered_json::array();
  notes.push_back("fusion overlap, text grounding and tie-break rules are implementation-defined");
  if (provider_ids.count("embedding") && provider_ids.at("embedding").rfind("trigram-fallback", 0) == 0)
    notes.push_back("embedding provider is a lexical trigram fallback, not a sentence-embedding model");
  return notes;
}

ordered_json summary_json(std::size_t total, std::size_t evaluated) {
  return ordered_json{{"items", total}, {"evaluated", evaluated}, {"unevaluated", total - evaluated}};
}

}  // namespace

ordered_json Report::to_json() const {
  ordered_json j;
  j["schema_version"] = std::string(kReportSchema);
  j["config_fingerprint"] = config_fingerprint;
  j["config"] = config;
  ordered_json p;
  for (const auto& [k, v] : provider_ids) p[k] = v;
  j["providers"] = p;
  j["notes"] = notes_json(provider_ids);
  auto arr = ordered_json::array();
  for (const auto& it : items) arr.push_back(item_json(it));
  j["items"] = arr;
  j["leaderboard"] = leaderboard_json(leaderboard);
  j["summary"] = summary_json(items.size(), evaluated());
  return j;
}

std::string Report::serialize() const { return dump_document(to_json()); }

Report evaluate(const std::vector<EvalItem>& items, const EvalConfig& config, const ProviderSet& providers) {
  config.validate();
  std::vector<const EvalItem*> order;
  for (const auto& it : items) order.push_back(&it);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->item_id < b->item_id; });

  Report report;
  report.config = config.to_json();
  report.provider_ids = providers.ids();
  ordered_json stamp{{"config", report.config}, {"providers", ordered_json(report.provider_ids)}};
  report.config_fingerprint = fingerprint(stamp.dump());
  report.items.resize(order.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) report.items[i] = evaluate_item(*order[i], config, providers);
  };
  const std::size_t n = std::min(config.workers, std::max<std::size_t>(order.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  report.leaderboard = build_leaderboard(report.items);
  return report;
}

Report evaluate(const std::vector<EvalItem>& items, const EvalConfig& config) {
  return evaluate(items, config, make_providers(config));
}

std::string merge_reports(const std::vector<std::string>& docs, bool allow_mixed_providers) {
  if (docs.empty()) throw ConfigError("nothing to merge");
  std::vector<json> parsed;
  for (const auto& d : docs) {
    json j = parse_json_text(d);
    require_object(j, "");
    require_schema(j, kReportSchema);
    parsed.push_back(std::move(j));
  }
  const json& providers = require(parsed.front(), "providers", "");
  bool mixed = false;
  for (const auto& p : parsed)
    if (require(p, "providers", "") != providers) mixed = true;
  if (mixed && !allow_mixed_providers)
    throw ConfigError("reports were produced with different providers; pass the explicit flag to merge anyway");

  std::vector<std::pair<std::string, ordered_json>> items;
  std::vector<ItemResult> results;
  std::set<std::string> seen;
  auto fingerprints = ordered_json::array();
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    fingerprints.push_back(get_string(parsed[k], "config_fingerprint", ""));
    const auto& arr = require_array(require(parsed[k], "items", ""), "/items");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = child("/items", i);
      ItemResult r;
      r.item_id = get_string(arr[i], "item_id", path);
      if (!seen.insert(r.item_id).second) throw ConfigError("item '" + r.item_id + "' appears in more than one report");
      r.model_id = get_string(arr[i], "model_id", path);
      if (auto d = arr[i].find("difficulty"); d != arr[i].end() && d->is_string())
        r.difficulty = parse_difficulty(d->get<std::string>());
      r.evaluated = get_string(arr[i], "status", path) == "evaluated";
      if (r.evaluated) {
        const auto& sc = require(arr[i], "scores", path);
        ScoreReport s;
        s.s_graph = get_number(sc, "s_graph", child(path, "scores"));
        s.s_text = get_number(sc, "s_text", child(path, "scores"));
        s.s_image = get_number(sc, "s_image", child(path, "scores"));
        s.s_overall = get_number(sc, "s_overall", child(path, "scores"));
        r.scores = s;
      }
      items.emplace_back(r.item_id, ordered_json::parse(arr[i].dump()));
      results.push_back(std::move(r));
    }
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t evaluated = 0;
  for (const auto& r : results) evaluated += r.evaluated;

  ordered_json j;
  j["schema_version"] = std::string(kReportSchema);
  j["config_fingerprint"] = fingerprint(fingerprints.dump());
  j["merged_from"] = fingerprints;
  j["mixed_providers"] = mixed;
  j["providers"] = ordered_json::parse(providers.dump());
  auto arr = ordered_json::array();
  for (auto& [_, it] : items) arr.push_back(std::move(it));
  j["items"] = arr;
  j["leaderboard"] = leaderboard_json(build_leaderboard(results));
  j["summary"] = summary_json(results.size(), evaluated);
  return dump_document(j);
}

// ---------------------------------------------------------------------------
// Stats

StatsResult collect_stats(const fs::path& dir, const DifficultyConfig& config) {
  config.validate();
  if (!fs::is_directory(dir)) throw NotFoundError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  StatsResult s;
  for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) s.difficulty[d] = 0;
  for (const auto& f : files) {
    const auto rel = f.lexically_relative(dir).generic_string();
    try {
      const auto g = load_graph_file(f.string());
      const auto st = graph_stats(g);
      ++s.graphs;
      ++s.node_histogram[st.node_count];
      ++s.edge_histogram[st.edge_count];
      ++s.difficulty[difficulty_level(st, config)];
      if (!st.is_linear) ++s.non_linear;
    } catch (const Error& e) {
      s.errors.emplace_back(rel, e.what());
    }
  }
  return s;
}

ordered_json StatsResult::to_json(const DifficultyConfig& config) const {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    auto arr = ordered_json::array();
    for (const auto& [v, c] : h) arr.push_back(ordered_json::array({v, c}));
    return arr;
  };
  ordered_json j;
  j["schema_version"] = std::string(kStatsSchema);
  j["graphs"] = graphs;
  j["node_count_histogram"] = hist(node_histogram);
  j["edge_count_histogram"] = hist(edge_histogram);
  ordered_json d;
  for (const auto& [k, v] : difficulty) d[std::string(to_string(k))] = v;
  j["difficulty"] = d;
  j["difficulty_config"] = ordered_json{{"easy_max_nodes", config.easy_max_nodes},
                                        {"hard_min_nodes", config.hard_min_nodes},
                                        {"hard_min_branching", config.hard_min_branching}};
  j["non_linear"] = non_linear;
  j["non_linear_fraction"] = quantize(non_linear_fraction());
  auto errs = ordered_json::array();
  for (const auto& [f, m] : errors) errs.push_back(ordered_json{{"file", f}, {"message", m}});
  j["errors"] = errs;
  return j;
}

}  // namespace sciflow

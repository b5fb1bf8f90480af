#include "fixtures.hpp"

#include <cstdlib>
#include <algorithm>
#include <fstream>
#include <random>
#include <regex>
#include <stdexcept>

#include "sciflow/graph_io.hpp"
#include "sciflow/harness.hpp"
#include "sciflow/json_io.hpp"
#include "sciflow/metrics.hpp"

namespace fs = std::filesystem;

namespace sciflow::testing {

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "sciflow-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

const std::vector<std::string>& distinct_labels() {
  static const std::vector<std::string> labels = [] {
    const std::vector<std::string> candidates = {
        "Tokenizer", "Backbone", "Pooling",  "Softmax",  "Dropout", "Retriever", "Planner",   "Critic",
        "Buffer",    "Scheduler", "Sampler", "Renderer", "Camera",  "Lidar",     "Radar",     "Graph",
        "Query",     "Memory",   "Gate",     "Router",   "Expert",  "Mixer",     "Projector", "Vocab",
        "Logits",    "Prior",    "Kernel",   "Wavelet",  "Spectrum", "Clock",    "Sensor",    "Actuator",
        "Reward",    "Policy",   "Cache",    "Shard",    "Queue",   "Worker",    "Ledger",    "Oracle",
        "Judge",     "Verifier", "Summary",  "Caption",  "Mask",    "Crop",      "Resize",    "Jitter",
        "Blur",      "Patch",    "Batch",    "Epoch",    "Anchor",  "Quantizer", "Lexicon",   "Fusion"};
    const TrigramEmbedder embedder;
    const auto vectors = embedder.embed(candidates);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool clash = false;
      for (auto j : kept) clash = clash || rescale_cosine(cosine(vectors[i], vectors[j])) >= 0.6;
      if (!clash) kept.push_back(i);
    }
    std::vector<std::string> out;
    for (auto i : kept) out.push_back(candidates[i]);
    return out;
  }();
  return labels;
}

namespace {

BBox oriented(bool lr, double a0, double c0, double a1, double c1) {
  return lr ? BBox{a0, c0, a1, c1} : BBox{c0, a0, c1, a1};
}

}  // namespace

SyntheticFigure synthetic_figure(int index) {
  const auto& words = distinct_labels();
  const bool lr = index % 2 == 0;
  const int boxes = 3 + index % 4;
  static const char* shapes[] = {"rect", "rounded", "diamond"};

  SyntheticFigure f;
  f.name = "figure-" + std::to_string(index);
  f.image_bytes = "synthetic figure " + std::to_string(index) + std::string(64, static_cast<char>('a' + index));
  f.perception.layout = {lr ? FlowDirection::left_right : FlowDirection::top_down, FigureSize{1200, 800}};
  f.reference.graph_id = f.name;

  auto& regions = f.perception.regions;
  auto& texts = f.perception.texts;
  for (int i = 0; i < boxes; ++i) {
    const double a0 = 0.04 + 0.16 * i, a1 = a0 + 0.10;
    const std::string shape = shapes[(i + index) % 3];
    const std::string label = words[(index * 7 + i) % words.size()];
    regions.push_back({oriented(lr, a0, 0.40, a1, 0.50), shape, 0.9});
    if (i % 2 == 0) regions.push_back({oriented(lr, a0 + 0.004, 0.40, a1 + 0.004, 0.50), "rect", 0.6});
    texts.push_back({oriented(lr, a0 + 0.01, 0.43, a1 - 0.01, 0.47), label, 0.95});
    if (i == 1) texts.push_back({oriented(lr, a0 + 0.012, 0.43, a1 - 0.008, 0.47), label, 0.7});
    f.reference.nodes.push_back({"b" + std::to_string(i), label, node_type_for_shape(shape), std::nullopt, false});
  }
  for (int i = 0; i + 1 < boxes; ++i) {
    const double a0 = 0.04 + 0.16 * i + 0.11, a1 = 0.04 + 0.16 * (i + 1) - 0.01;
    const bool reversed = (i + index) % 4 == 3;
    const std::string dir = lr ? (reversed ? "arrow:left" : "arrow:right") : (reversed ? "arrow:up" : "arrow:down");
    regions.push_back({oriented(lr, a0, 0.44, a1, 0.46), dir, 0.85});
    const std::string s = "b" + std::to_string(reversed ? i + 1 : i), t = "b" + std::to_string(reversed ? i : i + 1);
    f.reference.edges.push_back({"r" + std::to_string(i), s, t, true, false});
  }
  for (int j = 0; j < 1 + index % 2; ++j) {
    const std::string label = words[(index * 7 + 10 + j) % words.size()];
    texts.push_back({oriented(lr, 0.10 + 0.45 * j, 0.85, 0.30 + 0.45 * j, 0.90), label, 0.9});
    f.reference.nodes.push_back({"t" + std::to_string(j), label, NodeType::annotation, std::nullopt, false});
  }
  regions.push_back({oriented(lr, 0.45, 0.05, 0.53, 0.12), "ellipse", 0.8});
  f.reference.nodes.push_back({"icon", "", NodeType::data, std::nullopt, false});
  f.reference = canonicalized(std::move(f.reference));
  // Snap to the on-disk precision so that a written bundle loads back equal.
  f.perception = parse_perception_fixture(serialize_perception_fixture(f.perception));
  return f;
}

fs::path write_figure_bundle(const fs::path& dir, const SyntheticFigure& figure) {
  const auto root = dir / figure.name;
  write_file(root / "figure.png", figure.image_bytes);
  write_file(root / "perception.json", serialize_perception_fixture(figure.perception));
  return root;
}

namespace {

class ShufflingAgent final : public PerceptionAgent {
 public:
  ShufflingAgent(std::shared_ptr<const PerceptionAgent> inner, unsigned seed) : inner_(std::move(inner)), seed_(seed) {}
  Agent agent() const override { return inner_->agent(); }
  std::vector<BlackboardEntry> perceive(std::string_view image) const override {
    auto entries = inner_->perceive(image);
    std::mt19937 rng(seed_);
    std::shuffle(entries.begin(), entries.end(), rng);
    return entries;
  }

 private:
  std::shared_ptr<const PerceptionAgent> inner_;
  unsigned seed_;
};

}  // namespace

std::shared_ptr<const PerceptionAgent> shuffled_agent(std::shared_ptr<const PerceptionAgent> inner, unsigned seed) {
  return std::make_shared<ShufflingAgent>(std::move(inner), seed);
}

RoundTripStages shuffled_stages(const RoundTripStages& stages, unsigned seed) {
  RoundTripStages out;
  out.topology = stages.topology;
  for (auto it = stages.perception.rbegin(); it != stages.perception.rend(); ++it)
    out.perception.push_back(shuffled_agent(*it, seed++));
  return out;
}

DiagramGraph benchmark_graph(int index) {
  const auto& words = distinct_labels();
  DiagramGraph g;
  g.graph_id = "bench-" + std::to_string(index);
  std::size_t n;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  switch (index % 3) {
    case 0:
      n = 3 + index % 6;
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      break;
    case 1:
      n = 9 + index % 5;
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      edges.push_back({0, 2});
      edges.push_back({n - 3, n - 1});
      break;
    default:
      n = 18 + index % 4;
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      for (std::size_t i = 0; i + 2 < n; i += 2) edges.push_back({i, i + 2});
      break;
  }
  auto id = [](std::size_t i) { return "c" + std::string(i < 10 ? "0" : "") + std::to_string(i); };
  for (std::size_t i = 0; i < n; ++i)
    g.nodes.push_back({id(i), words[(i + index) % words.size()], NodeType::module, std::nullopt, false});
  for (std::size_t k = 0; k < edges.size(); ++k)
    g.edges.push_back({"ce" + std::to_string(k), id(edges[k].first), id(edges[k].second), true, false});
  return canonicalized(std::move(g));
}

Benchmark write_benchmark(const fs::path& dir, int items) {
  Benchmark b;
  b.systems = {"perfect", "node_drop", "edge_reversal", "hallucinated_edge"};
  b.manifest = dir / "manifest.json";
  b.config = dir / "config.json";

  ordered_json manifest;
  manifest["schema_version"] = std::string(kManifestSchema);
  manifest["items"] = ordered_json::array();
  for (int k = 0; k < items; ++k) {
    const auto ref = benchmark_graph(k);
    const std::string base = "item" + std::string(k < 10 ? "0" : "") + std::to_string(k);
    write_file(dir / "canonical" / (base + ".json"), serialize_graph(ref));

    StructuredPrompt prompt;
    prompt.prompt_id = base;
    for (const auto& n : ref.nodes) prompt.components.push_back({n.label, ""});
    for (const auto& e : ref.edges)
      prompt.relations.push_back({ref.find_node(e.source)->label, ref.find_node(e.target)->label});
    write_file(dir / "prompts" / (base + ".json"), serialize_prompt(prompt));
    const std::string image = "rendered " + base + std::string(100 + k, 'x');
    write_file(dir / "images" / (base + ".png"), image);

    for (const auto& system : b.systems) {
      DiagramGraph pred = ref;
      pred.provenance = Provenance::predicted;
      if (system == "node_drop") {
        const std::string drop = pred.nodes[pred.nodes.size() / 2].id;
        std::erase_if(pred.nodes, [&](const Node& n) { return n.id == drop; });
        std::erase_if(pred.edges, [&](const Edge& e) { return e.source == drop || e.target == drop; });
      } else if (system == "edge_reversal") {
        std::swap(pred.edges.front().source, pred.edges.front().target);
      } else if (system == "hallucinated_edge") {
        pred.edges.push_back({"hx", pred.nodes.back().id, pred.nodes.front().id, true, false});
      }
      pred = canonicalized(std::move(pred));
      const std::string item_id = system + "-" + base;
      const auto pred_path = dir / "predicted" / system / (base + ".json");
      write_file(pred_path, serialize_graph(pred));

      ordered_json it;
      it["item_id"] = item_id;
      it["model_id"] = system;
      it["domain"] = k % 2 ? "vision" : "language";
      it["canonical"] = "canonical/" + base + ".json";
      it["predicted"] = fs::relative(pred_path, dir).string();
      it["prompt"] = "prompts/" + base + ".json";
      it["image"] = "images/" + base + ".png";
      it["reference_image"] = "images/" + base + ".png";
      manifest["items"].push_back(it);
    }
  }
  write_file(b.manifest, dump_document(manifest));

  ordered_json config;
  config["schema_version"] = std::string(kConfigSchema);
  config["providers"] = {{"embedding", {{"kind", "trigram"}}},
                         {"judge", {{"kind", "constant"}, {"value", 0.8}}},
                         {"image_text", {{"kind", "constant"}, {"value", 0.5}}},
                         {"perceptual", {{"kind", "byte_histogram"}}}};
  config["workers"] = 2;
  write_file(b.config, dump_document(config));
  return b;
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

IrGraph ir_from_expected(const std::string& json_text) {
  const auto doc = json::parse(json_text);
  IrGraph ir;
  ir.direction = doc.at("direction") == "LR" ? IrDirection::left_right : IrDirection::top_down;
  for (const auto& n : doc.at("nodes"))
    ir.nodes.push_back({n.at("id"), n.at("label"), *parse_shape_hint(n.at("shape").get<std::string>())});
  for (const auto& e : doc.at("edges"))
    ir.edges.push_back({e.at("source"), e.at("target"), *parse_edge_style(e.at("style").get<std::string>())});
  for (const auto& g : doc.at("subgraphs"))
    ir.subgraphs.push_back({g.at("label"), g.at("members").get<std::vector<std::string>>()});
  return ir;
}

std::pair<std::size_t, std::size_t> expected_error_location(const std::string& text) {
  static const std::regex marker(R"(%% expect-error: (\d+):(\d+))");
  std::smatch m;
  if (!std::regex_search(text, m, marker)) throw std::runtime_error("missing expect-error marker");
  return {std::stoul(m[1]), std::stoul(m[2])};
}

}  // namespace sciflow::testing

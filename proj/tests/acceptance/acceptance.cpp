// Acceptance run: one PASS/FAIL line per criterion, with its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "sciflow/error.hpp"
#include "sciflow/graph_io.hpp"
#include "sciflow/harness.hpp"
#include "sciflow/match.hpp"
#include "sciflow/mermaid.hpp"
#include "sciflow/metrics.hpp"
#include "sciflow/pipeline.hpp"
#include "sciflow/verify.hpp"

using namespace sciflow;
using namespace sciflow::testing;
namespace fs = std::filesystem;

namespace {

/// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks";
    if (failures_) s << ", " << failures_ << " failed";
    for (const auto& n : notes_) s << "\n      " << n;
    return s.str();
  }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::vector<std::string> notes_;
};

int failed = 0;

void criterion(int number, const char* name, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < budget_s, "took " + std::to_string(secs) + " s");
  const bool pass = c.ok();
  failed += !pass;
  std::printf("%s [%d] %s (%.3f s of %.0f s budget): %s\n", pass ? "PASS" : "FAIL", number, name, secs, budget_s,
              c.summary().c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void reported_overall_scores(Check& c) {
  struct Row {
    const char* system;
    double graph, text, image, overall;
  };
  const Row rows[] = {
      {"Graphviz", 0.091, 0.359, 0.463, 0.283},     {"SDXL", 0.013, 0.001, 0.271, 0.087},
      {"PixArt-Sigma", 0.017, 0.003, 0.287, 0.094}, {"Qwen-Image", 0.081, 0.243, 0.411, 0.229},
      {"Gemini 2.5", 0.106, 0.315, 0.458, 0.274},   {"Gemini 3 Pro", 0.116, 0.347, 0.535, 0.311},
  };
  for (const auto& r : rows) {
    const double got = std::round(overall_score(r.graph, r.text, r.image) * 1000) / 1000;
    c.expect(std::abs(got - r.overall) <= 0.001 + 1e-12, std::string(r.system) + ": " + fmt(got) + " vs " + fmt(r.overall));
  }
}

void convex_weights(Check& c) {
  const AggregationWeights w;
  c.expect(std::abs(w.graph.node + w.graph.edge - 1) < 1e-12, "graph weights");
  c.expect(std::abs(w.text.sum() - 1) < 1e-12, "text weights");
  c.expect(std::abs(w.image.sum() - 1) < 1e-12, "image weights");
  c.expect(std::abs(w.overall.sum() - 1) < 1e-12, "overall weights");

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1), dist(0, 4);
  auto in_hull = [&](double v, std::initializer_list<double> xs, const char* level) {
    const double lo = std::min(xs), hi = std::max(xs);
    c.expect(v >= lo - 1e-12 && v <= hi + 1e-12 && v >= 0 && v <= 1, std::string(level) + " left the hull: " + fmt(v));
  };
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng), x = u(rng), d = dist(rng);
    in_hull(graph_score(a, b), {a, b}, "graph");
    in_hull(text_score(a, b, x), {a, b, x}, "text");
    in_hull(image_score(a, b, d), {a, b, perceptual_similarity(d)}, "image");
    in_hull(overall_score(a, b, x), {a, b, x}, "overall");
  }
}

void matching_oracles(Check& c) {
  const ExactLabelEmbedder exact;
  Rng rng(99);
  for (int trial = 0; trial < 1200; ++trial) {
    const auto [pred, ref] = random_match_pair(rng, 6);
    const auto r = match_graphs(pred, ref, exact);
    const auto o = oracle_match(pred, ref);
    const auto tag = "pair " + std::to_string(trial);
    c.expect(r.node == o.node, tag + ": node P/R/F1");
    c.expect(r.edge == o.edge, tag + ": edge P/R/F1");
  }
  for (int trial = 0; trial < 150; ++trial) {
    RandomGraphSpec spec;
    spec.min_nodes = 2;
    spec.max_nodes = 7;
    spec.edge_prob = std::uniform_real_distribution<double>(0.1, 0.45)(rng);
    spec.self_loops = trial % 3 == 0;
    const auto ref = random_graph(rng, spec);
    const auto probe = all_pairs_probe(ref);
    for (std::size_t len = 2; len <= 6; len += 2) {
      MatchConfig cfg;
      cfg.max_path_length = len;
      const auto r = match_graphs(probe, ref, exact, cfg);
      const auto o = oracle_match(probe, ref, len);
      for (const auto& v : r.edge_verdicts) {
        const auto& ov = o.edges.at(v.pred_edge_id);
        c.expect(to_string(v.verdict) == ov.verdict && v.witness_path == ov.witness,
                 "graph " + std::to_string(trial) + " edge " + v.pred_edge_id + ": " + std::string(to_string(v.verdict)) +
                     " vs " + ov.verdict);
      }
    }
  }
}

void self_match(Check& c) {
  const TrigramEmbedder trigram;
  Rng rng(5);
  RandomGraphSpec spec;
  spec.max_nodes = 12;
  spec.noise_label_prob = 0.15;
  spec.self_loops = true;
  spec.groups = true;
  spec.bboxes = true;
  for (int i = 0; i < 500; ++i) {
    const auto g = random_graph(rng, spec);
    c.expect(validate_graph(g).ok(), "generator produced an invalid graph");
    const double s = match_graphs(g, g, trigram).graph_score;
    c.expect(s == 1.0, "graph " + std::to_string(i) + " self-scores " + fmt(s));
  }
}

void mermaid_corpora(Check& c) {
  const fs::path root = fs::path(SCIFLOW_TEST_DATA) / "mermaid";
  const auto valid = files_with_suffix(root / "valid", ".mmd");
  c.expect(valid.size() >= 50, "valid corpus has " + std::to_string(valid.size()) + " files");
  for (const auto& f : valid) {
    auto expected_path = f;
    expected_path.replace_extension(".expected.json");
    try {
      const auto ir = parse_mermaid(read_text_file(f));
      c.expect(ir == ir_from_expected(read_text_file(expected_path)), f.filename().string() + ": IR differs");
    } catch (const Error& e) {
      c.expect(false, f.filename().string() + ": " + e.what());
    }
  }

  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto ir = random_ir(rng);
    const auto text = emit_mermaid(ir);
    try {
      c.expect(parse_mermaid(text) == ir, "round trip " + std::to_string(i) + " changed the IR");
    } catch (const Error& e) {
      c.expect(false, "round trip " + std::to_string(i) + ": " + e.what());
    }
  }

  const auto invalid = files_with_suffix(root / "invalid", ".mmd");
  c.expect(invalid.size() >= 20, "negative corpus has " + std::to_string(invalid.size()) + " files");
  for (const auto& f : invalid) {
    const auto text = read_text_file(f);
    const auto [line, col] = expected_error_location(text);
    try {
      parse_mermaid(text);
      c.expect(false, f.filename().string() + ": accepted");
    } catch (const SyntaxError& e) {
      c.expect(e.line() == line && e.column() == col,
               f.filename().string() + ": reported " + e.location() + ", expected " + std::to_string(line) + ":" +
                   std::to_string(col));
    }
  }
}

void verification_replay(Check& c) {
  Rng rng(31);
  RandomGraphSpec spec;
  spec.max_nodes = 10;
  spec.groups = true;
  for (int i = 0; i < 1000; ++i) {
    const auto auto_graph = random_graph(rng, spec);
    const auto script = random_edit_script(rng, auto_graph, std::uniform_int_distribution<std::size_t>(0, 15)(rng));
    std::set<std::string> reserved;
    for (const auto& n : auto_graph.nodes) reserved.insert(n.id);
    for (const auto& e : auto_graph.edges) reserved.insert(e.id);
    std::vector<LogEntry> log;
    DiagramGraph g = auto_graph;
    for (const auto& e : script.edits) {
      auto out = apply_edit(g, e, &reserved);
      g = std::move(out.graph);
      log.insert(log.end(), out.entries.begin(), out.entries.end());
    }
    const auto tag = "script " + std::to_string(i);
    const auto replayed = replay(auto_graph, parse_edit_log(serialize_edit_log(log, 1)).first);
    c.expect(serialize_graph(canonicalized(replayed)) == serialize_graph(canonicalized(g)), tag + ": replay differs");

    const auto [on, oe] = oracle_agreement(auto_graph, oracle_replay(auto_graph, script.edits));
    const auto a = agreement(auto_graph, replayed);
    auto same = [](const Agreement& l, const OracleAgreement& o) {
      return l.auto_count == o.auto_count && l.verified_count == o.verified_count && l.retained == o.retained &&
             l.removed == o.removed && l.added == o.added && l.prf == o.prf;
    };
    c.expect(same(a.nodes, on), tag + ": node agreement");
    c.expect(same(a.edges, oe), tag + ": edge agreement");
  }
}

void pipeline_round_trip(Check& c) {
  TempDir dir;
  const TrigramEmbedder trigram;
  for (int i = 0; i < 10; ++i) {
    const auto f = synthetic_figure(i);
    const auto bundle = load_figure_bundle(write_figure_bundle(dir.path(), f).string());
    const auto stages = fixture_stages(bundle);
    const auto tag = f.name;
    const auto baseline = run_round_trip(bundle, stages, trigram);
    const auto bytes = serialize_graph(baseline.graph);
    c.expect(serialize_graph(run_round_trip(bundle, stages, trigram).graph) == bytes, tag + ": second run differs");
    for (unsigned seed = 1; seed <= 4; ++seed)
      c.expect(serialize_graph(run_round_trip(bundle, shuffled_stages(stages, seed * 31 + i), trigram).graph) == bytes,
               tag + ": entry order changed the output");

    const double full = match_graphs(baseline.graph, f.reference, trigram).node.recall;
    for (Agent off : {Agent::text_spotter, Agent::shape_hunter}) {
      PipelineConfig cfg;
      cfg.disabled = {off};
      const double ablated = match_graphs(run_round_trip(bundle, stages, trigram, cfg).graph, f.reference, trigram).node.recall;
      c.expect(ablated < full, tag + ": without " + std::string(to_string(off)) + " recall " + fmt(ablated) +
                                   " is not below " + fmt(full));
    }
  }
}

void end_to_end(Check& c) {
  TempDir dir;
  const auto b = write_benchmark(dir.path(), 20);
  const auto report = evaluate(load_manifest(b.manifest), load_config(b.config));
  c.expect(report.evaluated() == 80, std::to_string(report.evaluated()) + " of 80 items evaluated");
  std::map<std::string, const ItemResult*> by_id;
  for (const auto& it : report.items) by_id[it.item_id] = &it;

  for (int k = 0; k < 20; ++k) {
    const std::string base = "item" + std::string(k < 10 ? "0" : "") + std::to_string(k);
    const auto* perfect = by_id.at("perfect-" + base);
    const auto* drop = by_id.at("node_drop-" + base);
    const auto* rev = by_id.at("edge_reversal-" + base);
    const auto* hall = by_id.at("hallucinated_edge-" + base);
    if (!perfect->match || !drop->match || !rev->match || !hall->match) {
      c.expect(false, base + ": missing match details");
      continue;
    }
    c.expect(perfect->scores->s_graph == 1.0, base + ": perfect s_graph " + fmt(perfect->scores->s_graph));
    c.expect(drop->match->node.f1 < perfect->match->node.f1, base + ": node drop kept node F1");
    c.expect(rev->match->edge.f1 < perfect->match->edge.f1, base + ": reversal kept edge F1");
    c.expect(hall->match->edge.precision < perfect->match->edge.precision, base + ": hallucination kept edge precision");
  }

  std::map<std::string, const LeaderboardRow*> rows;
  for (const auto& row : report.leaderboard) rows[row.model_id] = &row;
  c.expect(rows.size() == 4, std::to_string(rows.size()) + " leaderboard rows");
  if (!rows.count("perfect")) return;
  const double top = rows.at("perfect")->s_graph_avg;
  c.expect(top == 1.0, "leaderboard s_graph for the perfect system is " + fmt(top));
  for (const char* system : {"node_drop", "edge_reversal", "hallucinated_edge"})
    c.expect(rows.count(system) && rows.at(system)->s_graph_avg < top, std::string(system) + " is not below perfect");
}

}  // namespace

int main() {
  criterion(1, "reported overall scores reproduce within 0.001", 1, reported_overall_scores);
  criterion(2, "aggregation weights are convex at every level", 5, convex_weights);
  criterion(3, "matching equals brute-force and path-enumeration oracles", 60, matching_oracles);
  criterion(4, "self-match scores 1 on 500 random graphs", 60, self_match);
  criterion(5, "Mermaid corpus, round trips and located diagnostics", 60, mermaid_corpora);
  criterion(6, "verification agreement and replay", 60, verification_replay);
  criterion(7, "round-trip parsing is reproducible and each agent matters", 60, pipeline_round_trip);
  criterion(8, "end-to-end benchmark separates corrupted systems", 30, end_to_end);
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}

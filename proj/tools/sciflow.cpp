#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "sciflow/error.hpp"
#include "sciflow/harness.hpp"
#include "sciflow/service.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kTotalFailure = 1;
constexpr int kConfigError = 2;

sciflow::VerificationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_evaluate(const std::string& manifest, const std::string& config_path, const std::string& out,
                 const std::vector<std::string>& disabled, int workers) {
  sciflow::EvalConfig config;
  std::vector<sciflow::EvalItem> items;
  sciflow::ProviderSet providers;
  try {
    config = config_path.empty() ? sciflow::EvalConfig{} : sciflow::load_config(config_path);
    for (const auto& name : disabled) {
      auto agent = sciflow::parse_agent(name);
      if (!agent) throw sciflow::ConfigError("stage '" + name + "' cannot be disabled");
      config.pipeline.disabled.insert(*agent);
    }
    if (workers > 0) config.workers = static_cast<std::size_t>(workers);
    config.validate();
    items = sciflow::load_manifest(manifest);
    providers = sciflow::make_providers(config);
  } catch (const sciflow::Error& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }

  const auto report = sciflow::evaluate(items, config, providers);
  sciflow::write_text_file(out, report.serialize());
  for (const auto& item : report.items)
    for (const auto& err : item.errors)
      std::cerr << item.item_id << ": " << err.kind << ": " << err.message << "\n";
  std::cerr << report.evaluated() << "/" << report.items.size() << " items evaluated\n";
  return report.evaluated() == 0 ? kTotalFailure : kOk;
}

int run_stats(const std::string& dir, const std::string& out, const std::string& config_path) {
  sciflow::DifficultyConfig difficulty;
  try {
    if (!config_path.empty()) difficulty = sciflow::load_config(config_path).difficulty;
  } catch (const sciflow::Error& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const auto stats = sciflow::collect_stats(dir, difficulty);
    sciflow::write_text_file(out, sciflow::dump_document(stats.to_json(difficulty)));
    for (const auto& [file, msg] : stats.errors) std::cerr << file << ": " << msg << "\n";
    std::cerr << stats.graphs << " graphs, " << stats.errors.size() << " unreadable\n";
    return kOk;
  } catch (const sciflow::NotFoundError& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }
}

int run_serve(const std::string& data, const std::string& host, int port) {
  std::shared_ptr<sciflow::VerificationStore> store;
  try {
    store = std::make_shared<sciflow::VerificationStore>(data);
  } catch (const sciflow::Error& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }
  sciflow::VerificationServer server(store);
  int bound = 0;
  try {
    bound = server.bind(host, port);
  } catch (const sciflow::Error& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving " << store->item_ids().size() << " items on http://" << host << ":" << bound << "\n";
  server.serve();
  g_server = nullptr;
  return kOk;
}

int run_merge(const std::vector<std::string>& inputs, const std::string& out, bool allow_mixed) {
  try {
    std::vector<std::string> docs;
    for (const auto& p : inputs) docs.push_back(sciflow::read_text_file(p));
    sciflow::write_text_file(out, sciflow::merge_reports(docs, allow_mixed));
    return kOk;
  } catch (const sciflow::Error& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-first evaluation toolkit for scientific diagrams"};
  app.require_subcommand(1);

  std::string manifest, config, out, dir, data, host = "127.0.0.1";
  std::vector<std::string> disabled, inputs;
  int port = 8080, workers = 0;
  bool allow_mixed = false;

  auto* eval = app.add_subcommand("evaluate", "Score a manifest of items and write a report");
  eval->add_option("--manifest", manifest, "Manifest document")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config, "Evaluation config document")->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Report path")->required();
  eval->add_option("--disable-stage", disabled, "Perception stage to switch off (repeatable)");
  eval->add_option("--workers", workers, "Override the configured worker count")->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "Graph statistics and difficulty bins for a directory");
  stats->add_option("--dir", dir, "Directory of graph documents")->required();
  stats->add_option("--out", out, "Statistics document path")->required();
  stats->add_option("--config", config, "Config document (difficulty cutoffs)")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Run the verification service");
  serve->add_option("--data", data, "Data root with one directory per item")->required();
  serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Address to bind");

  auto* merge = app.add_subcommand("merge", "Combine reports into one leaderboard");
  merge->add_option("inputs", inputs, "Report documents")->required()->check(CLI::ExistingFile);
  merge->add_option("--out", out, "Merged report path")->required();
  merge->add_flag("--allow-mixed-providers", allow_mixed, "Merge reports made with different providers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*eval) return run_evaluate(manifest, config, out, disabled, workers);
    if (*stats) return run_stats(dir, out, config);
    if (*serve) return run_serve(data, host, port);
    if (*merge) return run_merge(inputs, out, allow_mixed);
  } catch (const std::exception& e) {
    std::cerr << "sciflow: " << e.what() << "\n";
    return kTotalFailure;
  }
  return kOk;
}

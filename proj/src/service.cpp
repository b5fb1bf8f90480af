#include "sciflow/service.hpp"

#include <set>

#include "sciflow/error.hpp"
#include "sciflow/graph_io.hpp"
#include "sciflow/remote.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include "httplib.h"

namespace sciflow {

namespace {

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, ordered_json{{"error", ordered_json{{"code", code}, {"message", message}}}});
}

ordered_json log_json(const std::vector<LogEntry>& log, std::size_t from = 0) {
  auto arr = ordered_json::array();
  for (std::size_t i = from; i < log.size(); ++i) {
    auto j = edit_to_json(log[i].edit);
    j["cascade_of"] = log[i].cascade_of ? ordered_json(*log[i].cascade_of) : ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

ordered_json summary_json(const EditSummary& s) {
  return ordered_json{{"excluded_nodes", s.excluded_nodes}, {"excluded_edges", s.excluded_edges},
                      {"added_nodes", s.added_nodes},       {"added_edges", s.added_edges},
                      {"retracted", s.retracted},           {"cascaded_edges", s.cascaded_edges},
                      {"total_time_ms", s.total_time_ms}};
}

std::string media_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" ? "image/png" : "image/jpeg";
}

/// Runs a handler, translating library exceptions into API errors.
template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFoundError& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, "version_conflict", e.what());
  } catch (const ProtocolError& e) {
    send_error(res, 422, "protocol_error", e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal_error", e.what());
  }
}

}  // namespace

VerificationServer::VerificationServer(std::shared_ptr<VerificationStore> store)
    : store_(std::move(store)), server_(std::make_unique<httplib::Server>()) {
  if (!store_) throw ContractError("verification server needs a store");
  routes();
}

VerificationServer::~VerificationServer() { stop(); }

void VerificationServer::routes() {
  auto& srv = *server_;
  auto store = store_;

  srv.Get("/api/items", [store](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto items = ordered_json::array();
      for (const auto& id : store->item_ids()) {
        auto snap = store->snapshot(id);
        items.push_back(ordered_json{{"item_id", id},
                                     {"version", snap->version},
                                     {"node_count", snap->current.nodes.size()},
                                     {"edge_count", snap->current.edges.size()},
                                     {"log_entries", snap->log.size()},
                                     {"has_figure", snap->figure_path.has_value()}});
      }
      send_json(res, 200, ordered_json{{"items", items}});
    });
  });

  srv.Get(R"(/api/items/([^/]+))", [store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto snap = store->snapshot(req.matches[1]);
      ordered_json body;
      body["item_id"] = snap->item_id;
      body["version"] = snap->version;
      if (snap->figure_path)
        body["figure"] = ordered_json{{"media_type", media_type(*snap->figure_path)},
                                      {"base64", base64_encode(read_text_file(*snap->figure_path))}};
      else
        body["figure"] = nullptr;
      body["auto_graph"] = graph_to_json(snap->auto_graph);
      body["current_graph"] = graph_to_json(snap->current);
      body["log"] = log_json(snap->log);
      body["summary"] = summary_json(summarize(snap->log));
      send_json(res, 200, body);
    });
  });

  srv.Post(R"(/api/items/([^/]+)/edits)", [store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      store->snapshot(id);  // 404 before parsing the body
      const json body = parse_json_text(req.body);
      jsonio::require_object(body, "");
      const auto& v = jsonio::require(body, "version", "");
      if (!v.is_number_unsigned()) throw ParseError("/version", "expected a non-negative integer");
      const auto& arr = jsonio::require_array(jsonio::require(body, "edits", ""), "/edits");
      std::vector<Edit> edits;
      for (std::size_t i = 0; i < arr.size(); ++i) edits.push_back(edit_from_json(arr[i], jsonio::child("/edits", i)));

      std::shared_ptr<const ItemSnapshot> after;
      try {
        after = store->submit(id, v.get<std::uint64_t>(), edits);
      } catch (const NotFoundError& e) {
        // The item exists; a missing edit target is a protocol violation.
        throw ProtocolError(e.what());
      }
      ordered_json out;
      out["item_id"] = id;
      out["version"] = after->version;
      std::set<std::string> submitted;
      for (const auto& e : edits) submitted.insert(e.edit_id);
      std::vector<LogEntry> appended;
      for (const auto& entry : after->log)
        if (submitted.count(entry.cascade_of.value_or(entry.edit.edit_id))) appended.push_back(entry);
      out["appended"] = log_json(appended);
      out["current_graph"] = graph_to_json(after->current);
      send_json(res, 200, out);
    });
  });

  srv.Get(R"(/api/items/([^/]+)/agreement)", [store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto snap = store->snapshot(req.matches[1]);
      ordered_json out;
      out["item_id"] = snap->item_id;
      out["version"] = snap->version;
      out["agreement"] = agreement_to_json(agreement(snap->auto_graph, snap->current));
      out["summary"] = summary_json(summarize(snap->log));
      send_json(res, 200, out);
    });
  });

  srv.Get(R"(/api/items/([^/]+)/export)", [store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(serialize_graph(store->export_verified(req.matches[1])), "application/json");
    });
  });
}

int VerificationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p <= 0) throw ConfigError("could not bind to " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) throw ConfigError("could not bind to " + host + ":" + std::to_string(port));
  return port;
}

void VerificationServer::serve() { server_->listen_after_bind(); }

int VerificationServer::start_background(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return bound;
}

void VerificationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sciflow

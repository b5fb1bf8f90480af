#pragma once

// JSON-over-HTTP API consumed by the annotation front end.
//
//   GET  /api/items                       item list with versions and counts
//   GET  /api/items/{id}                  figure (base64), auto and current graph, log
//   POST /api/items/{id}/edits            {"version": n, "edits": [...]}, applied atomically
//   GET  /api/items/{id}/agreement        agreement of the current graph with the auto graph
//   GET  /api/items/{id}/export           verified graph document
//
// Errors are {"error": {"code": ..., "message": ...}} with 400 bad_request,
// 404 not_found, 409 version_conflict or 422 protocol_error.

#include <memory>
#include <string>
#include <thread>

#include "sciflow/verify.hpp"

namespace httplib {
class Server;
}

namespace sciflow {

class VerificationServer {
 public:
  explicit VerificationServer(std::shared_ptr<VerificationStore> store);
  ~VerificationServer();

  VerificationServer(const VerificationServer&) = delete;
  VerificationServer& operator=(const VerificationServer&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void serve();
  /// bind + serve on a background thread; returns the bound port.
  int start_background(const std::string& host, int port = 0);
  void stop();

 private:
  void routes();

  std::shared_ptr<VerificationStore> store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace sciflow

#pragma once

// HTTP clients for model services. Wire protocol (JSON over POST, relative to
// the endpoint's path prefix):
//
//   /embed       {"texts": [..]}                            -> {"vectors": [[..], ..]}
//   /alignment   {"graph": doc, "prompt": doc}              -> {"score": s}
//   /flow        {"image_base64": b64, "prompt": doc}       -> {"score": s}
//   /distance    {"image_a_base64": b64, "image_b_base64"}  -> {"distance": d}
//   /image_text  {"image_base64": b64, "text": t}           -> {"cosine": c}
//
// Responses that break the provider contract are errors, never clamped.

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include "sciflow/json_io.hpp"
#include "sciflow/providers.hpp"

namespace sciflow {

struct RemoteEndpointConfig {
  std::string endpoint;        // e.g. http://127.0.0.1:8080/v1
  std::string auth_token_env;  // optional; sent as a bearer token when set
  int timeout_ms = 10000;
  int retries = 2;             // extra attempts after the first, for timeouts and transport failures
  std::string id;              // defaults to "remote:<endpoint>"
  std::size_t max_concurrency = 0;

  static RemoteEndpointConfig from_json(const json& v, const std::string& path);
  void validate() const;
};

/// Low-level client shared by the remote providers.
class RemoteClient {
 public:
  explicit RemoteClient(RemoteEndpointConfig config);
  ~RemoteClient();
  RemoteClient(const RemoteClient&) = delete;
  RemoteClient& operator=(const RemoteClient&) = delete;

  /// POSTs `body` to `route`, retrying timeouts, transport failures and 5xx
  /// responses up to `retries` times. Returns the parsed JSON object.
  json post(const std::string& route, const json& body) const;

  const RemoteEndpointConfig& config() const noexcept { return config_; }
  std::string provider_id() const;
  /// Requests issued so far, including retries.
  std::size_t attempts() const noexcept;

 private:
  struct Impl;
  RemoteEndpointConfig config_;
  std::unique_ptr<Impl> impl_;
};

class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEndpointConfig config);
  std::string id() const override { return client_.provider_id(); }
  Eigen::Index dimension() const override;
  std::vector<Embedding> embed(std::span<const std::string> texts) const override;
  std::size_t max_concurrency() const override { return client_.config().max_concurrency; }

 private:
  RemoteClient client_;
  mutable std::atomic<Eigen::Index> dimension_{0};
};

class RemoteJudge final : public JudgeProvider {
 public:
  explicit RemoteJudge(RemoteEndpointConfig config);
  std::string id() const override { return client_.provider_id(); }
  double alignment(std::string_view graph_document, std::string_view prompt_document) const override;
  double flow(std::string_view image_bytes, std::string_view prompt_document) const override;
  std::size_t max_concurrency() const override { return client_.config().max_concurrency; }

 private:
  RemoteClient client_;
};

class RemotePerceptual final : public PerceptualProvider {
 public:
  explicit RemotePerceptual(RemoteEndpointConfig config);
  std::string id() const override { return client_.provider_id(); }
  double distance(std::string_view image_a, std::string_view image_b) const override;
  std::size_t max_concurrency() const override { return client_.config().max_concurrency; }

 private:
  RemoteClient client_;
};

class RemoteImageText final : public ImageTextProvider {
 public:
  explicit RemoteImageText(RemoteEndpointConfig config);
  std::string id() const override { return client_.provider_id(); }
  double cosine(std::string_view image_bytes, std::string_view text) const override;
  std::size_t max_concurrency() const override { return client_.config().max_concurrency; }

 private:
  RemoteClient client_;
};

std::string base64_encode(std::string_view bytes);

}  // namespace sciflow

#include "sciflow/remote.hpp"

#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace sciflow {

namespace {

struct SplitEndpoint {
  std::string base;    // scheme://host:port
  std::string prefix;  // path prefix without trailing slash
};

SplitEndpoint split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("remote endpoint '" + endpoint + "' lacks a scheme");
  const auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http") throw ConfigError("remote endpoint scheme '" + scheme + "' is not supported (http only)");
  const auto path_start = endpoint.find('/', scheme_end + 3);
  SplitEndpoint out;
  out.base = endpoint.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : endpoint.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

double require_finite(const json& resp, const char* key, const std::string& route) {
  auto it = resp.find(key);
  if (it == resp.end() || !it->is_number())
    throw ProviderError(ProviderError::Kind::malformed_response,
                        "response from " + route + " lacks numeric '" + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v))
    throw ProviderError(ProviderError::Kind::out_of_range, "response from " + route + " is not finite");
  return v;
}

double require_range(double v, double lo, double hi, const std::string& what) {
  if (v < lo || v > hi)
    throw ProviderError(ProviderError::Kind::out_of_range, what + " " + std::to_string(v) + " outside [" +
                                                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

}  // namespace

std::string base64_encode(std::string_view bytes) { return httplib::detail::base64_encode(std::string(bytes)); }

RemoteEndpointConfig RemoteEndpointConfig::from_json(const json& v, const std::string& path) {
  using namespace jsonio;
  RemoteEndpointConfig c;
  c.endpoint = get_string(v, "endpoint", path);
  c.auth_token_env = get_optional_string(v, "auth_token_env", path).value_or("");
  c.timeout_ms = static_cast<int>(get_optional_number(v, "timeout_ms", path).value_or(c.timeout_ms));
  c.retries = static_cast<int>(get_optional_number(v, "retries", path).value_or(c.retries));
  c.id = get_optional_string(v, "id", path).value_or("");
  c.max_concurrency = static_cast<std::size_t>(get_optional_number(v, "max_concurrency", path).value_or(0));
  c.validate();
  return c;
}

void RemoteEndpointConfig::validate() const {
  split_endpoint(endpoint);
  if (timeout_ms <= 0) throw ConfigError("remote timeout_ms must be positive");
  if (retries < 0) throw ConfigError("remote retries must be non-negative");
}

struct RemoteClient::Impl {
  SplitEndpoint target;
  mutable std::atomic<std::size_t> attempts{0};
};

RemoteClient::RemoteClient(RemoteEndpointConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  config_.validate();
  impl_->target = split_endpoint(config_.endpoint);
}

RemoteClient::~RemoteClient() = default;

std::string RemoteClient::provider_id() const { return config_.id.empty() ? "remote:" + config_.endpoint : config_.id; }

std::size_t RemoteClient::attempts() const noexcept { return impl_->attempts.load(); }

json RemoteClient::post(const std::string& route, const json& body) const {
  const auto path = impl_->target.prefix + route;
  const auto payload = body.dump();
  httplib::Headers headers;
  if (!config_.auth_token_env.empty()) {
    if (const char* token = std::getenv(config_.auth_token_env.c_str()); token && *token)
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);

  ProviderError last(ProviderError::Kind::transport, "no attempt made");
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    ++impl_->attempts;
    httplib::Client cli(impl_->target.base);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    const auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path, headers, payload, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;

    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= timeout * 9 / 10);
      last = ProviderError(timed_out ? ProviderError::Kind::timeout : ProviderError::Kind::transport,
                           provider_id() + route + ": " + (timed_out ? "timed out" : httplib::to_string(err)) +
                               " after " + std::to_string(attempt + 1) + " attempt(s)");
      continue;
    }
    if (res->status >= 500) {
      last = ProviderError(ProviderError::Kind::transport, provider_id() + route + ": HTTP " +
                                                               std::to_string(res->status) + " after " +
                                                               std::to_string(attempt + 1) + " attempt(s)");
      continue;
    }
    if (res->status != 200)
      throw ProviderError(ProviderError::Kind::transport, provider_id() + route + ": HTTP " + std::to_string(res->status));
    try {
      auto parsed = json::parse(res->body);
      if (!parsed.is_object()) throw ProviderError(ProviderError::Kind::malformed_response, "response is not an object");
      return parsed;
    } catch (const json::exception& e) {
      throw ProviderError(ProviderError::Kind::malformed_response, provider_id() + route + ": " + e.what());
    }
  }
  throw last;
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpointConfig config) : client_(std::move(config)) {}

Eigen::Index RemoteEmbedder::dimension() const {
  if (dimension_ == 0) {
    const std::string probe = "dimension probe";
    embed(std::span<const std::string>(&probe, 1));
  }
  return dimension_;
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  json body;
  body["texts"] = json::array();
  for (const auto& t : texts) body["texts"].push_back(t);
  const auto resp = client_.post("/embed", body);
  auto it = resp.find("vectors");
  if (it == resp.end() || !it->is_array() || it->size() != texts.size())
    throw ProviderError(ProviderError::Kind::malformed_response, "embedding response must hold one vector per text");

  std::vector<Embedding> out;
  for (const auto& vec : *it) {
    if (!vec.is_array() || vec.empty())
      throw ProviderError(ProviderError::Kind::malformed_response, "embedding vector must be a non-empty array");
    const auto dim = static_cast<Eigen::Index>(vec.size());
    Eigen::Index expected = 0;
    if (!dimension_.compare_exchange_strong(expected, dim) && expected != dim)
      throw ProviderError(ProviderError::Kind::malformed_response, "embedding dimension changed between responses");
    Embedding e(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& x = vec[static_cast<std::size_t>(i)];
      if (!x.is_number()) throw ProviderError(ProviderError::Kind::malformed_response, "embedding entry is not a number");
      if (const double d = x.get<double>(); d != 0.0) e.insert(i) = d;
    }
    const double n = e.norm();
    if (n != 0.0 && std::abs(n - 1.0) > 1e-6)
      throw ProviderError(ProviderError::Kind::out_of_range, "embedding is not unit-norm (norm " + std::to_string(n) + ")");
    out.push_back(std::move(e));
  }
  return out;
}

RemoteJudge::RemoteJudge(RemoteEndpointConfig config) : client_(std::move(config)) {}

double RemoteJudge::alignment(std::string_view graph_document, std::string_view prompt_document) const {
  json body{{"graph", std::string(graph_document)}, {"prompt", std::string(prompt_document)}};
  return require_range(require_finite(client_.post("/alignment", body), "score", "/alignment"), 0, 1, "alignment score");
}

double RemoteJudge::flow(std::string_view image_bytes, std::string_view prompt_document) const {
  json body{{"image_base64", base64_encode(image_bytes)}, {"prompt", std::string(prompt_document)}};
  return require_range(require_finite(client_.post("/flow", body), "score", "/flow"), 0, 1, "flow score");
}

RemotePerceptual::RemotePerceptual(RemoteEndpointConfig config) : client_(std::move(config)) {}

double RemotePerceptual::distance(std::string_view image_a, std::string_view image_b) const {
  json body{{"image_a_base64", base64_encode(image_a)}, {"image_b_base64", base64_encode(image_b)}};
  const double d = require_finite(client_.post("/distance", body), "distance", "/distance");
  if (d < 0) throw ProviderError(ProviderError::Kind::out_of_range, "perceptual distance is negative");
  return d;
}

RemoteImageText::RemoteImageText(RemoteEndpointConfig config) : client_(std::move(config)) {}

double RemoteImageText::cosine(std::string_view image_bytes, std::string_view text) const {
  json body{{"image_base64", base64_encode(image_bytes)}, {"text", std::string(text)}};
  return require_range(require_finite(client_.post("/image_text", body), "cosine", "/image_text"), -1, 1,
                       "image-text cosine");
}

}  // namespace sciflow

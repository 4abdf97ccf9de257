#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskeval/core/rng.hpp"
#include "taskeval/gateway/endpoint.hpp"
#include "taskeval/gateway/response_cache.hpp"
#include "taskeval/gateway/transport.hpp"

namespace taskeval::gateway {

struct RetryPolicy {
  std::chrono::milliseconds initial_delay{1000};
  double factor = 2.0;
  double jitter = 0.2;  // delays are scaled by a uniform draw from [1 - jitter, 1 + jitter]
  std::uint64_t jitter_seed = 0x5eed;
};

struct GatewayOptions {
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::optional<std::filesystem::path> cache_dir;
  std::function<std::optional<std::string>(const std::string&)> env_lookup;  // defaults to getenv
  std::function<void(std::chrono::milliseconds)> sleep;                      // defaults to this_thread::sleep_for
};

struct GatewayStats {
  std::size_t network_requests = 0;  // HTTP attempts, retries included
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

/// Thread-safe access to chat, vision-chat and embedding endpoints. Every reply is
/// cached under a digest of (endpoint_id, model, decoding settings, canonical request,
/// iteration tag) and in-flight HTTP requests never exceed `max_in_flight`.
class ModelGateway {
 public:
  ModelGateway(std::vector<ModelEndpoint> endpoints, std::shared_ptr<HttpTransport> transport, GatewayOptions options);

  /// `iteration_tag` separates repeated samples of the same request in the cache.
  JudgeResponse complete(const JudgeRequest& request, std::string_view iteration_tag = "");

  /// One vector per input text, in input order. Each text is cached individually.
  std::vector<std::vector<double>> embed(std::span<const std::string> texts, std::string_view endpoint_id);

  [[nodiscard]] const ModelEndpoint& endpoint(std::string_view endpoint_id) const;
  [[nodiscard]] bool has_endpoint(std::string_view endpoint_id) const;
  [[nodiscard]] GatewayStats stats() const;

  /// Digest used as the cache key for a completion request.
  [[nodiscard]] std::string completion_key(const JudgeRequest& request, std::string_view iteration_tag) const;

 private:
  HttpResponse send_with_retries(const ModelEndpoint& endpoint, const std::string& path, const std::string& body);
  std::string bearer_token(const ModelEndpoint& endpoint) const;
  std::chrono::milliseconds backoff_delay(int retry_index);

  std::map<std::string, ModelEndpoint, std::less<>> endpoints_;
  std::shared_ptr<HttpTransport> transport_;
  GatewayOptions options_;
  std::optional<ResponseCache> cache_;
  std::counting_semaphore<1024> in_flight_;

  std::mutex jitter_mutex_;
  DeterministicRng jitter_rng_;

  std::atomic<std::size_t> network_requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> cache_misses_{0};
};

/// Canonical form used for cache keys: CRLF -> LF, trailing whitespace stripped
/// from each line, leading/trailing blank space trimmed.
std::string normalize_whitespace(std::string_view text);

/// Extracts choices[0].message.content from a chat-completions reply body.
std::string extract_completion_text(const std::string& body);

}  // namespace taskeval::gateway

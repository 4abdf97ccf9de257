#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "taskeval/core/types.hpp"

namespace taskeval::gateway {

enum class EndpointKind { chat, vision_chat, embedding };

std::string_view to_string(EndpointKind kind);
EndpointKind parse_endpoint_kind(std::string_view text);

/// A remote model reachable over the chat-completions / embeddings wire shape.
struct ModelEndpoint {
  std::string endpoint_id;
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  EndpointKind kind = EndpointKind::chat;
  std::string auth_env;  // name of the variable holding the bearer token; empty for none
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  double temperature = 0.7;
  int max_tokens = 1024;

  /// Throws std::invalid_argument on a non-positive timeout, negative retries or temperature.
  void validate() const;
};

struct TextPart {
  std::string text;
};

struct ImagePart {
  PngImage image;
  std::string media_type = "image/png";
};

using RequestPart = std::variant<TextPart, ImagePart>;

struct JudgeRequest {
  std::string endpoint_id;
  std::string system;
  std::vector<RequestPart> parts;
};

struct JudgeResponse {
  std::string raw;  // model text, verbatim
  std::string endpoint_id;
  std::chrono::milliseconds latency{0};
  bool cache_hit = false;
  std::string cache_key;
};

enum class GatewayErrc {
  unknown_endpoint,
  invalid_request,
  auth_missing,
  retries_exhausted,
  http_error,
  malformed_reply,
  cache_error,
};

std::string_view to_string(GatewayErrc code);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] GatewayErrc code() const { return code_; }

 private:
  GatewayErrc code_;
};

}  // namespace taskeval::gateway

#include "taskeval/gateway/endpoint.hpp"

namespace taskeval::gateway {

std::string_view to_string(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::chat: return "chat";
    case EndpointKind::vision_chat: return "vision-chat";
    case EndpointKind::embedding: return "embedding";
  }
  return "unknown";
}

EndpointKind parse_endpoint_kind(std::string_view text) {
  if (text == "chat") return EndpointKind::chat;
  if (text == "vision-chat") return EndpointKind::vision_chat;
  if (text == "embedding") return EndpointKind::embedding;
  throw std::invalid_argument("unknown endpoint kind '" + std::string(text) + "'");
}

std::string_view to_string(GatewayErrc code) {
  switch (code) {
    case GatewayErrc::unknown_endpoint: return "unknown_endpoint";
    case GatewayErrc::invalid_request: return "invalid_request";
    case GatewayErrc::auth_missing: return "auth_missing";
    case GatewayErrc::retries_exhausted: return "retries_exhausted";
    case GatewayErrc::http_error: return "http_error";
    case GatewayErrc::malformed_reply: return "malformed_reply";
    case GatewayErrc::cache_error: return "cache_error";
  }
  return "unknown";
}

void ModelEndpoint::validate() const {
  if (endpoint_id.empty()) throw std::invalid_argument("endpoint: empty endpoint_id");
  if (base_url.empty()) throw std::invalid_argument("endpoint " + endpoint_id + ": empty base_url");
  if (model.empty()) throw std::invalid_argument("endpoint " + endpoint_id + ": empty model");
  if (timeout.count() <= 0) throw std::invalid_argument("endpoint " + endpoint_id + ": timeout must be positive");
  if (max_retries < 0) throw std::invalid_argument("endpoint " + endpoint_id + ": max_retries must be >= 0");
  if (!(temperature >= 0.0)) throw std::invalid_argument("endpoint " + endpoint_id + ": temperature must be >= 0");
  if (max_tokens <= 0) throw std::invalid_argument("endpoint " + endpoint_id + ": max_tokens must be positive");
}

}  // namespace taskeval::gateway

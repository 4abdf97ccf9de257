#include "taskeval/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_map>

#include "taskeval/core/digest.hpp"

namespace taskeval::gateway {

using nlohmann::json;

namespace {

constexpr std::size_t kEmbeddingBatch = 256;

bool is_transient(const HttpResponse& response) {
  return response.status == 0 || response.status == 408 || response.status == 429 || response.status >= 500;
}

std::string image_data_url(const ImagePart& part) {
  return "data:" + part.media_type + ";base64," + base64_encode(part.image.bytes);
}

json wire_chat_body(const ModelEndpoint& endpoint, const JudgeRequest& request) {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  json content = json::array();
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", text->text}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_url(image)}}}});
    }
  }
  messages.push_back({{"role", "user"}, {"content", content}});
  return json{{"model", endpoint.model},
              {"temperature", endpoint.temperature},
              {"max_tokens", endpoint.max_tokens},
              {"messages", messages}};
}

std::vector<double> parse_vector(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("embedding is not a non-empty array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw std::invalid_argument("embedding holds a non-number");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  std::string line;
  auto flush_line = [&] {
    const auto end = line.find_last_not_of(" \t\r");
    out += end == std::string::npos ? std::string() : line.substr(0, end + 1);
    line.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush_line();
      out.push_back('\n');
    } else {
      line.push_back(c);
    }
  }
  flush_line();
  const auto first = out.find_first_not_of(" \t\n");
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(" \t\n");
  return out.substr(first, last - first + 1);
}

std::string extract_completion_text(const std::string& body) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw GatewayError(GatewayErrc::malformed_reply, std::string("reply is not JSON: ") + e.what());
  }
  try {
    const json& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
      }
      return text;
    }
  } catch (const json::exception& e) {
    throw GatewayError(GatewayErrc::malformed_reply, std::string("missing choices[0].message.content: ") + e.what());
  }
  throw GatewayError(GatewayErrc::malformed_reply, "choices[0].message.content is neither text nor parts");
}

ModelGateway::ModelGateway(std::vector<ModelEndpoint> endpoints, std::shared_ptr<HttpTransport> transport,
                           GatewayOptions options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 1024))),
      jitter_rng_(options_.retry.jitter_seed) {
  if (options_.max_in_flight == 0 || options_.max_in_flight > 1024) {
    throw std::invalid_argument("gateway: max_in_flight must be in [1, 1024]");
  }
  if (!transport_) throw std::invalid_argument("gateway: no transport");
  for (auto& e : endpoints) {
    e.validate();
    const std::string id = e.endpoint_id;
    if (!endpoints_.emplace(id, std::move(e)).second) throw std::invalid_argument("gateway: duplicate endpoint " + id);
  }
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
  if (!options_.env_lookup) {
    options_.env_lookup = [](const std::string& name) -> std::optional<std::string> {
      const char* value = std::getenv(name.c_str());
      if (!value) return std::nullopt;
      return std::string(value);
    };
  }
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

const ModelEndpoint& ModelGateway::endpoint(std::string_view endpoint_id) const {
  auto it = endpoints_.find(endpoint_id);
  if (it == endpoints_.end()) throw GatewayError(GatewayErrc::unknown_endpoint, std::string(endpoint_id));
  return it->second;
}

bool ModelGateway::has_endpoint(std::string_view endpoint_id) const { return endpoints_.find(endpoint_id) != endpoints_.end(); }

GatewayStats ModelGateway::stats() const {
  return {network_requests_.load(), cache_hits_.load(), cache_misses_.load()};
}

std::string ModelGateway::completion_key(const JudgeRequest& request, std::string_view iteration_tag) const {
  const ModelEndpoint& ep = endpoint(request.endpoint_id);
  json parts = json::array();
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      parts.push_back({{"text", normalize_whitespace(text->text)}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      parts.push_back({{"image_sha256", sha256_hex(image.image.bytes)}, {"media_type", image.media_type}});
    }
  }
  const json canonical{{"op", "complete"},
                       {"endpoint_id", ep.endpoint_id},
                       {"model", ep.model},
                       {"temperature", ep.temperature},
                       {"max_tokens", ep.max_tokens},
                       {"system", normalize_whitespace(request.system)},
                       {"parts", parts},
                       {"iteration", iteration_tag}};
  return sha256_hex(canonical.dump());
}

std::string ModelGateway::bearer_token(const ModelEndpoint& ep) const {
  if (ep.auth_env.empty()) return {};
  auto token = options_.env_lookup(ep.auth_env);
  if (!token || token->empty()) {
    throw GatewayError(GatewayErrc::auth_missing, "environment variable " + ep.auth_env + " is not set for endpoint " + ep.endpoint_id);
  }
  return *token;
}

std::chrono::milliseconds ModelGateway::backoff_delay(int retry_index) {
  double scale = 1.0;
  {
    std::lock_guard lock(jitter_mutex_);
    scale = jitter_rng_.uniform(1.0 - options_.retry.jitter, 1.0 + options_.retry.jitter);
  }
  const double ms = static_cast<double>(options_.retry.initial_delay.count()) *
                    std::pow(options_.retry.factor, retry_index) * scale;
  return std::chrono::milliseconds(static_cast<long long>(std::llround(std::max(0.0, ms))));
}

HttpResponse ModelGateway::send_with_retries(const ModelEndpoint& ep, const std::string& path, const std::string& body) {
  HttpRequest request;
  request.url = ep.base_url;
  while (!request.url.empty() && request.url.back() == '/') request.url.pop_back();
  request.url += path;
  request.body = body;
  request.timeout = ep.timeout;
  request.headers.emplace_back("Accept", "application/json");
  if (const std::string token = bearer_token(ep); !token.empty()) {
    request.headers.emplace_back("Authorization", "Bearer " + token);
  }

  HttpResponse response;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    if (attempt > 0) options_.sleep(backoff_delay(attempt - 1));
    in_flight_.acquire();
    ++network_requests_;
    try {
      response = transport_->post(request);
    } catch (...) {
      in_flight_.release();
      throw;
    }
    in_flight_.release();
    if (response.status == 200) return response;
    if (!is_transient(response)) {
      throw GatewayError(GatewayErrc::http_error, ep.endpoint_id + " returned HTTP " + std::to_string(response.status) +
                                                      ": " + response.body.substr(0, 512));
    }
  }
  const std::string last = response.status == 0 ? response.transport_error : "HTTP " + std::to_string(response.status);
  throw GatewayError(GatewayErrc::retries_exhausted,
                     ep.endpoint_id + " after " + std::to_string(ep.max_retries + 1) + " attempts, last: " + last);
}

JudgeResponse ModelGateway::complete(const JudgeRequest& request, std::string_view iteration_tag) {
  const ModelEndpoint& ep = endpoint(request.endpoint_id);
  if (ep.kind == EndpointKind::embedding) {
    throw GatewayError(GatewayErrc::invalid_request, "endpoint " + ep.endpoint_id + " is an embedding endpoint");
  }
  if (request.parts.empty()) throw GatewayError(GatewayErrc::invalid_request, "request has no user parts");
  const bool has_images = std::any_of(request.parts.begin(), request.parts.end(),
                                      [](const RequestPart& p) { return std::holds_alternative<ImagePart>(p); });
  if (has_images && ep.kind != EndpointKind::vision_chat) {
    throw GatewayError(GatewayErrc::invalid_request, "image parts sent to non-vision endpoint " + ep.endpoint_id);
  }

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  };
  const std::string key = completion_key(request, iteration_tag);

  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return {extract_completion_text(hit->body), ep.endpoint_id, elapsed(), true, key};
    }
  }
  ++cache_misses_;

  const HttpResponse response = send_with_retries(ep, "/chat/completions", wire_chat_body(ep, request).dump());
  std::string text = extract_completion_text(response.body);
  if (cache_) {
    cache_->put(key, {response.body,
                      json{{"op", "complete"},
                           {"endpoint_id", ep.endpoint_id},
                           {"model", ep.model},
                           {"temperature", ep.temperature},
                           {"iteration", iteration_tag}}});
  }
  return {std::move(text), ep.endpoint_id, elapsed(), false, key};
}

std::vector<std::vector<double>> ModelGateway::embed(std::span<const std::string> texts, std::string_view endpoint_id) {
  const ModelEndpoint& ep = endpoint(endpoint_id);
  if (ep.kind != EndpointKind::embedding) {
    throw GatewayError(GatewayErrc::invalid_request, "endpoint " + ep.endpoint_id + " is not an embedding endpoint");
  }
  if (texts.empty()) throw GatewayError(GatewayErrc::invalid_request, "embed called with no texts");

  auto key_for = [&](const std::string& text) {
    return sha256_hex(json{{"op", "embed"}, {"endpoint_id", ep.endpoint_id}, {"model", ep.model}, {"text", text}}.dump());
  };

  std::unordered_map<std::string, std::vector<double>> resolved;
  std::vector<std::string> missing;
  for (const auto& text : texts) {
    if (resolved.count(text) || std::find(missing.begin(), missing.end(), text) != missing.end()) continue;
    if (cache_) {
      if (auto hit = cache_->get(key_for(text))) {
        ++cache_hits_;
        try {
          resolved.emplace(text, parse_vector(json::parse(hit->body)));
        } catch (const std::exception& e) {
          throw GatewayError(GatewayErrc::cache_error, std::string("cached embedding unreadable: ") + e.what());
        }
        continue;
      }
    }
    ++cache_misses_;
    missing.push_back(text);
  }

  for (std::size_t start = 0; start < missing.size(); start += kEmbeddingBatch) {
    const std::size_t stop = std::min(missing.size(), start + kEmbeddingBatch);
    const std::vector<std::string> batch(missing.begin() + static_cast<std::ptrdiff_t>(start),
                                         missing.begin() + static_cast<std::ptrdiff_t>(stop));
    const HttpResponse response =
        send_with_retries(ep, "/embeddings", json{{"model", ep.model}, {"input", batch}}.dump());

    std::vector<std::vector<double>> vectors(batch.size());
    try {
      const json reply = json::parse(response.body);
      const json& data = reply.at("data");
      if (data.size() != batch.size()) throw std::invalid_argument("expected " + std::to_string(batch.size()) + " embeddings");
      std::vector<bool> filled(batch.size(), false);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t index = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
        if (index >= batch.size() || filled[index]) throw std::invalid_argument("bad embedding index");
        vectors[index] = parse_vector(data[i].at("embedding"));
        filled[index] = true;
      }
    } catch (const std::exception& e) {
      throw GatewayError(GatewayErrc::malformed_reply, std::string("embedding reply: ") + e.what());
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (cache_) {
        cache_->put(key_for(batch[i]), {json(vectors[i]).dump(),
                                        json{{"op", "embed"}, {"endpoint_id", ep.endpoint_id}, {"model", ep.model}}});
      }
      resolved.emplace(batch[i], std::move(vectors[i]));
    }
  }

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    out.push_back(resolved.at(text));
    if (out.back().size() != out.front().size()) {
      throw GatewayError(GatewayErrc::malformed_reply, "embeddings of unequal dimension from " + ep.endpoint_id);
    }
  }
  return out;
}

}  // namespace taskeval::gateway

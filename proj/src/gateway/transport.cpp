#include "taskeval/gateway/transport.hpp"

#include <httplib.h>

#include <stdexcept>

namespace taskeval::gateway {

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("url without scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

HttpResponse HttplibTransport::post(const HttpRequest& request) {
  const SplitUrl target = split_url(request.url);
  httplib::Client client(target.scheme_host_port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  for (const auto& [name, value] : request.headers) headers.emplace(name, value);

  auto result = client.Post(target.path, headers, request.body, "application/json");
  if (!result) return {0, {}, httplib::to_string(result.error())};
  return {result->status, result->body, {}};
}

}  // namespace taskeval::gateway

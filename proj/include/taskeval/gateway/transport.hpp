#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace taskeval::gateway {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60'000};
};

struct HttpResponse {
  int status = 0;  // 0 when no HTTP response was received
  std::string body;
  std::string transport_error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport; http and https URLs.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

/// "https://host:8443/v1/x" -> {"https://host:8443", "/v1/x"}.
SplitUrl split_url(const std::string& url);

}  // namespace taskeval::gateway

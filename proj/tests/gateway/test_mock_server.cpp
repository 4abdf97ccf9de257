#include <doctest.h>

#include <thread>

#include "support/mock_model_server.hpp"
#include "taskeval/gateway/gateway.hpp"

using namespace taskeval;
using namespace taskeval::gateway;
using taskeval::testing::MockModelServer;
using taskeval::testing::MockReply;

namespace {

ModelEndpoint endpoint_for(const MockModelServer& server, std::string id, EndpointKind kind) {
  ModelEndpoint ep;
  ep.endpoint_id = std::move(id);
  ep.base_url = server.base_url();
  ep.model = "mock";
  ep.kind = kind;
  ep.timeout = std::chrono::milliseconds(5000);
  return ep;
}

}  // namespace

TEST_CASE("round trip through the HTTP transport") {
  MockModelServer server(
      [](const nlohmann::json& body, std::size_t occurrence) {
        return MockReply{200, body["messages"].back()["content"][0]["text"].get<std::string>() + "#" + std::to_string(occurrence)};
      },
      [](const std::string& text) { return std::vector<double>{static_cast<double>(text.size()), 0.5}; });
  GatewayOptions options;
  ModelGateway gw({endpoint_for(server, "chat", EndpointKind::chat), endpoint_for(server, "emb", EndpointKind::embedding)},
                  std::make_shared<HttplibTransport>(), options);
  CHECK(gw.complete({"chat", "", {TextPart{"hello"}}}).raw == "hello#0");
  CHECK(gw.complete({"chat", "", {TextPart{"hello"}}}).raw == "hello#1");
  const std::vector<std::string> texts{"abc", "de"};
  const auto v = gw.embed(texts, "emb");
  CHECK(v[0] == std::vector<double>{3.0, 0.5});
  CHECK(v[1] == std::vector<double>{2.0, 0.5});
  CHECK(server.chat_calls() == 2);
  CHECK(server.embed_calls() == 1);
}

TEST_CASE("in-flight requests never exceed the configured bound") {
  MockModelServer server([](const nlohmann::json&, std::size_t) { return MockReply{200, "ok"}; }, {},
                         std::chrono::milliseconds(40));
  GatewayOptions options;
  options.max_in_flight = 3;
  ModelGateway gw({endpoint_for(server, "chat", EndpointKind::chat)}, std::make_shared<HttplibTransport>(), options);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&gw, i] { gw.complete({"chat", "", {TextPart{"q" + std::to_string(i)}}}); });
  }
  for (auto& t : threads) t.join();
  CHECK(server.chat_calls() == 12);
  CHECK(server.max_concurrency() <= 3);
  CHECK(server.max_concurrency() >= 2);
}

TEST_CASE("unreachable endpoints exhaust retries") {
  int port = 0;
  {
    MockModelServer server([](const nlohmann::json&, std::size_t) { return MockReply{}; });
    port = std::stoi(server.base_url().substr(std::string("http://127.0.0.1:").size()));
  }
  ModelEndpoint ep;
  ep.endpoint_id = "gone";
  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  ep.model = "m";
  ep.max_retries = 1;
  ep.timeout = std::chrono::milliseconds(500);
  GatewayOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  ModelGateway gw({ep}, std::make_shared<HttplibTransport>(), options);
  try {
    gw.complete({"gone", "", {TextPart{"x"}}});
    FAIL("expected failure");
  } catch (const GatewayError& e) {
    CHECK(e.code() == GatewayErrc::retries_exhausted);
  }
  CHECK(gw.stats().network_requests == 2);
}

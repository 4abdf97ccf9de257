#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "diversity/naive_diversity.hpp"
#include "support/fake_transport.hpp"
#include "support/scripted_judge.hpp"
#include "taskeval/core/rng.hpp"
#include "taskeval/core/synthetic.hpp"
#include "taskeval/diversity/text_diversity.hpp"

using namespace taskeval;
using namespace taskeval::diversity;
using nlohmann::json;

namespace {

std::vector<std::vector<double>> random_unit_vectors(DeterministicRng& rng, std::size_t n, std::size_t dim, double bias) {
  std::vector<std::vector<double>> raw(n, std::vector<double>(dim));
  for (auto& v : raw)
    for (auto& x : v) x = rng.normal() + bias;
  return normalize(raw);
}

EmbeddingSet make_set(std::vector<std::vector<double>> vectors) {
  EmbeddingSet set{"g", "e", {}, std::move(vectors)};
  for (std::size_t i = 0; i < set.vectors.size(); ++i) set.task_ids.push_back("t" + std::to_string(i));
  return set;
}

}  // namespace

TEST_CASE("identical embeddings have zero diversity") {
  const std::vector<double> v{0.6, 0.8};
  const auto r = diversity::diversity(make_set({v, v, v, v}));
  CHECK(r.div == 0.0);
  CHECK(r.n == 4);
  CHECK(r.clamp_warnings == 0);
}

TEST_CASE("two vectors with inner product 0.6") {
  const auto r = diversity::diversity(make_set({{1.0, 0.0}, {0.6, 0.8}}));
  CHECK(std::abs(r.div - (-std::log(0.6))) <= 1e-12);
}

TEST_CASE("antipodal pair is clamped") {
  const auto r = diversity::diversity(make_set({{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}}));
  CHECK(std::abs(r.div - (-std::log(1e-6))) <= 1e-9);
  CHECK(r.clamp_warnings == 2);
}

TEST_CASE("diversity agrees with a naive double loop") {
  DeterministicRng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 60;
    const std::size_t dim = trial % 2 ? 384 : 8;
    const auto vectors = random_unit_vectors(rng, n, dim, 0.5);
    CHECK(std::abs(diversity::diversity(make_set(vectors)).div - testing::naive_diversity(vectors)) <= 1e-9);
  }
}

TEST_CASE("diversity preconditions") {
  CHECK_THROWS_AS(diversity::diversity(make_set({{1.0, 0.0}})), DiversityError);
  CHECK_THROWS_AS(diversity::diversity(make_set({{1.0, 0.0}, {1.0, 0.0, 0.0}})), DiversityError);
  CHECK_THROWS_AS(diversity::diversity(make_set({{1.0, 0.0}, {2.0, 0.0}})), DiversityError);
  CHECK_THROWS_AS(normalize(std::vector<std::vector<double>>{{0.0, 0.0}}), DiversityError);
  CHECK_THROWS_AS(normalize(std::vector<std::vector<double>>{{NAN, 1.0}}), DiversityError);
}

TEST_CASE("pairwise_sum is accurate") {
  std::vector<double> values(1'000'001, 0.1);
  const long double exact = 0.1L * 1'000'001.0L;
  CHECK(std::abs(pairwise_sum(values) - static_cast<double>(exact)) < 1e-8);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{1.5}) == 1.5);
}

TEST_CASE("group_diversity embeds once and reports groups plus All") {
  SyntheticSpec spec;
  spec.n_modes = 5;
  spec.episodes_per_mode = 1;
  auto ds = generate_synthetic_dataset(spec);
  ds.groups.clear();
  const char* labels[] = {"pick", "pick", "push", "push", "solo"};
  for (std::size_t i = 0; i < 5; ++i) {
    ds.tasks[i].group = labels[i];
    ds.groups[labels[i]].push_back(ds.tasks[i].task_id);
  }

  auto transport = std::make_shared<testing::FakeTransport>([](const gateway::HttpRequest& req, std::size_t) {
    const json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      data.push_back({{"index", i}, {"embedding", testing::hashed_embedding(body["input"][i].get<std::string>())}});
    }
    return gateway::HttpResponse{200, json{{"data", data}}.dump(), {}};
  });
  gateway::ModelEndpoint ep;
  ep.endpoint_id = "emb";
  ep.base_url = "http://x/v1";
  ep.model = "m";
  ep.kind = gateway::EndpointKind::embedding;
  gateway::ModelGateway gw({ep}, transport, {});

  const auto table = group_diversity(gw, ds, "emb");
  CHECK(transport->calls() == 1);
  REQUIRE(table.results.size() == 3);
  CHECK(table.results[0].group == "pick");
  CHECK(table.results[1].group == "push");
  CHECK(table.results[2].group == kAllGroup);
  CHECK(table.results[2].n == 5);
  REQUIRE(table.warnings.size() == 1);
  CHECK(table.warnings[0].find("solo") != std::string::npos);

  std::vector<std::vector<double>> all;
  for (const auto& t : ds.tasks) all.push_back(testing::hashed_embedding(t.description));
  CHECK(std::abs(table.results[2].div - testing::naive_diversity(normalize(all))) <= 1e-12);

  GroupDiversityOptions only_push;
  only_push.groups = std::vector<std::string>{"push"};
  const auto sub = group_diversity(gw, ds, "emb", only_push);
  REQUIRE(sub.results.size() == 2);
  CHECK(sub.results[1].n == 2);
  CHECK(sub.results[1].div == sub.results[0].div);

  GroupDiversityOptions missing;
  missing.groups = std::vector<std::string>{"nope"};
  CHECK_THROWS_AS(group_diversity(gw, ds, "emb", missing), DiversityError);
}

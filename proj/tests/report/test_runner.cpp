#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "report/golden_run.hpp"
#include "taskeval/core/text_io.hpp"
#include "taskeval/report/runner.hpp"

using namespace taskeval;
using namespace taskeval::report;
using taskeval::testing::MockModelServer;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  RunConfig config(const std::string& toml, const std::string& file = "run.toml") const {
    write_text_file(dir / file, toml);
    return load_run_config(dir / file);
  }
};

MockModelServer::EmbedHandler embedder() {
  return [](const std::string& text) { return testing::hashed_embedding(text); };
}

}  // namespace

TEST_CASE("quality run matches the golden report and a warm rerun is offline") {
  MockModelServer server(testing::golden_script());
  Workspace ws("taskeval_golden_run");
  const RunConfig config = ws.config(testing::golden_config_toml(server.base_url()));

  const auto first = run_evaluation(config);
  CHECK(first.exit_code == kExitSuccess);
  const std::string produced = read_text_file(first.report_path);
  if (std::getenv("TASKEVAL_UPDATE_GOLDEN")) write_text_file(testing::kGoldenReport, produced);
  CHECK(produced == read_text_file(testing::kGoldenReport));
  CHECK(validate_report_json(json::parse(produced)).empty());
  // 2 tasks x (5 completion + 5 direct + 4 captions + 5 caption-judge)
  CHECK(server.chat_calls() == 38);

  const std::size_t before = server.calls();
  const auto second = run_evaluation(config);
  CHECK(server.calls() == before);
  CHECK(second.gateway_stats.network_requests == 0);
  CHECK(read_text_file(second.report_path) == produced);
  CHECK(fs::is_regular_file(ws.dir / "out" / "report.timestamps.json"));
  CHECK(fs::is_regular_file(ws.dir / "out" / "plots" / "quality_scatter.csv"));
}

TEST_CASE("golden report contents") {
  const json report = json::parse(read_text_file(testing::kGoldenReport));
  REQUIRE(report["quality"].size() == 6);
  const json& push_completion = report["quality"][0];
  CHECK(push_completion["task_id"] == "mode_00");
  CHECK(push_completion["metric"] == "completion");
  CHECK(push_completion["scores"] == json{8, 8, 8, 8, 7.8});
  CHECK(push_completion["mean"].get<double>() == doctest::Approx(7.96).epsilon(1e-14));
  CHECK(push_completion["variance"].get<double>() == doctest::Approx(0.0064).epsilon(1e-12));
  const json& push_direct = report["quality"][1];
  CHECK(push_direct["variant"] == "direct");
  CHECK(push_direct["mean"].get<double>() == doctest::Approx(3.96).epsilon(1e-14));
  CHECK(push_direct["variance"].get<double>() == doctest::Approx(0.0264).epsilon(1e-12));
  const json& push_caption = report["quality"][2];
  CHECK(push_caption["label"] == "text-judge+captioner");
  CHECK(push_caption["mean"].get<double>() == doctest::Approx(3.2).epsilon(1e-14));
  const json& drawer_completion = report["quality"][3];
  CHECK(drawer_completion["mean"].get<double>() == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(drawer_completion["variance"].get<double>() == doctest::Approx(0.4).epsilon(1e-14));
  const json& drawer_direct = report["quality"][4];
  CHECK(drawer_direct["mean"].get<double>() == doctest::Approx(2.8).epsilon(1e-14));
  CHECK(drawer_direct["variance"].get<double>() == doctest::Approx(0.96).epsilon(1e-14));
  CHECK_FALSE(report.contains("diversity_text"));
  CHECK_FALSE(report.contains("consistency"));
  CHECK(report["summary"]["status"] == "complete");
}

TEST_CASE("an unscoreable task fails its cell and the run is partial") {
  auto script = testing::golden_script();
  script.completion.erase("Open the drawer and place the sponge inside.");
  MockModelServer server(script);
  Workspace ws("taskeval_partial_run");
  const auto outcome = run_evaluation(ws.config(testing::golden_config_toml(server.base_url())));
  CHECK(outcome.exit_code == kExitPartial);
  CHECK(outcome.report.failed_cells() == 1);
  const json report = json::parse(read_text_file(outcome.report_path));
  CHECK(validate_report_json(report).empty());
  CHECK(report["summary"]["status"] == "partial");
  std::size_t failed = 0;
  for (const auto& q : report["quality"]) {
    if (q["status"] == "failed") {
      ++failed;
      CHECK(q["task_id"] == "mode_01");
      CHECK(q["metric"] == "completion");
      CHECK(q["error"].get<std::string>().find("no usable score") != std::string::npos);
    }
  }
  CHECK(failed == 1);
}

TEST_CASE("configuration errors stop the run before any request") {
  MockModelServer server(testing::golden_script());
  Workspace ws("taskeval_config_error_run");
  std::string toml = testing::golden_config_toml(server.base_url());
  toml += "\n";
  SUBCASE("undefined judge") {
    const auto at = toml.find("direct_judges = [\"vision-judge\"]");
    toml.replace(at, std::string("direct_judges = [\"vision-judge\"]").size(), "direct_judges = [\"ghost\"]");
    CHECK_THROWS_AS(run_evaluation(ws.config(toml)), ConfigError);
  }
  SUBCASE("text endpoint as completion judge") {
    const auto at = toml.find("completion_judges = [\"vision-judge\"]");
    toml.replace(at, std::string("completion_judges = [\"vision-judge\"]").size(), "completion_judges = [\"text-judge\"]");
    CHECK_THROWS_AS(run_evaluation(ws.config(toml)), ConfigError);
  }
  SUBCASE("missing dataset") {
    auto config = ws.config(toml);
    config.datasets = {ws.dir / "nowhere"};
    CHECK_THROWS_AS(run_evaluation(config), DatasetError);
  }
  SUBCASE("unknown group") {
    auto config = ws.config(toml);
    config.groups = {"place"};
    CHECK_THROWS_AS(run_evaluation(config), ConfigError);
  }
  CHECK(server.calls() == 0);
  CHECK_FALSE(fs::exists(ws.dir / "out" / "report.json"));
}

TEST_CASE("diversity, consistency and secondary sections") {
  MockModelServer server(testing::golden_script(), embedder());
  Workspace ws("taskeval_full_run");
  write_text_file(ws.dir / "human_completion.csv", "task_id,score\nmode_00,9\nmode_01,6\n");
  std::string toml = testing::golden_config_toml(server.base_url());
  toml.replace(toml.find("metrics = [\"quality\"]"), std::string("metrics = [\"quality\"]").size(),
               "metrics = [\"quality\", \"diversity-text\", \"consistency\", \"diversity-dyn\", \"generalize\"]");
  toml += "\n[[endpoints]]\nid = \"embedder\"\nkind = \"embedding\"\nbase_url = \"" + server.base_url() +
          "\"\nmodel = \"mock-embed\"\n"
          "\n[diversity_text]\nembedders = [\"embedder\"]\n"
          "\n[[consistency.human]]\nmetric = \"completion\"\npath = \"human_completion.csv\"\nlabel = \"raters\"\n"
          "\n[secondary]\nlauncher = \"no-such-launcher\"\n";
  const auto outcome = run_evaluation(ws.config(toml));
  const json report = json::parse(read_text_file(outcome.report_path));
  CHECK(validate_report_json(report).empty());
  CHECK(outcome.exit_code == kExitPartial);

  REQUIRE(report["diversity_text"].size() == 2);
  CHECK(report["diversity_text"][0]["group"] == "pick");
  CHECK(report["diversity_text"][1]["group"] == "All");
  CHECK(report["diversity_text"][0]["n"] == 2);
  CHECK(server.embed_calls() == 1);

  REQUIRE(report["consistency"].size() == 1);
  const json& c = report["consistency"][0];
  CHECK(c["machine"] == "vision-judge");
  CHECK(c["human"] == "raters");
  CHECK(c["n"] == 2);
  CHECK(c["status"] == "ok");
  CHECK(c["pearson"].get<double>() == doctest::Approx(-1.0));
  CHECK(c["mae"].get<double>() == doctest::Approx((1.04 + 2.0) / 2.0));

  for (const char* section : {"dynamics_diversity", "generalization"}) {
    REQUIRE(report[section].size() == 1);
    CHECK(report[section][0]["status"] == "secondary unavailable");
    CHECK(report[section][0]["group"] == "pick");
  }
  CHECK(report["summary"]["failed_cells"] == 2);

  const std::string bars = read_text_file(ws.dir / "out" / "plots" / "consistency_bars.csv");
  CHECK(bars.find("completion,,vision-judge,raters,ok,2,") != std::string::npos);
  CHECK(bars.substr(bars.size() - 3) == ",1\n");
}

TEST_CASE("reports are reproducible from scratch") {
  Workspace ws("taskeval_repro_run");
  std::string first, second;
  for (std::string* out : {&first, &second}) {
    MockModelServer server(testing::golden_script());
    fs::remove_all(ws.dir / "cache");
    const auto outcome = run_evaluation(ws.config(testing::golden_config_toml(server.base_url())));
    *out = read_text_file(outcome.report_path);
  }
  CHECK(first == second);
}

TEST_CASE("group filter limits the evaluated tasks") {
  MockModelServer server(testing::golden_script());
  Workspace ws("taskeval_group_run");
  auto config = ws.config(testing::golden_config_toml(server.base_url()));
  config.groups = {"pick"};
  config.iterations = 1;
  config.caption_pipelines.clear();
  config.direct_judges.clear();
  const auto outcome = run_evaluation(config);
  REQUIRE(outcome.report.quality);
  CHECK(outcome.report.quality->size() == 2);
  CHECK(outcome.report.config_digest != run_evaluation(ws.config(testing::golden_config_toml(server.base_url()))).report.config_digest);
}

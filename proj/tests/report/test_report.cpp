#include <doctest.h>

#include <cmath>
#include <limits>

#include "taskeval/core/text_io.hpp"
#include "taskeval/report/plot_data.hpp"
#include "taskeval/report/report.hpp"

using namespace taskeval;
using namespace taskeval::report;
using nlohmann::json;

namespace {

QualityCell ok_cell(std::string pipeline, std::string task, PublishedFlag flag, quality::Metric metric, double mean,
                    double variance) {
  QualityCell c;
  c.pipeline_id = std::move(pipeline);
  c.task_id = std::move(task);
  c.group = "g";
  c.published_flag = flag;
  c.metric = metric;
  c.judge_id = "judge";
  quality::QualityScore s;
  s.task_id = c.task_id;
  s.metric = metric;
  s.judge_id = "judge";
  s.per_iteration = {mean};
  s.mean = mean;
  s.variance = variance;
  s.scale = quality::scale_of(metric);
  s.response_keys = {"k"};
  c.score = s;
  return c;
}

EvaluationReport sample_report() {
  EvaluationReport r;
  r.config_digest = std::string(64, 'a');
  r.iterations = 5;
  r.metrics = {"quality", "consistency"};
  r.datasets = {{"gen", std::string(64, 'b'), 2, 2}};
  using quality::Metric;
  r.quality = std::vector<QualityCell>{
      ok_cell("gen", "t1", PublishedFlag::published, Metric::alignment, 4.0, 0.1),
      ok_cell("gen", "t2", PublishedFlag::published, Metric::alignment, 3.0, 0.3),
      ok_cell("gen", "t1", PublishedFlag::published, Metric::completion, 8.0, 0.5),
      ok_cell("gen", "t3", PublishedFlag::generated, Metric::completion, 6.0, 1.5),
  };
  QualityCell failed;
  failed.pipeline_id = "gen";
  failed.task_id = "t4";
  failed.group = "g";
  failed.judge_id = "judge";
  failed.error = "judge judge gave no usable score";
  r.quality->push_back(failed);

  stats::ConsistencyResult neg;
  neg.n = 10;
  neg.pearson = -0.7;
  neg.mae = 0.4;
  neg.ratio = -1.75;
  stats::ConsistencyResult perfect;
  perfect.n = 3;
  perfect.pearson = 1.0;
  perfect.mae = 0.0;
  perfect.ratio = std::numeric_limits<double>::infinity();
  perfect.status = stats::ConsistencyStatus::perfect_agreement;
  stats::ConsistencyResult flat;
  flat.n = 10;
  flat.mae = 1.2;
  flat.ratio = std::numeric_limits<double>::quiet_NaN();
  flat.status = stats::ConsistencyStatus::degenerate;
  r.consistency = std::vector<ConsistencyRow>{{"alignment", "", neg, "llava", "human", ""},
                                              {"alignment", "", perfect, "copy", "human", ""},
                                              {"completion", "gen", flat, "const", "human", ""}};
  return r;
}

}  // namespace

TEST_CASE("report json round-trips through the validator") {
  const auto report = sample_report();
  const json j = to_json(report);
  CHECK(validate_report_json(j).empty());
  CHECK(j["format"] == "taskeval.report");
  CHECK(j["schema_version"] == 1);
  CHECK(j["summary"]["failed_cells"] == 1);
  CHECK(j["summary"]["status"] == "partial");
  CHECK(j["quality"][4]["status"] == "failed");
  CHECK(j["quality"][4]["error"] == "judge judge gave no usable score");
  CHECK(j["consistency"][1]["ratio"] == "+inf");
  CHECK(j["consistency"][2]["ratio"].is_null());
  CHECK(j["consistency"][2]["pearson"].is_null());
  CHECK_FALSE(j.contains("diversity_text"));
  CHECK(render_report(report) == j.dump(2) + "\n");
}

TEST_CASE("validator reports structural problems") {
  json j = to_json(sample_report());
  j.erase("run");
  j["quality"][0].erase("mean");
  j["quality"][4].erase("error");
  j["consistency"][0]["ratio"] = "big";
  j["schema_version"] = 2;
  const auto problems = validate_report_json(j);
  CHECK(problems.size() == 5);
  CHECK(validate_report_json(json::array()).size() == 1);
}

TEST_CASE("real_to_json") {
  CHECK(real_to_json(1.5) == 1.5);
  CHECK(real_to_json(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(real_to_json(std::nan("")).is_null());
}

TEST_CASE("quality scatter aggregates per pipeline and flag") {
  const std::string csv = quality_scatter_csv(to_json(sample_report()));
  CHECK(csv ==
        "pipeline_id,published_flag,alignment_mean,alignment_variance,alignment_n,completion_mean,completion_variance,completion_n\n"
        "gen,generated,,,0,6,1.5,1\n"
        "gen,published,3.5,0.2,2,8,0.5,1\n");
}

TEST_CASE("consistency bars keep negative ratios and flag them") {
  const std::string csv = consistency_bars_csv(to_json(sample_report()));
  CHECK(csv ==
        "metric,pipeline_id,machine,human,status,n,pearson,mae,ratio,truncated_for_display\n"
        "alignment,,llava,human,ok,10,-0.7,0.4,-1.75,1\n"
        "alignment,,copy,human,perfect_agreement,3,1,0,+inf,0\n"
        "completion,gen,const,human,degenerate,10,,1.2,,0\n");
}

TEST_CASE("plot files are written even for absent sections") {
  const auto dir = std::filesystem::temp_directory_path() / "taskeval_plot_empty";
  std::filesystem::remove_all(dir);
  EvaluationReport empty;
  const auto paths = emit_plot_data(to_json(empty), dir);
  REQUIRE(paths.size() == 2);
  CHECK(taskeval::read_text_file(paths[1]) ==
        "metric,pipeline_id,machine,human,status,n,pearson,mae,ratio,truncated_for_display\n");
  std::filesystem::remove_all(dir);
}

#include "taskeval/report/report.hpp"

#include <cmath>
#include <set>

#include "taskeval/quality/prompts.hpp"

namespace taskeval::report {

using nlohmann::json;

std::string machine_label(const QualityCell& cell) {
  return cell.captioner_id ? cell.judge_id + "+" + *cell.captioner_id : cell.judge_id;
}

std::size_t EvaluationReport::failed_cells() const {
  std::size_t failed = 0;
  if (quality) {
    for (const auto& c : *quality) failed += c.score ? 0 : 1;
  }
  if (diversity_text) {
    for (const auto& d : *diversity_text) failed += d.result ? 0 : 1;
  }
  if (consistency) {
    for (const auto& c : *consistency) failed += c.result ? 0 : 1;
  }
  for (const auto* rows : {&dynamics, &generalization}) {
    if (!*rows) continue;
    for (const auto& r : **rows) failed += r.outcome.status == SecondaryStatus::ok ? 0 : 1;
  }
  return failed;
}

json real_to_json(double value) {
  if (std::isnan(value)) return nullptr;
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  return value;
}

namespace {

json quality_json(const QualityCell& c) {
  json j{{"pipeline_id", c.pipeline_id},
         {"task_id", c.task_id},
         {"group", c.group},
         {"published_flag", to_string(c.published_flag)},
         {"metric", quality::to_string(c.metric)},
         {"variant", quality::to_string(c.variant)},
         {"judge", c.judge_id},
         {"captioner", c.captioner_id ? json(*c.captioner_id) : json(nullptr)},
         {"label", machine_label(c)}};
  if (c.score) {
    const auto& s = *c.score;
    j["status"] = "ok";
    j["scores"] = s.per_iteration;
    j["mean"] = s.mean;
    j["variance"] = s.variance;
    j["sample_variance"] = s.sample_variance;
    j["scale"] = {s.scale.lo, s.scale.hi};
    j["requeries"] = s.requeries;
    j["response_keys"] = s.response_keys;
  } else {
    j["status"] = "failed";
    j["error"] = c.error;
  }
  return j;
}

json diversity_json(const DiversityRow& d) {
  json j{{"pipeline_id", d.pipeline_id}, {"endpoint_id", d.endpoint_id}};
  if (d.result) {
    j["status"] = "ok";
    j["group"] = d.result->group;
    j["div"] = real_to_json(d.result->div);
    j["n"] = d.result->n;
    j["clamp_warnings"] = d.result->clamp_warnings;
  } else {
    j["status"] = "failed";
    j["group"] = nullptr;
    j["error"] = d.error;
  }
  return j;
}

json consistency_json(const ConsistencyRow& c) {
  json j{{"metric", c.metric},
         {"pipeline_id", c.pipeline_id.empty() ? json(nullptr) : json(c.pipeline_id)},
         {"machine", c.machine_label},
         {"human", c.human_label}};
  if (c.result) {
    const auto& r = *c.result;
    j["status"] = stats::to_string(r.status);
    j["n"] = r.n;
    j["machine_only"] = r.machine_only;
    j["human_only"] = r.human_only;
    j["pearson"] = r.pearson ? real_to_json(*r.pearson) : json(nullptr);
    j["mae"] = real_to_json(r.mae);
    j["ratio"] = real_to_json(r.ratio);
  } else {
    j["status"] = "failed";
    j["error"] = c.error;
  }
  return j;
}

json secondary_json(const SecondaryRow& r) {
  json j{{"pipeline_id", r.pipeline_id}, {"group", r.group}, {"status", to_string(r.outcome.status)}};
  if (r.outcome.status == SecondaryStatus::ok) {
    j["result"] = r.outcome.result;
  } else {
    j["error"] = r.outcome.detail;
  }
  return j;
}

template <typename Rows, typename Fn>
json rows_json(const Rows& rows, Fn fn) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(fn(r));
  return out;
}

}  // namespace

json to_json(const EvaluationReport& report) {
  json datasets = json::array();
  for (const auto& d : report.datasets) {
    datasets.push_back({{"pipeline_id", d.pipeline_id},
                        {"manifest_sha256", d.manifest_sha256},
                        {"tasks", d.tasks},
                        {"episodes", d.episodes}});
  }
  const std::size_t failed = report.failed_cells();
  json j{{"format", kReportFormat},
         {"schema_version", kReportSchemaVersion},
         {"run",
          {{"config_digest", report.config_digest},
           {"seed", report.seed},
           {"iterations", report.iterations},
           {"metrics", report.metrics},
           {"datasets", datasets},
           {"endpoints", report.endpoints}}},
         {"definitions",
          {{"variance", "population variance of per-iteration scores; sample_variance uses n-1"},
           {"completion_frames", quality::kCompletionFrames},
           {"similarity_floor", diversity::kSimilarityFloor},
           {"perfect_agreement_mae", stats::kPerfectAgreementMae},
           {"prompt_sha256",
            {{"completion", quality::completion_prompt().sha256},
             {"alignment_direct", quality::alignment_direct_prompt().sha256},
             {"alignment_caption", quality::alignment_caption_prompt().sha256}}}}},
         {"summary", {{"failed_cells", failed}, {"status", failed == 0 ? "complete" : "partial"}}}};
  if (report.quality) j["quality"] = rows_json(*report.quality, quality_json);
  if (report.diversity_text) {
    j["diversity_text"] = rows_json(*report.diversity_text, diversity_json);
    j["diversity_text_warnings"] = report.diversity_warnings;
  }
  if (report.consistency) j["consistency"] = rows_json(*report.consistency, consistency_json);
  if (report.dynamics) j["dynamics_diversity"] = rows_json(*report.dynamics, secondary_json);
  if (report.generalization) j["generalization"] = rows_json(*report.generalization, secondary_json);
  return j;
}

std::string render_report(const EvaluationReport& report) { return to_json(report).dump(2) + "\n"; }

namespace {

struct Checker {
  std::vector<std::string> problems;

  bool field(const json& obj, const std::string& where, const char* key, bool (json::*is)() const noexcept) {
    if (!obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!(obj[key].*is)()) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  }

  void real_or_marker(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return;
    }
    const json& v = obj[key];
    if (v.is_null() || v.is_number()) return;
    if (v.is_string() && (v == "+inf" || v == "-inf")) return;
    problems.push_back(where + ": '" + key + "' must be a number, \"+inf\", \"-inf\" or null");
  }

  void status(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!field(obj, where, "status", &json::is_string)) return;
    const std::string s = obj["status"];
    if (!allowed.count(s)) {
      problems.push_back(where + ": unexpected status '" + s + "'");
    } else if (s != "ok" && s != "perfect_agreement" && s != "degenerate") {
      field(obj, where, "error", &json::is_string);
    }
  }
};

}  // namespace

std::vector<std::string> validate_report_json(const json& report) {
  Checker c;
  if (!report.is_object()) return {"report must be an object"};
  if (c.field(report, "report", "format", &json::is_string) && report["format"] != kReportFormat) {
    c.problems.emplace_back("report: unexpected format");
  }
  if (c.field(report, "report", "schema_version", &json::is_number_integer) &&
      report["schema_version"] != kReportSchemaVersion) {
    c.problems.emplace_back("report: unsupported schema_version");
  }
  if (c.field(report, "report", "run", &json::is_object)) {
    const json& run = report["run"];
    c.field(run, "run", "config_digest", &json::is_string);
    c.field(run, "run", "seed", &json::is_number_unsigned);
    c.field(run, "run", "iterations", &json::is_number_unsigned);
    c.field(run, "run", "metrics", &json::is_array);
    if (c.field(run, "run", "datasets", &json::is_array)) {
      for (const auto& d : run["datasets"]) {
        c.field(d, "run.datasets[]", "pipeline_id", &json::is_string);
        c.field(d, "run.datasets[]", "manifest_sha256", &json::is_string);
      }
    }
    if (c.field(run, "run", "endpoints", &json::is_array)) {
      for (const auto& e : run["endpoints"]) {
        c.field(e, "run.endpoints[]", "endpoint_id", &json::is_string);
        c.field(e, "run.endpoints[]", "model", &json::is_string);
        c.field(e, "run.endpoints[]", "kind", &json::is_string);
      }
    }
  }
  c.field(report, "report", "definitions", &json::is_object);
  if (c.field(report, "report", "summary", &json::is_object)) {
    c.field(report["summary"], "summary", "failed_cells", &json::is_number_unsigned);
    c.field(report["summary"], "summary", "status", &json::is_string);
  }

  if (report.contains("quality")) {
    if (!report["quality"].is_array()) c.problems.emplace_back("quality must be an array");
    for (const auto& q : report.value("quality", json::array())) {
      const std::string where = "quality[" + q.value("task_id", std::string("?")) + "]";
      for (const char* key : {"pipeline_id", "task_id", "group", "published_flag", "metric", "variant", "judge", "label"}) {
        c.field(q, where, key, &json::is_string);
      }
      c.status(q, where, {"ok", "failed"});
      if (q.value("status", "") == "ok") {
        c.field(q, where, "scores", &json::is_array);
        c.field(q, where, "mean", &json::is_number);
        c.field(q, where, "variance", &json::is_number);
        c.field(q, where, "sample_variance", &json::is_number);
        c.field(q, where, "response_keys", &json::is_array);
      }
    }
  }
  if (report.contains("diversity_text")) {
    if (!report["diversity_text"].is_array()) c.problems.emplace_back("diversity_text must be an array");
    for (const auto& d : report.value("diversity_text", json::array())) {
      c.field(d, "diversity_text[]", "pipeline_id", &json::is_string);
      c.field(d, "diversity_text[]", "endpoint_id", &json::is_string);
      c.status(d, "diversity_text[]", {"ok", "failed"});
      if (d.value("status", "") == "ok") {
        c.field(d, "diversity_text[]", "group", &json::is_string);
        c.real_or_marker(d, "diversity_text[]", "div");
        c.field(d, "diversity_text[]", "n", &json::is_number_unsigned);
      }
    }
    c.field(report, "report", "diversity_text_warnings", &json::is_array);
  }
  if (report.contains("consistency")) {
    if (!report["consistency"].is_array()) c.problems.emplace_back("consistency must be an array");
    for (const auto& r : report.value("consistency", json::array())) {
      c.field(r, "consistency[]", "metric", &json::is_string);
      c.field(r, "consistency[]", "machine", &json::is_string);
      c.field(r, "consistency[]", "human", &json::is_string);
      c.status(r, "consistency[]", {"ok", "perfect_agreement", "degenerate", "failed"});
      if (r.value("status", "") != "failed") {
        c.field(r, "consistency[]", "n", &json::is_number_unsigned);
        c.real_or_marker(r, "consistency[]", "pearson");
        c.real_or_marker(r, "consistency[]", "mae");
        c.real_or_marker(r, "consistency[]", "ratio");
      }
    }
  }
  for (const char* section : {"dynamics_diversity", "generalization"}) {
    if (!report.contains(section)) continue;
    if (!report[section].is_array()) c.problems.push_back(std::string(section) + " must be an array");
    for (const auto& r : report.value(section, json::array())) {
      c.field(r, section, "pipeline_id", &json::is_string);
      c.field(r, section, "group", &json::is_string);
      c.status(r, section, {"ok", "secondary unavailable", "failed", "schema_error"});
      if (r.value("status", "") == "ok") c.field(r, section, "result", &json::is_object);
    }
  }
  return c.problems;
}

}  // namespace taskeval::report

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskeval/core/types.hpp"
#include "taskeval/diversity/text_diversity.hpp"
#include "taskeval/quality/scoring.hpp"
#include "taskeval/report/secondary.hpp"
#include "taskeval/stats/consistency.hpp"

namespace taskeval::report {

inline constexpr std::string_view kReportFormat = "taskeval.report";
inline constexpr int kReportSchemaVersion = 1;

struct DatasetIdentity {
  std::string pipeline_id;
  std::string manifest_sha256;
  std::size_t tasks = 0;
  std::size_t episodes = 0;
};

/// One (task, metric, judge pipeline) evaluation. Exactly one of `score` / `error` is meaningful.
struct QualityCell {
  std::string pipeline_id;
  std::string task_id;
  std::string group;
  PublishedFlag published_flag = PublishedFlag::generated;
  quality::Metric metric = quality::Metric::completion;
  quality::PipelineVariant variant = quality::PipelineVariant::direct;
  std::string judge_id;
  std::optional<std::string> captioner_id;
  std::optional<quality::QualityScore> score;
  std::string error;
};

/// Column label used to pair quality cells with human ratings: the judge id, or
/// `judge+captioner` for the caption pipeline.
std::string machine_label(const QualityCell& cell);

struct DiversityRow {
  std::string pipeline_id;
  std::string endpoint_id;
  std::optional<diversity::DiversityResult> result;
  std::string error;  // set when the whole embedder failed
};

struct ConsistencyRow {
  std::string metric;
  std::string pipeline_id;  // empty when pooled across datasets
  std::optional<stats::ConsistencyResult> result;
  std::string machine_label;
  std::string human_label;
  std::string error;
};

struct SecondaryRow {
  std::string pipeline_id;
  std::string group;
  SecondaryResult outcome;
};

struct EvaluationReport {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<std::string> metrics;
  std::vector<DatasetIdentity> datasets;
  nlohmann::json endpoints = nlohmann::json::array();

  std::optional<std::vector<QualityCell>> quality;
  std::optional<std::vector<DiversityRow>> diversity_text;
  std::vector<std::string> diversity_warnings;
  std::optional<std::vector<ConsistencyRow>> consistency;
  std::optional<std::vector<SecondaryRow>> dynamics;
  std::optional<std::vector<SecondaryRow>> generalization;

  [[nodiscard]] std::size_t failed_cells() const;
};

nlohmann::json to_json(const EvaluationReport& report);

/// Pretty-printed JSON with sorted keys and a trailing newline.
std::string render_report(const EvaluationReport& report);

/// Structural check against the published report schema; returns one message per problem.
std::vector<std::string> validate_report_json(const nlohmann::json& report);

/// Finite values as numbers, infinities as "+inf"/"-inf", NaN as null.
nlohmann::json real_to_json(double value);

}  // namespace taskeval::report

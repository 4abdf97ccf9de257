#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taskeval/core/types.hpp"
#include "taskeval/gateway/gateway.hpp"
#include "taskeval/quality/prompts.hpp"

namespace taskeval::quality {

enum class Metric { alignment, completion };
enum class PipelineVariant { direct, caption_then_judge };

std::string_view to_string(Metric metric);
std::string_view to_string(PipelineVariant variant);
Metric parse_metric(std::string_view text);

struct ScoreScale {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const ScoreScale&) const = default;
};

inline constexpr ScoreScale kAlignmentScale{1.0, 5.0};
inline constexpr ScoreScale kCompletionScale{0.0, 10.0};

ScoreScale scale_of(Metric metric);

struct ScoreSummary {
  double mean = 0.0;
  double variance = 0.0;         // population
  double sample_variance = 0.0;  // n-1; zero for a single score
};

/// Two-pass mean and variances. Throws std::invalid_argument on an empty span.
ScoreSummary summarize_scores(std::span<const double> scores);

struct QualityScore {
  std::string task_id;
  Metric metric = Metric::completion;
  PipelineVariant variant = PipelineVariant::direct;
  std::string judge_id;
  std::optional<std::string> captioner_id;
  std::vector<double> per_iteration;
  double mean = 0.0;
  double variance = 0.0;
  double sample_variance = 0.0;
  ScoreScale scale;
  std::vector<std::string> response_keys;  // cache key of the reply behind each per-iteration score
  std::size_t requeries = 0;

  bool operator==(const QualityScore&) const = default;
};

struct ScoringOptions {
  std::size_t iterations = 5;
  std::size_t episode_index = 0;   // which episode's trajectory is judged for completion
  std::size_t max_requeries = 2;   // extra attempts per iteration when the reply has no parseable score
  AlignmentPromptOptions alignment;
};

class QualityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples eight frames from one episode, asks the judge `iterations` times in sequence
/// and aggregates the parsed 0-10 scores.
QualityScore score_task_completion(gateway::ModelGateway& gateway, const TaskRecord& task,
                                   std::span<const Episode> episodes, std::string_view judge_id,
                                   const ScoringOptions& options = {});

/// 1-5 scene alignment. The caption pipeline captions each view once and reuses the
/// captions for every judging iteration.
QualityScore score_scene_alignment(gateway::ModelGateway& gateway, const TaskRecord& task, PipelineVariant variant,
                                   std::string_view judge_id, std::optional<std::string_view> captioner_id,
                                   const ScoringOptions& options = {});

}  // namespace taskeval::quality

#include "taskeval/quality/scoring.hpp"

#include "taskeval/core/frames.hpp"
#include "taskeval/quality/score_parser.hpp"

namespace taskeval::quality {

namespace {

struct JudgedSample {
  double score = 0.0;
  std::string key;
  std::size_t requeries = 0;
};

JudgedSample judge_iteration(gateway::ModelGateway& gateway, const gateway::JudgeRequest& request, ScoreScale scale,
                             std::size_t iteration, std::size_t max_requeries) {
  std::string last_problem;
  for (std::size_t attempt = 0; attempt <= max_requeries; ++attempt) {
    std::string tag = "iter-" + std::to_string(iteration);
    if (attempt > 0) tag += ".requery-" + std::to_string(attempt);
    const gateway::JudgeResponse response = gateway.complete(request, tag);
    try {
      return {parse_score(response.raw, scale.lo, scale.hi), response.cache_key, attempt};
    } catch (const ScoreParseError& e) {
      last_problem = e.what();
    }
  }
  throw QualityError("judge " + request.endpoint_id + " gave no usable score in iteration " + std::to_string(iteration) +
                     " after " + std::to_string(max_requeries + 1) + " attempts: " + last_problem);
}

QualityScore run_iterations(gateway::ModelGateway& gateway, const gateway::JudgeRequest& request, QualityScore score,
                            const ScoringOptions& options) {
  if (options.iterations == 0) throw QualityError("iterations must be at least 1");
  for (std::size_t i = 0; i < options.iterations; ++i) {
    JudgedSample sample = judge_iteration(gateway, request, score.scale, i, options.max_requeries);
    score.per_iteration.push_back(sample.score);
    score.response_keys.push_back(std::move(sample.key));
    score.requeries += sample.requeries;
  }
  const ScoreSummary summary = summarize_scores(score.per_iteration);
  score.mean = summary.mean;
  score.variance = summary.variance;
  score.sample_variance = summary.sample_variance;
  return score;
}

void require_kind(gateway::ModelGateway& gateway, std::string_view id, bool allow_text_only, const char* role) {
  const auto kind = gateway.endpoint(id).kind;
  const bool ok = kind == gateway::EndpointKind::vision_chat || (allow_text_only && kind == gateway::EndpointKind::chat);
  if (!ok) {
    throw QualityError(std::string(role) + " " + std::string(id) + " has kind " + std::string(gateway::to_string(kind)));
  }
}

}  // namespace

std::string_view to_string(Metric metric) { return metric == Metric::alignment ? "alignment" : "completion"; }

std::string_view to_string(PipelineVariant variant) {
  return variant == PipelineVariant::direct ? "direct" : "caption_then_judge";
}

Metric parse_metric(std::string_view text) {
  if (text == "alignment") return Metric::alignment;
  if (text == "completion") return Metric::completion;
  throw std::invalid_argument("unknown metric '" + std::string(text) + "'");
}

ScoreScale scale_of(Metric metric) { return metric == Metric::alignment ? kAlignmentScale : kCompletionScale; }

ScoreSummary summarize_scores(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("summarize_scores: no scores");
  const double n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (double s : scores) sum += s;
  ScoreSummary summary;
  summary.mean = sum / n;
  double squares = 0.0;
  for (double s : scores) squares += (s - summary.mean) * (s - summary.mean);
  summary.variance = squares / n;
  summary.sample_variance = scores.size() > 1 ? squares / (n - 1.0) : 0.0;
  return summary;
}

QualityScore score_task_completion(gateway::ModelGateway& gateway, const TaskRecord& task,
                                   std::span<const Episode> episodes, std::string_view judge_id,
                                   const ScoringOptions& options) {
  require_kind(gateway, judge_id, false, "completion judge");
  if (episodes.empty()) throw QualityError("task " + task.task_id + " has no episodes");
  if (options.episode_index >= episodes.size()) {
    throw QualityError("task " + task.task_id + " has no episode at index " + std::to_string(options.episode_index));
  }
  const Episode& episode = episodes[options.episode_index];
  if (episode.frames.empty()) {
    throw QualityError("task " + task.task_id + " episode " + episode.episode_id +
                       " has no image frames; completion judging needs image observations");
  }
  const std::vector<PngImage> frames = select_frames(episode, kCompletionFrames);
  const gateway::JudgeRequest request = build_completion_prompt(judge_id, task.description, frames);

  QualityScore score;
  score.task_id = task.task_id;
  score.metric = Metric::completion;
  score.variant = PipelineVariant::direct;
  score.judge_id = judge_id;
  score.scale = kCompletionScale;
  return run_iterations(gateway, request, std::move(score), options);
}

QualityScore score_scene_alignment(gateway::ModelGateway& gateway, const TaskRecord& task, PipelineVariant variant,
                                   std::string_view judge_id, std::optional<std::string_view> captioner_id,
                                   const ScoringOptions& options) {
  QualityScore score;
  score.task_id = task.task_id;
  score.metric = Metric::alignment;
  score.variant = variant;
  score.judge_id = judge_id;
  score.scale = kAlignmentScale;

  gateway::JudgeRequest request;
  if (variant == PipelineVariant::direct) {
    require_kind(gateway, judge_id, false, "direct alignment judge");
    request = build_alignment_prompt_direct(judge_id, task.description, task.scene_views, options.alignment);
  } else {
    if (!captioner_id) throw QualityError("caption_then_judge alignment needs a captioner endpoint");
    require_kind(gateway, judge_id, true, "alignment judge");
    score.captioner_id = std::string(*captioner_id);
    const std::vector<Caption> captions = caption_views(gateway, task.scene_views, *captioner_id);
    request = build_alignment_prompt_caption(judge_id, task.description, captions);
  }
  return run_iterations(gateway, request, std::move(score), options);
}

}  // namespace taskeval::quality

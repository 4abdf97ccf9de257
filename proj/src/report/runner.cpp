#include "taskeval/report/runner.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <set>
#include <thread>

#include "taskeval/core/dataset_io.hpp"
#include "taskeval/core/text_io.hpp"
#include "taskeval/report/plot_data.hpp"

namespace taskeval::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct QualityJob {
  const TrajectoryDataset* dataset = nullptr;
  const TaskRecord* task = nullptr;
  QualityCell cell;
};

std::vector<std::string> selected_groups(const TrajectoryDataset& ds, const std::vector<std::string>& wanted) {
  std::vector<std::string> out;
  for (const auto& [group, ids] : ds.groups) {
    if (wanted.empty() || std::find(wanted.begin(), wanted.end(), group) != wanted.end()) out.push_back(group);
  }
  return out;
}

void run_parallel(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) fn(i);
  };
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<QualityJob> plan_quality(const RunConfig& config, const std::vector<TrajectoryDataset>& datasets) {
  std::vector<QualityJob> jobs;
  for (const auto& ds : datasets) {
    const auto groups = selected_groups(ds, config.groups);
    for (const auto& task : ds.tasks) {
      if (std::find(groups.begin(), groups.end(), task.group) == groups.end()) continue;
      auto add = [&](quality::Metric metric, quality::PipelineVariant variant, const std::string& judge,
                     std::optional<std::string> captioner) {
        QualityJob job;
        job.dataset = &ds;
        job.task = &task;
        job.cell.pipeline_id = ds.manifest.pipeline_id;
        job.cell.task_id = task.task_id;
        job.cell.group = task.group;
        job.cell.published_flag = task.published_flag;
        job.cell.metric = metric;
        job.cell.variant = variant;
        job.cell.judge_id = judge;
        job.cell.captioner_id = std::move(captioner);
        jobs.push_back(std::move(job));
      };
      for (const auto& j : config.completion_judges) {
        add(quality::Metric::completion, quality::PipelineVariant::direct, j, std::nullopt);
      }
      for (const auto& j : config.direct_judges) {
        add(quality::Metric::alignment, quality::PipelineVariant::direct, j, std::nullopt);
      }
      for (const auto& p : config.caption_pipelines) {
        add(quality::Metric::alignment, quality::PipelineVariant::caption_then_judge, p.judge, p.captioner);
      }
    }
  }
  return jobs;
}

void score_cell(gateway::ModelGateway& gw, const RunConfig& config, QualityJob& job) {
  quality::ScoringOptions options;
  options.iterations = config.iterations;
  options.episode_index = config.episode_index;
  options.max_requeries = config.max_requeries;
  options.alignment.substitute_view_count = config.substitute_view_count;
  try {
    if (job.cell.metric == quality::Metric::completion) {
      job.cell.score = quality::score_task_completion(gw, *job.task, job.dataset->episodes_of(job.task->task_id),
                                                      job.cell.judge_id, options);
    } else {
      std::optional<std::string_view> captioner;
      if (job.cell.captioner_id) captioner = *job.cell.captioner_id;
      job.cell.score =
          quality::score_scene_alignment(gw, *job.task, job.cell.variant, job.cell.judge_id, captioner, options);
    }
  } catch (const std::exception& e) {
    job.cell.error = e.what();
  }
}

std::vector<ConsistencyRow> evaluate_consistency(const RunConfig& config, const std::vector<QualityCell>& cells) {
  std::vector<ConsistencyRow> rows;
  for (const auto& source : config.human) {
    const quality::ScoreScale scale = quality::scale_of(quality::parse_metric(source.metric));
    std::optional<stats::HumanRatingTable> human;
    std::string load_error;
    try {
      human = stats::load_human_ratings(source.path, source.metric, scale.lo, scale.hi, source.label);
    } catch (const std::exception& e) {
      load_error = e.what();
    }

    std::vector<std::string> labels;
    std::map<std::string, std::map<std::string, double>> machine;
    std::map<std::string, std::string> collisions;
    for (const auto& c : cells) {
      if (quality::to_string(c.metric) != source.metric) continue;
      if (!source.pipeline_id.empty() && c.pipeline_id != source.pipeline_id) continue;
      const std::string label = machine_label(c);
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      if (!c.score) continue;
      if (!machine[label].emplace(c.task_id, c.score->mean).second) {
        collisions.emplace(label, "task_id '" + c.task_id + "' is scored in several datasets; set pipeline_id on the human source");
      }
    }

    for (const auto& label : labels) {
      ConsistencyRow row;
      row.metric = source.metric;
      row.pipeline_id = source.pipeline_id;
      row.machine_label = label;
      row.human_label = source.label;
      if (!human) {
        row.error = load_error;
      } else if (collisions.count(label)) {
        row.error = collisions[label];
      } else {
        try {
          row.result = stats::consistency_ratio(label, machine[label], *human);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SecondaryRow> evaluate_secondary(const RunConfig& config, const std::vector<TrajectoryDataset>& datasets,
                                             std::string_view subcommand) {
  std::vector<SecondaryRow> rows;
  const bool dyn = subcommand == kSubcommandDyn;
  for (const auto& ds : datasets) {
    const auto& wanted = config.secondary.groups.empty() ? config.groups : config.secondary.groups;
    for (const auto& group : selected_groups(ds, wanted)) {
      json params{{"dataset", fs::absolute(ds.root).string()},
                  {"pipeline_id", ds.manifest.pipeline_id},
                  {"group", group},
                  {"seed", config.seed},
                  {"params", dyn ? config.secondary.dyn_params : config.secondary.gen_params}};
      if (dyn) params["sizes"] = config.secondary.sizes;
      const fs::path work = config.output_dir / "secondary" / std::string(subcommand) / ds.manifest.pipeline_id / group;
      rows.push_back({ds.manifest.pipeline_id, group, invoke_secondary(config.secondary.launcher, subcommand, params, work)});
    }
  }
  return rows;
}

}  // namespace

RunOutcome run_evaluation(const RunConfig& config, const RunOptions& options) {
  const auto started = std::chrono::system_clock::now();
  const auto steady_start = std::chrono::steady_clock::now();
  config.validate();

  std::vector<TrajectoryDataset> datasets;
  std::set<std::string> pipelines;
  std::set<std::string> all_groups;
  for (const auto& root : config.datasets) {
    datasets.push_back(load_dataset(root));
    if (!pipelines.insert(datasets.back().manifest.pipeline_id).second) {
      throw ConfigError("two datasets share pipeline_id '" + datasets.back().manifest.pipeline_id + "'");
    }
    for (const auto& [g, ids] : datasets.back().groups) all_groups.insert(g);
  }
  for (const auto& g : config.groups) {
    if (!all_groups.count(g)) throw ConfigError("group '" + g + "' does not occur in any dataset");
  }

  RunOutcome outcome;
  EvaluationReport& report = outcome.report;
  report.config_digest = config.digest();
  report.seed = config.seed;
  report.iterations = config.iterations;
  report.metrics = config.metrics;
  for (const auto& ds : datasets) {
    report.datasets.push_back({ds.manifest.pipeline_id, manifest_digest(ds), ds.tasks.size(), ds.episode_count()});
  }
  for (const auto& ep : config.endpoints) {
    report.endpoints.push_back({{"endpoint_id", ep.endpoint_id},
                                {"kind", gateway::to_string(ep.kind)},
                                {"model", ep.model},
                                {"temperature", ep.temperature},
                                {"max_tokens", ep.max_tokens}});
  }

  const bool want_quality = config.wants(kMetricQuality) || config.wants(kMetricConsistency);
  std::unique_ptr<gateway::ModelGateway> gw;
  if (want_quality || config.wants(kMetricDiversityText)) {
    gateway::GatewayOptions gopts;
    gopts.max_in_flight = config.max_in_flight;
    gopts.retry.initial_delay = config.backoff_initial;
    gopts.retry.factor = config.backoff_factor;
    gopts.retry.jitter = config.backoff_jitter;
    gopts.retry.jitter_seed = config.seed;
    gopts.cache_dir = config.cache_dir;
    gopts.env_lookup = options.env_lookup;
    gopts.sleep = options.sleep;
    auto transport = options.transport ? options.transport : std::make_shared<gateway::HttplibTransport>();
    gw = std::make_unique<gateway::ModelGateway>(config.endpoints, transport, gopts);
  }

  if (want_quality) {
    auto jobs = plan_quality(config, datasets);
    run_parallel(jobs.size(), config.max_in_flight, [&](std::size_t i) { score_cell(*gw, config, jobs[i]); });
    std::vector<QualityCell> cells;
    cells.reserve(jobs.size());
    for (auto& job : jobs) cells.push_back(std::move(job.cell));
    report.quality = std::move(cells);
  }

  if (config.wants(kMetricDiversityText)) {
    std::vector<DiversityRow> rows;
    for (const auto& ds : datasets) {
      diversity::GroupDiversityOptions dopts;
      dopts.normalize_embeddings = config.normalize_embeddings;
      if (!config.groups.empty()) {
        dopts.groups = selected_groups(ds, config.groups);
        if (dopts.groups->empty()) continue;
      }
      for (const auto& embedder : config.embedders) {
        try {
          auto table = diversity::group_diversity(*gw, ds, embedder, dopts);
          for (auto& r : table.results) rows.push_back({ds.manifest.pipeline_id, embedder, std::move(r), {}});
          for (auto& w : table.warnings) report.diversity_warnings.push_back(ds.manifest.pipeline_id + ": " + w);
        } catch (const std::exception& e) {
          rows.push_back({ds.manifest.pipeline_id, embedder, std::nullopt, e.what()});
        }
      }
    }
    report.diversity_text = std::move(rows);
  }

  if (config.wants(kMetricConsistency)) report.consistency = evaluate_consistency(config, *report.quality);
  if (config.wants(kMetricDiversityDyn)) report.dynamics = evaluate_secondary(config, datasets, kSubcommandDyn);
  if (config.wants(kMetricGeneralize)) report.generalization = evaluate_secondary(config, datasets, kSubcommandGeneralize);

  if (gw) outcome.gateway_stats = gw->stats();

  const json report_json = to_json(report);
  fs::create_directories(config.output_dir);
  outcome.report_path = config.output_dir / "report.json";
  write_file_atomically(outcome.report_path, report_json.dump(2) + "\n");
  outcome.plot_paths = emit_plot_data(report_json, config.output_dir / "plots");

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - steady_start);
  const json timestamps{{"started_at", utc_timestamp(started)},
                        {"finished_at", utc_timestamp(std::chrono::system_clock::now())},
                        {"duration_ms", elapsed.count()},
                        {"network_requests", outcome.gateway_stats.network_requests},
                        {"cache_hits", outcome.gateway_stats.cache_hits},
                        {"cache_misses", outcome.gateway_stats.cache_misses}};
  write_file_atomically(config.output_dir / "report.timestamps.json", timestamps.dump(2) + "\n");

  outcome.exit_code = report.failed_cells() == 0 ? kExitSuccess : kExitPartial;
  return outcome;
}

}  // namespace taskeval::report

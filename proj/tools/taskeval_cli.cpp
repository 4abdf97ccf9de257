#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taskeval/core/dataset_io.hpp"
#include "taskeval/core/synthetic.hpp"
#include "taskeval/core/text_io.hpp"
#include "taskeval/quality/scoring.hpp"
#include "taskeval/report/config.hpp"
#include "taskeval/report/runner.hpp"
#include "taskeval/stats/consistency.hpp"

namespace fs = std::filesystem;
using namespace taskeval;

namespace {

struct RunFlags {
  std::string config;
  std::vector<std::string> datasets;
  std::string output_dir;
  std::string cache_dir;
  std::optional<std::size_t> iterations;
  std::vector<std::string> groups;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("-c,--config", flags.config, "TOML run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dataset", flags.datasets, "Dataset root; replaces the configured list");
  cmd->add_option("-o,--output-dir", flags.output_dir, "Override output_dir");
  cmd->add_option("--cache-dir", flags.cache_dir, "Override cache_dir");
  cmd->add_option("--iterations", flags.iterations, "Override the number of judge iterations");
  cmd->add_option("--group", flags.groups, "Restrict to these groups");
}

std::string show(const nlohmann::json& v) {
  if (v.is_number()) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v.get<double>();
    return s.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return "-";
}

void print_summary(const nlohmann::json& r) {
  if (r.contains("quality")) {
    std::cout << "quality\n";
    for (const auto& q : r["quality"]) {
      std::cout << "  " << q["pipeline_id"].get<std::string>() << "/" << q["task_id"].get<std::string>() << "  "
                << q["metric"].get<std::string>() << "  " << q["label"].get<std::string>() << "  ";
      if (q["status"] == "ok") {
        std::cout << "mean " << show(q["mean"]) << "  var " << show(q["variance"]) << "\n";
      } else {
        std::cout << "FAILED: " << q["error"].get<std::string>() << "\n";
      }
    }
  }
  if (r.contains("diversity_text")) {
    std::cout << "diversity-text\n";
    for (const auto& d : r["diversity_text"]) {
      std::cout << "  " << d["pipeline_id"].get<std::string>() << "  " << d["endpoint_id"].get<std::string>() << "  ";
      if (d["status"] == "ok") {
        std::cout << d["group"].get<std::string>() << "  div " << show(d["div"]) << "  n " << d["n"] << "\n";
      } else {
        std::cout << "FAILED: " << d["error"].get<std::string>() << "\n";
      }
    }
  }
  if (r.contains("consistency")) {
    std::cout << "consistency\n";
    for (const auto& c : r["consistency"]) {
      std::cout << "  " << c["metric"].get<std::string>() << "  " << c["machine"].get<std::string>() << " vs "
                << c["human"].get<std::string>() << "  ";
      if (c["status"] == "failed") {
        std::cout << "FAILED: " << c["error"].get<std::string>() << "\n";
      } else {
        std::cout << "r " << show(c["pearson"]) << "  mae " << show(c["mae"]) << "  ratio " << show(c["ratio"]) << "  ("
                  << c["status"].get<std::string>() << ")\n";
      }
    }
  }
  for (const char* section : {"dynamics_diversity", "generalization"}) {
    if (!r.contains(section)) continue;
    std::cout << section << "\n";
    for (const auto& s : r[section]) {
      std::cout << "  " << s["pipeline_id"].get<std::string>() << "/" << s["group"].get<std::string>() << "  "
                << s["status"].get<std::string>();
      if (s.contains("error")) std::cout << ": " << s["error"].get<std::string>();
      std::cout << "\n";
    }
  }
}

int run_with(const RunFlags& flags, std::optional<std::string> only_metric) {
  report::RunConfig config = report::load_run_config(flags.config);
  if (!flags.datasets.empty()) {
    config.datasets.clear();
    for (const auto& d : flags.datasets) config.datasets.push_back(fs::absolute(d));
  }
  if (!flags.output_dir.empty()) config.output_dir = fs::absolute(flags.output_dir);
  if (!flags.cache_dir.empty()) config.cache_dir = fs::absolute(flags.cache_dir);
  if (flags.iterations) config.iterations = *flags.iterations;
  if (!flags.groups.empty()) config.groups = flags.groups;
  if (only_metric) config.metrics = {*only_metric};

  const auto outcome = report::run_evaluation(config);
  print_summary(report::to_json(outcome.report));
  std::cout << "report: " << outcome.report_path.string() << "\n";
  if (outcome.exit_code == report::kExitPartial) {
    std::cerr << "partial: " << outcome.report.failed_cells() << " cell(s) failed\n";
  }
  return outcome.exit_code;
}

struct ConsistencyFlags {
  std::string human;
  std::string machine;
  std::string metric;
  std::string label = "human";
};

int run_consistency_files(const ConsistencyFlags& flags) {
  const auto scale = quality::scale_of(quality::parse_metric(flags.metric));
  const auto human = stats::load_human_ratings(flags.human, flags.metric, scale.lo, scale.hi, flags.label);
  const auto machine = stats::load_machine_scores(flags.machine);
  std::cout << "machine,human,n,pearson,mae,ratio,status\n";
  int exit_code = report::kExitSuccess;
  for (const auto& [model, scores] : machine) {
    try {
      const auto r = stats::consistency_ratio(model, scores, human);
      const auto field = [](double v) { return std::isnan(v) ? std::string() : format_real(v); };
      std::cout << csv_escape(model) << "," << csv_escape(flags.label) << "," << r.n << ","
                << (r.pearson ? format_real(*r.pearson) : std::string()) << "," << format_real(r.mae) << ","
                << field(r.ratio) << "," << stats::to_string(r.status) << "\n";
    } catch (const std::exception& e) {
      std::cerr << model << ": " << e.what() << "\n";
      exit_code = report::kExitPartial;
    }
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-set evaluation: judge-based quality, text diversity and human consistency"};
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string synth_out;
  std::string obs_kind = "vector";
  std::string published = "generated";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic linear-dynamics dataset");
  synth->add_option("--out", synth_out, "Dataset root to create")->required();
  synth->add_option("--modes", spec.n_modes, "Number of dynamics modes (tasks)");
  synth->add_option("--episodes-per-mode", spec.episodes_per_mode);
  synth->add_option("--length", spec.episode_length, "Episode length T");
  synth->add_option("--obs", obs_kind, "vector or image")->check(CLI::IsMember({"vector", "image"}));
  synth->add_option("--state-dim", spec.state_dim);
  synth->add_option("--action-dim", spec.action_dim);
  synth->add_option("--noise", spec.noise_scale);
  synth->add_option("--seed", spec.seed);
  synth->add_option("--image-size", spec.image_size);
  synth->add_option("--views", spec.scene_views, "Scene views per task");
  synth->add_option("--pipeline", spec.pipeline_id);
  synth->add_option("--group", spec.group);
  synth->add_option("--published", published, "published or generated")->check(CLI::IsMember({"published", "generated"}));

  RunFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    std::optional<std::string> metric;
  };
  const std::vector<Sub> subs{
      {"quality", "Judge scene alignment and task completion", std::string(report::kMetricQuality)},
      {"diversity-text", "Embedding-based diversity of task descriptions", std::string(report::kMetricDiversityText)},
      {"diversity-dyn", "Dynamics diversity via the secondary component", std::string(report::kMetricDiversityDyn)},
      {"generalize", "Policy generalization via the secondary component", std::string(report::kMetricGeneralize)},
      {"report", "Run every metric listed in the configuration", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, std::optional<std::string>>> run_cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_run_flags(cmd, flags);
    run_cmds.emplace_back(cmd, s.metric);
  }

  ConsistencyFlags cflags;
  auto* consistency = app.add_subcommand("consistency", "Pearson/MAE agreement between machine and human scores");
  consistency->add_option("-c,--config", flags.config, "TOML run configuration (scores judges first)");
  consistency->add_option("--output-dir", flags.output_dir);
  consistency->add_option("--cache-dir", flags.cache_dir);
  consistency->add_option("--human", cflags.human, "CSV task_id,score[,rater_id]");
  consistency->add_option("--machine", cflags.machine, "CSV task_id,model,mean[,variance]");
  consistency->add_option("--metric", cflags.metric)->check(CLI::IsMember({"alignment", "completion"}));
  consistency->add_option("--label", cflags.label, "Name of the human column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      spec.obs_kind = parse_observation_kind(obs_kind);
      spec.published_flag = parse_published_flag(published);
      const auto ds = generate_synthetic_dataset(spec);
      write_dataset(ds, synth_out);
      std::cout << "wrote " << ds.tasks.size() << " task(s), " << ds.episode_count() << " episode(s) to " << synth_out
                << "\n";
      return report::kExitSuccess;
    }
    if (consistency->parsed()) {
      if (!flags.config.empty()) return run_with(flags, std::string(report::kMetricConsistency));
      if (cflags.human.empty() || cflags.machine.empty() || cflags.metric.empty()) {
        std::cerr << "consistency: give --config, or --human, --machine and --metric\n";
        return report::kExitFatal;
      }
      return run_consistency_files(cflags);
    }
    for (const auto& [cmd, metric] : run_cmds) {
      if (cmd->parsed()) return run_with(flags, metric);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return report::kExitFatal;
  }
  return report::kExitFatal;
}

#include "taskeval/report/secondary.hpp"

#include <cmath>
#include <cstring>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "taskeval/core/text_io.hpp"

extern char** environ;

namespace taskeval::report {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SecondaryStatus status) {
  switch (status) {
    case SecondaryStatus::ok: return "ok";
    case SecondaryStatus::unavailable: return "secondary unavailable";
    case SecondaryStatus::failed: return "failed";
    case SecondaryStatus::schema_error: return "schema_error";
  }
  return "unknown";
}

namespace {

bool is_finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

void require_string(const json& r, const char* key, std::vector<std::string>& problems) {
  if (!r.contains(key)) {
    problems.push_back(std::string("missing field '") + key + "'");
  } else if (!r[key].is_string() || r[key].get<std::string>().empty()) {
    problems.push_back(std::string("field '") + key + "' must be a non-empty string");
  }
}

void require_seed(const json& r, std::vector<std::string>& problems) {
  if (!r.contains("seed")) {
    problems.emplace_back("missing field 'seed'");
  } else if (!r["seed"].is_number_unsigned()) {
    problems.emplace_back("field 'seed' must be a non-negative integer");
  }
}

void require_metric_block(const json& r, const char* key, std::vector<std::string>& problems) {
  if (!r.contains(key)) {
    problems.push_back(std::string("missing field '") + key + "'");
    return;
  }
  const json& m = r[key];
  if (!m.is_object()) {
    problems.push_back(std::string("field '") + key + "' must be an object");
    return;
  }
  if (!m.contains("success_rate")) {
    problems.push_back(std::string("missing field '") + key + ".success_rate'");
  } else if (!is_finite_number(m["success_rate"]) || m["success_rate"].get<double>() < 0.0 ||
             m["success_rate"].get<double>() > 1.0) {
    problems.push_back(std::string("field '") + key + ".success_rate' must be in [0, 1]");
  }
  if (!m.contains("mean_reward")) {
    problems.push_back(std::string("missing field '") + key + ".mean_reward'");
  } else if (!is_finite_number(m["mean_reward"])) {
    problems.push_back(std::string("field '") + key + ".mean_reward' must be a finite number");
  }
  if (!m.contains("episodes")) {
    problems.push_back(std::string("missing field '") + key + ".episodes'");
  } else if (!m["episodes"].is_number_unsigned() || m["episodes"].get<std::uint64_t>() == 0) {
    problems.push_back(std::string("field '") + key + ".episodes' must be a positive integer");
  }
}

}  // namespace

std::vector<std::string> validate_dyn_result(const json& result, std::span<const std::size_t> sizes) {
  std::vector<std::string> problems;
  if (!result.is_object()) return {"result must be a JSON object"};
  require_string(result, "group", problems);
  require_seed(result, problems);
  for (std::size_t size : sizes) {
    const std::string key = "err" + std::to_string(size);
    if (!result.contains(key)) {
      problems.push_back("missing field '" + key + "'");
    } else if (!is_finite_number(result[key]) || result[key].get<double>() < 0.0) {
      problems.push_back("field '" + key + "' must be a non-negative finite number");
    }
  }
  if (!result.contains("relative_drop")) {
    problems.emplace_back("missing field 'relative_drop'");
  } else if (!is_finite_number(result["relative_drop"])) {
    problems.emplace_back("field 'relative_drop' must be a finite number");
  }
  return problems;
}

std::vector<std::string> validate_generalize_result(const json& result) {
  std::vector<std::string> problems;
  if (!result.is_object()) return {"result must be a JSON object"};
  require_string(result, "group", problems);
  require_string(result, "backbone", problems);
  require_seed(result, problems);
  require_metric_block(result, "train_metric", problems);
  require_metric_block(result, "eval_metric", problems);
  return problems;
}

SecondaryResult invoke_secondary(const fs::path& launcher, std::string_view subcommand, const json& params,
                                 const fs::path& work_dir) {
  SecondaryResult out;
  if (subcommand != kSubcommandDyn && subcommand != kSubcommandGeneralize) {
    out.status = SecondaryStatus::failed;
    out.detail = "unknown secondary subcommand '" + std::string(subcommand) + "'";
    return out;
  }
  if (launcher.empty() || !fs::is_regular_file(launcher) || ::access(launcher.c_str(), X_OK) != 0) {
    out.status = SecondaryStatus::unavailable;
    out.detail = launcher.empty() ? "no launcher configured" : "launcher not found or not executable: " + launcher.string();
    return out;
  }

  fs::create_directories(work_dir);
  const fs::path params_path = work_dir / "params.json";
  const fs::path result_path = work_dir / "result.json";
  const fs::path log_path = work_dir / "secondary.log";
  std::error_code ec;
  fs::remove(result_path, ec);
  write_file_atomically(params_path, params.dump(2) + "\n");

  const std::string launcher_s = launcher.string();
  const std::string sub_s(subcommand);
  const std::string params_s = params_path.string();
  const std::string result_s = result_path.string();
  std::vector<char*> argv{const_cast<char*>(launcher_s.c_str()), const_cast<char*>(sub_s.c_str()),
                          const_cast<char*>("--params"),         const_cast<char*>(params_s.c_str()),
                          const_cast<char*>("--result"),         const_cast<char*>(result_s.c_str()),
                          nullptr};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

  pid_t pid = 0;
  const int rc = posix_spawn(&pid, launcher_s.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    out.status = rc == ENOENT || rc == EACCES ? SecondaryStatus::unavailable : SecondaryStatus::failed;
    out.detail = std::string("spawn failed: ") + std::strerror(rc);
    return out;
  }

  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0) {
    if (errno != EINTR) {
      out.status = SecondaryStatus::failed;
      out.detail = std::string("waitpid failed: ") + std::strerror(errno);
      return out;
    }
  }
  if (WIFSIGNALED(wstatus)) {
    out.status = SecondaryStatus::failed;
    out.detail = "secondary terminated by signal " + std::to_string(WTERMSIG(wstatus));
    return out;
  }
  out.exit_code = WEXITSTATUS(wstatus);
  if (out.exit_code != 0) {
    out.status = SecondaryStatus::failed;
    out.detail = "secondary exited with status " + std::to_string(out.exit_code) + "; see " + log_path.string();
    return out;
  }

  json result;
  try {
    result = json::parse(read_text_file(result_path));
  } catch (const std::exception& e) {
    out.status = SecondaryStatus::schema_error;
    out.detail = std::string("unreadable result: ") + e.what();
    return out;
  }

  std::vector<std::string> problems;
  if (subcommand == kSubcommandDyn) {
    std::vector<std::size_t> sizes;
    if (params.contains("sizes")) sizes = params["sizes"].get<std::vector<std::size_t>>();
    problems = validate_dyn_result(result, sizes);
  } else {
    problems = validate_generalize_result(result);
  }
  if (!problems.empty()) {
    out.status = SecondaryStatus::schema_error;
    out.detail = problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) out.detail += "; " + problems[i];
    return out;
  }
  out.status = SecondaryStatus::ok;
  out.result = std::move(result);
  return out;
}

}  // namespace taskeval::report

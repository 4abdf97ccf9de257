#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "taskeval/gateway/gateway.hpp"
#include "taskeval/gateway/transport.hpp"
#include "taskeval/report/config.hpp"
#include "taskeval/report/report.hpp"

namespace taskeval::report {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct RunOptions {
  std::shared_ptr<gateway::HttpTransport> transport;  // cpp-httplib when null
  std::function<std::optional<std::string>(const std::string&)> env_lookup;
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct RunOutcome {
  EvaluationReport report;
  std::filesystem::path report_path;
  std::vector<std::filesystem::path> plot_paths;
  gateway::GatewayStats gateway_stats;
  int exit_code = kExitSuccess;
};

/// Validates the config, loads every dataset, evaluates the requested metrics and writes
/// report.json, report.timestamps.json and plots/ under the output directory.
/// Configuration and dataset errors throw before any request is sent; per-cell failures
/// are recorded in the report and yield kExitPartial.
RunOutcome run_evaluation(const RunConfig& config, const RunOptions& options = {});

}  // namespace taskeval::report

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace taskeval::report {

/// Per (pipeline_id, published_flag): mean quality and mean per-task variance for each metric.
std::string quality_scatter_csv(const nlohmann::json& report);

/// One bar per consistency row. Negative ratios are written unchanged and flagged in
/// `truncated_for_display` for plots whose axis starts at zero.
std::string consistency_bars_csv(const nlohmann::json& report);

/// Writes quality_scatter.csv and consistency_bars.csv into `dir`; returns the paths written.
/// Sections missing from the report produce header-only files.
std::vector<std::filesystem::path> emit_plot_data(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace taskeval::report

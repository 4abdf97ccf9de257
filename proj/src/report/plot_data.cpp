#include "taskeval/report/plot_data.hpp"

#include <map>
#include <tuple>

#include "taskeval/core/text_io.hpp"

namespace taskeval::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Accumulator {
  double mean_sum = 0.0;
  double variance_sum = 0.0;
  std::size_t n = 0;
};

std::string cell(const Accumulator& a, bool variance) {
  if (a.n == 0) return {};
  return format_real((variance ? a.variance_sum : a.mean_sum) / static_cast<double>(a.n));
}

std::string json_real(const json& v) {
  if (v.is_number()) return format_real(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return {};
}

}  // namespace

std::string quality_scatter_csv(const json& report) {
  std::map<std::pair<std::string, std::string>, std::map<std::string, Accumulator>> cells;
  for (const auto& q : report.value("quality", json::array())) {
    if (q.value("status", "") != "ok") continue;
    auto& acc = cells[{q["pipeline_id"].get<std::string>(), q["published_flag"].get<std::string>()}][q["metric"].get<std::string>()];
    acc.mean_sum += q["mean"].get<double>();
    acc.variance_sum += q["variance"].get<double>();
    ++acc.n;
  }
  std::string out =
      "pipeline_id,published_flag,alignment_mean,alignment_variance,alignment_n,completion_mean,completion_variance,completion_n\n";
  for (const auto& [key, metrics] : cells) {
    auto get = [&](const char* m) {
      auto it = metrics.find(m);
      return it == metrics.end() ? Accumulator{} : it->second;
    };
    const Accumulator a = get("alignment");
    const Accumulator c = get("completion");
    out += csv_escape(key.first) + "," + key.second + "," + cell(a, false) + "," + cell(a, true) + "," +
           std::to_string(a.n) + "," + cell(c, false) + "," + cell(c, true) + "," + std::to_string(c.n) + "\n";
  }
  return out;
}

std::string consistency_bars_csv(const json& report) {
  std::string out = "metric,pipeline_id,machine,human,status,n,pearson,mae,ratio,truncated_for_display\n";
  for (const auto& r : report.value("consistency", json::array())) {
    const std::string status = r.value("status", "");
    if (status == "failed") continue;
    const json& ratio = r["ratio"];
    const bool negative = (ratio.is_number() && ratio.get<double>() < 0.0) || ratio == "-inf";
    out += csv_escape(r["metric"].get<std::string>()) + "," +
           csv_escape(r["pipeline_id"].is_string() ? r["pipeline_id"].get<std::string>() : "") + "," +
           csv_escape(r["machine"].get<std::string>()) + "," + csv_escape(r["human"].get<std::string>()) + "," + status +
           "," + std::to_string(r["n"].get<std::size_t>()) + "," + json_real(r["pearson"]) + "," + json_real(r["mae"]) +
           "," + json_real(ratio) + "," + (negative ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<fs::path> emit_plot_data(const json& report, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path scatter = dir / "quality_scatter.csv";
  const fs::path bars = dir / "consistency_bars.csv";
  write_file_atomically(scatter, quality_scatter_csv(report));
  write_file_atomically(bars, consistency_bars_csv(report));
  return {scatter, bars};
}

}  // namespace taskeval::report

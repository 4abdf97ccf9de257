#include "taskeval/stats/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "taskeval/core/text_io.hpp"

namespace taskeval::stats {

namespace {

double cascade_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return cascade_sum(values.first(half)) + cascade_sum(values.subspan(half));
}

void require_same_length(std::span<const double> xs, std::span<const double> ys, std::size_t minimum) {
  if (xs.size() != ys.size()) {
    throw StatsError(StatsErrc::length_mismatch,
                     "column lengths differ: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < minimum) {
    throw StatsError(StatsErrc::too_few, "need at least " + std::to_string(minimum) + " pairs, got " + std::to_string(xs.size()));
  }
}

bool is_constant(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *lo == *hi;
}

std::size_t column_index(const CsvTable& table, std::string_view name, bool required, const std::string& path) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    if (required) throw StatsError(StatsErrc::bad_input, path + ": missing column '" + std::string(name) + "'");
    return table.header.size();
  }
  return static_cast<std::size_t>(it - table.header.begin());
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require_same_length(xs, ys, 2);
  if (is_constant(xs) || is_constant(ys)) {
    throw StatsError(StatsErrc::degenerate, "pearson: a column has zero variance");
  }
  const double n = static_cast<double>(xs.size());
  const double mean_x = cascade_sum(xs) / n;
  const double mean_y = cascade_sum(ys) / n;
  std::vector<double> xy(xs.size()), xx(xs.size()), yy(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    xy[i] = dx * dy;
    xx[i] = dx * dx;
    yy[i] = dy * dy;
  }
  const double r = cascade_sum(xy) / std::sqrt(cascade_sum(xx) * cascade_sum(yy));
  return std::clamp(r, -1.0, 1.0);
}

double mae(std::span<const double> xs, std::span<const double> ys) {
  require_same_length(xs, ys, 1);
  std::vector<double> diffs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) diffs[i] = std::abs(xs[i] - ys[i]);
  return cascade_sum(diffs) / static_cast<double>(xs.size());
}

std::string_view to_string(ConsistencyStatus status) {
  switch (status) {
    case ConsistencyStatus::ok: return "ok";
    case ConsistencyStatus::perfect_agreement: return "perfect_agreement";
    case ConsistencyStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

HumanRatingTable load_human_ratings(const std::filesystem::path& path, std::string_view metric, double scale_lo,
                                    double scale_hi, std::string source) {
  const std::string where = path.string();
  CsvTable csv;
  try {
    csv = parse_csv(read_text_file(path));
  } catch (const std::exception& e) {
    throw StatsError(StatsErrc::bad_input, where + ": " + e.what());
  }
  const std::size_t task_col = column_index(csv, "task_id", true, where);
  const std::size_t score_col = column_index(csv, "score", true, where);
  const std::size_t rater_col = column_index(csv, "rater_id", false, where);
  const bool per_rater = rater_col < csv.header.size();

  HumanRatingTable table;
  table.metric = metric;
  table.scale_lo = scale_lo;
  table.scale_hi = scale_hi;
  table.source = source.empty() ? path.stem().string() : std::move(source);

  std::map<std::string, std::size_t> row_of;
  std::vector<double> sums;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& fields = csv.rows[r];
    const std::string& task = fields[task_col];
    const std::string line = where + ":" + std::to_string(r + 2);
    if (task.empty()) throw StatsError(StatsErrc::bad_input, line + ": empty task_id");
    double score = 0.0;
    try {
      score = parse_real(fields[score_col]);
    } catch (const std::invalid_argument& e) {
      throw StatsError(StatsErrc::bad_input, line + ": " + e.what());
    }
    if (score < scale_lo || score > scale_hi) {
      throw StatsError(StatsErrc::bad_input, line + ": score " + fields[score_col] + " outside the " + std::string(metric) +
                                                 " scale [" + format_real(scale_lo) + ", " + format_real(scale_hi) + "]");
    }
    const std::string rater = per_rater ? fields[rater_col] : std::string();
    if (!seen.emplace(task, rater).second) {
      throw StatsError(StatsErrc::bad_input, line + ": duplicate rating for task '" + task + "'" +
                                                 (per_rater ? " by rater '" + rater + "'" : std::string()));
    }
    auto [it, inserted] = row_of.emplace(task, table.rows.size());
    if (inserted) {
      table.rows.push_back({task, 0.0, 0});
      sums.push_back(0.0);
    }
    sums[it->second] += score;
    ++table.rows[it->second].raters;
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    table.rows[i].score = sums[i] / static_cast<double>(table.rows[i].raters);
  }
  return table;
}

ConsistencyResult consistency_ratio(std::string_view machine_label, const std::map<std::string, double>& machine_scores,
                                    const HumanRatingTable& human) {
  ConsistencyResult result;
  result.machine_label = machine_label;
  result.human_label = human.source;

  std::vector<double> machine, people;
  std::set<std::string> joined;
  for (const auto& row : human.rows) {
    auto it = machine_scores.find(row.task_id);
    if (it == machine_scores.end()) {
      ++result.human_only;
      continue;
    }
    machine.push_back(it->second);
    people.push_back(row.score);
    joined.insert(row.task_id);
  }
  result.machine_only = machine_scores.size() - joined.size();
  result.n = machine.size();
  if (result.n < 2) {
    throw StatsError(StatsErrc::too_few, "only " + std::to_string(result.n) + " task(s) shared between " +
                                             std::string(machine_label) + " and " + human.source);
  }

  result.mae = mae(machine, people);
  try {
    result.pearson = pearson(machine, people);
  } catch (const StatsError& e) {
    if (e.code() != StatsErrc::degenerate) throw;
  }

  if (result.mae < kPerfectAgreementMae) {
    result.status = ConsistencyStatus::perfect_agreement;
    const bool negative = result.pearson && *result.pearson < 0.0;
    result.ratio = negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  } else if (!result.pearson) {
    result.status = ConsistencyStatus::degenerate;
    result.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    result.ratio = *result.pearson / result.mae;
  }
  return result;
}

std::map<std::string, std::map<std::string, double>> load_machine_scores(const std::filesystem::path& path) {
  const std::string where = path.string();
  CsvTable csv;
  try {
    csv = parse_csv(read_text_file(path));
  } catch (const std::exception& e) {
    throw StatsError(StatsErrc::bad_input, where + ": " + e.what());
  }
  const std::size_t task_col = column_index(csv, "task_id", true, where);
  const std::size_t model_col = column_index(csv, "model", true, where);
  const std::size_t mean_col = column_index(csv, "mean", true, where);
  std::map<std::string, std::map<std::string, double>> scores;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& fields = csv.rows[r];
    double value = 0.0;
    try {
      value = parse_real(fields[mean_col]);
    } catch (const std::invalid_argument& e) {
      throw StatsError(StatsErrc::bad_input, where + ":" + std::to_string(r + 2) + ": " + e.what());
    }
    if (!scores[fields[model_col]].emplace(fields[task_col], value).second) {
      throw StatsError(StatsErrc::bad_input, where + ":" + std::to_string(r + 2) + ": duplicate (task, model)");
    }
  }
  return scores;
}

}  // namespace taskeval::stats

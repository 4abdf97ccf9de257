#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace taskeval::stats {

enum class StatsErrc { length_mismatch, too_few, degenerate, bad_input };

class StatsError : public std::runtime_error {
 public:
  StatsError(StatsErrc code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  [[nodiscard]] StatsErrc code() const { return code_; }

 private:
  StatsErrc code_;
};

/// Sample Pearson correlation from centred products. Throws StatsError(degenerate)
/// when either column is constant, rather than returning NaN.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Mean absolute error, (1/n) sum |x_i - y_i|.
double mae(std::span<const double> xs, std::span<const double> ys);

struct HumanRating {
  std::string task_id;
  double score = 0.0;
  std::size_t raters = 1;
};

struct HumanRatingTable {
  std::string metric;  // "alignment" or "completion"
  double scale_lo = 0.0;
  double scale_hi = 0.0;
  std::string source;
  std::vector<HumanRating> rows;  // file order of first appearance
};

/// CSV with header task_id,score[,rater_id]. Rows sharing a task_id are averaged
/// when a rater_id column is present; otherwise a repeated task_id is an error.
HumanRatingTable load_human_ratings(const std::filesystem::path& path, std::string_view metric, double scale_lo,
                                    double scale_hi, std::string source = {});

enum class ConsistencyStatus { ok, perfect_agreement, degenerate };
std::string_view to_string(ConsistencyStatus status);

/// Pearson r over MAE for machine scores joined to human ratings on task_id.
struct ConsistencyResult {
  std::string machine_label;
  std::string human_label;
  std::size_t n = 0;
  std::size_t machine_only = 0;  // excluded, present only in the machine scores
  std::size_t human_only = 0;    // excluded, present only in the human table
  std::optional<double> pearson;  // unset when a column is constant
  double mae = 0.0;
  /// r / MAE when status is ok; +/-infinity when MAE < kPerfectAgreementMae; NaN when degenerate.
  double ratio = 0.0;
  ConsistencyStatus status = ConsistencyStatus::ok;
};

inline constexpr double kPerfectAgreementMae = 1e-9;

ConsistencyResult consistency_ratio(std::string_view machine_label, const std::map<std::string, double>& machine_scores,
                                    const HumanRatingTable& human);

/// Long-form model score CSV: task_id,model,mean[,variance]. Returns model -> task_id -> mean.
std::map<std::string, std::map<std::string, double>> load_machine_scores(const std::filesystem::path& path);

}  // namespace taskeval::stats

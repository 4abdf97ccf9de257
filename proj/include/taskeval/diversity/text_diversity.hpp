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

namespace taskeval::diversity {

/// Floor applied to a task's mean similarity before taking its log.
inline constexpr double kSimilarityFloor = 1e-6;
/// Allowed deviation of ||e_i|| from 1.
inline constexpr double kUnitNormTolerance = 1e-9;
inline constexpr std::string_view kAllGroup = "All";

class DiversityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EmbeddingSet {
  std::string group;
  std::string endpoint_id;
  std::vector<std::string> task_ids;
  std::vector<std::vector<double>> vectors;  // unit norm, equal dimension
};

struct DiversityResult {
  std::string group;
  std::string endpoint_id;
  double div = 0.0;
  std::size_t n = 0;
  std::size_t clamp_warnings = 0;
};

/// Divides each vector by its Euclidean norm. Throws DiversityError on a zero or non-finite vector.
std::vector<std::vector<double>> normalize(std::span<const std::vector<double>> vectors);

/// Pairwise (cascade) summation; error grows O(log n) and is insensitive to ordering.
double pairwise_sum(std::span<const double> values);

/// div = -(1/N) sum_i log( (1/(N-1)) sum_{j != i} e_i . e_j ).
/// Each inner mean below kSimilarityFloor is raised to it and counted in clamp_warnings.
/// Requires N >= 2 unit vectors of equal dimension.
DiversityResult diversity(const EmbeddingSet& set);

struct GroupDiversityTable {
  std::vector<DiversityResult> results;  // requested groups in label order, then "All"
  std::vector<std::string> warnings;
};

struct GroupDiversityOptions {
  std::optional<std::vector<std::string>> groups;  // all groups when unset
  bool normalize_embeddings = true;
};

/// Embeds each task description once through `embedder_id` and scores every group plus
/// the union of the selected groups. Groups with fewer than two tasks are skipped with a warning.
GroupDiversityTable group_diversity(gateway::ModelGateway& gateway, const TrajectoryDataset& dataset,
                                    std::string_view embedder_id, const GroupDiversityOptions& options = {});

}  // namespace taskeval::diversity

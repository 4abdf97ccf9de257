#include "taskeval/diversity/text_diversity.hpp"

#include <cmath>
#include <map>

namespace taskeval::diversity {

namespace {

double dot(std::span<const double> a, std::span<const double> b, std::vector<double>& scratch) {
  scratch.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) scratch[k] = a[k] * b[k];
  return pairwise_sum(scratch);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<std::vector<double>> normalize(std::span<const std::vector<double>> vectors) {
  std::vector<std::vector<double>> out;
  out.reserve(vectors.size());
  std::vector<double> squares;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    squares.resize(vectors[i].size());
    for (std::size_t k = 0; k < vectors[i].size(); ++k) squares[k] = vectors[i][k] * vectors[i][k];
    const double norm = std::sqrt(pairwise_sum(squares));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DiversityError("vector " + std::to_string(i) + " has zero or non-finite norm");
    }
    std::vector<double> unit(vectors[i].size());
    for (std::size_t k = 0; k < unit.size(); ++k) unit[k] = vectors[i][k] / norm;
    out.push_back(std::move(unit));
  }
  return out;
}

DiversityResult diversity(const EmbeddingSet& set) {
  const std::size_t n = set.vectors.size();
  if (n < 2) throw DiversityError("diversity needs at least 2 embeddings, got " + std::to_string(n));
  const std::size_t dim = set.vectors.front().size();
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    if (set.vectors[i].size() != dim || dim == 0) throw DiversityError("embedding " + std::to_string(i) + " has a different dimension");
    const double norm = std::sqrt(dot(set.vectors[i], set.vectors[i], scratch));
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw DiversityError("embedding " + std::to_string(i) + " is not unit norm (" + std::to_string(norm) + ")");
    }
  }

  DiversityResult result;
  result.group = set.group;
  result.endpoint_id = set.endpoint_id;
  result.n = n;

  std::vector<double> similarities(n - 1);
  std::vector<double> log_means(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t slot = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) similarities[slot++] = dot(set.vectors[i], set.vectors[j], scratch);
    }
    double mean = pairwise_sum(similarities) / static_cast<double>(n - 1);
    if (mean < kSimilarityFloor) {
      mean = kSimilarityFloor;
      ++result.clamp_warnings;
    }
    log_means[i] = std::log(mean);
  }
  result.div = -pairwise_sum(log_means) / static_cast<double>(n);
  return result;
}

GroupDiversityTable group_diversity(gateway::ModelGateway& gateway, const TrajectoryDataset& dataset,
                                    std::string_view embedder_id, const GroupDiversityOptions& options) {
  GroupDiversityTable table;
  std::vector<std::string> labels;
  if (options.groups) {
    for (const auto& label : *options.groups) {
      if (!dataset.groups.count(label)) throw DiversityError("dataset has no group '" + label + "'");
      labels.push_back(label);
    }
  } else {
    for (const auto& [label, ids] : dataset.groups) labels.push_back(label);
  }

  std::vector<std::string> union_ids;
  for (const auto& label : labels) {
    for (const auto& id : dataset.groups.at(label)) union_ids.push_back(id);
  }
  if (union_ids.empty()) return table;

  std::vector<std::string> descriptions;
  for (const auto& id : union_ids) descriptions.push_back(dataset.task(id).description);
  std::vector<std::vector<double>> raw = gateway.embed(descriptions, embedder_id);
  std::vector<std::vector<double>> vectors = options.normalize_embeddings ? normalize(raw) : std::move(raw);
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < union_ids.size(); ++i) index_of[union_ids[i]] = i;

  auto evaluate = [&](const std::string& label, const std::vector<std::string>& ids) {
    if (ids.size() < 2) {
      table.warnings.push_back("group '" + label + "' has " + std::to_string(ids.size()) + " task(s); skipped");
      return;
    }
    EmbeddingSet set{label, std::string(embedder_id), ids, {}};
    for (const auto& id : ids) set.vectors.push_back(vectors[index_of.at(id)]);
    table.results.push_back(diversity(set));
    if (table.results.back().clamp_warnings > 0) {
      table.warnings.push_back("group '" + label + "': " + std::to_string(table.results.back().clamp_warnings) +
                               " mean similarities clamped to " + std::to_string(kSimilarityFloor));
    }
  };

  for (const auto& label : labels) evaluate(label, dataset.groups.at(label));
  evaluate(std::string(kAllGroup), union_ids);
  return table;
}

}  // namespace taskeval::diversity

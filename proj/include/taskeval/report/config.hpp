#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskeval/gateway/endpoint.hpp"

namespace taskeval::report {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kMetricQuality = "quality";
inline constexpr std::string_view kMetricDiversityText = "diversity-text";
inline constexpr std::string_view kMetricDiversityDyn = "diversity-dyn";
inline constexpr std::string_view kMetricGeneralize = "generalize";
inline constexpr std::string_view kMetricConsistency = "consistency";

struct CaptionPipeline {
  std::string captioner;
  std::string judge;
};

/// Human ratings compared against every judge column of the matching metric.
struct HumanSource {
  std::string metric;  // alignment | completion
  std::filesystem::path path;
  std::string label;
  std::string pipeline_id;  // restrict machine scores to one dataset; empty for all
};

struct SecondaryConfig {
  std::filesystem::path launcher;
  std::vector<std::size_t> sizes{10, 20, 40};
  std::vector<std::string> groups;  // empty: every group
  nlohmann::json dyn_params = nlohmann::json::object();
  nlohmann::json gen_params = nlohmann::json::object();
};

struct RunConfig {
  std::vector<std::filesystem::path> datasets;
  std::vector<gateway::ModelEndpoint> endpoints;
  std::vector<std::string> metrics;
  std::size_t iterations = 5;
  std::vector<std::string> groups;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
  std::uint64_t seed = 0;
  std::size_t max_in_flight = 4;

  std::chrono::milliseconds backoff_initial{1000};
  double backoff_factor = 2.0;
  double backoff_jitter = 0.2;

  std::vector<std::string> completion_judges;
  std::vector<std::string> direct_judges;
  std::vector<CaptionPipeline> caption_pipelines;
  std::size_t episode_index = 0;
  std::size_t max_requeries = 2;
  bool substitute_view_count = false;

  std::vector<std::string> embedders;
  bool normalize_embeddings = true;

  std::vector<HumanSource> human;
  SecondaryConfig secondary;

  [[nodiscard]] bool wants(std::string_view metric) const;
  [[nodiscard]] const gateway::ModelEndpoint& endpoint(std::string_view id) const;

  /// Cross-reference checks; throws ConfigError. Performs no network access.
  void validate() const;

  /// Digest of the evaluation-relevant settings. Filesystem locations, base URLs and
  /// credential variable names are excluded so relocated reruns compare equal.
  [[nodiscard]] std::string digest() const;
  [[nodiscard]] nlohmann::json semantic_json() const;
};

/// Parses TOML; relative paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace taskeval::report

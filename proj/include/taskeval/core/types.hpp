#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskeval/core/matrix.hpp"

namespace taskeval {

/// "-P" tasks come from a pipeline's released set, "-G" tasks from rerunning its generator.
enum class PublishedFlag { published, generated };

enum class ObservationKind { vector, image };

std::string_view to_string(PublishedFlag flag);
std::string_view to_string(ObservationKind kind);
PublishedFlag parse_published_flag(std::string_view text);
ObservationKind parse_observation_kind(std::string_view text);

/// Encoded PNG file contents. Kept as bytes so datasets round-trip bit-exactly.
struct PngImage {
  std::vector<std::uint8_t> bytes;

  bool operator==(const PngImage&) const = default;
};

struct SceneView {
  std::string camera;
  PngImage image;

  bool operator==(const SceneView&) const = default;
};

struct TaskRecord {
  std::string task_id;
  std::string description;
  std::string pipeline_id;
  std::string group;
  PublishedFlag published_flag = PublishedFlag::generated;
  std::vector<SceneView> scene_views;
  std::vector<std::string> episode_ids;

  bool operator==(const TaskRecord&) const = default;
};

struct ObservationSpec {
  ObservationKind kind = ObservationKind::vector;
  std::size_t dim = 0;     // vector kind
  std::size_t width = 0;   // image kind
  std::size_t height = 0;  // image kind

  bool operator==(const ObservationSpec&) const = default;
};

/// One trajectory of length T: T observations, T-1 actions, T proprioceptive states.
struct Episode {
  std::string episode_id;
  std::size_t length = 0;
  RealMatrix observations;       // T x dim, vector kind only
  std::vector<PngImage> frames;  // T frames, image kind only
  RealMatrix actions;
  RealMatrix states;

  bool operator==(const Episode&) const = default;
};

struct Manifest {
  std::string pipeline_id;
  ObservationSpec observation;
  std::size_t action_dim = 0;
  std::size_t state_dim = 0;
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const Manifest&) const = default;
};

class TrajectoryDataset {
 public:
  std::filesystem::path root;
  Manifest manifest;
  std::vector<TaskRecord> tasks;
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::string, std::vector<Episode>> episodes;  // keyed by task_id, in episode_ids order

  [[nodiscard]] const TaskRecord& task(std::string_view task_id) const;
  [[nodiscard]] const std::vector<Episode>& episodes_of(std::string_view task_id) const;
  [[nodiscard]] std::size_t episode_count() const;

  /// Throws DatasetError on the first violated invariant.
  void validate() const;

  /// Content equality; the root path is not part of a dataset's identity.
  friend bool operator==(const TrajectoryDataset& a, const TrajectoryDataset& b) {
    return a.manifest == b.manifest && a.tasks == b.tasks && a.groups == b.groups &&
           a.episodes == b.episodes;
  }
};

enum class DatasetErrc {
  missing_manifest,
  dangling_episode,
  dangling_scene_view,
  dimension_mismatch,
  duplicate_task,
  invalid_record,
  io_error,
};

std::string_view to_string(DatasetErrc code);

class DatasetError : public std::runtime_error {
 public:
  DatasetError(DatasetErrc code, std::string subject, const std::string& detail = {});

  [[nodiscard]] DatasetErrc code() const { return code_; }
  /// Offending path or id.
  [[nodiscard]] const std::string& subject() const { return subject_; }

 private:
  DatasetErrc code_;
  std::string subject_;
};

/// Ids become directory names, so they are restricted to [A-Za-z0-9._-] and may not start with '.'.
bool is_safe_id(std::string_view id);

}  // namespace taskeval

#pragma once

#include <filesystem>

#include "taskeval/core/types.hpp"

namespace taskeval {

/// Loads and fully validates a dataset directory. Throws DatasetError naming the
/// offending path or id.
///
/// Layout:
///   <root>/manifest.json
///   <root>/tasks/<task_id>/task.json
///   <root>/tasks/<task_id>/scene/<view>.png
///   <root>/tasks/<task_id>/episodes/<idx>/meta.json
///   <root>/tasks/<task_id>/episodes/<idx>/frames/%06d.png   (image kind)
///   <root>/tasks/<task_id>/episodes/<idx>/obs.csv           (vector kind, T rows)
///   <root>/tasks/<task_id>/episodes/<idx>/actions.csv       (T-1 rows)
///   <root>/tasks/<task_id>/episodes/<idx>/states.csv        (T rows)
TrajectoryDataset load_dataset(const std::filesystem::path& root);

/// Writes `dataset` under `root`, which must not exist or be an empty directory.
/// Files are staged in a sibling directory and renamed into place, so a failed
/// write leaves nothing at `root`.
void write_dataset(const TrajectoryDataset& dataset, const std::filesystem::path& root);

/// Digest of the manifest as written to disk; identifies a dataset in reports.
std::string manifest_digest(const TrajectoryDataset& dataset);

}  // namespace taskeval

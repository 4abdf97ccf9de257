#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "taskeval/core/types.hpp"

namespace taskeval {

/// Parameters of a synthetic dataset built from random linear dynamics modes.
/// Each mode becomes one task; all tasks share `group`.
struct SyntheticSpec {
  std::size_t n_modes = 1;
  std::size_t episodes_per_mode = 10;
  std::size_t episode_length = 50;
  ObservationKind obs_kind = ObservationKind::vector;
  std::size_t state_dim = 4;
  std::size_t action_dim = 2;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;

  std::size_t image_size = 32;
  std::size_t scene_views = 4;
  std::string pipeline_id = "synthetic";
  std::string group = "synthetic";
  PublishedFlag published_flag = PublishedFlag::generated;

  /// Throws std::invalid_argument when a count is zero or noise is negative.
  void validate() const;
};

/// x_{t+1} = A_m x_t + B_m a_t + noise * N(0, I) with A_m scaled to spectral norm 0.95
/// (so its spectral radius is at most 0.95) and actions uniform in [-1, 1].
/// The A_m, B_m matrices are recorded under manifest.metadata["modes"].
TrajectoryDataset generate_synthetic_dataset(const SyntheticSpec& spec);

/// Reads back A_m (state_dim x state_dim) and B_m (state_dim x action_dim) from the metadata.
RealMatrix synthetic_mode_matrix(const TrajectoryDataset& dataset, std::size_t mode, const char* which);

}  // namespace taskeval

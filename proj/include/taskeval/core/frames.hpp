#pragma once

#include <cstddef>
#include <vector>

#include "taskeval/core/types.hpp"

namespace taskeval {

/// Evenly spaced frame indices round(i*(T-1)/(k-1)), rounding halves up, for i in [0, k).
/// The first and last frames are always included when k >= 2; k == 1 picks the last frame.
/// Indices repeat when T < k. Throws std::invalid_argument for k == 0 or T == 0.
std::vector<std::size_t> frame_indices(std::size_t length, std::size_t k);

/// Image frames at frame_indices(episode.length, k). Requires an image-kind episode.
std::vector<PngImage> select_frames(const Episode& episode, std::size_t k);

/// Vector observations at frame_indices(episode.length, k), one row each.
RealMatrix select_observation_rows(const Episode& episode, std::size_t k);

}  // namespace taskeval

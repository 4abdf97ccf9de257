#include "taskeval/core/frames.hpp"

#include <stdexcept>

namespace taskeval {

std::vector<std::size_t> frame_indices(std::size_t length, std::size_t k) {
  if (k == 0) throw std::invalid_argument("frame_indices: k must be at least 1");
  if (length == 0) throw std::invalid_argument("frame_indices: episode has no frames");
  if (k == 1) return {length - 1};

  // round-half-up of i*(T-1)/(k-1) in exact integer arithmetic
  const std::size_t span = length - 1;
  const std::size_t steps = k - 1;
  std::vector<std::size_t> indices(k);
  for (std::size_t i = 0; i < k; ++i) {
    indices[i] = (2 * i * span + steps) / (2 * steps);
  }
  return indices;
}

std::vector<PngImage> select_frames(const Episode& episode, std::size_t k) {
  if (episode.frames.empty()) throw std::invalid_argument("select_frames: episode " + episode.episode_id + " has no image frames");
  std::vector<PngImage> frames;
  for (std::size_t index : frame_indices(episode.frames.size(), k)) frames.push_back(episode.frames[index]);
  return frames;
}

RealMatrix select_observation_rows(const Episode& episode, std::size_t k) {
  if (episode.observations.empty()) {
    throw std::invalid_argument("select_observation_rows: episode " + episode.episode_id + " has no vector observations");
  }
  RealMatrix rows;
  for (std::size_t index : frame_indices(episode.observations.rows(), k)) rows.append_row(episode.observations.row(index));
  return rows;
}

}  // namespace taskeval

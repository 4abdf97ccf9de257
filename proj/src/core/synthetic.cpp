#include "taskeval/core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "taskeval/core/png.hpp"
#include "taskeval/core/rng.hpp"

namespace taskeval {

using nlohmann::json;

namespace {

constexpr double kSpectralNormTarget = 0.95;
constexpr double kRenderExtent = 3.0;  // state coordinates in [-3, 3] map onto the image

RealMatrix gaussian_matrix(DeterministicRng& rng, std::size_t rows, std::size_t cols, double scale) {
  RealMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

// Largest singular value via power iteration on A^T A.
double spectral_norm(const RealMatrix& a) {
  const std::size_t n = a.cols();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> av(a.rows());
  double sigma = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += a(r, c) * v[c];
      av[r] = s;
    }
    std::vector<double> next(n, 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < n; ++c) next[c] += a(r, c) * av[r];
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t c = 0; c < n; ++c) v[c] = next[c] / norm;
    const double previous = sigma;
    sigma = std::sqrt(norm);
    if (std::abs(sigma - previous) <= 1e-15 * sigma) break;
  }
  return sigma;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)); }

PngImage render_dot(std::span<const double> state, std::size_t size) {
  std::vector<std::uint8_t> rgb(size * size * 3, 0);
  auto to_pixel = [&](double coord) {
    const double unit = std::clamp((coord + kRenderExtent) / (2.0 * kRenderExtent), 0.0, 1.0);
    return static_cast<long>(std::lround(unit * static_cast<double>(size - 1)));
  };
  const long cx = to_pixel(state[0]);
  const long cy = to_pixel(state[1]);
  const long side = static_cast<long>(size);
  for (long dy = -1; dy <= 1; ++dy) {
    for (long dx = -1; dx <= 1; ++dx) {
      const long x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= side || y >= side) continue;
      const std::size_t at = static_cast<std::size_t>(y * side + x) * 3;
      rgb[at] = rgb[at + 1] = rgb[at + 2] = 255;
    }
  }
  return encode_png_rgb(rgb, size, size);
}

// A plain backdrop with a mode-coloured block; different per camera so views are distinguishable.
PngImage render_scene(std::size_t mode, std::size_t view, std::size_t size) {
  std::vector<std::uint8_t> rgb(size * size * 3);
  const double hue = static_cast<double>(mode) * 0.61803398875;
  const std::uint8_t r = clamp_byte(128 + 127 * std::sin(6.283185307179586 * hue));
  const std::uint8_t g = clamp_byte(128 + 127 * std::sin(6.283185307179586 * (hue + 0.33)));
  const std::uint8_t b = clamp_byte(128 + 127 * std::sin(6.283185307179586 * (hue + 0.67)));
  const std::size_t lo = size / 4 + view % (size / 4 + 1);
  const std::size_t hi = std::min(size, lo + size / 3 + 1);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t at = (y * size + x) * 3;
      const bool block = y >= lo && y < hi && x >= lo && x < hi;
      rgb[at] = block ? r : 200;
      rgb[at + 1] = block ? g : 200;
      rgb[at + 2] = block ? b : static_cast<std::uint8_t>(180 + 10 * view);
    }
  }
  return encode_png_rgb(rgb, size, size);
}

std::string camera_tag(std::size_t view) {
  static const char* kNames[] = {"front", "left", "right", "top"};
  if (view < 4) return kNames[view];
  return "view" + std::to_string(view);
}

std::string numbered(const char* prefix, std::size_t n, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_modes == 0 || episodes_per_mode == 0 || state_dim == 0 || action_dim == 0) {
    throw std::invalid_argument("synthetic spec: counts and dimensions must be positive");
  }
  if (episode_length < 2) throw std::invalid_argument("synthetic spec: episode_length must be at least 2");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("synthetic spec: noise_scale must be finite and >= 0");
  }
  if (obs_kind == ObservationKind::image && (state_dim < 2 || image_size < 4)) {
    throw std::invalid_argument("synthetic spec: image observations need state_dim >= 2 and image_size >= 4");
  }
  if (pipeline_id.empty() || !is_safe_id(group)) throw std::invalid_argument("synthetic spec: bad pipeline_id or group");
}

TrajectoryDataset generate_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  DeterministicRng rng(spec.seed);

  TrajectoryDataset dataset;
  dataset.manifest.pipeline_id = spec.pipeline_id;
  dataset.manifest.action_dim = spec.action_dim;
  dataset.manifest.state_dim = spec.state_dim;
  if (spec.obs_kind == ObservationKind::vector) {
    dataset.manifest.observation = {ObservationKind::vector, spec.state_dim, 0, 0};
  } else {
    dataset.manifest.observation = {ObservationKind::image, 0, spec.image_size, spec.image_size};
  }

  json modes = json::array();
  for (std::size_t m = 0; m < spec.n_modes; ++m) {
    RealMatrix a = gaussian_matrix(rng, spec.state_dim, spec.state_dim, 1.0);
    const double norm = spectral_norm(a);
    if (norm > 0.0) {
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) *= kSpectralNormTarget / norm;
    }
    const RealMatrix b = gaussian_matrix(rng, spec.state_dim, spec.action_dim, 0.5);

    TaskRecord task;
    task.task_id = numbered("mode_", m, 2);
    task.description = "Synthetic task " + std::to_string(m) + ": steer a point mass under linear dynamics mode " +
                       std::to_string(m) + ".";
    task.pipeline_id = spec.pipeline_id;
    task.group = spec.group;
    task.published_flag = spec.published_flag;
    for (std::size_t v = 0; v < spec.scene_views; ++v) task.scene_views.push_back({camera_tag(v), render_scene(m, v, spec.image_size)});

    std::vector<Episode> episodes;
    for (std::size_t e = 0; e < spec.episodes_per_mode; ++e) {
      Episode ep;
      ep.episode_id = numbered("", e, 6);
      ep.length = spec.episode_length;
      ep.states = RealMatrix(spec.episode_length, spec.state_dim);
      ep.actions = RealMatrix(spec.episode_length - 1, spec.action_dim);
      for (std::size_t i = 0; i < spec.state_dim; ++i) ep.states(0, i) = rng.normal();
      for (std::size_t t = 0; t + 1 < spec.episode_length; ++t) {
        for (std::size_t j = 0; j < spec.action_dim; ++j) ep.actions(t, j) = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < spec.state_dim; ++i) {
          double next = 0.0;
          for (std::size_t j = 0; j < spec.state_dim; ++j) next += a(i, j) * ep.states(t, j);
          for (std::size_t j = 0; j < spec.action_dim; ++j) next += b(i, j) * ep.actions(t, j);
          if (spec.noise_scale > 0.0) next += spec.noise_scale * rng.normal();
          ep.states(t + 1, i) = next;
        }
      }
      if (spec.obs_kind == ObservationKind::vector) {
        ep.observations = ep.states;
      } else {
        for (std::size_t t = 0; t < spec.episode_length; ++t) ep.frames.push_back(render_dot(ep.states.row(t), spec.image_size));
      }
      task.episode_ids.push_back(ep.episode_id);
      episodes.push_back(std::move(ep));
    }

    modes.push_back({{"task_id", task.task_id}, {"A", matrix_json(a)}, {"B", matrix_json(b)}});
    dataset.groups[spec.group].push_back(task.task_id);
    dataset.episodes.emplace(task.task_id, std::move(episodes));
    dataset.tasks.push_back(std::move(task));
  }

  dataset.manifest.metadata = {
      {"generator", "synthetic-linear"},
      {"spec",
       {{"n_modes", spec.n_modes},
        {"episodes_per_mode", spec.episodes_per_mode},
        {"episode_length", spec.episode_length},
        {"obs_kind", to_string(spec.obs_kind)},
        {"state_dim", spec.state_dim},
        {"action_dim", spec.action_dim},
        {"noise_scale", spec.noise_scale},
        {"seed", spec.seed}}},
      {"modes", modes}};
  return dataset;
}

RealMatrix synthetic_mode_matrix(const TrajectoryDataset& dataset, std::size_t mode, const char* which) {
  const json& rows = dataset.manifest.metadata.at("modes").at(mode).at(which);
  RealMatrix m;
  for (const auto& row : rows) m.append_row(row.get<std::vector<double>>());
  return m;
}

}  // namespace taskeval

#include "taskeval/core/dataset_io.hpp"

#include <cstdio>
#include <set>
#include <unistd.h>

#include "taskeval/core/digest.hpp"
#include "taskeval/core/png.hpp"
#include "taskeval/core/text_io.hpp"

namespace taskeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "taskeval.dataset";
constexpr int kSchemaVersion = 1;

std::string frame_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu.png", index);
  return name;
}

json observation_json(const ObservationSpec& spec) {
  json j{{"kind", to_string(spec.kind)}};
  if (spec.kind == ObservationKind::vector) {
    j["dim"] = spec.dim;
  } else {
    j["width"] = spec.width;
    j["height"] = spec.height;
  }
  return j;
}

ObservationSpec observation_from_json(const json& j) {
  ObservationSpec spec;
  spec.kind = parse_observation_kind(j.at("kind").get<std::string>());
  if (spec.kind == ObservationKind::vector) {
    spec.dim = j.at("dim").get<std::size_t>();
  } else {
    spec.width = j.at("width").get<std::size_t>();
    spec.height = j.at("height").get<std::size_t>();
  }
  return spec;
}

json manifest_json(const TrajectoryDataset& dataset) {
  json tasks = json::array();
  for (const auto& t : dataset.tasks) {
    json views = json::array();
    for (const auto& v : t.scene_views) views.push_back(v.camera);
    tasks.push_back({{"task_id", t.task_id}, {"episodes", t.episode_ids}, {"scene_views", views}});
  }
  return json{{"format", kFormatTag},
              {"schema_version", kSchemaVersion},
              {"pipeline_id", dataset.manifest.pipeline_id},
              {"observation", observation_json(dataset.manifest.observation)},
              {"action_dim", dataset.manifest.action_dim},
              {"state_dim", dataset.manifest.state_dim},
              {"groups", dataset.groups},
              {"tasks", tasks},
              {"metadata", dataset.manifest.metadata}};
}

std::string manifest_text(const TrajectoryDataset& dataset) { return manifest_json(dataset).dump(2) + "\n"; }

json read_json(const fs::path& path, const std::string& subject) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DatasetError(DatasetErrc::invalid_record, subject, e.what());
  } catch (const std::system_error& e) {
    throw DatasetError(DatasetErrc::io_error, subject, e.what());
  }
}

RealMatrix read_matrix(const fs::path& path, const std::string& subject) {
  if (!fs::is_regular_file(path)) throw DatasetError(DatasetErrc::dangling_episode, subject, "file missing");
  try {
    return parse_numeric_csv(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw DatasetError(DatasetErrc::invalid_record, subject, e.what());
  }
}

void expect_shape(const RealMatrix& m, std::size_t rows, std::size_t cols, const std::string& subject) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DatasetError(DatasetErrc::dimension_mismatch, subject,
                       "found " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Episode load_episode(const fs::path& dir, const std::string& subject, const Manifest& manifest) {
  if (!fs::is_directory(dir)) throw DatasetError(DatasetErrc::dangling_episode, subject);
  if (!fs::is_regular_file(dir / "meta.json")) throw DatasetError(DatasetErrc::dangling_episode, subject + "/meta.json");
  const json meta = read_json(dir / "meta.json", subject + "/meta.json");

  Episode ep;
  ep.episode_id = dir.filename().string();
  std::size_t action_dim = 0, state_dim = 0;
  ObservationSpec obs;
  try {
    ep.length = meta.at("T").get<std::size_t>();
    action_dim = meta.at("action_dim").get<std::size_t>();
    state_dim = meta.at("state_dim").get<std::size_t>();
    obs = observation_from_json(meta.at("observation"));
  } catch (const std::exception& e) {
    throw DatasetError(DatasetErrc::invalid_record, subject + "/meta.json", e.what());
  }
  if (ep.length < 2) throw DatasetError(DatasetErrc::dimension_mismatch, subject + "/meta.json", "T must be at least 2");
  if (action_dim != manifest.action_dim || state_dim != manifest.state_dim || !(obs == manifest.observation)) {
    throw DatasetError(DatasetErrc::dimension_mismatch, subject + "/meta.json", "dimensions differ from manifest");
  }

  ep.actions = read_matrix(dir / "actions.csv", subject + "/actions.csv");
  expect_shape(ep.actions, ep.length - 1, action_dim, subject + "/actions.csv");
  ep.states = read_matrix(dir / "states.csv", subject + "/states.csv");
  expect_shape(ep.states, ep.length, state_dim, subject + "/states.csv");

  if (obs.kind == ObservationKind::vector) {
    ep.observations = read_matrix(dir / "obs.csv", subject + "/obs.csv");
    expect_shape(ep.observations, ep.length, obs.dim, subject + "/obs.csv");
  } else {
    const fs::path frames = dir / "frames";
    std::size_t on_disk = 0;
    if (fs::is_directory(frames)) {
      for (const auto& entry : fs::directory_iterator(frames)) on_disk += entry.path().extension() == ".png";
    }
    if (on_disk != ep.length) {
      throw DatasetError(DatasetErrc::dimension_mismatch, subject + "/frames",
                         "found " + std::to_string(on_disk) + " frames, expected " + std::to_string(ep.length));
    }
    for (std::size_t i = 0; i < ep.length; ++i) {
      const std::string name = frame_file_name(i);
      const fs::path path = frames / name;
      if (!fs::is_regular_file(path)) throw DatasetError(DatasetErrc::dimension_mismatch, subject + "/frames/" + name, "missing");
      PngImage frame{read_binary_file(path)};
      ImageSize size;
      try {
        size = png_size(frame);
      } catch (const std::invalid_argument& e) {
        throw DatasetError(DatasetErrc::invalid_record, subject + "/frames/" + name, e.what());
      }
      if (size.width != obs.width || size.height != obs.height) {
        throw DatasetError(DatasetErrc::dimension_mismatch, subject + "/frames/" + name, "image size differs from manifest");
      }
      ep.frames.push_back(std::move(frame));
    }
  }
  return ep;
}

json episode_meta(const Episode& ep, const Manifest& manifest) {
  return json{{"episode_id", ep.episode_id},
              {"T", ep.length},
              {"action_dim", manifest.action_dim},
              {"state_dim", manifest.state_dim},
              {"observation", observation_json(manifest.observation)}};
}

void write_tree(const TrajectoryDataset& dataset, const fs::path& root) {
  fs::create_directory(root);
  for (const auto& t : dataset.tasks) {
    const fs::path task_dir = root / "tasks" / t.task_id;
    fs::create_directories(task_dir / "scene");
    fs::create_directories(task_dir / "episodes");
    const json task{{"task_id", t.task_id},
                    {"description", t.description},
                    {"group", t.group},
                    {"pipeline_id", t.pipeline_id},
                    {"published_flag", to_string(t.published_flag)}};
    write_text_file(task_dir / "task.json", task.dump(2) + "\n");
    for (const auto& view : t.scene_views) write_binary_file(task_dir / "scene" / (view.camera + ".png"), view.image.bytes);

    for (const auto& ep : dataset.episodes.at(t.task_id)) {
      const fs::path ep_dir = task_dir / "episodes" / ep.episode_id;
      fs::create_directories(ep_dir);
      write_text_file(ep_dir / "meta.json", episode_meta(ep, dataset.manifest).dump(2) + "\n");
      if (dataset.manifest.observation.kind == ObservationKind::vector) {
        write_text_file(ep_dir / "obs.csv", format_numeric_csv(ep.observations, "o"));
      } else {
        fs::create_directories(ep_dir / "frames");
        for (std::size_t i = 0; i < ep.frames.size(); ++i) {
          write_binary_file(ep_dir / "frames" / frame_file_name(i), ep.frames[i].bytes);
        }
      }
      write_text_file(ep_dir / "actions.csv", format_numeric_csv(ep.actions, "a"));
      write_text_file(ep_dir / "states.csv", format_numeric_csv(ep.states, "s"));
    }
  }
  // manifest last: a directory without one is never mistaken for a dataset
  write_text_file(root / "manifest.json", manifest_text(dataset));
}

}  // namespace

TrajectoryDataset load_dataset(const fs::path& root) {
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) throw DatasetError(DatasetErrc::missing_manifest, manifest_path.string());
  const json doc = read_json(manifest_path, manifest_path.string());

  TrajectoryDataset dataset;
  dataset.root = root;
  json task_entries;
  try {
    if (doc.at("format").get<std::string>() != kFormatTag) throw std::invalid_argument("unexpected format tag");
    if (doc.at("schema_version").get<int>() != kSchemaVersion) throw std::invalid_argument("unsupported schema_version");
    dataset.manifest.pipeline_id = doc.at("pipeline_id").get<std::string>();
    dataset.manifest.observation = observation_from_json(doc.at("observation"));
    dataset.manifest.action_dim = doc.at("action_dim").get<std::size_t>();
    dataset.manifest.state_dim = doc.at("state_dim").get<std::size_t>();
    dataset.manifest.metadata = doc.value("metadata", json::object());
    dataset.groups = doc.at("groups").get<std::map<std::string, std::vector<std::string>>>();
    task_entries = doc.at("tasks");
  } catch (const DatasetError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetError(DatasetErrc::invalid_record, manifest_path.string(), e.what());
  }

  std::set<std::string> ids;
  for (const auto& entry : task_entries) {
    TaskRecord t;
    std::vector<std::string> cameras;
    try {
      t.task_id = entry.at("task_id").get<std::string>();
      t.episode_ids = entry.at("episodes").get<std::vector<std::string>>();
      cameras = entry.value("scene_views", std::vector<std::string>{});
    } catch (const std::exception& e) {
      throw DatasetError(DatasetErrc::invalid_record, manifest_path.string(), e.what());
    }
    if (!is_safe_id(t.task_id)) throw DatasetError(DatasetErrc::invalid_record, t.task_id, "unsafe task_id");
    if (!ids.insert(t.task_id).second) throw DatasetError(DatasetErrc::duplicate_task, t.task_id);

    const std::string task_subject = "tasks/" + t.task_id;
    const fs::path task_dir = root / "tasks" / t.task_id;
    if (!fs::is_regular_file(task_dir / "task.json")) {
      throw DatasetError(DatasetErrc::invalid_record, task_subject + "/task.json", "missing");
    }
    const json task = read_json(task_dir / "task.json", task_subject + "/task.json");
    try {
      if (task.at("task_id").get<std::string>() != t.task_id) throw std::invalid_argument("task_id differs from manifest");
      t.description = task.at("description").get<std::string>();
      t.group = task.at("group").get<std::string>();
      t.pipeline_id = task.at("pipeline_id").get<std::string>();
      t.published_flag = parse_published_flag(task.at("published_flag").get<std::string>());
    } catch (const std::exception& e) {
      throw DatasetError(DatasetErrc::invalid_record, task_subject + "/task.json", e.what());
    }

    for (const auto& camera : cameras) {
      const std::string subject = task_subject + "/scene/" + camera + ".png";
      if (!is_safe_id(camera)) throw DatasetError(DatasetErrc::invalid_record, subject, "unsafe camera tag");
      const fs::path path = task_dir / "scene" / (camera + ".png");
      if (!fs::is_regular_file(path)) throw DatasetError(DatasetErrc::dangling_scene_view, subject);
      t.scene_views.push_back({camera, PngImage{read_binary_file(path)}});
    }

    std::vector<Episode> eps;
    for (const auto& ep_id : t.episode_ids) {
      const std::string subject = task_subject + "/episodes/" + ep_id;
      if (!is_safe_id(ep_id)) throw DatasetError(DatasetErrc::invalid_record, subject, "unsafe episode id");
      eps.push_back(load_episode(task_dir / "episodes" / ep_id, subject, dataset.manifest));
    }
    dataset.episodes.emplace(t.task_id, std::move(eps));
    dataset.tasks.push_back(std::move(t));
  }

  dataset.validate();
  return dataset;
}

void write_dataset(const TrajectoryDataset& dataset, const fs::path& root) {
  dataset.validate();

  std::error_code ec;
  if (fs::exists(root, ec)) {
    if (!fs::is_directory(root) || !fs::is_empty(root)) {
      throw DatasetError(DatasetErrc::io_error, root.string(), "destination exists and is not an empty directory");
    }
  }

  fs::path staging = root;
  staging += ".partial-" + std::to_string(::getpid());
  try {
    if (root.has_parent_path()) fs::create_directories(root.parent_path());
    fs::remove_all(staging);
    write_tree(dataset, staging);
    if (fs::exists(root)) fs::remove(root);
    fs::rename(staging, root);
  } catch (const std::exception& e) {
    fs::remove_all(staging, ec);
    if (const auto* de = dynamic_cast<const DatasetError*>(&e)) throw *de;
    throw DatasetError(DatasetErrc::io_error, root.string(), e.what());
  }
}

std::string manifest_digest(const TrajectoryDataset& dataset) { return sha256_hex(manifest_text(dataset)); }

}  // namespace taskeval

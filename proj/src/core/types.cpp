#include "taskeval/core/types.hpp"

#include <algorithm>
#include <set>

namespace taskeval {

std::string_view to_string(PublishedFlag flag) {
  return flag == PublishedFlag::published ? "published" : "generated";
}

std::string_view to_string(ObservationKind kind) {
  return kind == ObservationKind::vector ? "vector" : "image";
}

PublishedFlag parse_published_flag(std::string_view text) {
  if (text == "published") return PublishedFlag::published;
  if (text == "generated") return PublishedFlag::generated;
  throw std::invalid_argument("unknown published_flag '" + std::string(text) + "'");
}

ObservationKind parse_observation_kind(std::string_view text) {
  if (text == "vector") return ObservationKind::vector;
  if (text == "image") return ObservationKind::image;
  throw std::invalid_argument("unknown observation kind '" + std::string(text) + "'");
}

std::string_view to_string(DatasetErrc code) {
  switch (code) {
    case DatasetErrc::missing_manifest: return "missing manifest";
    case DatasetErrc::dangling_episode: return "dangling episode reference";
    case DatasetErrc::dangling_scene_view: return "dangling scene view reference";
    case DatasetErrc::dimension_mismatch: return "inconsistent dimensions";
    case DatasetErrc::duplicate_task: return "duplicate task_id";
    case DatasetErrc::invalid_record: return "invalid record";
    case DatasetErrc::io_error: return "I/O error";
  }
  return "unknown";
}

namespace {

std::string compose_message(DatasetErrc code, const std::string& subject, const std::string& detail) {
  std::string message(to_string(code));
  message += ": ";
  message += subject;
  if (!detail.empty()) {
    message += " (";
    message += detail;
    message += ")";
  }
  return message;
}

}  // namespace

DatasetError::DatasetError(DatasetErrc code, std::string subject, const std::string& detail)
    : std::runtime_error(compose_message(code, subject, detail)), code_(code), subject_(std::move(subject)) {}

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

const TaskRecord& TrajectoryDataset::task(std::string_view task_id) const {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const TaskRecord& t) { return t.task_id == task_id; });
  if (it == tasks.end()) throw std::out_of_range("unknown task_id '" + std::string(task_id) + "'");
  return *it;
}

const std::vector<Episode>& TrajectoryDataset::episodes_of(std::string_view task_id) const {
  auto it = episodes.find(std::string(task_id));
  if (it == episodes.end()) throw std::out_of_range("no episodes for task_id '" + std::string(task_id) + "'");
  return it->second;
}

std::size_t TrajectoryDataset::episode_count() const {
  std::size_t n = 0;
  for (const auto& [id, eps] : episodes) n += eps.size();
  return n;
}

void TrajectoryDataset::validate() const {
  const auto& obs = manifest.observation;
  if (obs.kind == ObservationKind::vector && obs.dim == 0) {
    throw DatasetError(DatasetErrc::invalid_record, "manifest", "vector observations need dim > 0");
  }
  if (obs.kind == ObservationKind::image && (obs.width == 0 || obs.height == 0)) {
    throw DatasetError(DatasetErrc::invalid_record, "manifest", "image observations need width and height");
  }
  if (manifest.action_dim == 0 || manifest.state_dim == 0) {
    throw DatasetError(DatasetErrc::invalid_record, "manifest", "action_dim and state_dim must be positive");
  }

  std::set<std::string> seen;
  for (const auto& t : tasks) {
    if (!is_safe_id(t.task_id)) throw DatasetError(DatasetErrc::invalid_record, t.task_id, "unsafe task_id");
    if (!seen.insert(t.task_id).second) throw DatasetError(DatasetErrc::duplicate_task, t.task_id);
    if (t.description.empty()) throw DatasetError(DatasetErrc::invalid_record, t.task_id, "empty description");
    if (t.group.empty()) throw DatasetError(DatasetErrc::invalid_record, t.task_id, "empty group");
    std::set<std::string> views;
    for (const auto& v : t.scene_views) {
      if (!is_safe_id(v.camera) || !views.insert(v.camera).second) {
        throw DatasetError(DatasetErrc::invalid_record, t.task_id + "/scene/" + v.camera, "bad or repeated camera tag");
      }
    }

    auto eps = episodes.find(t.task_id);
    const std::size_t stored = eps == episodes.end() ? 0 : eps->second.size();
    if (stored != t.episode_ids.size()) {
      throw DatasetError(DatasetErrc::dangling_episode, t.task_id,
                         std::to_string(t.episode_ids.size()) + " referenced, " + std::to_string(stored) + " present");
    }
    std::set<std::string> ep_ids;
    for (std::size_t i = 0; i < stored; ++i) {
      const Episode& ep = eps->second[i];
      const std::string where = t.task_id + "/episodes/" + t.episode_ids[i];
      if (ep.episode_id != t.episode_ids[i]) throw DatasetError(DatasetErrc::dangling_episode, where);
      if (!is_safe_id(ep.episode_id) || !ep_ids.insert(ep.episode_id).second) {
        throw DatasetError(DatasetErrc::invalid_record, where, "bad or repeated episode id");
      }
      if (ep.length < 2) throw DatasetError(DatasetErrc::dimension_mismatch, where, "T must be at least 2");
      if (ep.actions.rows() != ep.length - 1 || ep.actions.cols() != manifest.action_dim) {
        throw DatasetError(DatasetErrc::dimension_mismatch, where + "/actions.csv",
                           "expected " + std::to_string(ep.length - 1) + "x" + std::to_string(manifest.action_dim));
      }
      if (ep.states.rows() != ep.length || ep.states.cols() != manifest.state_dim) {
        throw DatasetError(DatasetErrc::dimension_mismatch, where + "/states.csv",
                           "expected " + std::to_string(ep.length) + "x" + std::to_string(manifest.state_dim));
      }
      if (obs.kind == ObservationKind::vector) {
        if (ep.observations.rows() != ep.length || ep.observations.cols() != obs.dim || !ep.frames.empty()) {
          throw DatasetError(DatasetErrc::dimension_mismatch, where + "/obs.csv",
                             "expected " + std::to_string(ep.length) + "x" + std::to_string(obs.dim));
        }
      } else if (ep.frames.size() != ep.length || !ep.observations.empty()) {
        throw DatasetError(DatasetErrc::dimension_mismatch, where + "/frames",
                           "expected " + std::to_string(ep.length) + " frames");
      }
    }
  }

  std::set<std::string> grouped;
  for (const auto& [label, ids] : groups) {
    if (label.empty()) throw DatasetError(DatasetErrc::invalid_record, "groups", "empty group label");
    for (const auto& id : ids) {
      if (!seen.count(id)) throw DatasetError(DatasetErrc::invalid_record, "groups/" + label, "unknown task " + id);
      if (!grouped.insert(id).second) {
        throw DatasetError(DatasetErrc::invalid_record, "groups/" + label, "task " + id + " in more than one group");
      }
      if (task(id).group != label) {
        throw DatasetError(DatasetErrc::invalid_record, id, "task.json group differs from manifest group " + label);
      }
    }
  }
  if (grouped.size() != seen.size()) {
    for (const auto& id : seen) {
      if (!grouped.count(id)) throw DatasetError(DatasetErrc::invalid_record, id, "task missing from groups");
    }
  }
}

}  // namespace taskeval

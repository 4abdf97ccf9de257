#include <doctest.h>

#include <filesystem>

#include "core/dataset_specs.hpp"
#include "taskeval/core/dataset_io.hpp"
#include "taskeval/core/text_io.hpp"

using namespace taskeval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

DatasetErrc load_error(const fs::path& root) {
  try {
    load_dataset(root);
  } catch (const DatasetError& e) {
    return e.code();
  }
  FAIL("dataset loaded without error: " << root);
  return DatasetErrc::io_error;
}

const fs::path kInvalid = fs::path(TASKEVAL_FIXTURES_DIR) / "invalid";

}  // namespace

TEST_CASE("write then load reproduces generated datasets") {
  TempDir tmp("taskeval_roundtrip_unit");
  DeterministicRng rng(2024);
  for (std::uint64_t i = 0; i < 12; ++i) {
    const auto ds = generate_synthetic_dataset(testing::random_spec(rng, i));
    const fs::path root = tmp.path / ("ds" + std::to_string(i));
    write_dataset(ds, root);
    const auto loaded = load_dataset(root);
    CHECK(loaded == ds);
    CHECK(manifest_digest(loaded) == manifest_digest(ds));
  }
}

TEST_CASE("on-disk layout") {
  TempDir tmp("taskeval_layout_unit");
  SyntheticSpec spec;
  spec.n_modes = 2;
  spec.episodes_per_mode = 2;
  spec.episode_length = 5;
  spec.obs_kind = ObservationKind::image;
  spec.image_size = 6;
  const auto ds = generate_synthetic_dataset(spec);
  write_dataset(ds, tmp.path / "d");
  const fs::path task = tmp.path / "d" / "tasks" / "mode_01";
  CHECK(fs::is_regular_file(tmp.path / "d" / "manifest.json"));
  CHECK(fs::is_regular_file(task / "task.json"));
  CHECK(fs::is_regular_file(task / "scene" / "front.png"));
  CHECK(fs::is_regular_file(task / "episodes" / "000001" / "meta.json"));
  CHECK(fs::is_regular_file(task / "episodes" / "000001" / "frames" / "000004.png"));
  CHECK_FALSE(fs::exists(task / "episodes" / "000001" / "frames" / "000005.png"));
  CHECK_FALSE(fs::exists(task / "episodes" / "000001" / "obs.csv"));
  const auto actions = parse_csv(read_text_file(task / "episodes" / "000001" / "actions.csv"));
  CHECK(actions.rows.size() == 4);
  const auto states = parse_csv(read_text_file(task / "episodes" / "000001" / "states.csv"));
  CHECK(states.rows.size() == 5);
}

TEST_CASE("invalid fixtures raise their named errors") {
  CHECK(load_error(kInvalid / "dangling_episode") == DatasetErrc::dangling_episode);
  CHECK(load_error(kInvalid / "wrong_action_rows") == DatasetErrc::dimension_mismatch);
  CHECK(load_error(kInvalid / "wrong_state_rows") == DatasetErrc::dimension_mismatch);
  CHECK(load_error(kInvalid / "missing_manifest") == DatasetErrc::missing_manifest);
  CHECK(load_error(kInvalid / "dangling_scene_view") == DatasetErrc::dangling_scene_view);
  CHECK(load_error(kInvalid / "duplicate_task") == DatasetErrc::duplicate_task);
}

TEST_CASE("error messages name the offending path") {
  try {
    load_dataset(kInvalid / "wrong_action_rows");
    FAIL("expected failure");
  } catch (const DatasetError& e) {
    CHECK(e.subject().find("000000") != std::string::npos);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
}

TEST_CASE("write failures leave nothing behind") {
  TempDir tmp("taskeval_write_fail_unit");
  const auto ds = generate_synthetic_dataset(SyntheticSpec{});
  write_text_file(tmp.path / "blocker", "not a directory");
  try {
    write_dataset(ds, tmp.path / "blocker" / "ds");
    FAIL("expected io_error");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrc::io_error);
  }
  CHECK_FALSE(fs::exists(tmp.path / "blocker" / "ds" / "manifest.json"));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("write refuses a non-empty destination") {
  TempDir tmp("taskeval_nonempty_unit");
  const auto ds = generate_synthetic_dataset(SyntheticSpec{});
  write_dataset(ds, tmp.path / "d");
  CHECK_THROWS_AS(write_dataset(ds, tmp.path / "d"), DatasetError);
  CHECK(load_dataset(tmp.path / "d") == ds);
}

TEST_CASE("validate catches structural problems") {
  SyntheticSpec spec;
  spec.episode_length = 4;
  auto ds = generate_synthetic_dataset(spec);
  CHECK_NOTHROW(ds.validate());

  auto bad_actions = ds;
  bad_actions.episodes.begin()->second[0].actions = RealMatrix(2, spec.action_dim);
  CHECK_THROWS_AS(bad_actions.validate(), DatasetError);

  auto bad_group = ds;
  bad_group.groups["other"] = {ds.tasks[0].task_id};
  CHECK_THROWS_AS(bad_group.validate(), DatasetError);

  auto bad_id = ds;
  bad_id.tasks[0].task_id = "../escape";
  CHECK_THROWS_AS(bad_id.validate(), DatasetError);

  CHECK(is_safe_id("mode_00"));
  CHECK_FALSE(is_safe_id(".hidden"));
  CHECK_FALSE(is_safe_id("a/b"));
  CHECK_FALSE(is_safe_id(""));
}

#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include <sys/wait.h>

#include "report/golden_run.hpp"
#include "taskeval/core/dataset_io.hpp"
#include "taskeval/core/text_io.hpp"

using namespace taskeval;
namespace fs = std::filesystem;

namespace {

struct Result {
  int exit_code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string command = std::string(TASKEVAL_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / "taskeval_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("synth writes a loadable dataset") {
  Scratch s;
  const auto r = run("synth --out " + (s.dir / "ds").string() + " --modes 3 --episodes-per-mode 2 --length 7 --seed 4");
  CHECK(r.exit_code == 0);
  const auto ds = load_dataset(s.dir / "ds");
  CHECK(ds.tasks.size() == 3);
  CHECK(ds.episode_count() == 6);
  CHECK(run("synth --out " + (s.dir / "ds").string()).exit_code == 1);
}

TEST_CASE("file-based consistency table") {
  const std::string fixtures = std::string(TASKEVAL_SOURCE_DIR) + "/fixtures";
  const auto r = run("consistency --human " + fixtures + "/human/completion_gensim.csv --machine " + fixtures +
                     "/models/completion_gensim.csv --metric completion");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("machine,human,n,pearson,mae,ratio,status\n", 0) == 0);
  CHECK(r.out.find("LLava-1.5,human,10,,1.28999") != std::string::npos);
  CHECK(r.out.find(",degenerate\n") != std::string::npos);
}

TEST_CASE("quality subcommand against the mock endpoint") {
  Scratch s;
  testing::MockModelServer server(testing::golden_script());
  write_text_file(s.dir / "run.toml", testing::golden_config_toml(server.base_url()));
  const auto r = run("quality --config " + (s.dir / "run.toml").string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("fixture/mode_00  completion  vision-judge  mean 7.9600  var 0.0064") != std::string::npos);
  CHECK(read_text_file(s.dir / "out" / "report.json") == read_text_file(testing::kGoldenReport));
}

TEST_CASE("exit codes for bad input") {
  Scratch s;
  CHECK(run("").exit_code != 0);
  CHECK(run("--help").exit_code == 0);
  write_text_file(s.dir / "bad.toml", "metrics = [\"quality\"]\nbogus = 1\n");
  const auto r = run("report --config " + (s.dir / "bad.toml").string());
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("unknown key 'bogus'") != std::string::npos);
  CHECK(run("consistency --metric alignment").exit_code == 1);
}

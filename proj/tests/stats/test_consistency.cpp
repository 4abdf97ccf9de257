#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stats/consistency_fixtures.hpp"
#include "taskeval/core/rng.hpp"
#include "taskeval/stats/consistency.hpp"

using namespace taskeval;
using namespace taskeval::stats;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  TempFile(const std::string& name, const std::string& text) : path(fs::temp_directory_path() / name) {
    write_text_file(path, text);
  }
  ~TempFile() { fs::remove(path); }
};

HumanRatingTable table_of(const std::vector<std::pair<std::string, double>>& rows) {
  HumanRatingTable t{"alignment", 1, 5, "people", {}};
  for (const auto& [id, s] : rows) t.rows.push_back({id, s, 1});
  return t;
}

}  // namespace

TEST_CASE("fixture statistics match the reference values") {
  const auto expected = testing::load_expected_consistency();
  REQUIRE(expected.size() == 18);
  for (const auto& e : expected) {
    CAPTURE(e.metric);
    CAPTURE(e.section);
    CAPTURE(e.model);
    const auto scale = e.metric == "alignment" ? std::pair{1.0, 5.0} : std::pair{0.0, 10.0};
    const auto human = load_human_ratings(testing::fixture_path("human", e.metric, e.section), e.metric, scale.first, scale.second);
    const auto machine = load_machine_scores(testing::fixture_path("models", e.metric, e.section));
    const auto r = consistency_ratio(e.model, machine.at(e.model), human);
    CHECK(r.n == 10);
    CHECK(std::abs(r.mae - e.mae) <= 1e-9);
    CHECK(to_string(r.status) == e.status);
    CHECK(r.pearson.has_value() == e.pearson.has_value());
    if (e.pearson) {
      CHECK(std::abs(*r.pearson - *e.pearson) <= 1e-9);
      CHECK(std::abs(r.ratio - *e.ratio) <= 1e-9);
    } else {
      CHECK(std::isnan(r.ratio));
    }
  }
}

TEST_CASE("pearson is invariant under positive affine maps and flips under negative ones") {
  DeterministicRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.next_u64() % 30;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(0, 10);
      y[i] = 0.5 * x[i] + rng.normal();
    }
    const double a = rng.uniform(0.1, 5.0);
    const double b = rng.uniform(-10, 10);
    std::vector<double> ax(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = a * x[i] + b;
      neg[i] = -a * x[i] + b;
    }
    const double r = pearson(x, y);
    CHECK(std::abs(pearson(ax, y) - r) <= 1e-12);
    CHECK(std::abs(pearson(neg, y) + r) <= 1e-12);
    CHECK(pearson(x, y) == pearson(y, x));
  }
}

TEST_CASE("mae is invariant when both columns are translated") {
  DeterministicRng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 30;
    std::vector<double> x(n), y(n), xs(n), ys(n);
    const double c = rng.uniform(-5, 5);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(0, 10);
      y[i] = rng.uniform(0, 10);
      xs[i] = x[i] + c;
      ys[i] = y[i] + c;
    }
    CHECK(std::abs(mae(xs, ys) - mae(x, y)) <= 1e-12);
    CHECK(mae(x, y) == mae(y, x));
    CHECK(std::abs(pearson(xs, ys) - pearson(x, y)) <= 1e-12);
  }
}

TEST_CASE("pearson and mae on small cases") {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{3, 2, 1}, c{2, 2, 2};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  CHECK(mae(x, y) == 2.0);
  CHECK_THROWS_AS(pearson(x, c), StatsError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), StatsError);
  CHECK_THROWS_AS(mae(x, std::vector<double>{1, 2}), StatsError);
}

TEST_CASE("identical scores are perfect agreement") {
  const auto human = table_of({{"a", 1}, {"b", 2}, {"c", 4}});
  const auto r = consistency_ratio("judge", {{"a", 1}, {"b", 2}, {"c", 4}}, human);
  CHECK(r.status == ConsistencyStatus::perfect_agreement);
  CHECK(r.ratio == std::numeric_limits<double>::infinity());
  CHECK(r.mae == 0.0);

  const auto flat = table_of({{"a", 3}, {"b", 3}});
  const auto r2 = consistency_ratio("judge", {{"a", 3}, {"b", 3}}, flat);
  CHECK(r2.status == ConsistencyStatus::perfect_agreement);
  CHECK_FALSE(r2.pearson.has_value());
}

TEST_CASE("join counts and minimum overlap") {
  const auto human = table_of({{"a", 1}, {"b", 2}, {"c", 4}, {"d", 5}});
  const auto r = consistency_ratio("judge", {{"a", 2}, {"b", 2.5}, {"c", 3}, {"z", 1}}, human);
  CHECK(r.n == 3);
  CHECK(r.machine_only == 1);
  CHECK(r.human_only == 1);
  CHECK(r.status == ConsistencyStatus::ok);
  CHECK_THROWS_AS(consistency_ratio("judge", {{"a", 2}}, human), StatsError);
}

TEST_CASE("human rating loader") {
  TempFile raters("taskeval_raters.csv", "task_id,score,rater_id\nt1,4,r1\nt1,5,r2\nt2,2,r1\n");
  const auto t = load_human_ratings(raters.path, "alignment", 1, 5);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].score == 4.5);
  CHECK(t.rows[0].raters == 2);
  CHECK(t.source == "taskeval_raters");

  TempFile dup("taskeval_dup.csv", "task_id,score\nt1,4\nt1,5\n");
  CHECK_THROWS_AS(load_human_ratings(dup.path, "alignment", 1, 5), StatsError);
  TempFile range("taskeval_range.csv", "task_id,score\nt1,6\n");
  CHECK_THROWS_AS(load_human_ratings(range.path, "alignment", 1, 5), StatsError);
  TempFile header("taskeval_header.csv", "id,score\nt1,4\n");
  CHECK_THROWS_AS(load_human_ratings(header.path, "alignment", 1, 5), StatsError);
  CHECK_THROWS_AS(load_human_ratings("/nonexistent/ratings.csv", "alignment", 1, 5), StatsError);
}

#include <doctest.h>

#include <random>

#include "draftcheck/analytics/analytics.hpp"
#include "draftcheck/analytics/export.hpp"
#include "fixtures.hpp"

using namespace draftcheck;
using namespace draftcheck::analytics;
using fixtures::request_errors;
using fixtures::submission;

namespace {

std::vector<InteractionRecord> trajectory(const std::string& student, const std::vector<std::size_t>& errors,
                                          bool submit, const std::string& round = "r1") {
  std::vector<InteractionRecord> out;
  int minute = 0;
  for (auto e : errors) out.push_back(request_errors(student, round, minute++, e));
  if (submit) out.push_back(submission(student, round, minute));
  return out;
}

void append(std::vector<InteractionRecord>& into, std::vector<InteractionRecord> more) {
  for (auto& r : more) into.push_back(std::move(r));
}

// Random store: students with random request trajectories (some failed), some submitting.
std::vector<InteractionRecord> random_store(std::mt19937_64& rng, std::size_t students) {
  std::vector<InteractionRecord> records;
  for (std::size_t s = 0; s < students; ++s) {
    const std::string id = "s" + std::to_string(s);
    const auto requests = rng() % 5;
    int minute = static_cast<int>(rng() % 100);
    for (std::size_t k = 0; k < requests; ++k) {
      if (rng() % 6 == 0) {
        records.push_back(fixtures::failed_request(id, "r1", minute));
      } else {
        records.push_back(request_errors(id, "r1", minute, rng() % 4));
      }
      minute += 1 + static_cast<int>(rng() % 3);
    }
    if (rng() % 4 != 0) records.push_back(submission(id, "r1", minute));
    if (rng() % 5 == 0) records.push_back(submission(id, "other", 0));
  }
  std::shuffle(records.begin(), records.end(), rng);
  return records;
}

}  // namespace

TEST_CASE("empty input gives an all-zero funnel") {
  const auto f = compute_funnel({}, "r1");
  CHECK(f.submitted == 0);
  CHECK(f.used == 0);
  CHECK(f.interacted == 0);
  CHECK(f.corrected == 0);
  for (const auto& a : f.attrition) CHECK_FALSE(a.has_value());
}

TEST_CASE("submission only counts at the first stage") {
  const std::vector<InteractionRecord> r = {submission("s1", "r1", 0)};
  const auto f = compute_funnel(r, "r1");
  CHECK(f.submitted == 1);
  CHECK(f.used == 0);
  CHECK(f.attrition[0] == doctest::Approx(1.0));
  CHECK_FALSE(f.attrition[1].has_value());
}

TEST_CASE("correction needs a strictly lower last error count") {
  CHECK(compute_funnel(trajectory("a", {3, 2, 1}, true), "r1").corrected == 1);
  CHECK(compute_funnel(trajectory("a", {2, 2}, true), "r1").corrected == 0);
  CHECK(compute_funnel(trajectory("a", {1, 3, 0}, true), "r1").corrected == 1);
  CHECK(compute_funnel(trajectory("a", {1, 0, 2}, true), "r1").corrected == 0);
  CHECK(compute_funnel(trajectory("a", {0, 0}, true), "r1").corrected == 0);

  const auto f = compute_funnel(trajectory("a", {3, 2, 1}, true), "r1");
  CHECK(f.submitted == 1);
  CHECK(f.used == 1);
  CHECK(f.interacted == 1);
}

TEST_CASE("failed requests count as use but not as correction anchors") {
  std::vector<InteractionRecord> r;
  r.push_back(fixtures::failed_request("a", "r1", 0));
  r.push_back(request_errors("a", "r1", 1, 2));
  r.push_back(fixtures::failed_request("a", "r1", 2));
  r.push_back(submission("a", "r1", 3));
  const auto f = compute_funnel(r, "r1");
  CHECK(f.used == 1);
  CHECK(f.interacted == 1);
  CHECK(f.corrected == 0);  // only one table-bearing request

  r.push_back(request_errors("a", "r1", 4, 1));
  CHECK(compute_funnel(r, "r1").corrected == 1);
}

TEST_CASE("funnel is nested among submitters and reports non-submitting users") {
  std::vector<InteractionRecord> r;
  append(r, trajectory("a", {3, 1}, true));
  append(r, trajectory("b", {2}, true));
  append(r, trajectory("c", {}, true));
  append(r, trajectory("d", {4, 0}, false));
  append(r, trajectory("e", {1}, true, "r2"));
  const auto f = compute_funnel(r, "r1");
  CHECK(f.submitted == 3);
  CHECK(f.used == 2);
  CHECK(f.interacted == 1);
  CHECK(f.corrected == 1);
  CHECK(f.used_without_submitting == 1);
  CHECK(*f.attrition[0] == doctest::Approx(1.0 / 3.0));
  CHECK(*f.attrition[1] == doctest::Approx(0.5));
  CHECK(*f.attrition[2] == doctest::Approx(0.0));
}

TEST_CASE("funnel order uses timestamps, not input order") {
  auto r = trajectory("a", {3, 2, 1}, true);
  std::reverse(r.begin(), r.end());
  CHECK(compute_funnel(r, "r1").corrected == 1);
}

TEST_CASE("funnel properties on random stores") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto records = random_store(rng, 1 + rng() % 40);
    const auto f = compute_funnel(records, "r1");
    const auto o = fixtures::oracle_funnel(records, "r1");
    REQUIRE(f.submitted == o.submitted);
    REQUIRE(f.used == o.used);
    REQUIRE(f.interacted == o.interacted);
    REQUIRE(f.corrected == o.corrected);
    CHECK(f.submitted >= f.used);
    CHECK(f.used >= f.interacted);
    CHECK(f.interacted >= f.corrected);
    CHECK(compute_funnel(records, "r1") == f);  // pure

    // Duplicating every student under a fresh id doubles every stage.
    auto doubled = records;
    for (auto r : records) {
      r.student_id += "_copy";
      doubled.push_back(std::move(r));
    }
    const auto g = compute_funnel(doubled, "r1");
    CHECK(g.submitted == 2 * f.submitted);
    CHECK(g.used == 2 * f.used);
    CHECK(g.interacted == 2 * f.interacted);
    CHECK(g.corrected == 2 * f.corrected);
    CHECK(g.used_without_submitting == 2 * f.used_without_submitting);

    // Histogram sums to the number of distinct users.
    const auto h = interaction_histogram(records, "r1", false);
    std::set<std::string> users;
    for (const auto& r : records) {
      if (r.round_id == "r1" && r.kind == InteractionKind::FeedbackRequest) users.insert(r.student_id);
    }
    double sum = 0;
    for (const auto& [bucket, v] : h) {
      CHECK(bucket >= 1);
      sum += v;
    }
    CHECK(sum == doctest::Approx(static_cast<double>(users.size())));
  }
}

TEST_CASE("interaction histogram") {
  std::vector<InteractionRecord> r;
  append(r, trajectory("a", {1}, true));
  append(r, trajectory("b", {1}, false));
  append(r, trajectory("c", {1, 1, 1, 1}, false));
  const auto h = interaction_histogram(r, "r1", false);
  CHECK(h == std::map<std::size_t, double>{{1, 2.0}, {4, 1.0}});

  r.push_back(submission("c", "r1", 100));
  const auto n = interaction_histogram(r, "r1", true);
  REQUIRE(n.size() == 2);
  CHECK(n.at(1) == doctest::Approx(1.0));
  CHECK(n.at(4) == doctest::Approx(0.5));

  CHECK(interaction_histogram(trajectory("z", {}, true), "r1", false).empty());
  CHECK_THROWS_AS(interaction_histogram(trajectory("z", {1}, false), "r1", true), NormalizationImpossible);
}

TEST_CASE("task outliers") {
  CHECK(classify_task_count(9) == OutlierReason::TooMany);
  CHECK(classify_task_count(1) == OutlierReason::TooFew);
  for (std::size_t n : {0, 2, 3, 4, 5, 8}) CHECK_FALSE(classify_task_count(n).has_value());

  std::vector<InteractionRecord> r;
  r.push_back(fixtures::request("many", "r1", 0, fixtures::table_with(3, 1)));
  r.push_back(fixtures::request("many", "r1", 1, fixtures::table_with(9, 0)));
  r.push_back(submission("many", "r1", 2));
  r.push_back(fixtures::request("few", "r1", 0, fixtures::table_with(1, 0)));
  r.push_back(fixtures::failed_request("few", "r1", 1));  // does not replace the last table
  r.push_back(submission("few", "r1", 2));
  r.push_back(fixtures::request("typical", "r1", 0, fixtures::table_with(5, 0)));
  r.push_back(submission("typical", "r1", 2));
  r.push_back(fixtures::request("four", "r1", 0, fixtures::table_with(4, 0)));
  r.push_back(submission("four", "r1", 2));
  r.push_back(submission("nouse", "r1", 2));
  r.push_back(fixtures::request("nosubmit", "r1", 0, fixtures::table_with(12, 0)));

  const auto d = task_distribution(r, "r1");
  CHECK(d.per_student_task_count ==
        std::map<std::string, std::size_t>{{"few", 1}, {"four", 4}, {"many", 9}, {"typical", 5}});
  CHECK(d.histogram == std::map<std::size_t, std::size_t>{{1, 1}, {4, 1}, {5, 1}, {9, 1}});
  REQUIRE(d.outliers.size() == 2);
  CHECK(d.outliers[0] == TaskOutlier{"few", 1, OutlierReason::TooFew});
  CHECK(d.outliers[1] == TaskOutlier{"many", 9, OutlierReason::TooMany});
  CHECK(d.uncovered == std::vector<std::string>{"nouse"});
}

TEST_CASE("category distribution") {
  using C = TaskCategory;
  std::vector<InteractionRecord> r;
  r.push_back(fixtures::request("a", "r2", 0,
                                fixtures::table_with(3, 0, PromptVersion::V2, {C::Writing, C::Meeting, C::Writing})));
  r.push_back(submission("a", "r2", 1));
  r.push_back(fixtures::request("b", "r2", 0,
                                fixtures::table_with(5, 0, PromptVersion::V2,
                                                     {C::Study, C::Implementation, C::Writing, C::Organization,
                                                      C::Meeting})));
  r.push_back(submission("b", "r2", 1));
  const auto d = category_distribution(r, "r2");
  CHECK(d.per_student_category_count == std::map<std::string, std::size_t>{{"a", 2}, {"b", 5}});
  CHECK(d.histogram == std::map<std::size_t, std::size_t>{{2, 1}, {5, 1}});

  std::vector<InteractionRecord> v1 = trajectory("a", {1}, true);
  CHECK_THROWS_AS(category_distribution(v1, "r1"), VersionUnsupported);
  CHECK_THROWS_AS(category_distribution(r, "r2", PromptVersion::V1), VersionUnsupported);
  CHECK(category_distribution({}, "r2").per_student_category_count.empty());
}

TEST_CASE("csv exports") {
  std::vector<InteractionRecord> r;
  append(r, trajectory("a", {3, 1}, true));
  append(r, trajectory("b", {2}, true));
  append(r, trajectory("c", {}, true));
  const auto f = compute_funnel(r, "r1");
  CHECK(funnel_csv(f) ==
        "stage,count,attrition\n"
        "submitted,3,\n"
        "used,2,0.333333\n"
        "interacted,1,0.5\n"
        "corrected,1,0\n");
  CHECK(histogram_csv(interaction_histogram(r, "r1", true)) == "bucket,value\n1,0.333333\n2,0.333333\n");
  CHECK(histogram_csv(std::map<std::size_t, std::size_t>{}) == "bucket,value\n");
  CHECK(tasks_csv(task_distribution(r, "r1")) == "student_id,task_count,outlier\na,4,\nb,4,\n");

  const auto j = funnel_json(f);
  CHECK(j["submitted"] == 3);
  CHECK(j["attrition"]["used"].get<double>() == doctest::Approx(1.0 / 3.0));
}

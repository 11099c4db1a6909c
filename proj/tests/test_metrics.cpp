#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "pesto/metrics.hpp"

using namespace pesto;
using namespace std::chrono;

namespace {

Timestamp at(const char *text) { return parse_timestamp(text); }

IssueRecord issue(std::string author, const char *created, std::optional<const char *> closed,
                  std::int64_t comments = 0) {
  IssueRecord r;
  r.author_login = std::move(author);
  r.author_type = AuthorType::user;
  r.created_at = at(created);
  if (closed) {
    r.closed_at = at(*closed);
    r.open = false;
  }
  r.comment_count = comments;
  return r;
}

IssueRecord pull_request(const char *created) {
  auto r = issue("pr-author", created, std::nullopt, 99);
  r.is_pull_request = true;
  return r;
}

} // namespace

TEST_CASE("age in days") {
  CHECK(compute_age_days(at("2020-01-01T00:00:00Z"), at("2020-01-11T00:00:00Z")) == 10.0);
  CHECK(compute_age_days(at("2020-01-01T00:00:00Z"), at("2020-01-01T00:00:00Z")) == 0.0);
  CHECK(compute_age_days(at("2020-01-01T00:00:00Z"), at("2020-01-01T12:00:00Z")) == 0.5);
  // Clock skew never yields a negative age.
  CHECK(compute_age_days(at("2020-01-02T00:00:00Z"), at("2020-01-01T00:00:00Z")) == 0.0);
}

TEST_CASE("average issue active time") {
  const auto now = at("2020-01-05T00:00:00Z");
  const std::vector<IssueRecord> issues{
      issue("a", "2020-01-01T00:00:00Z", "2020-01-03T00:00:00Z"),
      issue("b", "2020-01-01T00:00:00Z", std::nullopt),
  };
  CHECK(*compute_avg_issue_active_time(issues, now) == doctest::Approx(3.0));
  CHECK_FALSE(compute_avg_issue_active_time({}, now).has_value());
}

TEST_CASE("average issue close time ignores open issues") {
  const std::vector<IssueRecord> closed{
      issue("a", "2020-01-01T00:00:00Z", "2020-01-03T00:00:00Z"),
      issue("b", "2020-01-01T00:00:00Z", "2020-01-05T00:00:00Z"),
      issue("c", "2020-01-01T00:00:00Z", std::nullopt),
  };
  CHECK(*compute_avg_issue_close_time(closed) == doctest::Approx(3.0));
  const std::vector<IssueRecord> open{issue("a", "2020-01-01T00:00:00Z", std::nullopt)};
  CHECK_FALSE(compute_avg_issue_close_time(open).has_value());
  CHECK_FALSE(compute_avg_issue_close_time({}).has_value());
}

TEST_CASE("average issue comments") {
  const std::vector<IssueRecord> issues{
      issue("a", "2020-01-01T00:00:00Z", std::nullopt, 0),
      issue("b", "2020-01-01T00:00:00Z", std::nullopt, 4),
  };
  CHECK(*compute_avg_issue_comments(issues) == 2.0);
  CHECK_FALSE(compute_avg_issue_comments({}).has_value());
}

TEST_CASE("issue raisers are distinct logins, deleted accounts counted once") {
  const std::vector<IssueRecord> three{issue("a", "2020-01-01T00:00:00Z", std::nullopt),
                                       issue("b", "2020-01-01T00:00:00Z", std::nullopt),
                                       issue("a", "2020-01-01T00:00:00Z", std::nullopt)};
  CHECK(count_issue_raisers(three) == 2);
  CHECK(count_issue_raisers({}) == 0);
  const std::vector<IssueRecord> ghosts{issue("a", "2020-01-01T00:00:00Z", std::nullopt),
                                        issue(std::string(kGhostLogin), "2020-01-01T00:00:00Z", std::nullopt),
                                        issue(std::string(kGhostLogin), "2020-01-02T00:00:00Z", std::nullopt)};
  CHECK(count_issue_raisers(ghosts) == 2);
}

TEST_CASE("org-affiliated raisers") {
  auto a = issue("a", "2020-01-01T00:00:00Z", std::nullopt);
  a.author_type = AuthorType::organization;
  auto b = issue("b", "2020-01-01T00:00:00Z", std::nullopt);
  auto c = issue("c", "2020-01-01T00:00:00Z", std::nullopt);
  c.author_company = "Initech";
  auto blank = issue("d", "2020-01-01T00:00:00Z", std::nullopt);
  blank.author_company = " \t";
  CHECK(is_org_affiliated(a));
  CHECK_FALSE(is_org_affiliated(b));
  CHECK(is_org_affiliated(c));
  CHECK_FALSE(is_org_affiliated(blank));

  const std::vector<IssueRecord> abc{a, b, c, c};
  CHECK(count_org_issue_raisers(abc) == 2);
  CHECK(count_org_issue_raisers({}) == 0);
  const std::vector<IssueRecord> none{b, blank};
  CHECK(count_org_issue_raisers(none) == 0);
}

TEST_CASE("record from raw data with nothing in it") {
  RawRepoData raw;
  raw.summary.repo = RepoId{"o", "n"};
  raw.summary.created_at = at("2020-01-01T00:00:00Z");
  raw.crawl_timestamp = at("2020-01-11T00:00:00Z");
  const auto r = build_candidate_record(raw);
  CHECK(r.full_name == "o/n");
  CHECK(r.age_days == 10.0);
  CHECK_FALSE(r.avg_issue_active_time_days);
  CHECK_FALSE(r.avg_issue_close_time_days);
  CHECK_FALSE(r.avg_issue_comments);
  CHECK_FALSE(r.dependency_count);
  CHECK(r.issue_raiser_count == 0);
  CHECK(r.pull_request_count == 0);
  CHECK(r.download_total == 0);
  CHECK(r.issue_sample_size == 0);
  CHECK(build_candidate_record(raw) == r);
}

TEST_CASE("record fields are copied and derived") {
  RawRepoData raw;
  raw.summary.repo = RepoId{"alpha", "a"};
  raw.summary.created_at = at("2020-01-01T00:00:00Z");
  raw.summary.stargazer_count = 120;
  raw.summary.subscriber_count = 30;
  raw.summary.open_issue_count = 9;
  raw.pull_request_count = 7;
  raw.open_pull_request_count = 2;
  raw.contributor_count = 4;
  raw.dependency_count = 4;
  raw.download_total = 35;
  raw.crawl_timestamp = at("2020-01-21T00:00:00Z");
  raw.issues = {issue("a", "2020-01-10T00:00:00Z", "2020-01-12T00:00:00Z", 3), pull_request("2020-01-11T00:00:00Z")};
  const auto r = build_candidate_record(raw);
  CHECK(r.star_count == 120);
  CHECK(r.watcher_count == 30);
  CHECK(r.open_issue_count == 7);
  CHECK(r.dependency_count == 4);
  CHECK(r.issue_sample_size == 1);
  CHECK(*r.avg_issue_comments == 3.0);
  CHECK(r.crawled_at == raw.crawl_timestamp);

  raw.open_pull_request_count = 20; // inconsistent upstream counts clamp to zero
  CHECK(build_candidate_record(raw).open_issue_count == 0);
}

TEST_CASE("accessor lookup") {
  CandidateRecord r;
  r.star_count = 5;
  r.avg_issue_comments = 1.5;
  CHECK(numeric_accessors().size() == 14);
  CHECK(is_numeric_accessor("star_count"));
  CHECK_FALSE(is_numeric_accessor("full_name"));
  CHECK_FALSE(is_numeric_accessor("stra_count"));
  CHECK(*metric_value(r, "star_count") == 5.0);
  CHECK(*metric_value(r, "avg_issue_comments") == 1.5);
  CHECK_FALSE(metric_value(r, "dependency_count"));
  CHECK_THROWS_AS(metric_value(r, "full_name"), std::invalid_argument);
}

// Properties over generated issue samples.
TEST_CASE("issue metric properties") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> count(0, 40);
  std::uniform_int_distribution<std::int64_t> offset(0, 3'000 * 86'400);
  std::uniform_int_distribution<int> coin(0, 2);
  std::uniform_int_distribution<int> author(0, 9);
  const auto base = at("2015-01-01T00:00:00Z");
  const auto now = base + seconds{3'100 * 86'400};

  for (int round = 0; round < 500; ++round) {
    std::vector<IssueRecord> issues;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      IssueRecord r;
      r.author_login = coin(rng) == 0 ? std::string(kGhostLogin) : "user" + std::to_string(author(rng));
      r.author_type = coin(rng) == 0 ? AuthorType::organization : AuthorType::user;
      r.created_at = base + seconds{offset(rng)};
      if (coin(rng) != 0) {
        r.closed_at = r.created_at + seconds{offset(rng) / 10};
        r.open = false;
      }
      r.comment_count = author(rng);
      issues.push_back(r);
    }

    // Pull requests mixed into the sample change nothing.
    RawRepoData raw;
    raw.summary.repo = RepoId{"o", "n"};
    raw.summary.created_at = base;
    raw.crawl_timestamp = now;
    raw.issues = issues;
    const auto plain = build_candidate_record(raw);
    auto mixed = raw;
    for (int i = 0; i < 3; ++i) {
      mixed.issues.insert(mixed.issues.begin() + (i * 7) % (mixed.issues.size() + 1),
                          pull_request("2016-01-01T00:00:00Z"));
    }
    REQUIRE(build_candidate_record(mixed) == plain);
    REQUIRE(build_candidate_record(raw) == plain);

    // Durations are invariant under shifting every instant by an hour.
    auto shifted = issues;
    for (auto &r : shifted) {
      r.created_at += hours{1};
      if (r.closed_at) {
        *r.closed_at += hours{1};
      }
    }
    const auto active = compute_avg_issue_active_time(issues, now);
    const auto active_shifted = compute_avg_issue_active_time(shifted, now + hours{1});
    REQUIRE(active.has_value() == active_shifted.has_value());
    if (active) {
      REQUIRE(*active == doctest::Approx(*active_shifted).epsilon(1e-12));
    }
    const auto close = compute_avg_issue_close_time(issues);
    const auto close_shifted = compute_avg_issue_close_time(shifted);
    REQUIRE(close.has_value() == close_shifted.has_value());
    if (close) {
      REQUIRE(*close == doctest::Approx(*close_shifted).epsilon(1e-12));
    }

    // Raiser counts are monotone in the sample and bounded by its size.
    for (std::size_t k = 0; k < issues.size(); ++k) {
      const std::span<const IssueRecord> prefix(issues.data(), k);
      const std::span<const IssueRecord> longer(issues.data(), k + 1);
      REQUIRE(count_issue_raisers(prefix) <= count_issue_raisers(longer));
      REQUIRE(count_org_issue_raisers(prefix) <= count_org_issue_raisers(longer));
      REQUIRE(count_org_issue_raisers(longer) <= count_issue_raisers(longer));
      REQUIRE(count_issue_raisers(longer) <= static_cast<std::int64_t>(k + 1));
    }
  }
}

#include "pesto/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace pesto {

namespace {

constexpr std::array<std::string_view, 14> kNumericAccessors{
    "star_count",
    "watcher_count",
    "age_days",
    "avg_issue_active_time_days",
    "avg_issue_close_time_days",
    "avg_issue_comments",
    "issue_raiser_count",
    "org_issue_raiser_count",
    "pull_request_count",
    "contributor_count",
    "open_issue_count",
    "dependency_count",
    "download_total",
    "issue_sample_size",
};

template <typename Fn> std::optional<double> mean_over(std::span<const IssueRecord> issues, Fn fn) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto &issue : issues) {
    if (issue.is_pull_request) {
      continue;
    }
    if (const std::optional<double> v = fn(issue)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(n);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

} // namespace

double compute_age_days(Timestamp created_at, Timestamp now) {
  return std::max(0.0, days_between(created_at, now));
}

std::optional<double> compute_avg_issue_active_time(std::span<const IssueRecord> issues,
                                                    Timestamp now) {
  return mean_over(issues, [now](const IssueRecord &i) -> std::optional<double> {
    return days_between(i.created_at, i.closed_at.value_or(now));
  });
}

std::optional<double> compute_avg_issue_close_time(std::span<const IssueRecord> issues) {
  return mean_over(issues, [](const IssueRecord &i) -> std::optional<double> {
    if (!i.closed_at) {
      return std::nullopt;
    }
    return days_between(i.created_at, *i.closed_at);
  });
}

std::optional<double> compute_avg_issue_comments(std::span<const IssueRecord> issues) {
  return mean_over(issues, [](const IssueRecord &i) -> std::optional<double> {
    return static_cast<double>(i.comment_count);
  });
}

std::int64_t count_issue_raisers(std::span<const IssueRecord> issues) {
  std::set<std::string_view> authors;
  for (const auto &issue : issues) {
    if (!issue.is_pull_request) {
      authors.insert(issue.author_login.empty() ? kGhostLogin : issue.author_login);
    }
  }
  return static_cast<std::int64_t>(authors.size());
}

bool is_org_affiliated(const IssueRecord &issue) {
  return issue.author_type == AuthorType::organization ||
         (issue.author_company && !trim(*issue.author_company).empty());
}

std::int64_t count_org_issue_raisers(std::span<const IssueRecord> issues) {
  std::set<std::string_view> authors;
  for (const auto &issue : issues) {
    if (!issue.is_pull_request && is_org_affiliated(issue)) {
      authors.insert(issue.author_login.empty() ? kGhostLogin : issue.author_login);
    }
  }
  return static_cast<std::int64_t>(authors.size());
}

CandidateRecord build_candidate_record(const RawRepoData &raw) {
  std::vector<IssueRecord> issues;
  issues.reserve(raw.issues.size());
  std::copy_if(raw.issues.begin(), raw.issues.end(), std::back_inserter(issues),
               [](const IssueRecord &i) { return !i.is_pull_request; });

  CandidateRecord r;
  r.full_name = raw.summary.repo.full_name();
  r.crawled_at = raw.crawl_timestamp;
  r.star_count = raw.summary.stargazer_count;
  r.watcher_count = raw.summary.subscriber_count;
  r.age_days = compute_age_days(raw.summary.created_at, raw.crawl_timestamp);
  r.avg_issue_active_time_days = compute_avg_issue_active_time(issues, raw.crawl_timestamp);
  r.avg_issue_close_time_days = compute_avg_issue_close_time(issues);
  r.avg_issue_comments = compute_avg_issue_comments(issues);
  r.issue_raiser_count = count_issue_raisers(issues);
  r.org_issue_raiser_count = count_org_issue_raisers(issues);
  r.pull_request_count = raw.pull_request_count;
  r.contributor_count = raw.contributor_count;
  r.open_issue_count =
      std::max<std::int64_t>(0, raw.summary.open_issue_count - raw.open_pull_request_count);
  r.dependency_count = raw.dependency_count;
  r.download_total = raw.download_total;
  r.issue_sample_size = static_cast<std::int64_t>(issues.size());
  return r;
}

std::span<const std::string_view> numeric_accessors() { return kNumericAccessors; }

bool is_numeric_accessor(std::string_view accessor) {
  return std::find(kNumericAccessors.begin(), kNumericAccessors.end(), accessor) !=
         kNumericAccessors.end();
}

std::optional<double> metric_value(const CandidateRecord &r, std::string_view accessor) {
  const auto real = [](std::int64_t v) { return std::optional<double>(static_cast<double>(v)); };
  if (accessor == "star_count") return real(r.star_count);
  if (accessor == "watcher_count") return real(r.watcher_count);
  if (accessor == "age_days") return r.age_days;
  if (accessor == "avg_issue_active_time_days") return r.avg_issue_active_time_days;
  if (accessor == "avg_issue_close_time_days") return r.avg_issue_close_time_days;
  if (accessor == "avg_issue_comments") return r.avg_issue_comments;
  if (accessor == "issue_raiser_count") return real(r.issue_raiser_count);
  if (accessor == "org_issue_raiser_count") return real(r.org_issue_raiser_count);
  if (accessor == "pull_request_count") return real(r.pull_request_count);
  if (accessor == "contributor_count") return real(r.contributor_count);
  if (accessor == "open_issue_count") return real(r.open_issue_count);
  if (accessor == "dependency_count") {
    return r.dependency_count ? real(*r.dependency_count) : std::nullopt;
  }
  if (accessor == "download_total") return real(r.download_total);
  if (accessor == "issue_sample_size") return real(r.issue_sample_size);
  throw std::invalid_argument(fmt::format("'{}' is not a numeric metric", accessor));
}

} // namespace pesto

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pesto/github_client.hpp"
#include "pesto/timestamp.hpp"

namespace pesto {

/// Everything fetched for one repository before aggregation.
struct RawRepoData {
  RepoSummary summary;
  /// Newest-first sample; pull requests, if any, are filtered out downstream.
  std::vector<IssueRecord> issues;
  std::int64_t pull_request_count = 0;
  std::int64_t open_pull_request_count = 0;
  std::int64_t contributor_count = 0;
  std::optional<std::int64_t> dependency_count;
  std::int64_t download_total = 0;
  Timestamp crawl_timestamp{};
};

/// One CSV row. Optional metrics are absent when undefined, never zero.
struct CandidateRecord {
  std::string full_name;
  Timestamp crawled_at{};
  std::int64_t star_count = 0;
  std::int64_t watcher_count = 0;
  double age_days = 0.0;
  std::optional<double> avg_issue_active_time_days;
  std::optional<double> avg_issue_close_time_days;
  std::optional<double> avg_issue_comments;
  std::int64_t issue_raiser_count = 0;
  std::int64_t org_issue_raiser_count = 0;
  std::int64_t pull_request_count = 0;
  std::int64_t contributor_count = 0;
  /// Reported open issues minus open pull requests.
  std::int64_t open_issue_count = 0;
  std::optional<std::int64_t> dependency_count;
  std::int64_t download_total = 0;
  std::int64_t issue_sample_size = 0;

  friend bool operator==(const CandidateRecord &, const CandidateRecord &) = default;
};

double compute_age_days(Timestamp created_at, Timestamp now);

/// Mean of close-or-now minus creation over every non-PR issue.
std::optional<double> compute_avg_issue_active_time(std::span<const IssueRecord> issues,
                                                    Timestamp now);

/// Mean of close minus creation over closed non-PR issues only.
std::optional<double> compute_avg_issue_close_time(std::span<const IssueRecord> issues);

std::optional<double> compute_avg_issue_comments(std::span<const IssueRecord> issues);

/// Distinct author logins; deleted accounts all count as one.
std::int64_t count_issue_raisers(std::span<const IssueRecord> issues);

/// True when the author is an Organization account or lists a company.
bool is_org_affiliated(const IssueRecord &issue);

std::int64_t count_org_issue_raisers(std::span<const IssueRecord> issues);

CandidateRecord build_candidate_record(const RawRepoData &raw);

/// Numeric record fields usable as evaluation accessors, in CSV order.
std::span<const std::string_view> numeric_accessors();
bool is_numeric_accessor(std::string_view accessor);

/// Value of a numeric field as a real; nullopt when the field is absent.
/// Throws std::invalid_argument for a name outside numeric_accessors().
std::optional<double> metric_value(const CandidateRecord &record, std::string_view accessor);

} // namespace pesto

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pesto/datastore.hpp"
#include "pesto/github_client.hpp"
#include "pesto/metrics.hpp"

namespace pesto {

struct RepoOutcome {
  std::string full_name;
  bool ok = false;
  /// Failure reason; empty on success.
  std::string error;
  std::uint64_t request_count = 0;
};

struct CrawlReport {
  std::vector<RepoOutcome> repos;
  std::uint64_t request_count = 0;
  std::int64_t issue_sample_cap = 0;
  /// Set when the session was aborted (rejected token, unreadable output).
  std::optional<std::string> fatal_error;

  bool all_ok() const;
  std::size_t failure_count() const;
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;
};

struct CrawlOptions {
  /// Longest wait honoured for a rate-limited repository before it is
  /// recorded as failed.
  std::chrono::seconds max_rate_limit_wait{900};
  /// Source of crawl timestamps (rate-limit waits always use the real clock).
  std::function<Timestamp()> clock = now_utc;
};

/// Drives the client for each candidate, turns the raw data into records
/// and merges them into the CSV after every completed repository.
class Crawler {
public:
  explicit Crawler(GithubClient &client, CrawlOptions options = {});

  /// Everything the metrics need for one repository. The summary is
  /// fetched first; the remaining endpoints run concurrently.
  RawRepoData fetch_raw(const RepoId &repo);

  /// Per-repository failures are collected; a rejected token aborts the
  /// session but keeps rows already written.
  CrawlReport crawl_candidates(const std::vector<std::string> &repos,
                               const std::filesystem::path &out_path);

  /// Lists matching repositories without crawling them.
  std::vector<RepoId> discover_by_stars(std::int64_t min_stars,
                                        std::optional<std::int64_t> max_stars,
                                        std::int64_t limit);

  /// Re-crawls every candidate already present in the dataset, in order.
  CrawlReport recrawl(const std::filesystem::path &dataset_path);

private:
  GithubClient &client_;
  CrawlOptions options_;
};

} // namespace pesto

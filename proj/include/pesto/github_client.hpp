#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pesto/timestamp.hpp"

namespace pesto {

/// Login GitHub shows for deleted accounts; null issue authors map onto it.
inline constexpr std::string_view kGhostLogin = "ghost";

/// Owner/name pair identifying one repository.
struct RepoId {
  std::string owner;
  std::string name;

  /// Parses "owner/name". Throws std::invalid_argument on anything that
  /// does not follow GitHub naming rules.
  static RepoId parse(std::string_view full_name);
  static bool valid_component(std::string_view part);

  std::string full_name() const { return owner + "/" + name; }
  friend bool operator==(const RepoId &, const RepoId &) = default;
};

/// A personal access token. The value is only reachable through
/// reveal(); nothing else in the library formats it.
class ApiCredentials {
public:
  enum class Source { flag, env_var };

  ApiCredentials(std::string token, Source source);

  /// Flag value wins over GITHUB_TOKEN; nullopt when neither is set.
  static std::optional<ApiCredentials> resolve(const std::optional<std::string> &flag_token);

  const std::string &reveal() const { return token_; }
  Source source() const { return source_; }

private:
  std::string token_;
  Source source_;
};

struct CrawlBudget {
  std::int64_t max_requests = 5000;
  std::int64_t max_issue_sample = 500;
  std::chrono::milliseconds request_timeout{30'000};
  int max_retries = 3;
  std::int64_t min_remaining_headroom = 50;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ClientOptions {
  /// Empty means PESTO_API_BASE, falling back to https://api.github.com.
  std::string base_url;
  int page_size = 100;
  int max_in_flight = 4;
  std::chrono::milliseconds backoff_initial{1000};
  std::string user_agent = "oss-pesto/1.0";
};

struct RateLimitState {
  std::int64_t remaining = 0;
  Timestamp reset_at{};
  Timestamp last_observed{};
};

template <typename T> struct Page {
  std::vector<T> items;
  /// Absent means the listing is exhausted.
  std::optional<std::string> next_cursor;
};

struct RepoSummary {
  RepoId repo;
  Timestamp created_at{};
  std::int64_t stargazer_count = 0;
  /// Subscribers, not the legacy "watchers" field which mirrors stars.
  std::int64_t subscriber_count = 0;
  /// As reported by GitHub: open pull requests are included.
  std::int64_t open_issue_count = 0;
  std::string default_branch;
  bool archived = false;
  Timestamp fetched_at{};

  friend bool operator==(const RepoSummary &, const RepoSummary &) = default;
};

enum class AuthorType { user, organization, bot, unknown };

struct IssueRecord {
  std::string author_login;
  AuthorType author_type = AuthorType::unknown;
  /// Company string from the author's profile, when exposed.
  std::optional<std::string> author_company;
  std::string author_association;
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  std::int64_t comment_count = 0;
  bool open = true;
  bool is_pull_request = false;

  friend bool operator==(const IssueRecord &, const IssueRecord &) = default;
};

struct PullRequestCounts {
  std::int64_t total = 0;
  std::int64_t open = 0;
};

class GithubError : public std::runtime_error {
public:
  enum class Kind {
    not_found,
    unauthorized,
    forbidden,
    rate_limited,
    transport,
    invalid_range,
    invalid_argument,
    budget_exhausted,
    protocol,
  };

  GithubError(Kind kind, const std::string &message,
              std::optional<Timestamp> reset_at = std::nullopt);

  Kind kind() const { return kind_; }
  /// Set for rate_limited errors when the server told us when to come back.
  std::optional<Timestamp> reset_at() const { return reset_at_; }

private:
  Kind kind_;
  std::optional<Timestamp> reset_at_;
};

std::string_view to_string(GithubError::Kind kind);

/// Rate-limit-aware REST + GraphQL client bound to one token and one budget.
///
/// Every attempt (retries included) is charged against
/// CrawlBudget::max_requests; once spent, further calls fail with
/// budget_exhausted without touching the network. When the last observed
/// remaining quota for an API resource drops below the headroom, the next
/// request to that resource sleeps until the advertised reset.
///
/// Thread-safe: at most ClientOptions::max_in_flight requests are on the
/// wire at once.
class GithubClient {
public:
  GithubClient(ApiCredentials creds, CrawlBudget budget, ClientOptions options = {});
  ~GithubClient();
  GithubClient(const GithubClient &) = delete;
  GithubClient &operator=(const GithubClient &) = delete;

  RepoSummary fetch_repo_summary(const RepoId &repo);

  /// One newest-first page of issues (GraphQL). `first` defaults to the
  /// configured page size.
  Page<IssueRecord> fetch_issue_page(const RepoId &repo,
                                     const std::optional<std::string> &cursor,
                                     std::optional<int> first = std::nullopt);

  /// Newest-first issues, at most CrawlBudget::max_issue_sample of them.
  std::vector<IssueRecord> fetch_issue_sample(const RepoId &repo);

  PullRequestCounts fetch_pull_request_counts(const RepoId &repo);
  std::int64_t fetch_pull_request_count(const RepoId &repo) {
    return fetch_pull_request_counts(repo).total;
  }

  std::int64_t fetch_contributor_count(const RepoId &repo);

  /// nullopt when the dependency graph has nothing for this repository.
  std::optional<std::int64_t> fetch_dependency_count(const RepoId &repo);

  std::int64_t fetch_release_download_total(const RepoId &repo);

  /// Up to `limit` repositories with stars in [min_stars, max_stars],
  /// descending by stars then by full name. limit must be in [1, 1000].
  std::vector<RepoId> search_repos_by_stars(std::int64_t min_stars,
                                            std::optional<std::int64_t> max_stars,
                                            std::int64_t limit);

  std::uint64_t request_count() const { return requests_.load(); }
  std::optional<RateLimitState> rate_limit(std::string_view resource) const;
  const CrawlBudget &budget() const { return budget_; }
  const std::string &base_url() const { return base_url_; }

  struct Response;

private:
  struct Request;

  Response send(const Request &request);
  Response send_once(const Request &request);
  void reserve_request();
  void wait_for_headroom(const std::string &resource);
  std::uint64_t observation_count() const;
  void observe_rate_limit(const std::string &resource, const Response &response,
                          std::uint64_t sent_after);
  std::optional<Timestamp> known_reset(const std::string &resource) const;
  std::string redact(std::string text) const;

  template <typename Fn> void for_each_rest_page(const std::string &first_path, Fn &&fn);

  ApiCredentials creds_;
  CrawlBudget budget_;
  ClientOptions options_;
  std::string base_url_;
  std::string origin_;
  std::string path_prefix_;

  std::atomic<std::uint64_t> requests_{0};
  mutable std::mutex rate_mutex_;
  std::map<std::string, RateLimitState, std::less<>> rate_limits_;
  /// Observations are numbered so a response can be ordered against the
  /// state it would replace: one whose request was sent after that state
  /// was recorded is strictly newer.
  std::uint64_t observations_ = 0;
  std::map<std::string, std::uint64_t, std::less<>> observed_seq_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

} // namespace pesto

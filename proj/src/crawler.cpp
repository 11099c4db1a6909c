#include "pesto/crawler.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <thread>

#include <fmt/format.h>

#include "pesto/log.hpp"

namespace pesto {

namespace fs = std::filesystem;

namespace {

template <typename T> void collect(std::future<T> &future, T &out, std::exception_ptr &first,
                                   std::exception_ptr &auth) {
  try {
    out = future.get();
  } catch (const GithubError &e) {
    if (e.kind() == GithubError::Kind::unauthorized && !auth) {
      auth = std::current_exception();
    }
    if (!first) {
      first = std::current_exception();
    }
  } catch (...) {
    if (!first) {
      first = std::current_exception();
    }
  }
}

} // namespace

bool CrawlReport::all_ok() const {
  return !fatal_error && std::all_of(repos.begin(), repos.end(),
                                     [](const RepoOutcome &r) { return r.ok; });
}

std::size_t CrawlReport::failure_count() const {
  return static_cast<std::size_t>(
      std::count_if(repos.begin(), repos.end(), [](const RepoOutcome &r) { return !r.ok; }));
}

std::string CrawlReport::to_text() const {
  std::string out;
  for (const auto &r : repos) {
    out += r.ok ? fmt::format("ok      {} ({} requests)\n", r.full_name, r.request_count)
                : fmt::format("FAILED  {} ({} requests): {}\n", r.full_name, r.request_count,
                              r.error);
  }
  out += fmt::format("{} of {} repositories crawled, {} requests, issue sample cap {}\n",
                     repos.size() - failure_count(), repos.size(), request_count,
                     issue_sample_cap);
  if (fatal_error) {
    out += fmt::format("aborted: {}\n", *fatal_error);
  }
  return out;
}

nlohmann::ordered_json CrawlReport::to_json() const {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto &r : repos) {
    list.push_back({{"full_name", r.full_name},
                    {"ok", r.ok},
                    {"error", r.ok ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error)},
                    {"request_count", r.request_count}});
  }
  return {{"repos", std::move(list)},
          {"request_count", request_count},
          {"issue_sample_cap", issue_sample_cap},
          {"fatal_error", fatal_error ? nlohmann::ordered_json(*fatal_error)
                                      : nlohmann::ordered_json(nullptr)}};
}

Crawler::Crawler(GithubClient &client, CrawlOptions options)
    : client_(client), options_(std::move(options)) {}

RawRepoData Crawler::fetch_raw(const RepoId &repo) {
  RawRepoData raw;
  raw.summary = client_.fetch_repo_summary(repo);

  auto issues = std::async(std::launch::async, [&] { return client_.fetch_issue_sample(repo); });
  auto pulls =
      std::async(std::launch::async, [&] { return client_.fetch_pull_request_counts(repo); });
  auto contributors =
      std::async(std::launch::async, [&] { return client_.fetch_contributor_count(repo); });
  auto dependencies =
      std::async(std::launch::async, [&] { return client_.fetch_dependency_count(repo); });
  auto downloads =
      std::async(std::launch::async, [&] { return client_.fetch_release_download_total(repo); });

  std::exception_ptr first;
  std::exception_ptr auth;
  PullRequestCounts pr_counts;
  collect(issues, raw.issues, first, auth);
  collect(pulls, pr_counts, first, auth);
  collect(contributors, raw.contributor_count, first, auth);
  collect(dependencies, raw.dependency_count, first, auth);
  collect(downloads, raw.download_total, first, auth);
  if (auth) {
    std::rethrow_exception(auth);
  }
  if (first) {
    std::rethrow_exception(first);
  }
  raw.pull_request_count = pr_counts.total;
  raw.open_pull_request_count = pr_counts.open;
  raw.crawl_timestamp = std::max(options_.clock(), raw.summary.created_at);
  return raw;
}

CrawlReport Crawler::crawl_candidates(const std::vector<std::string> &repos,
                                      const fs::path &out_path) {
  CrawlReport report;
  report.issue_sample_cap = client_.budget().max_issue_sample;
  if (repos.empty()) {
    return report;
  }
  const auto session_start = client_.request_count();

  Dataset dataset;
  std::error_code ec;
  if (fs::exists(out_path, ec)) {
    try {
      dataset = read_csv(out_path);
    } catch (const DatastoreError &e) {
      report.fatal_error = fmt::format("cannot merge into existing output: {}", e.what());
      return report;
    }
  }

  bool budget_spent = false;
  for (const auto &name : repos) {
    RepoOutcome outcome{name, false, {}, 0};
    if (budget_spent) {
      outcome.error = "skipped: request budget exhausted";
      report.repos.push_back(std::move(outcome));
      continue;
    }

    RepoId repo;
    try {
      repo = RepoId::parse(name);
    } catch (const std::invalid_argument &e) {
      outcome.error = e.what();
      report.repos.push_back(std::move(outcome));
      continue;
    }

    const auto before = client_.request_count();
    bool retried = false;
    while (true) {
      try {
        const auto record = build_candidate_record(fetch_raw(repo));
        dataset = merge(std::move(dataset), std::span(&record, 1));
        write_csv(dataset, out_path);
        outcome.ok = true;
        outcome.error.clear();
      } catch (const GithubError &e) {
        outcome.error = fmt::format("{}: {}", to_string(e.kind()), e.what());
        if (e.kind() == GithubError::Kind::unauthorized) {
          report.fatal_error = outcome.error;
        } else if (e.kind() == GithubError::Kind::budget_exhausted) {
          budget_spent = true;
        } else if (e.kind() == GithubError::Kind::rate_limited && !retried) {
          // Reset times come from the server, so compare against the real clock.
          const auto reset = e.reset_at().value_or(now_utc());
          const auto wait = reset - now_utc();
          if (wait <= options_.max_rate_limit_wait) {
            logger()->warn("{} rate limited; waiting {} s before retrying", name,
                           std::max<std::int64_t>(0, wait.count()));
            std::this_thread::sleep_until(reset);
            retried = true;
            continue;
          }
        }
      } catch (const DatastoreError &e) {
        outcome.error = e.what();
        report.fatal_error = fmt::format("cannot write '{}': {}", out_path.string(), e.what());
      } catch (const std::exception &e) {
        outcome.error = e.what();
      }
      break;
    }
    outcome.request_count = client_.request_count() - before;
    if (!outcome.ok) {
      logger()->warn("{} failed: {}", name, outcome.error);
    }
    report.repos.push_back(std::move(outcome));
    if (report.fatal_error) {
      break;
    }
  }
  report.request_count = client_.request_count() - session_start;
  return report;
}

std::vector<RepoId> Crawler::discover_by_stars(std::int64_t min_stars,
                                               std::optional<std::int64_t> max_stars,
                                               std::int64_t limit) {
  return client_.search_repos_by_stars(min_stars, max_stars, limit);
}

CrawlReport Crawler::recrawl(const fs::path &dataset_path) {
  CrawlReport report;
  report.issue_sample_cap = client_.budget().max_issue_sample;
  Dataset dataset;
  try {
    dataset = read_csv(dataset_path);
  } catch (const DatastoreError &e) {
    report.fatal_error = e.what();
    return report;
  }
  std::vector<std::string> names;
  for (const auto &r : dataset.records) {
    names.push_back(r.full_name);
  }
  return crawl_candidates(names, dataset_path);
}

} // namespace pesto

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace pesto::testing {

/// In-process stand-in for the GitHub REST and GraphQL endpoints the
/// client uses, driven by a JSON fixture (see tests/fixtures/*.json).
///
/// Fixture shape per repo: owner, name, created_at, stargazers_count,
/// subscribers_count, open_issues_count, archived, issues[], pull_requests
/// {total, open}, contributors[] or contributor_count, sbom {packages: N}
/// or null, releases [[asset downloads...], ...]. An optional top-level
/// "search_only" list of {full_name, stars} extends the search corpus.
class MockGithub {
public:
  struct LoggedRequest {
    std::string method;
    std::string path;
    std::string resource;
    std::string authorization;
    std::chrono::system_clock::time_point at;
  };

  explicit MockGithub(nlohmann::json fixture);
  ~MockGithub();
  MockGithub(const MockGithub &) = delete;
  MockGithub &operator=(const MockGithub &) = delete;

  static nlohmann::json load_fixture(const std::filesystem::path &path);

  /// Binds 127.0.0.1 (ephemeral port when 0) and serves on a background thread.
  int start(int port = 0);
  void stop();
  /// Runs in the calling thread until stop() (for the standalone tool).
  bool listen_blocking(const std::string &host, int port);

  std::string base_url() const;
  std::string token() const;

  void set_fixture(nlohmann::json fixture);

  std::uint64_t request_count() const;
  std::vector<LoggedRequest> requests() const;
  void clear_log();

  /// Every endpoint of this repo answers with `status` until cleared.
  void set_repo_status(const std::string &full_name, int status);
  void clear_repo_status(const std::string &full_name);
  /// The next `count` requests answer with `status` (5xx bursts).
  void inject_server_errors(int count, int status = 503);
  /// The next response reports `remaining` quota for its resource, resetting
  /// `reset_in` seconds after the current second.
  void inject_low_remaining(std::int64_t remaining, std::chrono::seconds reset_in);
  /// The next `count` requests get 403 with exhausted quota.
  void inject_rate_limit_exhaustion(int count, std::chrono::seconds reset_in);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

} // namespace pesto::testing

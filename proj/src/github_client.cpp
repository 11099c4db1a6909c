#include "pesto/github_client.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <thread>
#include <utility>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pesto/log.hpp"

namespace pesto {

using nlohmann::json;

namespace {

constexpr std::string_view kDefaultApiBase = "https://api.github.com";
constexpr std::int64_t kSearchResultCeiling = 1000;

constexpr std::string_view kIssuePageQuery = R"(query($owner: String!, $name: String!, $first: Int!, $after: String) {
  repository(owner: $owner, name: $name) {
    issues(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: DESC}) {
      pageInfo { hasNextPage endCursor }
      nodes {
        createdAt
        closedAt
        state
        authorAssociation
        comments { totalCount }
        author { __typename login ... on User { company } }
      }
    }
  }
})";

constexpr std::string_view kPullRequestCountQuery = R"(query($owner: String!, $name: String!) {
  repository(owner: $owner, name: $name) {
    total: pullRequests { totalCount }
    open: pullRequests(states: OPEN) { totalCount }
  }
})";

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

std::string resource_for_path(std::string_view path) {
  if (path.find("/graphql") != std::string_view::npos) {
    return "graphql";
  }
  if (path.find("/search/") != std::string_view::npos) {
    return "search";
  }
  return "core";
}

/// Extracts the rel="next" target from an RFC 8288 Link header.
std::optional<std::string> next_link(std::string_view header) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    const auto open = header.find('<', pos);
    if (open == std::string_view::npos) {
      break;
    }
    const auto close = header.find('>', open);
    if (close == std::string_view::npos) {
      break;
    }
    auto end = header.find(',', close);
    if (end == std::string_view::npos) {
      end = header.size();
    }
    const auto params = header.substr(close + 1, end - close - 1);
    if (params.find("rel=\"next\"") != std::string_view::npos ||
        params.find("rel=next") != std::string_view::npos) {
      return std::string(header.substr(open + 1, close - open - 1));
    }
    pos = end + 1;
  }
  return std::nullopt;
}

/// Path and query of an absolute or relative URL.
std::string path_of(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) {
    return std::string(url);
  }
  const auto slash = url.find('/', scheme + 3);
  return slash == std::string_view::npos ? std::string("/") : std::string(url.substr(slash));
}

template <typename T> T get_or(const json &obj, std::string_view key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return fallback;
  }
  return it->template get<T>();
}

AuthorType author_type_from(std::string_view typename_) {
  if (typename_ == "User") {
    return AuthorType::user;
  }
  if (typename_ == "Organization") {
    return AuthorType::organization;
  }
  if (typename_ == "Bot") {
    return AuthorType::bot;
  }
  return AuthorType::unknown;
}

} // namespace

// ---------------------------------------------------------------------------

RepoId RepoId::parse(std::string_view full_name) {
  const auto slash = full_name.find('/');
  if (slash == std::string_view::npos || full_name.find('/', slash + 1) != std::string_view::npos) {
    throw std::invalid_argument(
        fmt::format("'{}' is not of the form owner/name", full_name));
  }
  RepoId id{std::string(full_name.substr(0, slash)), std::string(full_name.substr(slash + 1))};
  if (!valid_component(id.owner) || !valid_component(id.name)) {
    throw std::invalid_argument(fmt::format(
        "'{}' is not a valid repository name (alphanumerics, '-', '.', '_' only)", full_name));
  }
  return id;
}

bool RepoId::valid_component(std::string_view part) {
  if (part.empty() || part.size() > 100 || part == "." || part == "..") {
    return false;
  }
  return std::all_of(part.begin(), part.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '.' || c == '_';
  });
}

ApiCredentials::ApiCredentials(std::string token, Source source)
    : token_(std::move(token)), source_(source) {
  if (token_.empty()) {
    throw std::invalid_argument("GitHub token is empty");
  }
}

std::optional<ApiCredentials> ApiCredentials::resolve(const std::optional<std::string> &flag_token) {
  if (flag_token && !flag_token->empty()) {
    return ApiCredentials(*flag_token, Source::flag);
  }
  if (const char *env = std::getenv("GITHUB_TOKEN"); env != nullptr && *env != '\0') {
    return ApiCredentials(env, Source::env_var);
  }
  return std::nullopt;
}

void CrawlBudget::validate() const {
  if (max_requests <= 0) {
    throw std::invalid_argument("max_requests must be positive");
  }
  if (max_issue_sample <= 0) {
    throw std::invalid_argument("max_issue_sample must be positive");
  }
  if (request_timeout.count() <= 0) {
    throw std::invalid_argument("request_timeout must be positive");
  }
  if (max_retries < 0) {
    throw std::invalid_argument("max_retries must be non-negative");
  }
  if (min_remaining_headroom < 0) {
    throw std::invalid_argument("min_remaining_headroom must be non-negative");
  }
}

GithubError::GithubError(Kind kind, const std::string &message, std::optional<Timestamp> reset_at)
    : std::runtime_error(message), kind_(kind), reset_at_(reset_at) {}

std::string_view to_string(GithubError::Kind kind) {
  switch (kind) {
  case GithubError::Kind::not_found: return "not_found";
  case GithubError::Kind::unauthorized: return "unauthorized";
  case GithubError::Kind::forbidden: return "forbidden";
  case GithubError::Kind::rate_limited: return "rate_limited";
  case GithubError::Kind::transport: return "transport";
  case GithubError::Kind::invalid_range: return "invalid_range";
  case GithubError::Kind::invalid_argument: return "invalid_argument";
  case GithubError::Kind::budget_exhausted: return "budget_exhausted";
  case GithubError::Kind::protocol: return "protocol";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

struct GithubClient::Request {
  std::string method;
  std::string path;
  std::string body;
  std::string resource;
  std::string what;
};

struct GithubClient::Response {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;

  std::optional<std::string> header(const std::string &name) const {
    const auto it = headers.find(name);
    return it == headers.end() ? std::nullopt : std::optional<std::string>(it->second);
  }
};

namespace {

std::optional<std::int64_t> header_int(const GithubClient::Response &r, const std::string &name) {
  const auto value = r.header(name);
  if (!value) {
    return std::nullopt;
  }
  try {
    return std::stoll(*value);
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

} // namespace

GithubClient::GithubClient(ApiCredentials creds, CrawlBudget budget, ClientOptions options)
    : creds_(std::move(creds)), budget_(budget), options_(std::move(options)) {
  budget_.validate();
  if (options_.page_size < 1) {
    throw std::invalid_argument("page_size must be at least 1");
  }
  if (options_.max_in_flight < 1) {
    throw std::invalid_argument("max_in_flight must be at least 1");
  }
  base_url_ = options_.base_url;
  if (base_url_.empty()) {
    const char *env = std::getenv("PESTO_API_BASE");
    base_url_ = (env != nullptr && *env != '\0') ? env : std::string(kDefaultApiBase);
  }
  while (!base_url_.empty() && base_url_.back() == '/') {
    base_url_.pop_back();
  }
  const auto scheme = base_url_.find("://");
  if (scheme == std::string::npos) {
    throw std::invalid_argument(fmt::format("API base '{}' lacks a scheme", base_url_));
  }
  const auto slash = base_url_.find('/', scheme + 3);
  origin_ = base_url_.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? std::string() : base_url_.substr(slash);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(options_.max_in_flight);
}

GithubClient::~GithubClient() = default;

std::optional<RateLimitState> GithubClient::rate_limit(std::string_view resource) const {
  std::lock_guard lock(rate_mutex_);
  const auto it = rate_limits_.find(resource);
  if (it == rate_limits_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::string GithubClient::redact(std::string text) const {
  const auto &token = creds_.reveal();
  for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos)) {
    text.replace(pos, token.size(), "[redacted]");
  }
  return text;
}

void GithubClient::reserve_request() {
  const auto max = static_cast<std::uint64_t>(budget_.max_requests);
  auto current = requests_.load();
  do {
    if (current >= max) {
      throw GithubError(GithubError::Kind::budget_exhausted,
                        fmt::format("request budget of {} exhausted", budget_.max_requests));
    }
  } while (!requests_.compare_exchange_weak(current, current + 1));
}

std::optional<Timestamp> GithubClient::known_reset(const std::string &resource) const {
  std::lock_guard lock(rate_mutex_);
  const auto it = rate_limits_.find(resource);
  if (it == rate_limits_.end()) {
    return std::nullopt;
  }
  return it->second.reset_at;
}

void GithubClient::wait_for_headroom(const std::string &resource) {
  std::optional<Timestamp> until;
  {
    std::lock_guard lock(rate_mutex_);
    const auto it = rate_limits_.find(resource);
    if (it != rate_limits_.end() && it->second.remaining < budget_.min_remaining_headroom) {
      until = it->second.reset_at;
    }
  }
  if (!until) {
    return;
  }
  const auto now = std::chrono::system_clock::now();
  if (*until > now) {
    logger()->info("{} quota below headroom; sleeping until {}", resource, format_timestamp(*until));
    std::this_thread::sleep_until(*until);
  }
}

std::uint64_t GithubClient::observation_count() const {
  std::lock_guard lock(rate_mutex_);
  return observations_;
}

void GithubClient::observe_rate_limit(const std::string &resource, const Response &response,
                                      std::uint64_t sent_after) {
  const auto remaining = header_int(response, "x-ratelimit-remaining");
  const auto reset = header_int(response, "x-ratelimit-reset");
  if (!remaining || !reset) {
    return;
  }
  const auto key = response.header("x-ratelimit-resource").value_or(resource);
  RateLimitState observed{*remaining, Timestamp{std::chrono::seconds{*reset}}, now_utc()};

  std::lock_guard lock(rate_mutex_);
  const auto seq = ++observations_;
  auto [it, inserted] = rate_limits_.try_emplace(key, observed);
  auto &stored_seq = observed_seq_[key];
  auto &state = it->second;
  if (inserted || sent_after >= stored_seq || observed.reset_at > state.reset_at) {
    state = observed;
    stored_seq = seq;
  } else {
    // Concurrent response from the same or an older window: quota only
    // ever goes down until the window resets.
    state.remaining = std::min(state.remaining, observed.remaining);
    state.last_observed = observed.last_observed;
  }
}

GithubClient::Response GithubClient::send_once(const Request &request) {
  httplib::Client cli(origin_);
  const auto timeout = budget_.request_timeout;
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  cli.set_connection_timeout(sec.count(), usec.count());
  cli.set_read_timeout(sec.count(), usec.count());
  cli.set_write_timeout(sec.count(), usec.count());

  const httplib::Headers headers{
      {"Authorization", "Bearer " + creds_.reveal()},
      {"Accept", "application/vnd.github+json"},
      {"X-GitHub-Api-Version", "2022-11-28"},
      {"User-Agent", options_.user_agent},
  };

  in_flight_->acquire();
  httplib::Result result = request.method == "POST"
                               ? cli.Post(request.path, headers, request.body, "application/json")
                               : cli.Get(request.path, headers);
  in_flight_->release();

  if (!result) {
    throw GithubError(GithubError::Kind::transport,
                      fmt::format("{}: {}", request.what, httplib::to_string(result.error())));
  }
  Response response;
  response.status = result->status;
  response.body = std::move(result->body);
  for (const auto &[name, value] : result->headers) {
    response.headers.emplace(lowercase(name), value);
  }
  logger()->debug("{} {} -> {}", request.method, request.path, response.status);
  return response;
}

GithubClient::Response GithubClient::send(const Request &request) {
  for (int attempt = 0;; ++attempt) {
    reserve_request();
    wait_for_headroom(request.resource);

    std::optional<GithubError> failure;
    Response response;
    const auto sent_after = observation_count();
    try {
      response = send_once(request);
    } catch (const GithubError &e) {
      failure = e;
    }
    if (!failure) {
      observe_rate_limit(request.resource, response, sent_after);
      if (response.status < 500) {
        return response;
      }
      failure = GithubError(GithubError::Kind::transport,
                            fmt::format("{}: server error {}", request.what, response.status));
    }

    if (attempt >= budget_.max_retries) {
      throw GithubError(failure->kind(), redact(failure->what()));
    }
    auto delay = options_.backoff_initial * (std::int64_t{1} << std::min(attempt, 20));
    if (const auto reset = known_reset(request.resource)) {
      const auto until_reset = std::chrono::duration_cast<std::chrono::milliseconds>(
          *reset - std::chrono::system_clock::now());
      if (until_reset.count() > 0) {
        delay = std::min(delay, until_reset);
      }
    }
    logger()->warn("{} (attempt {}/{}), retrying in {} ms", redact(failure->what()), attempt + 1,
                   budget_.max_retries + 1, delay.count());
    std::this_thread::sleep_for(delay);
  }
}

namespace {

void check_status(const GithubClient::Response &r, const std::string &what) {
  if (r.status >= 200 && r.status < 300) {
    return;
  }
  using Kind = GithubError::Kind;
  if (r.status == 401) {
    throw GithubError(Kind::unauthorized, fmt::format("{}: token rejected (401)", what));
  }
  if (r.status == 404) {
    throw GithubError(Kind::not_found,
                      fmt::format("{}: not found (404; misspelled or private?)", what));
  }
  if (r.status == 403 || r.status == 429) {
    const auto remaining = header_int(r, "x-ratelimit-remaining");
    const auto retry_after = header_int(r, "retry-after");
    if (r.status == 429 || retry_after || (remaining && *remaining == 0)) {
      std::optional<Timestamp> reset;
      if (retry_after) {
        reset = now_utc() + std::chrono::seconds{*retry_after};
      } else if (const auto epoch = header_int(r, "x-ratelimit-reset")) {
        reset = Timestamp{std::chrono::seconds{*epoch}};
      }
      throw GithubError(Kind::rate_limited,
                        fmt::format("{}: rate limited ({})", what, r.status), reset);
    }
    throw GithubError(Kind::forbidden, fmt::format("{}: forbidden (403)", what));
  }
  throw GithubError(Kind::protocol, fmt::format("{}: unexpected status {}", what, r.status));
}

json parse_body(const GithubClient::Response &r, const std::string &what) {
  try {
    return json::parse(r.body);
  } catch (const json::parse_error &) {
    throw GithubError(GithubError::Kind::protocol, fmt::format("{}: malformed JSON body", what));
  }
}

void validate_repo(const RepoId &repo) {
  if (!RepoId::valid_component(repo.owner) || !RepoId::valid_component(repo.name)) {
    throw GithubError(GithubError::Kind::invalid_argument,
                      fmt::format("'{}' is not a valid repository name", repo.full_name()));
  }
}

/// Unwraps a GraphQL envelope, mapping typed errors onto GithubError.
json graphql_repository(const json &body, const std::string &what) {
  const auto errors = body.find("errors");
  const json *repo = nullptr;
  if (const auto data = body.find("data"); data != body.end() && data->is_object()) {
    if (const auto r = data->find("repository"); r != data->end() && r->is_object()) {
      repo = &*r;
    }
  }
  if (repo != nullptr) {
    return *repo;
  }
  if (errors != body.end() && errors->is_array() && !errors->empty()) {
    const auto type = get_or<std::string>(errors->front(), "type", "");
    if (type == "NOT_FOUND") {
      throw GithubError(GithubError::Kind::not_found, fmt::format("{}: not found", what));
    }
    if (type == "RATE_LIMITED") {
      throw GithubError(GithubError::Kind::rate_limited, fmt::format("{}: rate limited", what));
    }
    throw GithubError(GithubError::Kind::protocol,
                      fmt::format("{}: GraphQL error {}", what, type.empty() ? "(untyped)" : type));
  }
  throw GithubError(GithubError::Kind::protocol, fmt::format("{}: repository missing", what));
}

} // namespace

template <typename Fn> void GithubClient::for_each_rest_page(const std::string &first_path, Fn &&fn) {
  std::optional<std::string> path = first_path;
  while (path) {
    const Request request{"GET", *path, {}, resource_for_path(*path), "GET " + *path};
    const auto response = send(request);
    check_status(response, request.what);
    if (response.status == 204 || response.body.empty()) {
      return;
    }
    fn(parse_body(response, request.what));
    path.reset();
    if (const auto link = response.header("link")) {
      if (const auto next = next_link(*link)) {
        path = path_of(*next);
      }
    }
  }
}

RepoSummary GithubClient::fetch_repo_summary(const RepoId &repo) {
  validate_repo(repo);
  const auto path = fmt::format("{}/repos/{}/{}", path_prefix_, repo.owner, repo.name);
  const Request request{"GET", path, {}, "core", repo.full_name()};
  const auto response = send(request);
  check_status(response, request.what);
  const auto body = parse_body(response, request.what);
  try {
    RepoSummary summary;
    summary.repo = repo;
    summary.created_at = parse_timestamp(body.at("created_at").get<std::string>());
    summary.stargazer_count = get_or<std::int64_t>(body, "stargazers_count", 0);
    summary.subscriber_count = get_or<std::int64_t>(body, "subscribers_count", 0);
    summary.open_issue_count = get_or<std::int64_t>(body, "open_issues_count", 0);
    summary.default_branch = get_or<std::string>(body, "default_branch", "");
    summary.archived = get_or<bool>(body, "archived", false);
    summary.fetched_at = now_utc();
    return summary;
  } catch (const std::exception &e) {
    throw GithubError(GithubError::Kind::protocol,
                      fmt::format("{}: unexpected summary payload ({})", request.what, e.what()));
  }
}

Page<IssueRecord> GithubClient::fetch_issue_page(const RepoId &repo,
                                                 const std::optional<std::string> &cursor,
                                                 std::optional<int> first) {
  validate_repo(repo);
  const int page = std::clamp(first.value_or(options_.page_size), 1, 100);
  json payload{{"query", kIssuePageQuery},
               {"variables",
                {{"owner", repo.owner},
                 {"name", repo.name},
                 {"first", page},
                 {"after", cursor ? json(*cursor) : json(nullptr)}}}};
  const Request request{"POST", path_prefix_ + "/graphql", payload.dump(), "graphql",
                        repo.full_name() + " issues"};
  const auto response = send(request);
  check_status(response, request.what);
  const auto repository = graphql_repository(parse_body(response, request.what), request.what);

  Page<IssueRecord> out;
  try {
    const auto &issues = repository.at("issues");
    for (const auto &node : issues.at("nodes")) {
      IssueRecord issue;
      const auto author = node.find("author");
      if (author == node.end() || author->is_null()) {
        issue.author_login = kGhostLogin;
      } else {
        issue.author_login = get_or<std::string>(*author, "login", std::string(kGhostLogin));
        issue.author_type = author_type_from(get_or<std::string>(*author, "__typename", ""));
        if (const auto company = author->find("company");
            company != author->end() && company->is_string()) {
          issue.author_company = company->get<std::string>();
        }
      }
      issue.author_association = get_or<std::string>(node, "authorAssociation", "");
      issue.created_at = parse_timestamp(node.at("createdAt").get<std::string>());
      if (const auto closed = node.find("closedAt"); closed != node.end() && closed->is_string()) {
        issue.closed_at = parse_timestamp(closed->get<std::string>());
      }
      issue.open = get_or<std::string>(node, "state", "OPEN") == "OPEN";
      if (const auto comments = node.find("comments"); comments != node.end()) {
        issue.comment_count = get_or<std::int64_t>(*comments, "totalCount", 0);
      }
      out.items.push_back(std::move(issue));
    }
    const auto &info = issues.at("pageInfo");
    if (get_or<bool>(info, "hasNextPage", false)) {
      if (const auto end = info.find("endCursor"); end != info.end() && end->is_string()) {
        out.next_cursor = end->get<std::string>();
      }
    }
  } catch (const GithubError &) {
    throw;
  } catch (const std::exception &e) {
    throw GithubError(GithubError::Kind::protocol,
                      fmt::format("{}: unexpected issue payload ({})", request.what, e.what()));
  }
  return out;
}

std::vector<IssueRecord> GithubClient::fetch_issue_sample(const RepoId &repo) {
  std::vector<IssueRecord> sample;
  const auto cap = budget_.max_issue_sample;
  std::optional<std::string> cursor;
  do {
    const auto want = std::min<std::int64_t>(options_.page_size,
                                             cap - static_cast<std::int64_t>(sample.size()));
    auto page = fetch_issue_page(repo, cursor, static_cast<int>(want));
    for (auto &issue : page.items) {
      if (static_cast<std::int64_t>(sample.size()) >= cap) {
        break;
      }
      sample.push_back(std::move(issue));
    }
    cursor = std::move(page.next_cursor);
  } while (cursor && static_cast<std::int64_t>(sample.size()) < cap);
  return sample;
}

PullRequestCounts GithubClient::fetch_pull_request_counts(const RepoId &repo) {
  validate_repo(repo);
  json payload{{"query", kPullRequestCountQuery},
               {"variables", {{"owner", repo.owner}, {"name", repo.name}}}};
  const Request request{"POST", path_prefix_ + "/graphql", payload.dump(), "graphql",
                        repo.full_name() + " pull requests"};
  const auto response = send(request);
  check_status(response, request.what);
  const auto repository = graphql_repository(parse_body(response, request.what), request.what);
  try {
    return {repository.at("total").at("totalCount").get<std::int64_t>(),
            repository.at("open").at("totalCount").get<std::int64_t>()};
  } catch (const std::exception &e) {
    throw GithubError(GithubError::Kind::protocol,
                      fmt::format("{}: unexpected payload ({})", request.what, e.what()));
  }
}

std::int64_t GithubClient::fetch_contributor_count(const RepoId &repo) {
  validate_repo(repo);
  std::set<std::string> logins;
  for_each_rest_page(fmt::format("{}/repos/{}/{}/contributors?per_page={}", path_prefix_,
                                 repo.owner, repo.name, options_.page_size),
                     [&](const json &page) {
                       for (const auto &c : page) {
                         if (get_or<std::string>(c, "type", "User") == "Anonymous") {
                           continue;
                         }
                         if (const auto login = c.find("login");
                             login != c.end() && login->is_string()) {
                           logins.insert(login->get<std::string>());
                         }
                       }
                     });
  return static_cast<std::int64_t>(logins.size());
}

std::optional<std::int64_t> GithubClient::fetch_dependency_count(const RepoId &repo) {
  validate_repo(repo);
  const auto path =
      fmt::format("{}/repos/{}/{}/dependency-graph/sbom", path_prefix_, repo.owner, repo.name);
  const Request request{"GET", path, {}, "core", repo.full_name() + " sbom"};
  const auto response = send(request);
  if (response.status == 404) {
    return std::nullopt;
  }
  check_status(response, request.what);
  const auto body = parse_body(response, request.what);
  const auto sbom = body.find("sbom");
  if (sbom == body.end() || !sbom->is_object()) {
    return std::nullopt;
  }
  const auto packages = sbom->find("packages");
  if (packages == sbom->end() || !packages->is_array() || packages->empty()) {
    return std::nullopt;
  }
  std::set<std::string> roots;
  if (const auto described = sbom->find("documentDescribes");
      described != sbom->end() && described->is_array()) {
    for (const auto &id : *described) {
      if (id.is_string()) {
        roots.insert(id.get<std::string>());
      }
    }
  }
  if (const auto rels = sbom->find("relationships"); rels != sbom->end() && rels->is_array()) {
    for (const auto &rel : *rels) {
      if (get_or<std::string>(rel, "relationshipType", "") == "DESCRIBES") {
        roots.insert(get_or<std::string>(rel, "relatedSpdxElement", ""));
      }
    }
  }
  std::int64_t count = 0;
  for (const auto &pkg : *packages) {
    if (roots.count(get_or<std::string>(pkg, "SPDXID", "")) == 0) {
      ++count;
    }
  }
  return count;
}

std::int64_t GithubClient::fetch_release_download_total(const RepoId &repo) {
  validate_repo(repo);
  std::int64_t total = 0;
  for_each_rest_page(fmt::format("{}/repos/{}/{}/releases?per_page={}", path_prefix_, repo.owner,
                                 repo.name, options_.page_size),
                     [&](const json &page) {
                       for (const auto &release : page) {
                         const auto assets = release.find("assets");
                         if (assets == release.end() || !assets->is_array()) {
                           continue;
                         }
                         for (const auto &asset : *assets) {
                           total += get_or<std::int64_t>(asset, "download_count", 0);
                         }
                       }
                     });
  return total;
}

std::vector<RepoId> GithubClient::search_repos_by_stars(std::int64_t min_stars,
                                                        std::optional<std::int64_t> max_stars,
                                                        std::int64_t limit) {
  using Kind = GithubError::Kind;
  if (limit < 1 || limit > kSearchResultCeiling) {
    throw GithubError(Kind::invalid_range,
                      fmt::format("limit must be between 1 and {}", kSearchResultCeiling));
  }
  if (min_stars < 0) {
    throw GithubError(Kind::invalid_range, "minimum star count must be non-negative");
  }
  if (max_stars && *max_stars < min_stars) {
    throw GithubError(Kind::invalid_range,
                      fmt::format("star range {}..{} is inverted", min_stars, *max_stars));
  }
  const auto qualifier = max_stars ? fmt::format("stars:{}..{}", min_stars, *max_stars)
                                   : fmt::format("stars:>={}", min_stars);
  const auto per_page = std::min<std::int64_t>({options_.page_size, limit, 100});

  struct Hit {
    std::string full_name;
    std::int64_t stars;
  };
  std::vector<Hit> hits;
  std::optional<std::string> path = fmt::format(
      "{}/search/repositories?q={}&sort=stars&order=desc&per_page={}", path_prefix_,
      url_encode(qualifier), per_page);
  while (path && static_cast<std::int64_t>(hits.size()) < limit) {
    const Request request{"GET", *path, {}, "search", "search " + qualifier};
    const auto response = send(request);
    check_status(response, request.what);
    const auto body = parse_body(response, request.what);
    const auto items = body.find("items");
    if (items == body.end() || !items->is_array()) {
      break;
    }
    for (const auto &item : *items) {
      const auto stars = get_or<std::int64_t>(item, "stargazers_count", -1);
      if (stars < min_stars || (max_stars && stars > *max_stars)) {
        continue;
      }
      hits.push_back({get_or<std::string>(item, "full_name", ""), stars});
    }
    path.reset();
    if (const auto link = response.header("link")) {
      if (const auto next = next_link(*link)) {
        path = path_of(*next);
      }
    }
  }

  std::sort(hits.begin(), hits.end(), [](const Hit &a, const Hit &b) {
    return a.stars != b.stars ? a.stars > b.stars : a.full_name < b.full_name;
  });
  std::vector<RepoId> out;
  for (const auto &hit : hits) {
    if (static_cast<std::int64_t>(out.size()) >= limit) {
      break;
    }
    try {
      out.push_back(RepoId::parse(hit.full_name));
    } catch (const std::invalid_argument &) {
      logger()->warn("search returned malformed name '{}'", hit.full_name);
    }
  }
  return out;
}

} // namespace pesto

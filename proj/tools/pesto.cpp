// pesto: crawl GitHub candidates, score them under an evaluation model and
// serve the comparison.

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pesto/crawler.hpp"
#include "pesto/datastore.hpp"
#include "pesto/evaluation.hpp"
#include "pesto/log.hpp"
#include "pesto/report.hpp"
#include "pesto/server.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CrawlFlags {
  std::optional<std::string> token;
  std::int64_t max_issues = 500;
  std::int64_t max_requests = 5000;
  int max_retries = 3;
  std::string report_format = "text";
};

void add_crawl_flags(CLI::App *cmd, CrawlFlags &flags) {
  cmd->add_option("--token", flags.token, "GitHub token (default: $GITHUB_TOKEN)");
  cmd->add_option("--max-issues", flags.max_issues, "Issue sample cap per repository")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-requests", flags.max_requests, "Request budget for the session")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-retries", flags.max_retries, "Retries for transport errors and 5xx")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--report", flags.report_format, "Crawl report format")
      ->check(CLI::IsMember({"text", "json"}));
}

pesto::GithubClient make_client(const CrawlFlags &flags) {
  auto creds = pesto::ApiCredentials::resolve(flags.token);
  if (!creds) {
    throw std::runtime_error("no GitHub token: pass --token or set GITHUB_TOKEN");
  }
  pesto::CrawlBudget budget;
  budget.max_issue_sample = flags.max_issues;
  budget.max_requests = flags.max_requests;
  budget.max_retries = flags.max_retries;
  return pesto::GithubClient(std::move(*creds), budget);
}

int finish_crawl(const pesto::CrawlReport &report, const CrawlFlags &flags) {
  if (flags.report_format == "json") {
    std::cout << report.to_json().dump(2) << '\n';
  } else {
    std::cout << report.to_text();
  }
  if (report.fatal_error) {
    std::cerr << "pesto: error: " << *report.fatal_error << '\n';
    return kExitFatal;
  }
  return report.all_ok() ? kExitOk : kExitPartial;
}

std::vector<std::string> read_names(std::istream &in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    names.push_back(line.substr(first, line.find_last_not_of(" \t\r") - first + 1));
  }
  return names;
}

/// "MIN..MAX", "MIN.." or "MIN..*".
std::pair<std::int64_t, std::optional<std::int64_t>> parse_star_range(const std::string &text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    throw UsageError(fmt::format("--stars expects MIN..MAX, got '{}'", text));
  }
  try {
    std::size_t used = 0;
    const auto lo_text = text.substr(0, dots);
    const std::int64_t lo = std::stoll(lo_text, &used);
    if (used != lo_text.size()) {
      throw std::invalid_argument(lo_text);
    }
    const auto hi_text = text.substr(dots + 2);
    if (hi_text.empty() || hi_text == "*") {
      return {lo, std::nullopt};
    }
    const std::int64_t hi = std::stoll(hi_text, &used);
    if (used != hi_text.size()) {
      throw std::invalid_argument(hi_text);
    }
    return {lo, hi};
  } catch (const std::logic_error &) {
    throw UsageError(fmt::format("--stars expects MIN..MAX, got '{}'", text));
  }
}

std::vector<std::string> split_commas(const std::string &text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      out.push_back(item);
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

int run_serve(pesto::ServerOptions options) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  pesto::Server server(options);
  if (!server.bind()) {
    throw std::runtime_error(
        fmt::format("cannot listen on {}:{} (port in use?)", options.host, options.port));
  }
  std::thread([&server, signals] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  }).detach();

  std::cerr << fmt::format("serving {} rows on http://{}:{}\n",
                           server.snapshot()->dataset.records.size(), options.host, server.port());
  server.listen();
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"OSS PESTO: crawl GitHub candidates, score them under an evaluation model, "
               "and compare them"};
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log requests and show error details");

  // crawl
  CrawlFlags crawl_flags;
  std::vector<std::string> repos;
  std::string repos_file;
  std::string out_path = "data.csv";
  auto *crawl = app.add_subcommand("crawl", "Crawl repositories into the candidate CSV");
  crawl->add_option("--repo", repos, "Repository as owner/name (repeatable)");
  crawl->add_option("--from", repos_file, "File with one owner/name per line ('-' for stdin)");
  crawl->add_option("--out", out_path, "Candidate CSV to create or update");
  add_crawl_flags(crawl, crawl_flags);

  // discover
  CrawlFlags discover_flags;
  std::string stars;
  std::int64_t limit = 100;
  auto *discover = app.add_subcommand("discover", "List repositories within a star range");
  discover->add_option("--stars", stars, "Star range MIN..MAX (MAX may be empty or *)")->required();
  discover->add_option("--limit", limit, "Maximum number of repositories (1-1000)");
  add_crawl_flags(discover, discover_flags);

  // recrawl
  CrawlFlags recrawl_flags;
  std::string recrawl_data;
  auto *recrawl = app.add_subcommand("recrawl", "Refresh every candidate already in a CSV");
  recrawl->add_option("--data", recrawl_data, "Candidate CSV")->required();
  add_crawl_flags(recrawl, recrawl_flags);

  // compare
  std::string compare_data;
  std::string compare_config;
  std::optional<std::string> compare_category;
  std::string compare_candidates;
  std::string compare_format = "table";
  auto *compare = app.add_subcommand("compare", "Score candidates under an evaluation model");
  compare->add_option("--data", compare_data, "Candidate CSV")->required();
  compare->add_option("--config", compare_config, "Evaluation model (default: bundled OSSPAL)");
  compare->add_option("--category", compare_category, "Only this category");
  compare->add_option("--candidates", compare_candidates, "Comma-separated subset of candidates");
  compare->add_option("--format", compare_format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}));

  // serve
  pesto::ServerOptions serve_options;
  std::string serve_data;
  std::string serve_config;
  std::string serve_static;
  auto *serve = app.add_subcommand("serve", "Serve the comparison API and web UI");
  serve->add_option("--data", serve_data, "Candidate CSV")->required();
  serve->add_option("--config", serve_config, "Evaluation model JSON (edits are saved here)");
  serve->add_option("--port", serve_options.port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_options.host, "Bind address");
  serve->add_option("--static", serve_static, "Directory of web UI assets served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitFatal;
  }

  pesto::logger()->set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (*crawl) {
      if (!repos_file.empty()) {
        std::vector<std::string> more;
        if (repos_file == "-") {
          more = read_names(std::cin);
        } else {
          std::ifstream in(repos_file);
          if (!in) {
            throw UsageError(fmt::format("cannot read '{}'", repos_file));
          }
          more = read_names(in);
        }
        repos.insert(repos.end(), more.begin(), more.end());
      }
      if (repos.empty()) {
        throw UsageError("nothing to crawl: pass --repo owner/name or --from FILE");
      }
      auto client = make_client(crawl_flags);
      pesto::Crawler crawler(client);
      return finish_crawl(crawler.crawl_candidates(repos, out_path), crawl_flags);
    }

    if (*discover) {
      const auto [lo, hi] = parse_star_range(stars);
      if (lo < 0 || (hi && *hi < lo)) {
        throw UsageError(fmt::format("invalid star range '{}'", stars));
      }
      if (limit < 1 || limit > 1000) {
        throw UsageError("--limit must be between 1 and 1000");
      }
      auto client = make_client(discover_flags);
      pesto::Crawler crawler(client);
      for (const auto &repo : crawler.discover_by_stars(lo, hi, limit)) {
        std::cout << repo.full_name() << '\n';
      }
      return kExitOk;
    }

    if (*recrawl) {
      auto client = make_client(recrawl_flags);
      pesto::Crawler crawler(client);
      return finish_crawl(crawler.recrawl(recrawl_data), recrawl_flags);
    }

    if (*compare) {
      auto dataset = pesto::read_csv(compare_data);
      const auto model =
          compare_config.empty() ? pesto::default_model() : pesto::load_model(compare_config);
      if (compare_category && model.find(*compare_category) == nullptr) {
        throw UsageError(fmt::format("unknown category '{}'; valid categories: {}",
                                     *compare_category,
                                     fmt::join(model.category_names(), ", ")));
      }
      if (!compare_candidates.empty()) {
        dataset = pesto::select_candidates(dataset, split_commas(compare_candidates));
      }
      const auto result = pesto::score_overall(model, dataset);
      if (compare_format == "json") {
        std::cout << pesto::comparison_json_text(result, compare_category);
      } else if (compare_format == "csv") {
        std::cout << pesto::render_comparison_csv(result, compare_category);
      } else {
        std::cout << pesto::render_comparison_table(result, compare_category);
      }
      return kExitOk;
    }

    if (*serve) {
      serve_options.data_path = serve_data;
      if (!serve_config.empty()) {
        serve_options.config_path = serve_config;
      }
      if (!serve_static.empty()) {
        serve_options.static_dir = serve_static;
      }
      return run_serve(serve_options);
    }
  } catch (const pesto::GithubError &e) {
    std::cerr << "pesto: error: " << e.what();
    if (verbose) {
      std::cerr << " [" << pesto::to_string(e.kind()) << "]";
    }
    std::cerr << '\n';
    return kExitFatal;
  } catch (const std::exception &e) {
    std::cerr << "pesto: error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}

// Standalone mock GitHub API for local demos and manual testing:
//   pesto-mock-github --fixture tests/fixtures/three_repos.json --port 8090
//   PESTO_API_BASE=http://127.0.0.1:8090 GITHUB_TOKEN=<fixture token> pesto crawl ...

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mock_github.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Mock GitHub REST/GraphQL server backed by a JSON fixture"};
  std::string fixture;
  std::string host = "127.0.0.1";
  int port = 8090;
  app.add_option("--fixture", fixture, "Fixture JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port");
  CLI11_PARSE(app, argc, argv);

  try {
    pesto::testing::MockGithub mock(pesto::testing::MockGithub::load_fixture(fixture));
    std::cerr << "mock GitHub on http://" << host << ":" << port << "\n";
    if (!mock.listen_blocking(host, port)) {
      std::cerr << "pesto-mock-github: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const std::exception &e) {
    std::cerr << "pesto-mock-github: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

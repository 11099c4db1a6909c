#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <set>
#include <thread>

#include "pesto/server.hpp"
#include "server_harness.hpp"
#include "test_util.hpp"

using namespace pesto;
using nlohmann::json;
namespace pt = pesto::testing;

namespace {

struct Fixture {
  Fixture() {
    std::filesystem::copy_file(pt::fixture_dir() / "golden_dataset.csv", tmp / "data.csv");
    options.data_path = tmp / "data.csv";
  }
  pt::TempDir tmp;
  ServerOptions options;
};

const char *kPopularity = R"({
  model_name: "Popularity demo",
  categories: [
    { name: "Popularity", metrics: [
      { Header: "#Watch", accessor: "watcher_count" }
    ] }
  ]
})";

} // namespace

TEST_CASE("health") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto c = s.client();
  auto res = c.Get("/api/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto body = json::parse(res->body);
  CHECK(body["status"] == "ok");
  CHECK(body["dataset_rows"] == 3);
  CHECK(body["model_name"] == "OSSPAL");
}

TEST_CASE("health of an empty dataset") {
  Fixture f;
  write_csv(Dataset{}, f.options.data_path);
  pt::RunningServer s(f.options);
  auto res = s.client().Get("/api/health");
  REQUIRE(res);
  CHECK(json::parse(res->body)["dataset_rows"] == 0);
  res = s.client().Get("/api/candidates");
  REQUIRE(res);
  CHECK(json::parse(res->body) == json::array());
}

TEST_CASE("candidates mirror the CSV") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto res = s.client().Get("/api/candidates");
  REQUIRE(res);
  CHECK(res->get_header_value("Content-Type") == "application/json");
  const auto body = json::parse(res->body);
  REQUIRE(body.size() == 3);
  std::vector<std::string> keys;
  for (const auto &[k, v] : body[0].items()) {
    keys.push_back(k);
  }
  std::set<std::string> want(kCsvColumns.begin(), kCsvColumns.end());
  CHECK(std::set<std::string>(keys.begin(), keys.end()) == want);
  CHECK(body[0]["full_name"] == "alpha/a");
  CHECK(body[1]["dependency_count"].is_null());
  CHECK(body[2]["avg_issue_comments"].is_null());
  CHECK(body[2]["star_count"] == 5000);
}

TEST_CASE("comparison endpoint") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto c = s.client();
  auto res = c.Get("/api/comparison");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto expected = comparison_json_text(score_overall(default_model(), read_csv(f.options.data_path)));
  CHECK(res->body == expected);

  res = c.Get("/api/comparison?category=Support");
  REQUIRE(res);
  const auto support = json::parse(res->body);
  CHECK(support["categories"].size() == 1);
  CHECK(support["categories"][0]["name"] == "Support");

  res = c.Get("/api/comparison?category=Nope");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(res->body.find("Community") != std::string::npos);

  res = c.Get("/api/comparison?candidates=alpha/a,gamma/c");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto subset = json::parse(res->body);
  CHECK(subset["candidates"] == json::array({"alpha/a", "gamma/c"}));

  res = c.Get("/api/comparison?candidates=beta/b");
  REQUIRE(res);
  CHECK(json::parse(res->body)["overall"]["scores"]["beta/b"] == 0.5);

  res = c.Get("/api/comparison?candidates=nobody/x");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("config edits") {
  Fixture f;
  f.options.config_path = f.tmp / "config.json";
  save_model(default_model(), *f.options.config_path);
  {
    pt::RunningServer s(f.options);
    auto c = s.client();
    auto res = c.Put("/api/config", kPopularity, "application/javascript");
    REQUIRE(res);
    CHECK(res->status == 204);
    res = c.Get("/api/config");
    REQUIRE(res);
    const auto config = json::parse(res->body);
    CHECK(config["model_name"] == "Popularity demo");
    CHECK(config["categories"][0]["metrics"][0]["Header"] == "#Watch");
    CHECK(config["categories"][0]["metrics"][0]["accessor"] == "watcher_count");
    CHECK(json::parse(c.Get("/api/health")->body)["model_name"] == "Popularity demo");

    res = c.Put("/api/config",
                R"({"categories":[{"name":"P","metrics":[{"accessor":"stra_count"}]}]})",
                "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(res->body.find("stra_count") != std::string::npos);
    CHECK(json::parse(c.Get("/api/config")->body)["model_name"] == "Popularity demo");
  }
  // Persisted across a restart.
  pt::RunningServer again(f.options);
  auto res = again.client().Get("/api/config");
  REQUIRE(res);
  CHECK(json::parse(res->body)["model_name"] == "Popularity demo");
}

TEST_CASE("reload") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto c = s.client();
  const auto before = c.Get("/api/candidates")->body;

  auto res = c.Post("/api/reload");
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(c.Get("/api/candidates")->body == before);

  auto data = read_csv(f.options.data_path);
  data.records[0].star_count = 777;
  write_csv(data, f.options.data_path);
  CHECK(c.Post("/api/reload")->status == 204);
  const auto after = json::parse(c.Get("/api/candidates")->body);
  CHECK(after[0]["star_count"] == 777);

  pt::write_file(f.options.data_path, "this,is\nnot,the schema\n");
  res = c.Post("/api/reload");
  REQUIRE(res);
  CHECK(res->status == 500);
  CHECK(json::parse(c.Get("/api/candidates")->body) == after);
}

TEST_CASE("CORS for local origins only") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto c = s.client();
  auto res = c.Get("/api/health", {{"Origin", "http://localhost:5173"}});
  REQUIRE(res);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  res = c.Get("/api/health", {{"Origin", "https://evil.example"}});
  REQUIRE(res);
  CHECK_FALSE(res->has_header("Access-Control-Allow-Origin"));
  res = c.Options("/api/config", {{"Origin", "http://127.0.0.1:3000"}});
  REQUIRE(res);
  CHECK(res->status == 204);
}

TEST_CASE("static assets") {
  Fixture f;
  std::filesystem::create_directories(f.tmp / "www");
  pt::write_file(f.tmp / "www" / "index.html", "<h1>pesto</h1>");
  f.options.static_dir = f.tmp / "www";
  pt::RunningServer s(f.options);
  auto res = s.client().Get("/index.html");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == "<h1>pesto</h1>");

  f.options.static_dir = f.tmp / "missing";
  CHECK_THROWS(Server(f.options));
}

TEST_CASE("startup failures") {
  Fixture f;
  f.options.data_path = f.tmp / "nope.csv";
  CHECK_THROWS_AS(Server(f.options), DatastoreError);
  Fixture g;
  g.options.config_path = g.tmp / "bad.json";
  pt::write_file(*g.options.config_path, "{\"categories\": []}");
  CHECK_THROWS_AS(Server(g.options), InvalidConfig);
}

TEST_CASE("port already in use") {
  Fixture f;
  pt::RunningServer s(f.options);
  auto options = f.options;
  options.port = s.port();
  Server second(options);
  CHECK_FALSE(second.bind());
}

TEST_CASE("concurrent reloads and reads see whole snapshots") {
  Fixture f;
  auto a = read_csv(f.options.data_path);
  auto b = a;
  b.records[0].star_count = 100000;
  b.records.pop_back();
  const auto text_a = comparison_json_text(score_overall(default_model(), a));
  const auto text_b = comparison_json_text(score_overall(default_model(), b));

  pt::RunningServer s(f.options);
  std::atomic<bool> done{false};
  std::thread writer([&] {
    auto c = s.client();
    for (int i = 0; i < 20; ++i) {
      write_csv(i % 2 ? a : b, f.options.data_path);
      c.Post("/api/reload");
    }
    done = true;
  });
  std::atomic<int> bad{0}, seen{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      auto c = s.client();
      for (int i = 0; i < 10; ++i) {
        auto res = c.Get("/api/comparison");
        ++seen;
        if (!res || res->status != 200 || (res->body != text_a && res->body != text_b)) {
          ++bad;
        }
      }
    });
  }
  writer.join();
  for (auto &r : readers) {
    r.join();
  }
  CHECK(done);
  CHECK(seen == 40);
  CHECK(bad == 0);
}

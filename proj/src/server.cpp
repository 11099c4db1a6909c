#include "pesto/server.hpp"

#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

#include "pesto/log.hpp"

namespace pesto {

using nlohmann::ordered_json;

struct Server::Http {
  httplib::Server server;
};

namespace {

constexpr const char *kJson = "application/json";

ordered_json optional_json(const std::optional<double> &v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void send_error(httplib::Response &res, int status, const std::string &message) {
  res.status = status;
  res.set_content(ordered_json{{"error", message}}.dump() + "\n", kJson);
}

bool local_origin(const std::string &origin) {
  for (const std::string_view prefix :
       {"http://localhost", "http://127.0.0.1", "http://[::1]", "https://localhost"}) {
    if (origin.rfind(prefix, 0) == 0) {
      const auto rest = std::string_view(origin).substr(prefix.size());
      if (rest.empty() || rest.front() == ':') {
        return true;
      }
    }
  }
  return false;
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

} // namespace

ordered_json candidate_to_json(const CandidateRecord &r) {
  const auto count = [](const std::optional<std::int64_t> &v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  return {{"full_name", r.full_name},
          {"crawled_at", format_timestamp(r.crawled_at)},
          {"star_count", r.star_count},
          {"watcher_count", r.watcher_count},
          {"age_days", r.age_days},
          {"avg_issue_active_time_days", optional_json(r.avg_issue_active_time_days)},
          {"avg_issue_close_time_days", optional_json(r.avg_issue_close_time_days)},
          {"avg_issue_comments", optional_json(r.avg_issue_comments)},
          {"issue_raiser_count", r.issue_raiser_count},
          {"org_issue_raiser_count", r.org_issue_raiser_count},
          {"pull_request_count", r.pull_request_count},
          {"contributor_count", r.contributor_count},
          {"open_issue_count", r.open_issue_count},
          {"dependency_count", count(r.dependency_count)},
          {"download_total", r.download_total},
          {"issue_sample_size", r.issue_sample_size}};
}

Server::Server(ServerOptions options) : options_(std::move(options)), http_(std::make_unique<Http>()) {
  auto state = std::make_shared<ServerState>();
  state->dataset = read_csv(options_.data_path);
  state->model = options_.config_path ? load_model(*options_.config_path) : default_model();
  state_ = std::move(state);
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share an occupied port instead of failing to bind.
  http_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
  });
  install_routes();
}

Server::~Server() { stop(); }

std::shared_ptr<const ServerState> Server::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void Server::publish(std::shared_ptr<const ServerState> next) {
  std::lock_guard lock(state_mutex_);
  state_ = std::move(next);
}

void Server::reload() {
  std::lock_guard writer(writer_mutex_);
  auto dataset = read_csv(options_.data_path);
  const auto current = snapshot();
  auto next = std::make_shared<ServerState>();
  next->dataset = std::move(dataset);
  next->model = current->model;
  next->generation = current->generation + 1;
  publish(std::move(next));
}

void Server::replace_model(const EvaluationModel &model) {
  std::lock_guard writer(writer_mutex_);
  if (options_.config_path) {
    save_model(model, *options_.config_path);
  }
  const auto current = snapshot();
  auto next = std::make_shared<ServerState>();
  next->dataset = current->dataset;
  next->model = model;
  next->generation = current->generation + 1;
  publish(std::move(next));
}

bool Server::bind() {
  if (options_.port == 0) {
    bound_port_ = http_->server.bind_to_any_port(options_.host);
    return bound_port_ > 0;
  }
  if (!http_->server.bind_to_port(options_.host, options_.port)) {
    return false;
  }
  bound_port_ = options_.port;
  return true;
}

void Server::listen() { http_->server.listen_after_bind(); }

void Server::wait_until_ready() { http_->server.wait_until_ready(); }

void Server::stop() {
  if (http_ && http_->server.is_running()) {
    http_->server.stop();
  }
}

void Server::install_routes() {
  auto &srv = http_->server;

  srv.set_exception_handler([](const httplib::Request &, httplib::Response &res,
                               std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception &e) {
      message = e.what();
    } catch (...) {
    }
    send_error(res, 500, message);
  });

  srv.set_post_routing_handler([](const httplib::Request &req, httplib::Response &res) {
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && local_origin(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  });

  srv.Options(R"(/api/.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });

  srv.Get("/api/health", [this](const httplib::Request &, httplib::Response &res) {
    const auto state = snapshot();
    ordered_json body{{"status", "ok"},
                      {"dataset_rows", state->dataset.records.size()},
                      {"model_name", state->model.model_name}};
    res.set_content(body.dump() + "\n", kJson);
  });

  srv.Get("/api/candidates", [this](const httplib::Request &, httplib::Response &res) {
    const auto state = snapshot();
    ordered_json body = ordered_json::array();
    for (const auto &record : state->dataset.records) {
      body.push_back(candidate_to_json(record));
    }
    res.set_content(body.dump(2) + "\n", kJson);
  });

  srv.Get("/api/config", [this](const httplib::Request &, httplib::Response &res) {
    res.set_content(model_to_json(snapshot()->model).dump(2) + "\n", kJson);
  });

  srv.Put("/api/config", [this](const httplib::Request &req, httplib::Response &res) {
    EvaluationModel model;
    try {
      model = parse_model_text(req.body);
    } catch (const InvalidConfig &e) {
      send_error(res, 422, e.what());
      return;
    }
    try {
      replace_model(model);
    } catch (const std::exception &e) {
      send_error(res, 500, e.what());
      return;
    }
    res.status = 204;
  });

  srv.Get("/api/comparison", [this](const httplib::Request &req, httplib::Response &res) {
    const auto state = snapshot();
    std::optional<std::string> category;
    if (req.has_param("category")) {
      category = req.get_param_value("category");
      if (state->model.find(*category) == nullptr) {
        send_error(res, 404,
                   fmt::format("unknown category '{}'; valid categories: {}", *category,
                               fmt::join(state->model.category_names(), ", ")));
        return;
      }
    }
    const Dataset *dataset = &state->dataset;
    Dataset subset;
    if (req.has_param("candidates")) {
      try {
        subset = select_candidates(state->dataset, split_list(req.get_param_value("candidates")));
      } catch (const std::out_of_range &e) {
        send_error(res, 404, e.what());
        return;
      }
      dataset = &subset;
    }
    res.set_content(comparison_json_text(score_overall(state->model, *dataset), category), kJson);
  });

  srv.Post("/api/reload", [this](const httplib::Request &, httplib::Response &res) {
    try {
      reload();
    } catch (const std::exception &e) {
      logger()->warn("reload failed, keeping previous snapshot: {}", e.what());
      send_error(res, 500, fmt::format("reload failed, previous data kept: {}", e.what()));
      return;
    }
    res.status = 204;
  });

  if (options_.static_dir) {
    if (!srv.set_mount_point("/", options_.static_dir->string())) {
      throw std::runtime_error(
          fmt::format("static directory '{}' does not exist", options_.static_dir->string()));
    }
  }
}

} // namespace pesto

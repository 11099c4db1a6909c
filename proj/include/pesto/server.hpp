#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pesto/datastore.hpp"
#include "pesto/evaluation.hpp"

namespace pesto {

struct ServerOptions {
  std::filesystem::path data_path;
  /// Without a config file the bundled OSSPAL model is served and PUT
  /// edits live in memory only.
  std::optional<std::filesystem::path> config_path;
  std::optional<std::filesystem::path> static_dir;
  std::string host = "127.0.0.1";
  /// 0 picks an ephemeral port.
  int port = 8030;
};

/// One immutable (dataset, model) pair. Handlers grab a snapshot once and
/// compute the whole response from it.
struct ServerState {
  Dataset dataset;
  EvaluationModel model;
  std::uint64_t generation = 0;
};

nlohmann::ordered_json candidate_to_json(const CandidateRecord &record);

/// HTTP JSON API over a CSV dataset and an evaluation model. Never talks
/// to GitHub.
class Server {
public:
  /// Loads the dataset and model; throws DatastoreError / InvalidConfig.
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  /// False when the address is unavailable (port in use).
  bool bind();
  int port() const { return bound_port_; }
  /// Serves until stop(); call bind() first.
  void listen();
  /// Blocks until a concurrent listen() is accepting connections.
  void wait_until_ready();
  void stop();

  std::shared_ptr<const ServerState> snapshot() const;

  /// Re-reads the CSV; on failure the current snapshot is kept and the
  /// error is rethrown.
  void reload();
  /// Validates, persists (when a config path is set) and swaps the model.
  void replace_model(const EvaluationModel &model);

private:
  void install_routes();
  void publish(std::shared_ptr<const ServerState> next);

  struct Http;
  ServerOptions options_;
  std::unique_ptr<Http> http_;
  int bound_port_ = 0;

  mutable std::mutex state_mutex_;
  std::shared_ptr<const ServerState> state_;
  std::mutex writer_mutex_;
};

} // namespace pesto

#pragma once

#include <memory>
#include <shared_mutex>
#include <string>

#include "synsearch/project.hpp"

namespace httplib {
class Server;
}

namespace synsearch {

/// HTTP/JSON front end over a Project. Reads run concurrently; mutations
/// (registration, sampling, labeling, dataset builds) take the writer lock.
///
///   POST /queries                       register + compile ({"dry_run": true} parses only)
///   GET  /queries, /queries/{id}
///   POST /queries/{id}/search?limit&offset
///   POST /queries/{id}/sample?n=5&seed=S
///   POST /queries/{id}/labels           {"labels": ["yes", "no", ...]}
///   POST /datasets[?include_pending=true]
///   GET  /datasets/{id}, /datasets/{id}/status, /datasets/{id}/files/{name}
///   GET  /corpus/stats
class Service {
 public:
  explicit Service(Project project);
  ~Service();

  void register_routes(httplib::Server& server);

  /// Binds and serves until stop(); returns false if the port is unavailable.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it (0 on failure); call
  /// listen_after_bind() to serve.
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  Project project_;
  std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
};

/// Port from the explicit flag, else $SYNSEARCH_PORT, else 8080.
int resolve_port(int flag_port);

}  // namespace synsearch

#include "synsearch/service.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "synsearch/error.hpp"

namespace synsearch {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIo: return 500;
    default: return 400;
  }
}

ordered_json error_body(const Error& e) {
  ordered_json j;
  j["error"] = error_code_name(e.code());
  j["message"] = e.what();
  if (e.position() >= 0) j["position"] = e.position();
  return j;
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("parameter ") + name + " must be a non-negative integer");
  }
}

ordered_json match_json(const Match& m, const CorpusIndex& index) {
  ordered_json j = match_to_json(m);
  ordered_json tokens = ordered_json::array();
  for (const auto& t : index.sentence(m.sentence).tokens) tokens.push_back(t.word);
  j["tokens"] = std::move(tokens);
  return j;
}

ordered_json dataset_json(const DatasetRecord& rec) {
  ordered_json files;
  for (auto name : {kDatasetFile, kStatsFile, kMarkersFile})
    files[std::string(name)] = "/datasets/" + rec.id + "/files/" + std::string(name);
  ordered_json j;
  j["id"] = rec.id;
  j["status"] = "done";
  j["stats"] = rec.stats;
  j["files"] = std::move(files);
  return j;
}

// Runs `fn`, translating library errors into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    reply(res, http_status(e.code()), error_body(e));
  } catch (const json::exception& e) {
    reply(res, 400, ordered_json{{"error", "invalid_argument"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, ordered_json{{"error", "internal"}, {"message", e.what()}});
  }
}

}  // namespace

Service::Service(Project project)
    : project_(std::move(project)), server_(std::make_unique<httplib::Server>()) {
  register_routes(*server_);
}

Service::~Service() = default;

void Service::register_routes(httplib::Server& server) {
  server.Post("/queries", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = body_json(req);
      const std::string id = body.value("id", "");
      const std::string text = body.at("query").get<std::string>();
      if (body.value("dry_run", false)) {
        reply(res, 200, elements_to_json(parse_query(text, id)));
        return;
      }
      std::unique_lock lock(mutex_);
      const auto& q = project_.register_query(id, text, body.value("parse", ""));
      if (!q.ok()) {
        ordered_json err;
        err["error"] = "compile_error";
        err["message"] = q.compile_error;
        err["query"] = query_to_json(q);
        reply(res, 400, err);
        return;
      }
      reply(res, 200, query_to_json(q));
    });
  });

  server.Get("/queries", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::shared_lock lock(mutex_);
      ordered_json arr = ordered_json::array();
      for (const auto& [_, q] : project_.queries()) arr.push_back(query_to_json(q));
      reply(res, 200, ordered_json{{"queries", std::move(arr)}});
    });
  });

  server.Get(R"(/queries/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::shared_lock lock(mutex_);
      reply(res, 200, query_to_json(project_.query(req.matches[1])));
    });
  });

  server.Post(R"(/queries/([A-Za-z0-9_.\-]+)/search)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const std::size_t limit = size_param(req, "limit", 20);
                  const std::size_t offset = size_param(req, "offset", 0);
                  std::shared_lock lock(mutex_);
                  SearchPage page = project_.search(req.matches[1], limit, offset);
                  ordered_json matches = ordered_json::array();
                  for (const auto& m : page.matches) matches.push_back(match_json(m, project_.index()));
                  ordered_json j;
                  j["total"] = page.total;
                  j["limit"] = limit;
                  j["offset"] = offset;
                  j["matches"] = std::move(matches);
                  reply(res, 200, j);
                });
              });

  server.Post(R"(/queries/([A-Za-z0-9_.\-]+)/sample)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const std::size_t n = size_param(req, "n", kQualitySampleSize);
                  const std::uint64_t seed = size_param(req, "seed", 0);
                  std::unique_lock lock(mutex_);
                  auto matches = project_.sample(req.matches[1], n, seed);
                  ordered_json arr = ordered_json::array();
                  for (const auto& m : matches) arr.push_back(match_json(m, project_.index()));
                  ordered_json j;
                  j["pattern_id"] = std::string(req.matches[1]);
                  j["seed"] = seed;
                  j["matches"] = std::move(arr);
                  reply(res, 200, j);
                });
              });

  server.Post(R"(/queries/([A-Za-z0-9_.\-]+)/labels)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  json body = body_json(req);
                  std::vector<Answer> answers;
                  for (const auto& a : body.at("labels")) answers.push_back(parse_answer(a.get<std::string>()));
                  std::unique_lock lock(mutex_);
                  Verdict v = project_.label(req.matches[1], answers);
                  ordered_json j;
                  j["pattern_id"] = std::string(req.matches[1]);
                  j["labels"] = body.at("labels");
                  j["verdict"] = verdict_name(v);
                  reply(res, 200, j);
                });
              });

  server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = body_json(req);
      const std::string id = body.at("id").get<std::string>();
      if (req.has_param("include_pending") && req.get_param_value("include_pending") == "true")
        body["include_pending"] = true;
      BootstrapConfig config = config_from_json(body);
      std::unique_lock lock(mutex_);
      reply(res, 200, dataset_json(project_.build_dataset(id, config)));
    });
  });

  server.Get(R"(/datasets/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::shared_lock lock(mutex_);
      auto it = project_.datasets().find(req.matches[1]);
      if (it == project_.datasets().end())
        throw Error(ErrorCode::kNotFound, "unknown dataset " + std::string(req.matches[1]));
      reply(res, 200, dataset_json(it->second));
    });
  });

  server.Get(R"(/datasets/([A-Za-z0-9_.\-]+)/status)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 std::shared_lock lock(mutex_);
                 if (!project_.datasets().count(req.matches[1]))
                   throw Error(ErrorCode::kNotFound, "unknown dataset " + std::string(req.matches[1]));
                 reply(res, 200, ordered_json{{"id", std::string(req.matches[1])}, {"state", "done"}, {"progress", 1.0}});
               });
             });

  server.Get(R"(/datasets/([A-Za-z0-9_.\-]+)/files/([A-Za-z0-9_.\-]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const std::string id = req.matches[1];
                 const std::string name = req.matches[2];
                 if (name != kDatasetFile && name != kStatsFile && name != kMarkersFile)
                   throw Error(ErrorCode::kNotFound, "unknown dataset file " + name);
                 std::shared_lock lock(mutex_);
                 if (!project_.datasets().count(id)) throw Error(ErrorCode::kNotFound, "unknown dataset " + id);
                 std::ifstream in(project_.dataset_dir(id) / name, std::ios::binary);
                 if (!in) throw Error(ErrorCode::kIo, "missing dataset file " + name);
                 std::ostringstream content;
                 content << in.rdbuf();
                 res.status = 200;
                 res.set_header("Content-Disposition", "attachment; filename=\"" + id + "-" + name + "\"");
                 const char* type = name == kStatsFile      ? "application/json"
                                    : name == kDatasetFile ? "application/x-ndjson"
                                                           : "text/plain; charset=utf-8";
                 res.set_content(content.str(), type);
               });
             });

  server.Get("/corpus/stats", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      std::shared_lock lock(mutex_);
      reply(res, 200, project_.corpus_stats());
    });
  });
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::bind_any(const std::string& host) {
  int port = server_->bind_to_any_port(host);
  return port < 0 ? 0 : port;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

int resolve_port(int flag_port) {
  if (flag_port > 0) return flag_port;
  if (const char* env = std::getenv("SYNSEARCH_PORT")) {
    int p = std::atoi(env);
    if (p > 0 && p < 65536) return p;
  }
  return 8080;
}

}  // namespace synsearch

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synsearch/bootstrap.hpp"
#include "synsearch/engine.hpp"
#include "synsearch/pattern.hpp"
#include "synsearch/querylang.hpp"

namespace synsearch {

struct RegisteredQuery {
  std::string id;
  std::string text;
  std::string parse_conllu;  // parse supplied at registration, if any
  std::optional<Pattern> pattern;
  std::string compile_error;  // empty when the pattern compiled
  QueryQualityRecord quality;

  bool ok() const { return pattern.has_value(); }
};

struct DatasetRecord {
  std::string id;
  BootstrapConfig config;
  nlohmann::ordered_json stats;
};

/// On-disk project:
///
///   <dir>/store/corpus.jsonl   corpus snapshot
///   <dir>/index/               saved CorpusIndex (built from store/ if absent)
///   <dir>/parses.conllu        optional parses of query sentences
///   <dir>/queries.json         registered queries, patterns, quality labels
///   <dir>/datasets/<id>/       config.json + dataset exports
///
/// Not synchronized; callers serialize mutations (see Service).
class Project {
 public:
  static Project open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const CorpusIndex& index() const { return index_; }

  /// Parses and compiles a query. Grammar errors throw; compile failures are
  /// recorded on the returned entry. Re-registering an id replaces it and
  /// keeps the quality record when the compiled pattern is unchanged.
  const RegisteredQuery& register_query(const std::string& id, const std::string& text,
                                        const std::string& parse_conllu = {});
  const std::map<std::string, RegisteredQuery>& queries() const { return queries_; }
  const RegisteredQuery& query(const std::string& id) const;

  SearchPage search(const std::string& id, std::size_t limit, std::size_t offset) const;
  std::vector<Match> sample(const std::string& id, std::size_t n, std::uint64_t seed);
  Verdict label(const std::string& id, const std::vector<Answer>& answers);

  /// Builds (or returns the existing identical) dataset `id`.
  const DatasetRecord& build_dataset(const std::string& id, const BootstrapConfig& config);
  const std::map<std::string, DatasetRecord>& datasets() const { return datasets_; }
  std::filesystem::path dataset_dir(const std::string& id) const { return dir_ / "datasets" / id; }

  nlohmann::ordered_json corpus_stats() const;

 private:
  explicit Project(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void save_queries() const;
  std::optional<Sentence> find_parse(const QueryExample& q) const;

  std::filesystem::path dir_;
  CorpusIndex index_ = CorpusIndex::build({});
  std::vector<Sentence> query_parses_;
  std::map<std::string, RegisteredQuery> queries_;
  std::map<std::string, DatasetRecord> datasets_;
};

/// Key identifying one sampled match in a quality record.
std::string match_key(const Match& m);

nlohmann::ordered_json query_to_json(const RegisteredQuery& q);
nlohmann::ordered_json elements_to_json(const QueryExample& q);

}  // namespace synsearch

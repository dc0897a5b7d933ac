#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synsearch/corpus.hpp"
#include "synsearch/pattern.hpp"
#include "synsearch/querylang.hpp"

#ifndef SYNSEARCH_FIXTURE_DIR
#error "SYNSEARCH_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace synsearch::testkit {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SYNSEARCH_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<QueryExample> fixture_queries() {
  std::ifstream in(fixture("queries.tsv"));
  return read_query_file(in);
}

inline std::vector<Sentence> fixture_parses() {
  std::ifstream in(fixture("query_parses.conllu"));
  return parse_conllu(in);
}

inline const Sentence& parse_for(const std::vector<Sentence>& parses, const std::string& id) {
  for (const auto& s : parses)
    if (s.id == id) return s;
  throw std::runtime_error("no fixture parse " + id);
}

inline const QueryExample& query_for(const std::vector<QueryExample>& queries,
                                     const std::string& id) {
  for (const auto& q : queries)
    if (q.id == id) return q;
  throw std::runtime_error("no fixture query " + id);
}

inline Pattern compile_fixture(const std::string& id) {
  static const auto queries = fixture_queries();
  static const auto parses = fixture_parses();
  return compile(query_for(queries, id), parse_for(parses, id));
}

inline std::vector<Pattern> seed_founded_patterns() {
  return {compile_fixture("founded_1"), compile_fixture("founded_2"), compile_fixture("founded_3")};
}

inline TriggerMap fixture_triggers() { return parse_trigger_map(read_file(fixture("triggers.json"))); }

}  // namespace synsearch::testkit

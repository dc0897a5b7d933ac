#include "synsearch/project.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "synsearch/error.hpp"
#include "synsearch/text.hpp"

namespace synsearch {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_id(const std::string& id, std::string_view what) {
  const bool ok = !id.empty() && id.size() <= 128 && id != "." && id != ".." &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                           c == '.';
                  });
  if (!ok)
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " id must match [A-Za-z0-9_.-]+, got '" + id + "'");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kMalformedInput, "invalid JSON in " + path.string());
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  // Write-then-rename so a crash never leaves a half-written state file.
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

ordered_json quality_to_json(const QueryQualityRecord& q) {
  ordered_json labels = ordered_json::array();
  for (auto a : q.labels) labels.push_back(a == Answer::kYes ? "yes" : "no");
  ordered_json j;
  j["pattern_id"] = q.pattern_id;
  j["sampled"] = q.sampled;
  j["labels"] = std::move(labels);
  j["verdict"] = verdict_name(q.verdict);
  return j;
}

QueryQualityRecord quality_from_json(const json& j) {
  QueryQualityRecord q;
  q.pattern_id = j.value("pattern_id", "");
  q.sampled = j.value("sampled", std::vector<std::string>{});
  for (const auto& a : j.value("labels", json::array())) q.labels.push_back(parse_answer(a.get<std::string>()));
  q.verdict = parse_verdict(j.value("verdict", "pending"));
  return q;
}

}  // namespace

std::string match_key(const Match& m) {
  std::string key = m.sentence_id;
  for (const auto& [name, span] : m.bindings)
    key += "#" + name + "=" + std::to_string(span.start) + ":" + std::to_string(span.end);
  return key;
}

ordered_json elements_to_json(const QueryExample& q) {
  ordered_json elements = ordered_json::array();
  for (const auto& el : q.elements) {
    ordered_json e;
    e["surface"] = el.surface;
    e["role"] = role_name(el.role);
    if (el.role == ElementRole::kCapture) e["capture"] = el.capture_name;
    e["expand"] = el.expand;
    ordered_json cs = ordered_json::array();
    for (const auto& c : el.constraints) {
      ordered_json jc;
      jc["key"] = std::string(1, constraint_key_char(c.key));
      jc["bare"] = c.bare;
      jc["values"] = c.values;
      cs.push_back(std::move(jc));
    }
    e["constraints"] = std::move(cs);
    elements.push_back(std::move(e));
  }
  ordered_json j;
  j["id"] = q.id;
  j["elements"] = std::move(elements);
  j["stripped"] = strip(q);
  j["canonical"] = render(q);
  return j;
}

ordered_json query_to_json(const RegisteredQuery& q) {
  ordered_json j;
  j["id"] = q.id;
  j["query"] = q.text;
  j["status"] = q.ok() ? "ok" : "error";
  if (!q.ok()) j["error"] = q.compile_error;
  if (!q.parse_conllu.empty()) j["parse"] = q.parse_conllu;
  if (q.pattern) j["pattern"] = to_json(*q.pattern);
  j["quality"] = quality_to_json(q.quality);
  return j;
}

Project Project::open(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kNotFound, "no project directory " + dir.string());
  Project p(dir);
  if (fs::exists(dir / "index" / "manifest.json")) {
    p.index_ = CorpusIndex::load(dir / "index");
  } else if (fs::exists(dir / "store" / "corpus.jsonl")) {
    p.index_ = CorpusIndex::build(load_corpus(dir / "store" / "corpus.jsonl"));
    p.index_.save(dir / "index");
  } else {
    throw Error(ErrorCode::kNotFound, "project " + dir.string() + " has neither index/ nor store/corpus.jsonl");
  }
  if (fs::exists(dir / "parses.conllu")) {
    std::ifstream in(dir / "parses.conllu");
    p.query_parses_ = parse_conllu(in);
  }
  if (fs::exists(dir / "queries.json")) {
    for (const auto& jq : read_json_file(dir / "queries.json")) {
      RegisteredQuery q;
      q.id = jq.at("id").get<std::string>();
      q.text = jq.at("query").get<std::string>();
      q.parse_conllu = jq.value("parse", "");
      q.compile_error = jq.value("error", "");
      if (jq.contains("pattern")) q.pattern = pattern_from_json(jq.at("pattern"));
      if (jq.contains("quality")) q.quality = quality_from_json(jq.at("quality"));
      p.queries_.emplace(q.id, std::move(q));
    }
  }
  if (fs::is_directory(dir / "datasets")) {
    for (const auto& entry : fs::directory_iterator(dir / "datasets")) {
      if (!fs::exists(entry.path() / "config.json") || !fs::exists(entry.path() / kStatsFile)) continue;
      DatasetRecord rec;
      rec.id = entry.path().filename().string();
      rec.config = config_from_json(read_json_file(entry.path() / "config.json"));
      std::ifstream in(entry.path() / kStatsFile);
      rec.stats = ordered_json::parse(in);
      p.datasets_.emplace(rec.id, std::move(rec));
    }
  }
  return p;
}

void Project::save_queries() const {
  ordered_json arr = ordered_json::array();
  for (const auto& [_, q] : queries_) arr.push_back(query_to_json(q));
  write_text_file(dir_ / "queries.json", arr.dump(2) + "\n");
}

std::optional<Sentence> Project::find_parse(const QueryExample& q) const {
  for (const auto& s : query_parses_)
    if (s.id == q.id && s.tokens.size() == q.elements.size()) return s;
  for (const auto& s : query_parses_) {
    if (s.tokens.size() != q.elements.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < s.tokens.size() && same; ++i)
      same = iequals(s.tokens[i].word, q.elements[i].surface);
    if (same) return s;
  }
  return std::nullopt;
}

const RegisteredQuery& Project::register_query(const std::string& id, const std::string& text,
                                               const std::string& parse_conllu_text) {
  check_id(id, "query");
  QueryExample example = parse_query(text, id);

  RegisteredQuery q;
  q.id = id;
  q.text = text;
  q.parse_conllu = parse_conllu_text;
  try {
    std::optional<Sentence> parse;
    if (!parse_conllu_text.empty()) {
      auto parsed = parse_conllu(parse_conllu_text);
      if (parsed.size() != 1)
        throw Error(ErrorCode::kCompile, "inline parse must contain exactly one sentence");
      parse = std::move(parsed.front());
    } else {
      parse = find_parse(example);
    }
    if (!parse)
      throw Error(ErrorCode::kCompile, "no parse available for \"" + strip(example) + "\"");
    q.pattern = compile(example, *parse);
  } catch (const Error& e) {
    q.compile_error = e.what();
  }

  auto existing = queries_.find(id);
  if (existing != queries_.end() && existing->second.pattern == q.pattern) {
    q.quality = existing->second.quality;
  } else {
    q.quality.pattern_id = id;
  }
  queries_[id] = std::move(q);
  save_queries();
  return queries_.at(id);
}

const RegisteredQuery& Project::query(const std::string& id) const {
  auto it = queries_.find(id);
  if (it == queries_.end()) throw Error(ErrorCode::kNotFound, "unknown query " + id);
  return it->second;
}

namespace {

const Pattern& compiled(const RegisteredQuery& q) {
  if (!q.pattern)
    throw Error(ErrorCode::kCompile, "query " + q.id + " did not compile: " + q.compile_error);
  return *q.pattern;
}

}  // namespace

SearchPage Project::search(const std::string& id, std::size_t limit, std::size_t offset) const {
  return synsearch::search(compiled(query(id)), index_, limit, offset);
}

std::vector<Match> Project::sample(const std::string& id, std::size_t n, std::uint64_t seed) {
  const Pattern& pattern = compiled(query(id));
  auto matches = sample_matches(pattern, index_, n, seed);
  std::vector<std::string> keys;
  for (const auto& m : matches) keys.push_back(match_key(m));
  auto& quality = queries_.at(id).quality;
  if (quality.sampled != keys) {
    quality.sampled = std::move(keys);
    quality.labels.clear();
    quality.verdict = Verdict::kPending;
    save_queries();
  }
  return matches;
}

Verdict Project::label(const std::string& id, const std::vector<Answer>& answers) {
  compiled(query(id));
  Verdict v = quality_filter(answers);
  auto& quality = queries_.at(id).quality;
  quality.labels = answers;
  quality.verdict = v;
  save_queries();
  return v;
}

const DatasetRecord& Project::build_dataset(const std::string& id, const BootstrapConfig& config) {
  check_id(id, "dataset");
  if (auto it = datasets_.find(id); it != datasets_.end()) {
    if (config_to_json(it->second.config) == config_to_json(config)) return it->second;
    throw Error(ErrorCode::kConflict, "dataset " + id + " already exists with a different config");
  }
  std::vector<Pattern> patterns;
  std::map<std::string, Verdict> verdicts;
  std::vector<std::string> ids = config.query_ids;
  if (ids.empty())
    for (const auto& [qid, q] : queries_)
      if (q.ok()) ids.push_back(qid);
  for (const auto& qid : ids) {
    const RegisteredQuery& q = query(qid);
    patterns.push_back(compiled(q));
    verdicts[qid] = q.quality.verdict;
  }
  Dataset ds = synsearch::build_dataset(config, index_, patterns, verdicts);
  const fs::path out = dataset_dir(id);
  write_dataset_files(ds, out);
  write_text_file(out / "config.json", config_to_json(config).dump(2) + "\n");
  DatasetRecord rec{id, config, stats_to_json(ds)};
  return datasets_.emplace(id, std::move(rec)).first->second;
}

ordered_json Project::corpus_stats() const {
  const auto& m = index_.metadata();
  ordered_json j;
  j["sentences"] = m.sentence_count;
  j["tokens"] = m.token_count;
  j["mentions"] = m.mention_count;
  ordered_json distinct = ordered_json::object();
  for (std::size_t a = 0; a < kAttributeCount; ++a)
    distinct[std::string(attribute_name(static_cast<Attribute>(a)))] = m.distinct_values[a];
  j["distinct_values"] = std::move(distinct);
  std::ostringstream hash;
  hash << std::hex << m.corpus_hash;
  j["corpus_hash"] = hash.str();
  return j;
}

}  // namespace synsearch

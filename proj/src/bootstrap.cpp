#include "synsearch/bootstrap.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <tuple>

#include "synsearch/error.hpp"
#include "synsearch/sampling.hpp"

namespace synsearch {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view label_name(Label label) {
  return label == Label::kPositive ? "positive" : "negative";
}

Label parse_label(std::string_view text) {
  if (text == "positive") return Label::kPositive;
  if (text == "negative") return Label::kNegative;
  throw Error(ErrorCode::kInvalidArgument, "unknown label '" + std::string(text) + "'");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kKept: return "kept";
    case Verdict::kExcluded: return "excluded";
    case Verdict::kPending: return "pending";
  }
  return "?";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "kept") return Verdict::kKept;
  if (text == "excluded") return Verdict::kExcluded;
  if (text == "pending") return Verdict::kPending;
  throw Error(ErrorCode::kInvalidArgument, "unknown verdict '" + std::string(text) + "'");
}

Answer parse_answer(std::string_view text) {
  if (text == "yes" || text == "y" || text == "true") return Answer::kYes;
  if (text == "no" || text == "n" || text == "false") return Answer::kNo;
  throw Error(ErrorCode::kInvalidArgument, "label must be yes or no, got '" + std::string(text) + "'");
}

Verdict quality_filter(std::span<const Answer> labels) {
  if (labels.size() > kQualitySampleSize)
    throw Error(ErrorCode::kInvalidArgument,
                "expected at most " + std::to_string(kQualitySampleSize) + " labels, got " +
                    std::to_string(labels.size()));
  if (labels.size() < kQualitySampleSize) return Verdict::kPending;
  auto no = std::count(labels.begin(), labels.end(), Answer::kNo);
  return no > 1 ? Verdict::kExcluded : Verdict::kKept;
}

void BootstrapConfig::validate() const {
  if (max_positives < 1)
    throw Error(ErrorCode::kInvalidArgument, "max_positives must be at least 1");
}

namespace {

std::string numbered(std::string_view prefix, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", n);
  return std::string(prefix) + buf;
}

std::vector<std::string> words_of(const Sentence& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const auto& t : s.tokens) out.push_back(t.word);
  return out;
}

// Mixes the user seed so positive and negative draws use unrelated streams.
constexpr std::uint64_t kNegativeStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::vector<DatasetExample> collect_positives(std::span<const Pattern> patterns,
                                              const CorpusIndex& index,
                                              std::size_t max_positives,
                                              std::uint64_t seed, PositiveStats* stats) {
  if (max_positives < 1)
    throw Error(ErrorCode::kInvalidArgument, "max_positives must be at least 1");
  std::vector<const Pattern*> ordered;
  for (const auto& p : patterns) {
    validate(p);
    ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Pattern* a, const Pattern* b) { return a->id < b->id; });

  PositiveStats local;
  std::map<std::tuple<std::uint32_t, Span, Span>, DatasetExample> unique;
  for (const Pattern* p : ordered) {
    const int e1 = p->capture_node("e1");
    const int e2 = p->capture_node("e2");
    auto matches = all_matches(*p, index);
    local.matches_per_pattern[p->id] += matches.size();
    local.total_matches += matches.size();
    for (const auto& m : matches) {
      auto key = std::make_tuple(m.sentence, m.bindings.at("e1"), m.bindings.at("e2"));
      if (unique.count(key)) {
        ++local.dedup_losses;
        continue;
      }
      DatasetExample ex;
      ex.label = Label::kPositive;
      ex.sentence_id = m.sentence_id;
      ex.sentence = m.sentence;
      ex.e1 = m.bindings.at("e1");
      ex.e2 = m.bindings.at("e2");
      ex.e1_head = m.tokens[e1];
      ex.e2_head = m.tokens[e2];
      ex.source = p->id;
      unique.emplace(key, std::move(ex));
    }
  }
  local.unique = unique.size();
  if (unique.empty())
    throw Error(ErrorCode::kEmptyPositiveSet, "empty positive set: no pattern matched the corpus");

  std::vector<DatasetExample> all;
  all.reserve(unique.size());
  for (auto& [_, ex] : unique) all.push_back(std::move(ex));
  std::vector<DatasetExample> out =
      all.size() > max_positives ? sample_without_replacement(all, max_positives, seed)
                                 : std::move(all);
  local.downsampled_to = out.size();
  for (auto& p : ordered) local.contributed_per_pattern[p->id] = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = numbered("pos-", i + 1);
    out[i].tokens = words_of(index.sentence(out[i].sentence));
    ++local.contributed_per_pattern[out[i].source];
  }
  if (stats) *stats = std::move(local);
  return out;
}

Signature relation_signature(std::span<const Pattern> patterns) {
  Signature sig;
  for (const auto& p : patterns) {
    sig.first.insert(p.signature.first.begin(), p.signature.first.end());
    sig.second.insert(p.signature.second.begin(), p.signature.second.end());
  }
  if (sig.first.empty() || sig.second.empty())
    throw Error(ErrorCode::kUntypedRelation,
                std::string("untyped relation: no entity type constrains ") +
                    (sig.first.empty() ? "e1" : "e2"));
  return sig;
}

NegativeSample sample_negatives(const CorpusIndex& index, const Signature& signature,
                                std::span<const Pattern> kept_patterns,
                                std::span<const DatasetExample> positives,
                                std::size_t neg_ratio, std::uint64_t seed) {
  if (positives.empty())
    throw Error(ErrorCode::kInvalidArgument, "sample_negatives needs at least one positive");
  using PairKey = std::tuple<std::uint32_t, int, int>;
  std::set<PairKey> connected;  // (sentence, e1 head, e2 head)
  for (const auto& p : kept_patterns) {
    const int e1 = p.capture_node("e1");
    const int e2 = p.capture_node("e2");
    if (e1 < 0 || e2 < 0) continue;
    for (const auto& m : all_matches(p, index))
      connected.emplace(m.sentence, m.tokens[e1], m.tokens[e2]);
  }
  std::set<PairKey> positive_heads;
  std::set<std::tuple<std::uint32_t, Span, Span>> positive_spans;
  for (const auto& ex : positives) {
    positive_heads.emplace(ex.sentence, ex.e1_head, ex.e2_head);
    positive_spans.emplace(ex.sentence, ex.e1, ex.e2);
  }
  auto admits = [](const ValueSet& types, const std::string& t) {
    return types.empty() || types.count(t) > 0;
  };

  NegativeSample result;
  result.target = neg_ratio * positives.size();
  std::vector<DatasetExample> pool;
  const auto& store = index.sentences();
  for (std::uint32_t s = 0; s < store.size(); ++s) {
    const auto& mentions = index.mentions(s);
    for (const auto& a : mentions) {
      if (!admits(signature.first, a.entity_type)) continue;
      for (const auto& b : mentions) {
        if (&a == &b || !admits(signature.second, b.entity_type)) continue;
        ++result.candidates;
        Span e1{a.start, a.end}, e2{b.start, b.end};
        if (positive_heads.count({s, a.head_token, b.head_token}) ||
            positive_spans.count({s, e1, e2})) {
          ++result.excluded_as_positive;
          continue;
        }
        if (connected.count({s, a.head_token, b.head_token})) {
          ++result.excluded_by_pattern;
          continue;
        }
        DatasetExample ex;
        ex.label = Label::kNegative;
        ex.sentence_id = store[s].id;
        ex.sentence = s;
        ex.e1 = e1;
        ex.e2 = e2;
        ex.e1_head = a.head_token;
        ex.e2_head = b.head_token;
        ex.source = std::string(kSampledNegativeSource);
        pool.push_back(std::move(ex));
      }
    }
  }
  result.available = pool.size();
  if (pool.size() < result.target) {
    result.shortfall = "only " + std::to_string(pool.size()) + " negative candidates for a target of " +
                       std::to_string(result.target);
    result.examples = std::move(pool);
  } else {
    result.examples = sample_without_replacement(pool, result.target, seed ^ kNegativeStream);
  }
  for (std::size_t i = 0; i < result.examples.size(); ++i) {
    auto& ex = result.examples[i];
    ex.id = numbered("neg-", i + 1);
    ex.tokens = words_of(store[ex.sentence]);
  }
  return result;
}

Dataset build_dataset(const BootstrapConfig& config, const CorpusIndex& index,
                      std::span<const Pattern> patterns,
                      const std::map<std::string, Verdict>& verdicts) {
  config.validate();
  Dataset ds;
  ds.relation = config.relation;
  ds.config = config;

  std::vector<std::string> ids = config.query_ids;
  if (ids.empty())
    for (const auto& p : patterns) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<Pattern> kept;
  for (const auto& id : ids) {
    auto it = std::find_if(patterns.begin(), patterns.end(),
                           [&](const Pattern& p) { return p.id == id; });
    if (it == patterns.end())
      throw Error(ErrorCode::kNotFound, "unknown query id " + id);
    auto v = verdicts.find(id);
    Verdict verdict = v == verdicts.end() ? Verdict::kKept : v->second;
    if (verdict == Verdict::kExcluded) {
      ds.skipped_patterns.push_back({id, "excluded by quality filter"});
      continue;
    }
    if (verdict == Verdict::kPending && !config.include_pending)
      throw Error(ErrorCode::kConflict,
                  "query " + id + " has a pending quality verdict");
    kept.push_back(*it);
    ds.kept_patterns.push_back(id);
  }
  if (kept.empty())
    throw Error(ErrorCode::kEmptyPositiveSet, "empty positive set: no kept patterns");

  ds.signature = config.signature ? *config.signature : relation_signature(kept);
  auto positives = collect_positives(kept, index, config.max_positives, config.seed,
                                     &ds.positive_stats);
  if (config.neg_ratio > 0) {
    ds.negative_stats = sample_negatives(index, ds.signature, kept, positives,
                                         config.neg_ratio, config.seed);
  }
  auto negatives = std::move(ds.negative_stats.examples);
  ds.negative_stats.examples.clear();
  ds.positives = positives.size();
  ds.negatives = negatives.size();
  for (auto& ex : positives) {
    ex.relation = config.relation;
    ds.examples.push_back(std::move(ex));
  }
  for (auto& ex : negatives) {
    ex.relation = config.relation;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

// ---- serialization ---------------------------------------------------------

namespace {

ordered_json span_json(const Span& s) { return ordered_json::array({s.start, s.end}); }

ordered_json types_json(const ValueSet& s) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : s) arr.push_back(v);
  return arr;
}

ValueSet types_from(const json& j) {
  ValueSet out;
  for (const auto& v : j) out.insert(v.get<std::string>());
  return out;
}

}  // namespace

ordered_json example_to_json(const DatasetExample& ex) {
  ordered_json j;
  j["id"] = ex.id;
  j["relation"] = ex.relation;
  j["label"] = label_name(ex.label);
  j["tokens"] = ex.tokens;
  j["e1"] = span_json(ex.e1);
  j["e2"] = span_json(ex.e2);
  j["source"] = ex.source;
  j["sentence_id"] = ex.sentence_id;
  return j;
}

ordered_json stats_to_json(const Dataset& ds) {
  ordered_json patterns = ordered_json::array();
  for (const auto& id : ds.kept_patterns) {
    ordered_json p;
    p["id"] = id;
    p["matches"] = ds.positive_stats.matches_per_pattern.count(id)
                       ? ds.positive_stats.matches_per_pattern.at(id)
                       : 0;
    p["contributed"] = ds.positive_stats.contributed_per_pattern.count(id)
                           ? ds.positive_stats.contributed_per_pattern.at(id)
                           : 0;
    patterns.push_back(std::move(p));
  }
  ordered_json skipped = ordered_json::array();
  for (const auto& s : ds.skipped_patterns)
    skipped.push_back(ordered_json{{"id", s.id}, {"reason", s.reason}});

  ordered_json j;
  j["relation"] = ds.relation;
  j["config"] = config_to_json(ds.config);
  j["signature"] = ordered_json{{"e1", types_json(ds.signature.first)},
                                {"e2", types_json(ds.signature.second)}};
  j["patterns"] = std::move(patterns);
  j["skipped_patterns"] = std::move(skipped);
  j["positives"] = ordered_json{{"matches", ds.positive_stats.total_matches},
                                {"unique", ds.positive_stats.unique},
                                {"dedup_losses", ds.positive_stats.dedup_losses},
                                {"count", ds.positives}};
  const auto& neg = ds.negative_stats;
  j["negatives"] = ordered_json{{"candidates", neg.candidates},
                                {"excluded_by_pattern", neg.excluded_by_pattern},
                                {"excluded_as_positive", neg.excluded_as_positive},
                                {"available", neg.available},
                                {"target", neg.target},
                                {"count", ds.negatives}};
  j["neg_ratio"] = ds.config.neg_ratio;
  j["achieved_ratio"] =
      ds.positives == 0 ? 0.0 : static_cast<double>(ds.negatives) / static_cast<double>(ds.positives);
  j["shortfall"] = neg.shortfall ? ordered_json(*neg.shortfall) : ordered_json(nullptr);
  return j;
}

void write_dataset_jsonl(std::ostream& out, const Dataset& ds) {
  for (const auto& ex : ds.examples) out << example_to_json(ex).dump() << '\n';
}

std::string entity_marker_line(const DatasetExample& ex) {
  std::string out;
  auto emit = [&](std::string_view piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  for (int i = 0; i < static_cast<int>(ex.tokens.size()); ++i) {
    if (i == ex.e1.start) emit("[E1start]");
    if (i == ex.e2.start) emit("[E2start]");
    emit(ex.tokens[i]);
    if (i == ex.e1.end) emit("[E1end]");
    if (i == ex.e2.end) emit("[E2end]");
  }
  out += '\t';
  out += label_name(ex.label);
  return out;
}

void export_entity_markers(std::ostream& out, const Dataset& ds) {
  for (const auto& ex : ds.examples) out << entity_marker_line(ex) << '\n';
}

void write_dataset_files(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](std::string_view name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open(kDatasetFile);
    write_dataset_jsonl(f, ds);
  }
  {
    auto f = open(kStatsFile);
    f << stats_to_json(ds).dump(2) << '\n';
  }
  {
    auto f = open(kMarkersFile);
    export_entity_markers(f, ds);
  }
}

BootstrapConfig config_from_json(const json& j) {
  BootstrapConfig c;
  try {
    c.relation = j.value("relation", "");
    if (j.contains("query_ids"))
      c.query_ids = j.at("query_ids").get<std::vector<std::string>>();
    c.max_positives = j.value("max_positives", c.max_positives);
    if (j.contains("neg_ratio")) {
      if (j.at("neg_ratio").get<long long>() < 0)
        throw Error(ErrorCode::kInvalidArgument, "neg_ratio must be >= 0");
      c.neg_ratio = j.at("neg_ratio").get<std::size_t>();
    }
    c.seed = j.value("seed", c.seed);
    c.include_pending = j.value("include_pending", false);
    if (j.contains("signature") && !j.at("signature").is_null()) {
      const auto& s = j.at("signature");
      c.signature = Signature{types_from(s.at("e1")), types_from(s.at("e2"))};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad dataset config: ") + e.what());
  }
  c.validate();
  return c;
}

ordered_json config_to_json(const BootstrapConfig& c) {
  ordered_json j;
  j["relation"] = c.relation;
  j["query_ids"] = c.query_ids;
  j["max_positives"] = c.max_positives;
  j["neg_ratio"] = c.neg_ratio;
  j["seed"] = c.seed;
  j["include_pending"] = c.include_pending;
  if (c.signature)
    j["signature"] = ordered_json{{"e1", types_json(c.signature->first)},
                                  {"e2", types_json(c.signature->second)}};
  return j;
}

}  // namespace synsearch

#include "synsearch/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "synsearch/error.hpp"
#include "synsearch/sampling.hpp"
#include "synsearch/text.hpp"

namespace synsearch {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::kWord: return "word";
    case Attribute::kLemma: return "lemma";
    case Attribute::kPos: return "pos";
    case Attribute::kEntityType: return "entity_type";
    case Attribute::kDepLabel: return "dep_label";
  }
  return "?";
}

// ---- matching --------------------------------------------------------------

namespace {

std::string folded_lemma(const Token& t) {
  if (t.lemma.empty() || t.lemma == "_") return to_lower(t.word);
  return to_lower(t.lemma);
}

// Per-sentence view the matcher works against.
struct MatchContext {
  const Pattern& pattern;
  const Sentence& sentence;
  std::vector<std::vector<int>> pattern_children;
  std::vector<std::string> pattern_child_label;  // label of the edge into node
  std::vector<std::vector<int>> token_children;
  std::vector<const Mention*> head_mention;  // mention headed by token, if any
  std::vector<std::string> lower_word;
  std::vector<std::string> lower_lemma;

  MatchContext(const Pattern& p, const Sentence& s, std::span<const Mention> mentions)
      : pattern(p), sentence(s) {
    pattern_children = p.children();
    pattern_child_label.resize(p.nodes.size());
    for (const auto& e : p.edges) pattern_child_label[e.child] = e.dep_label;
    const std::size_t n = s.tokens.size();
    token_children.resize(n);
    head_mention.assign(n, nullptr);
    lower_word.resize(n);
    lower_lemma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (s.tokens[i].head >= 0) token_children[s.tokens[i].head].push_back(static_cast<int>(i));
      lower_word[i] = to_lower(s.tokens[i].word);
      lower_lemma[i] = folded_lemma(s.tokens[i]);
    }
    for (const auto& m : mentions) head_mention[m.head_token] = &m;
  }

  bool satisfies(int node, int token) const {
    const PatternNode& pn = pattern.nodes[node];
    const Token& t = sentence.tokens[token];
    if (pn.word_set && !pn.word_set->count(lower_word[token])) return false;
    if (pn.lemma_set && !pn.lemma_set->count(lower_lemma[token])) return false;
    if (pn.pos_set && !pn.pos_set->count(t.upos) && !pn.pos_set->count(t.xpos))
      return false;
    if (pn.entity_set) {
      const Mention* m = head_mention[token];
      if (!m || !pn.entity_set->count(m->entity_type)) return false;
    }
    return true;
  }

  // Partial assignments covering the subtree of `node` rooted at `token`.
  std::vector<std::vector<int>> match_at(int node, int token) const {
    std::vector<std::vector<int>> results;
    if (!satisfies(node, token)) return results;
    const auto& kids = pattern_children[node];
    // For each pattern child: the (sentence child, assignment) options.
    std::vector<std::vector<std::pair<int, std::vector<int>>>> options(kids.size());
    for (std::size_t k = 0; k < kids.size(); ++k) {
      for (int tc : token_children[token]) {
        if (sentence.tokens[tc].dep_label != pattern_child_label[kids[k]]) continue;
        for (auto& a : match_at(kids[k], tc)) options[k].emplace_back(tc, std::move(a));
      }
      if (options[k].empty()) return results;
    }
    std::vector<int> base(pattern.nodes.size(), -1);
    base[node] = token;
    std::vector<int> used;
    combine(kids, options, 0, base, used, results);
    return results;
  }

  void combine(const std::vector<int>& kids,
               const std::vector<std::vector<std::pair<int, std::vector<int>>>>& options,
               std::size_t k, std::vector<int>& acc, std::vector<int>& used,
               std::vector<std::vector<int>>& out) const {
    if (k == kids.size()) {
      out.push_back(acc);
      return;
    }
    for (const auto& [tc, assignment] : options[k]) {
      if (std::find(used.begin(), used.end(), tc) != used.end()) continue;
      std::vector<int> next = acc;
      for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] >= 0) next[i] = assignment[i];
      used.push_back(tc);
      combine(kids, options, k + 1, next, used, out);
      used.pop_back();
    }
  }

  Span binding_span(int node, int token) const {
    const PatternNode& pn = pattern.nodes[node];
    if (!pn.expand) return {token, token};
    if (pn.entity_set && head_mention[token])
      return {head_mention[token]->start, head_mention[token]->end};
    Span s{token, token};
    std::vector<int> stack{token};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      s.start = std::min(s.start, v);
      s.end = std::max(s.end, v);
      for (int c : token_children[v]) stack.push_back(c);
    }
    return s;
  }
};

}  // namespace

bool match_less(const Match& a, const Match& b, int root_node) {
  if (a.sentence != b.sentence) return a.sentence < b.sentence;
  if (root_node >= 0 && a.tokens[root_node] != b.tokens[root_node])
    return a.tokens[root_node] < b.tokens[root_node];
  if (a.bindings != b.bindings) {
    return std::lexicographical_compare(
        a.bindings.begin(), a.bindings.end(), b.bindings.begin(), b.bindings.end(),
        [](const auto& x, const auto& y) {
          if (x.first != y.first) return x.first < y.first;
          return x.second < y.second;
        });
  }
  return a.tokens < b.tokens;
}

std::vector<Match> match_pattern(const Pattern& pattern, const Sentence& sentence,
                                 std::span<const Mention> mentions,
                                 std::uint32_t ordinal) {
  std::vector<Match> out;
  const int root = pattern.root();
  if (root < 0 || sentence.tokens.empty()) return out;
  MatchContext ctx(pattern, sentence, mentions);
  const int e1 = pattern.capture_node("e1");
  const int e2 = pattern.capture_node("e2");
  for (int t = 0; t < static_cast<int>(sentence.tokens.size()); ++t) {
    for (auto& assignment : ctx.match_at(root, t)) {
      Match m;
      m.sentence_id = sentence.id;
      m.sentence = ordinal;
      m.pattern_id = pattern.id;
      for (std::size_t node = 0; node < pattern.nodes.size(); ++node) {
        if (pattern.nodes[node].capture_name)
          m.bindings[*pattern.nodes[node].capture_name] =
              ctx.binding_span(static_cast<int>(node), assignment[node]);
      }
      m.tokens = std::move(assignment);
      if (e1 >= 0 && e2 >= 0 &&
          m.bindings.at("e1").overlaps(m.bindings.at("e2")))
        continue;
      out.push_back(std::move(m));
    }
  }
  std::sort(out.begin(), out.end(),
            [root](const Match& a, const Match& b) { return match_less(a, b, root); });
  return out;
}

std::vector<Match> match_pattern(const Pattern& pattern, const Sentence& sentence) {
  auto mentions = extract_mentions(sentence);
  return match_pattern(pattern, sentence, mentions);
}

// ---- index -----------------------------------------------------------------

CorpusIndex CorpusIndex::build(std::vector<Sentence> sentences) {
  validate_unique_ids(sentences);
  CorpusIndex index;
  index.sentences_ = std::make_shared<const std::vector<Sentence>>(std::move(sentences));
  index.index_sentences();
  index.metadata_.corpus_hash = corpus_hash(*index.sentences_);
  return index;
}

void CorpusIndex::index_sentences() {
  const auto& store = *sentences_;
  mentions_.clear();
  mentions_.reserve(store.size());
  for (auto& p : postings_) p.clear();
  metadata_ = IndexMetadata{};
  metadata_.sentence_count = store.size();
  auto add = [&](Attribute a, const std::string& value, std::uint32_t s, std::uint32_t t) {
    postings_[static_cast<std::size_t>(a)][value].push_back({s, t});
  };
  for (std::uint32_t s = 0; s < store.size(); ++s) {
    const Sentence& sent = store[s];
    ordinal_by_id_.emplace(sent.id, s);
    for (const Token& tok : sent.tokens) {
      auto t = static_cast<std::uint32_t>(tok.index);
      add(Attribute::kWord, to_lower(tok.word), s, t);
      add(Attribute::kLemma, folded_lemma(tok), s, t);
      add(Attribute::kPos, tok.upos, s, t);
      if (!tok.xpos.empty() && tok.xpos != "_" && tok.xpos != tok.upos)
        add(Attribute::kPos, tok.xpos, s, t);
      add(Attribute::kDepLabel, tok.dep_label, s, t);
    }
    metadata_.token_count += sent.tokens.size();
    mentions_.push_back(extract_mentions(sent));
    for (const auto& m : mentions_.back())
      add(Attribute::kEntityType, m.entity_type, s, static_cast<std::uint32_t>(m.head_token));
    metadata_.mention_count += mentions_.back().size();
  }
  // Postings are appended in (sentence, token) order except entity types,
  // which follow mention order; both are already sorted.
  for (std::size_t a = 0; a < kAttributeCount; ++a)
    metadata_.distinct_values[a] = postings_[a].size();
}

std::optional<std::uint32_t> CorpusIndex::ordinal_of(std::string_view sentence_id) const {
  auto it = ordinal_by_id_.find(std::string(sentence_id));
  if (it == ordinal_by_id_.end()) return std::nullopt;
  return it->second;
}

const PostingList* CorpusIndex::postings(Attribute attribute, std::string_view value) const {
  const auto& map = postings_[static_cast<std::size_t>(attribute)];
  const bool folded = attribute == Attribute::kWord || attribute == Attribute::kLemma;
  auto it = map.find(folded ? to_lower(value) : std::string(value));
  return it == map.end() ? nullptr : &it->second;
}

namespace {

constexpr char kPostingsMagic[8] = {'S', 'Y', 'N', 'P', 'O', 'S', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::kMalformedInput, "postings file truncated");
  return value;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

}  // namespace

void CorpusIndex::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_corpus(*sentences_, dir / "corpus.jsonl");
  {
    std::ofstream out(dir / "postings.bin", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "postings.bin").string());
    out.write(kPostingsMagic, sizeof kPostingsMagic);
    for (const auto& map : postings_) {
      // Sorted keys keep the file byte-stable across runs.
      std::vector<const std::string*> keys;
      for (const auto& [k, _] : map) keys.push_back(&k);
      std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
      write_pod<std::uint64_t>(out, keys.size());
      for (const std::string* k : keys) {
        const auto& list = map.at(*k);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(k->size()));
        out.write(k->data(), static_cast<std::streamsize>(k->size()));
        write_pod<std::uint64_t>(out, list.size());
        for (const auto& p : list) {
          write_pod(out, p.sentence);
          write_pod(out, p.token);
        }
      }
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed: postings.bin");
  }
  ordered_json manifest;
  manifest["format"] = "synsearch-index";
  manifest["version"] = kIndexVersion;
  manifest["corpus_hash"] = hex64(metadata_.corpus_hash);
  manifest["sentences"] = metadata_.sentence_count;
  manifest["tokens"] = metadata_.token_count;
  manifest["mentions"] = metadata_.mention_count;
  ordered_json distinct = ordered_json::object();
  for (std::size_t a = 0; a < kAttributeCount; ++a)
    distinct[std::string(attribute_name(static_cast<Attribute>(a)))] = metadata_.distinct_values[a];
  manifest["distinct_values"] = distinct;
  manifest["files"] = {"corpus.jsonl", "postings.bin"};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: manifest.json");
}

CorpusIndex CorpusIndex::load(const std::filesystem::path& dir) {
  std::ifstream min(dir / "manifest.json");
  if (!min) throw Error(ErrorCode::kIo, "cannot read " + (dir / "manifest.json").string());
  json manifest = json::parse(min, nullptr, false);
  if (!manifest.is_object() || manifest.value("format", "") != "synsearch-index" ||
      manifest.value("version", -1) != kIndexVersion)
    throw Error(ErrorCode::kVersionMismatch, "index manifest: unsupported format or version");

  CorpusIndex index;
  index.sentences_ = std::make_shared<const std::vector<Sentence>>(load_corpus(dir / "corpus.jsonl"));
  const std::uint64_t actual = corpus_hash(*index.sentences_);
  if (manifest.value("corpus_hash", "") != hex64(actual))
    throw Error(ErrorCode::kVersionMismatch,
                "index manifest: corpus hash mismatch (index is stale)");

  // Mentions and id lookup are cheap to recompute; postings come from disk.
  const auto& store = *index.sentences_;
  for (std::uint32_t s = 0; s < store.size(); ++s) {
    index.ordinal_by_id_.emplace(store[s].id, s);
    index.mentions_.push_back(extract_mentions(store[s]));
    index.metadata_.token_count += store[s].tokens.size();
    index.metadata_.mention_count += index.mentions_.back().size();
  }
  index.metadata_.sentence_count = store.size();
  index.metadata_.corpus_hash = actual;

  std::ifstream in(dir / "postings.bin", std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + (dir / "postings.bin").string());
  char magic[sizeof kPostingsMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kPostingsMagic))
    throw Error(ErrorCode::kVersionMismatch, "postings file: bad magic");
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    auto& map = index.postings_[a];
    auto keys = read_pod<std::uint64_t>(in);
    for (std::uint64_t k = 0; k < keys; ++k) {
      auto len = read_pod<std::uint32_t>(in);
      std::string key(len, '\0');
      in.read(key.data(), len);
      auto count = read_pod<std::uint64_t>(in);
      PostingList list(count);
      for (auto& p : list) {
        p.sentence = read_pod<std::uint32_t>(in);
        p.token = read_pod<std::uint32_t>(in);
        if (p.sentence >= store.size() || p.token >= store[p.sentence].tokens.size())
          throw Error(ErrorCode::kMalformedInput, "postings file: posting out of range");
      }
      map.emplace(std::move(key), std::move(list));
    }
    index.metadata_.distinct_values[a] = map.size();
  }
  return index;
}

// ---- retrieval -------------------------------------------------------------

namespace {

// Sorted, duplicate-free sentence ordinals holding any of `values`.
std::vector<std::uint32_t> sentences_with(const CorpusIndex& index, Attribute a,
                                          const ValueSet& values) {
  std::vector<std::uint32_t> out;
  for (const auto& v : values) {
    if (const PostingList* list = index.postings(a, v)) {
      for (const auto& p : *list)
        if (out.empty() || out.back() != p.sentence) out.push_back(p.sentence);
    }
  }
  if (values.size() > 1) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> candidates(const Pattern& pattern, const CorpusIndex& index) {
  std::vector<std::vector<std::uint32_t>> lists;
  for (const auto& node : pattern.nodes) {
    if (node.word_set) lists.push_back(sentences_with(index, Attribute::kWord, *node.word_set));
    if (node.lemma_set) lists.push_back(sentences_with(index, Attribute::kLemma, *node.lemma_set));
    if (node.pos_set) lists.push_back(sentences_with(index, Attribute::kPos, *node.pos_set));
    if (node.entity_set)
      lists.push_back(sentences_with(index, Attribute::kEntityType, *node.entity_set));
  }
  for (const auto& edge : pattern.edges)
    lists.push_back(sentences_with(index, Attribute::kDepLabel, ValueSet{edge.dep_label}));

  if (lists.empty()) {
    std::vector<std::uint32_t> all(index.sentences().size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  std::sort(lists.begin(), lists.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<std::uint32_t> acc = std::move(lists.front());
  for (std::size_t i = 1; i < lists.size() && !acc.empty(); ++i) {
    std::vector<std::uint32_t> next;
    std::set_intersection(acc.begin(), acc.end(), lists[i].begin(), lists[i].end(),
                          std::back_inserter(next));
    acc = std::move(next);
  }
  return acc;
}

std::vector<Match> all_matches(const Pattern& pattern, const CorpusIndex& index) {
  std::vector<Match> out;
  for (std::uint32_t s : candidates(pattern, index)) {
    auto found = match_pattern(pattern, index.sentence(s), index.mentions(s), s);
    std::move(found.begin(), found.end(), std::back_inserter(out));
  }
  return out;
}

SearchPage search(const Pattern& pattern, const CorpusIndex& index, std::size_t limit,
                  std::size_t offset) {
  SearchPage page;
  for (std::uint32_t s : candidates(pattern, index)) {
    auto found = match_pattern(pattern, index.sentence(s), index.mentions(s), s);
    for (auto& m : found) {
      if (page.total >= offset && page.matches.size() < limit)
        page.matches.push_back(std::move(m));
      ++page.total;
    }
  }
  return page;
}

std::vector<Match> sample_matches(const Pattern& pattern, const CorpusIndex& index,
                                  std::size_t n, std::uint64_t seed) {
  return sample_without_replacement(all_matches(pattern, index), n, seed);
}

ordered_json match_to_json(const Match& match) {
  ordered_json bindings = ordered_json::object();
  for (const auto& [name, span] : match.bindings)
    bindings[name] = ordered_json::array({span.start, span.end});
  ordered_json j;
  j["sentence_id"] = match.sentence_id;
  j["pattern_id"] = match.pattern_id;
  j["bindings"] = std::move(bindings);
  return j;
}

}  // namespace synsearch

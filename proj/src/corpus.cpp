#include "synsearch/corpus.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "synsearch/error.hpp"
#include "synsearch/text.hpp"

namespace synsearch {

using nlohmann::json;

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.word;
  }
  return out;
}

char bio_prefix(std::string_view tag) {
  if (tag.empty() || tag == "O" || tag == "_") return 'O';
  return tag[0];
}

std::string_view bio_type(std::string_view tag) {
  if (tag.size() < 3 || tag[1] != '-') return {};
  return tag.substr(2);
}

namespace {

bool well_formed_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

// Index of the first token participating in a violation, plus a message.
struct Violation {
  int token = -1;
  ErrorCode code = ErrorCode::kInvalidTree;
  std::string message;
};

std::optional<Violation> find_violation(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) return Violation{-1, ErrorCode::kMalformedInput, "empty sentence"};
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    if (t.index != i)
      return Violation{i, ErrorCode::kMalformedInput, "token index out of sequence"};
    if (t.head == i) return Violation{i, ErrorCode::kInvalidTree, "self-loop head"};
    if (t.head < -1 || t.head >= n)
      return Violation{i, ErrorCode::kInvalidTree, "head out of range"};
    if (t.head == -1) ++roots;
  }
  if (roots != 1)
    return Violation{0, ErrorCode::kInvalidTree,
                     "expected exactly one root, found " + std::to_string(roots)};
  // 0 = unvisited, 1 = on current walk, 2 = known to reach the root.
  std::vector<char> state(n, 0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> walk;
    int v = i;
    while (v != -1 && state[v] == 0) {
      state[v] = 1;
      walk.push_back(v);
      v = s.tokens[v].head;
    }
    if (v != -1 && state[v] == 1)
      return Violation{v, ErrorCode::kInvalidTree, "head cycle"};
    for (int w : walk) state[w] = 2;
  }
  for (int i = 0; i < n; ++i) {
    const std::string& tag = s.tokens[i].entity_tag;
    if (!well_formed_tag(tag))
      return Violation{i, ErrorCode::kInvalidBio, "ill-formed BIO tag '" + tag + "'"};
    if (tag[0] == 'I') {
      const std::string* prev = i > 0 ? &s.tokens[i - 1].entity_tag : nullptr;
      if (prev == nullptr || bio_prefix(*prev) == 'O' ||
          bio_type(*prev) != bio_type(tag))
        return Violation{i, ErrorCode::kInvalidBio,
                         "ill-formed BIO: " + tag + " does not continue a mention"};
    }
  }
  return std::nullopt;
}

}  // namespace

void validate(const Sentence& sentence) {
  if (auto v = find_violation(sentence)) {
    throw Error(v->code, "sentence " + sentence.id + ": " + v->message,
                sentence.id, -1);
  }
}

void validate_unique_ids(std::span<const Sentence> sentences) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : sentences) {
    if (!seen.insert(s.id).second)
      throw Error(ErrorCode::kMalformedInput, "duplicate sentence id " + s.id,
                  s.id, -1);
  }
}

std::vector<Mention> extract_mentions(const Sentence& sentence) {
  std::vector<Mention> mentions;
  const int n = static_cast<int>(sentence.tokens.size());
  int i = 0;
  while (i < n) {
    const std::string& tag = sentence.tokens[i].entity_tag;
    if (bio_prefix(tag) == 'O') {
      ++i;
      continue;
    }
    Mention m;
    m.sentence_id = sentence.id;
    m.start = i;
    m.entity_type = std::string(bio_type(tag));
    int j = i + 1;
    while (j < n && bio_prefix(sentence.tokens[j].entity_tag) == 'I' &&
           bio_type(sentence.tokens[j].entity_tag) == m.entity_type)
      ++j;
    m.end = j - 1;
    m.head_token = m.start;
    for (int k = m.start; k <= m.end; ++k) {
      int h = sentence.tokens[k].head;
      if (h < m.start || h > m.end) {
        m.head_token = k;
        break;
      }
    }
    mentions.push_back(std::move(m));
    i = j;
  }
  return mentions;
}

// ---- CoNLL-U -------------------------------------------------------------

namespace {

struct PendingSentence {
  Sentence sentence;
  std::vector<long> lines;  // source line of each token
  long first_line = 0;
  std::optional<Diagnostic> error;
  ErrorCode code = ErrorCode::kMalformedInput;
};

std::string ner_from_misc(std::string_view misc) {
  if (misc == "_") return "O";
  for (auto entry : split(misc, '|')) {
    if (entry.substr(0, 4) == "NER=") return std::string(entry.substr(4));
  }
  return "O";
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

std::vector<Sentence> parse_conllu(std::istream& in, ParseMode mode,
                                   std::vector<Diagnostic>* skipped) {
  std::vector<Sentence> out;
  PendingSentence cur;
  bool open = false;
  long line_no = 0;
  std::size_t ordinal = 0;
  std::unordered_set<std::string> seen_ids;

  auto fail = [&](long line, std::string message) {
    if (!cur.error) cur.error = Diagnostic{"", line, std::move(message)};
  };

  auto finish = [&]() {
    if (!open) return;
    open = false;
    ++ordinal;
    Sentence& s = cur.sentence;
    if (s.id.empty()) s.id = "s" + std::to_string(ordinal);
    if (!cur.error && !seen_ids.insert(s.id).second)
      cur.error = Diagnostic{"", cur.first_line, "duplicate sentence id " + s.id};
    if (!cur.error) {
      if (auto v = find_violation(s)) {
        long line = v->token >= 0 && v->token < static_cast<int>(cur.lines.size())
                        ? cur.lines[v->token]
                        : cur.first_line;
        cur.error = Diagnostic{"", line, v->message};
        cur.code = v->code;
      }
    }
    if (cur.error) {
      cur.error->sentence_id = s.id;
      if (mode == ParseMode::kStrict) {
        throw Error(cur.code,
                    "sentence " + s.id + ", line " +
                        std::to_string(cur.error->line) + ": " +
                        cur.error->message,
                    s.id, cur.error->line);
      }
      if (skipped) skipped->push_back(*cur.error);
    } else {
      out.push_back(std::move(s));
    }
    cur = PendingSentence{};
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      finish();
      continue;
    }
    if (!open) {
      open = true;
      cur.first_line = line_no;
    }
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = trim(body.substr(0, eq));
      auto value = trim(body.substr(eq + 1));
      if (key == "sent_id") cur.sentence.id = std::string(value);
      else if (key == "source") cur.sentence.source = std::string(value);
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      fail(line_no, "wrong column count (" + std::to_string(cols.size()) +
                        ", expected 10)");
      continue;
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
    auto id = parse_int(cols[0]);
    auto head = parse_int(cols[6]);
    if (!id || !head) {
      fail(line_no, "non-numeric ID or HEAD");
      continue;
    }
    Token t;
    t.index = *id - 1;
    if (t.index != static_cast<int>(cur.sentence.tokens.size())) {
      fail(line_no, "token ID out of sequence");
      continue;
    }
    t.word = std::string(cols[1]);
    t.lemma = std::string(cols[2]);
    t.upos = std::string(cols[3]);
    t.xpos = std::string(cols[4]);
    t.head = *head - 1;
    t.dep_label = std::string(cols[7]);
    t.entity_tag = ner_from_misc(cols[9]);
    cur.sentence.tokens.push_back(std::move(t));
    cur.lines.push_back(line_no);
  }
  finish();
  return out;
}

std::vector<Sentence> parse_conllu(std::string_view text, ParseMode mode,
                                   std::vector<Diagnostic>* skipped) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, mode, skipped);
}

void write_conllu(std::ostream& out, const Sentence& sentence) {
  out << "# sent_id = " << sentence.id << '\n';
  if (!sentence.source.empty()) out << "# source = " << sentence.source << '\n';
  out << "# text = " << sentence.text() << '\n';
  for (const auto& t : sentence.tokens) {
    out << t.index + 1 << '\t' << t.word << '\t' << t.lemma << '\t' << t.upos
        << '\t' << (t.xpos.empty() ? "_" : t.xpos) << "\t_\t" << t.head + 1
        << '\t' << t.dep_label << "\t_\t";
    if (t.entity_tag == "O") out << '_';
    else out << "NER=" << t.entity_tag;
    out << '\n';
  }
  out << '\n';
}

std::string to_conllu(std::span<const Sentence> sentences) {
  std::ostringstream out;
  for (const auto& s : sentences) write_conllu(out, s);
  return out.str();
}

// ---- Snapshots -----------------------------------------------------------

namespace {

constexpr std::string_view kSnapshotFormat = "synsearch-corpus";

json sentence_to_json(const Sentence& s) {
  json tokens = json::array();
  for (const auto& t : s.tokens) {
    tokens.push_back({t.word, t.lemma, t.upos, t.xpos, t.entity_tag, t.head,
                      t.dep_label});
  }
  return {{"id", s.id}, {"source", s.source}, {"tokens", std::move(tokens)}};
}

Sentence sentence_from_json(const json& j) {
  Sentence s;
  s.id = j.at("id").get<std::string>();
  s.source = j.value("source", "");
  int i = 0;
  for (const auto& row : j.at("tokens")) {
    Token t;
    t.index = i++;
    t.word = row.at(0).get<std::string>();
    t.lemma = row.at(1).get<std::string>();
    t.upos = row.at(2).get<std::string>();
    t.xpos = row.at(3).get<std::string>();
    t.entity_tag = row.at(4).get<std::string>();
    t.head = row.at(5).get<int>();
    t.dep_label = row.at(6).get<std::string>();
    s.tokens.push_back(std::move(t));
  }
  return s;
}

}  // namespace

void write_snapshot(std::ostream& out, std::span<const Sentence> sentences) {
  json header = {{"format", kSnapshotFormat},
                 {"version", kCorpusSnapshotVersion},
                 {"sentences", sentences.size()}};
  out << header.dump() << '\n';
  for (const auto& s : sentences) out << sentence_to_json(s).dump() << '\n';
}

std::vector<Sentence> read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kVersionMismatch, "corpus snapshot: missing header");
  json header = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!header.is_object() || header.value("format", "") != kSnapshotFormat ||
      header.value("version", -1) != kCorpusSnapshotVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "corpus snapshot: unsupported or corrupted header (expected " +
                    std::string(kSnapshotFormat) + " version " +
                    std::to_string(kCorpusSnapshotVersion) + ")");
  }
  auto expected = header.value("sentences", std::size_t{0});
  std::vector<Sentence> out;
  out.reserve(expected);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(ErrorCode::kMalformedInput,
                  "corpus snapshot: bad record at line " + std::to_string(line_no),
                  "", line_no);
    try {
      out.push_back(sentence_from_json(j));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  "corpus snapshot: bad record at line " +
                      std::to_string(line_no) + ": " + e.what(),
                  "", line_no);
    }
    validate(out.back());
  }
  if (out.size() != expected)
    throw Error(ErrorCode::kMalformedInput,
                "corpus snapshot: truncated (header promises " +
                    std::to_string(expected) + " sentences, found " +
                    std::to_string(out.size()) + ")");
  return out;
}

void save_corpus(std::span<const Sentence> sentences,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_snapshot(out, sentences);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<Sentence> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return read_snapshot(in);
}

std::uint64_t corpus_hash(std::span<const Sentence> sentences) {
  std::ostringstream out;
  write_snapshot(out, sentences);
  Fnv1a h;
  h.update(out.str());
  return h.digest();
}

}  // namespace synsearch

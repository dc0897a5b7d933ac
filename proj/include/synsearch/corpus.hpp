#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synsearch {

struct Token {
  int index = 0;
  std::string word;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string entity_tag = "O";  // BIO tag, e.g. B-PER, I-ORG, O
  int head = -1;                 // 0-based; -1 for the root
  std::string dep_label;

  // XPOS when the corpus provides one, otherwise UPOS.
  const std::string& pos() const {
    return xpos.empty() || xpos == "_" ? upos : xpos;
  }

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::string source;

  std::size_t size() const { return tokens.size(); }
  std::string text() const;

  bool operator==(const Sentence&) const = default;
};

/// A maximal BIO run. `start`/`end` are inclusive token indices.
struct Mention {
  std::string sentence_id;
  int start = 0;
  int end = 0;
  std::string entity_type;
  int head_token = 0;

  bool contains(int token) const { return token >= start && token <= end; }
  bool operator==(const Mention&) const = default;
};

// Splits a BIO tag into its prefix ('B', 'I' or 'O') and type.
char bio_prefix(std::string_view tag);
std::string_view bio_type(std::string_view tag);

/// Checks every Sentence invariant: token indices, head range, single root,
/// acyclicity and BIO well-formedness. Throws Error on the first violation.
void validate(const Sentence& sentence);

/// Throws if two sentences share an id.
void validate_unique_ids(std::span<const Sentence> sentences);

std::vector<Mention> extract_mentions(const Sentence& sentence);

// ---- CoNLL-U -------------------------------------------------------------

enum class ParseMode { kStrict, kLenient };

struct Diagnostic {
  std::string sentence_id;
  long line = 0;
  std::string message;
};

/// Reads CoNLL-U. NER tags ride in MISC as `NER=B-PER`; a missing entry is O.
/// Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped. In
/// lenient mode invalid sentences are dropped and reported via `skipped`.
std::vector<Sentence> parse_conllu(std::istream& in,
                                   ParseMode mode = ParseMode::kStrict,
                                   std::vector<Diagnostic>* skipped = nullptr);
std::vector<Sentence> parse_conllu(std::string_view text,
                                   ParseMode mode = ParseMode::kStrict,
                                   std::vector<Diagnostic>* skipped = nullptr);

void write_conllu(std::ostream& out, const Sentence& sentence);
std::string to_conllu(std::span<const Sentence> sentences);

// ---- Snapshots -----------------------------------------------------------

inline constexpr int kCorpusSnapshotVersion = 1;

void write_snapshot(std::ostream& out, std::span<const Sentence> sentences);
std::vector<Sentence> read_snapshot(std::istream& in);

void save_corpus(std::span<const Sentence> sentences,
                 const std::filesystem::path& path);
std::vector<Sentence> load_corpus(const std::filesystem::path& path);

/// Fingerprint of the canonical snapshot encoding; recorded by indexes.
std::uint64_t corpus_hash(std::span<const Sentence> sentences);

}  // namespace synsearch

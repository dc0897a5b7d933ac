#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "synsearch/corpus.hpp"
#include "synsearch/pattern.hpp"

namespace synsearch {

/// Inclusive token range.
struct Span {
  int start = 0;
  int end = 0;

  bool overlaps(const Span& o) const { return start <= o.end && o.start <= end; }
  auto operator<=>(const Span&) const = default;
};

struct Match {
  std::string sentence_id;
  std::uint32_t sentence = 0;  // ordinal in the corpus
  std::string pattern_id;
  std::map<std::string, Span> bindings;
  std::vector<int> tokens;  // token bound to each pattern node

  bool operator==(const Match&) const = default;
};

/// Orders matches by the root's token, then binding spans, then the full
/// node assignment.
bool match_less(const Match& a, const Match& b, int root_node);

/// All matches of `pattern` in `sentence`: one per injective node->token
/// assignment satisfying node constraints and edge labels/directions.
/// Entity-constrained nodes bind only mention head tokens. Matches whose e1
/// and e2 spans overlap are dropped.
std::vector<Match> match_pattern(const Pattern& pattern, const Sentence& sentence);
std::vector<Match> match_pattern(const Pattern& pattern, const Sentence& sentence,
                                 std::span<const Mention> mentions,
                                 std::uint32_t ordinal = 0);

enum class Attribute : std::uint8_t { kWord, kLemma, kPos, kEntityType, kDepLabel };
inline constexpr std::size_t kAttributeCount = 5;
std::string_view attribute_name(Attribute a);

struct Posting {
  std::uint32_t sentence = 0;
  std::uint32_t token = 0;

  auto operator<=>(const Posting&) const = default;
};

using PostingList = std::vector<Posting>;

struct IndexMetadata {
  std::uint64_t corpus_hash = 0;
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t mention_count = 0;
  std::array<std::size_t, kAttributeCount> distinct_values{};
};

/// Immutable inverted index over a sentence store. Word and lemma values are
/// lower-cased; POS postings cover both UPOS and XPOS; entity-type postings
/// point at mention head tokens; dep-label postings point at the dependent.
class CorpusIndex {
 public:
  static CorpusIndex build(std::vector<Sentence> sentences);

  const std::vector<Sentence>& sentences() const { return *sentences_; }
  const Sentence& sentence(std::uint32_t ordinal) const { return (*sentences_)[ordinal]; }
  const std::vector<Mention>& mentions(std::uint32_t ordinal) const {
    return mentions_[ordinal];
  }
  std::optional<std::uint32_t> ordinal_of(std::string_view sentence_id) const;

  // nullptr when the value never occurs. Word and lemma lookups fold case.
  const PostingList* postings(Attribute attribute, std::string_view value) const;
  const std::unordered_map<std::string, PostingList>& postings(Attribute attribute) const {
    return postings_[static_cast<std::size_t>(attribute)];
  }

  const IndexMetadata& metadata() const { return metadata_; }

  /// Writes manifest.json, corpus.jsonl and postings.bin into `dir`.
  void save(const std::filesystem::path& dir) const;
  /// Loads a saved index; the corpus fingerprint must match the manifest.
  static CorpusIndex load(const std::filesystem::path& dir);

 private:
  CorpusIndex() = default;
  void index_sentences();

  std::shared_ptr<const std::vector<Sentence>> sentences_;
  std::vector<std::vector<Mention>> mentions_;
  std::unordered_map<std::string, std::uint32_t> ordinal_by_id_;
  std::array<std::unordered_map<std::string, PostingList>, kAttributeCount> postings_;
  IndexMetadata metadata_;
};

inline constexpr int kIndexVersion = 1;

/// Sentences that can possibly match: the intersection, over every node
/// constraint and edge label, of the sentences containing an admissible value.
/// Ascending ordinals.
std::vector<std::uint32_t> candidates(const Pattern& pattern, const CorpusIndex& index);

/// Every match across the corpus, in sentence order.
std::vector<Match> all_matches(const Pattern& pattern, const CorpusIndex& index);

struct SearchPage {
  std::size_t total = 0;
  std::vector<Match> matches;
};

SearchPage search(const Pattern& pattern, const CorpusIndex& index,
                  std::size_t limit, std::size_t offset = 0);

/// Uniform sample of `n` matches without replacement, kept in global order.
/// Deterministic for a given seed; returns every match when n >= total.
std::vector<Match> sample_matches(const Pattern& pattern, const CorpusIndex& index,
                                  std::size_t n, std::uint64_t seed);

/// JSONL record: {"sentence_id", "pattern_id", "bindings": {name: [s, e]}}.
nlohmann::ordered_json match_to_json(const Match& match);

}  // namespace synsearch

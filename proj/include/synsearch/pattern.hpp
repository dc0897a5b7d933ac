#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "synsearch/corpus.hpp"
#include "synsearch/querylang.hpp"

namespace synsearch {

using ValueSet = std::set<std::string>;

/// One node of a tree pattern. Word and lemma sets are stored lower-cased and
/// compared case-insensitively; POS and entity sets compare exactly.
struct PatternNode {
  std::optional<ValueSet> word_set;
  std::optional<ValueSet> lemma_set;
  std::optional<ValueSet> pos_set;
  std::optional<ValueSet> entity_set;
  std::optional<std::string> capture_name;
  bool expand = false;

  bool constrained() const {
    return word_set || lemma_set || pos_set || entity_set;
  }
  bool operator==(const PatternNode&) const = default;
};

struct PatternEdge {
  int parent = 0;
  int child = 0;
  std::string dep_label;

  bool operator==(const PatternEdge&) const = default;
};

/// Entity-type sets admissible for (e1, e2); empty means unconstrained.
using Signature = std::pair<ValueSet, ValueSet>;

struct Pattern {
  std::string id;
  std::vector<PatternNode> nodes;
  std::vector<PatternEdge> edges;
  Signature signature;

  int root() const;
  int capture_node(std::string_view name) const;
  std::vector<std::vector<int>> children() const;
  bool operator==(const Pattern&) const = default;
};

/// Throws Error(kCompile) unless nodes/edges form a rooted tree with unique
/// capture names. With `require_arguments`, e1 and e2 must each be captured.
void validate(const Pattern& pattern, bool require_arguments = true);

/// Compiles a by-example query against a dependency parse of its stripped
/// sentence. The pattern spans the minimal connecting subgraph of the capture
/// and anchor tokens; unmarked tokens on that subgraph are pinned by lemma.
Pattern compile(const QueryExample& query, const Sentence& parse);

/// Builds the query that marks the two mentions (by their head tokens, typed
/// and expanded) and optionally a trigger token, then compiles it.
Pattern from_annotated_sentence(const Sentence& sentence, const Mention& e1,
                                const Mention& e2,
                                std::optional<int> trigger = std::nullopt,
                                std::string id = {});

nlohmann::ordered_json to_json(const Pattern& pattern);
Pattern pattern_from_json(const nlohmann::json& j);

/// Reads either a single pattern object or an array of them.
std::vector<Pattern> patterns_from_json(const nlohmann::json& j);

}  // namespace synsearch

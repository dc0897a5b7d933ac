#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace synsearch {

// By-example query markup. One element per whitespace-separated unit:
//
//   element         := ["<>"] [name ":"] ["[" constraint-list "]"] surface
//                    | "$" surface
//   constraint-list := constraint ("," constraint)*
//   constraint      := key | key "=" value ("|" value)*
//   key             := "w" | "l" | "t" | "e"
//
// `name:` makes the element a capture, `<>` asks for the capture to be
// expanded to its mention span or subtree, and `$word` is an uncaptured
// anchor that must match verbatim. A bare key takes its value from the
// example token itself.

enum class ConstraintKey { kWord, kLemma, kPos, kEntity };

char constraint_key_char(ConstraintKey key);

struct Constraint {
  ConstraintKey key = ConstraintKey::kWord;
  std::vector<std::string> values;
  bool bare = false;

  bool operator==(const Constraint&) const = default;
};

enum class ElementRole { kContext, kAnchor, kCapture };

std::string_view role_name(ElementRole role);

struct QueryElement {
  std::string surface;
  ElementRole role = ElementRole::kContext;
  std::string capture_name;
  bool expand = false;
  std::vector<Constraint> constraints;

  const Constraint* find(ConstraintKey key) const;
  bool operator==(const QueryElement&) const = default;
};

struct QueryExample {
  std::string id;
  std::string raw;
  std::vector<QueryElement> elements;

  // Element index of the capture with the given name, or -1.
  int capture_index(std::string_view name) const;
  bool operator==(const QueryExample&) const = default;
};

/// Parses one query. Throws Error(kQuerySyntax) with the byte offset of the
/// offending unit in `position()`.
QueryExample parse_query(std::string_view text, std::string id = {});

/// Canonical serialization; parse_query(render(q)) == q up to `raw`.
std::string render(const QueryExample& query);

/// The example sentence with all markup removed.
std::string strip(const QueryExample& query);

using TriggerMap = std::map<std::string, std::vector<std::string>>;

/// Replaces the w/l constraint values of capture elements whose surface is a
/// key of `triggers` (case-insensitive). Keys that match no eligible element
/// are reported in `warnings` when provided.
QueryExample expand_triggers(const QueryExample& query,
                             const TriggerMap& triggers,
                             std::vector<std::string>* warnings = nullptr);

/// Query file: one query per line, `#` comments, optional `id<TAB>` prefix.
/// Lines without an id are named `q<line number>`.
std::vector<QueryExample> read_query_file(std::istream& in);

/// Trigger map JSON: {"word": ["alt", ...], ...}.
TriggerMap parse_trigger_map(std::string_view json_text);

}  // namespace synsearch

#include "synsearch/pattern.hpp"

#include <algorithm>
#include <map>

#include "synsearch/error.hpp"
#include "synsearch/steiner.hpp"
#include "synsearch/text.hpp"

namespace synsearch {

using nlohmann::json;
using nlohmann::ordered_json;

int Pattern::root() const {
  std::vector<char> has_parent(nodes.size(), 0);
  for (const auto& e : edges) has_parent[e.child] = 1;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!has_parent[i]) return static_cast<int>(i);
  return -1;
}

int Pattern::capture_node(std::string_view name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].capture_name && *nodes[i].capture_name == name)
      return static_cast<int>(i);
  return -1;
}

std::vector<std::vector<int>> Pattern::children() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (const auto& e : edges) out[e.parent].push_back(e.child);
  return out;
}

void validate(const Pattern& pattern, bool require_arguments) {
  const int n = static_cast<int>(pattern.nodes.size());
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kCompile, "pattern " + pattern.id + ": " + why);
  };
  if (n == 0) fail("no nodes");
  if (static_cast<int>(pattern.edges.size()) != n - 1)
    fail("edge count must be node count - 1");
  std::vector<int> parent(n, -1);
  for (const auto& e : pattern.edges) {
    if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n)
      fail("edge endpoint out of range");
    if (e.parent == e.child) fail("self-loop edge");
    if (parent[e.child] != -1) fail("node with two parents");
    parent[e.child] = e.parent;
  }
  std::vector<int> heads(parent.begin(), parent.end());
  try {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    if (static_cast<int>(minimal_connecting_subgraph(heads, all).size()) != n)
      fail("edges do not form a tree");
  } catch (const Error&) {
    fail("edges do not form a tree");
  }
  std::map<std::string, int> names;
  for (const auto& node : pattern.nodes)
    if (node.capture_name && names[*node.capture_name]++)
      fail("duplicate capture " + *node.capture_name);
  if (require_arguments && (!names.count("e1") || !names.count("e2")))
    fail("e1 and e2 must both be captured");
}

namespace {

ValueSet lowered(const std::vector<std::string>& values) {
  ValueSet out;
  for (const auto& v : values) out.insert(to_lower(v));
  return out;
}

std::string lemma_or_word(const Token& t) {
  if (t.lemma.empty() || t.lemma == "_") return to_lower(t.word);
  return to_lower(t.lemma);
}

}  // namespace

Pattern compile(const QueryExample& query, const Sentence& parse) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kCompile, "query " + query.id + ": " + why);
  };
  if (query.capture_index("e1") < 0 || query.capture_index("e2") < 0)
    throw fail("missing e1/e2");
  if (parse.tokens.size() != query.elements.size())
    throw fail("alignment failure: query has " +
               std::to_string(query.elements.size()) + " elements, parse has " +
               std::to_string(parse.tokens.size()) + " tokens");
  for (std::size_t i = 0; i < parse.tokens.size(); ++i) {
    if (!iequals(parse.tokens[i].word, query.elements[i].surface))
      throw fail("alignment failure at element " + std::to_string(i) + ": '" +
                 query.elements[i].surface + "' vs parse token '" +
                 parse.tokens[i].word + "'");
  }

  const auto mentions = extract_mentions(parse);
  std::vector<const Mention*> mention_of(parse.tokens.size(), nullptr);
  for (const auto& m : mentions)
    for (int k = m.start; k <= m.end; ++k) mention_of[k] = &m;

  // Marked token -> query element. Entity-constrained captures anchor at the
  // head of the mention they fall in.
  std::map<int, int> element_at;
  for (std::size_t i = 0; i < query.elements.size(); ++i) {
    const auto& el = query.elements[i];
    if (el.role == ElementRole::kContext) continue;
    int token = static_cast<int>(i);
    if (el.find(ConstraintKey::kEntity) && mention_of[token])
      token = mention_of[token]->head_token;
    if (!element_at.emplace(token, static_cast<int>(i)).second)
      throw fail("elements '" + query.elements[element_at[token]].surface +
                 "' and '" + el.surface + "' resolve to the same token");
  }

  std::vector<int> heads(parse.tokens.size());
  for (std::size_t i = 0; i < parse.tokens.size(); ++i)
    heads[i] = parse.tokens[i].head;
  std::vector<int> marked;
  for (const auto& [token, _] : element_at) marked.push_back(token);
  const std::vector<int> kept = minimal_connecting_subgraph(heads, marked);

  Pattern p;
  p.id = query.id;
  std::map<int, int> node_of;
  for (int token : kept) {
    node_of[token] = static_cast<int>(p.nodes.size());
    const Token& tok = parse.tokens[token];
    PatternNode node;
    auto it = element_at.find(token);
    if (it == element_at.end()) {
      node.lemma_set = ValueSet{lemma_or_word(tok)};
    } else {
      const auto& el = query.elements[it->second];
      if (el.role == ElementRole::kAnchor) {
        node.word_set = ValueSet{to_lower(el.surface)};
      } else {
        node.capture_name = el.capture_name;
        node.expand = el.expand;
        for (const auto& c : el.constraints) {
          switch (c.key) {
            case ConstraintKey::kWord:
              node.word_set = c.bare ? ValueSet{to_lower(tok.word)} : lowered(c.values);
              break;
            case ConstraintKey::kLemma:
              node.lemma_set = c.bare ? ValueSet{lemma_or_word(tok)} : lowered(c.values);
              break;
            case ConstraintKey::kPos:
              node.pos_set = c.bare ? ValueSet{tok.pos()}
                                    : ValueSet(c.values.begin(), c.values.end());
              break;
            case ConstraintKey::kEntity:
              if (c.bare) {
                if (!mention_of[token])
                  throw fail("bare entity constraint on '" + el.surface +
                             "', which is not part of a mention");
                node.entity_set = ValueSet{mention_of[token]->entity_type};
              } else {
                node.entity_set = ValueSet(c.values.begin(), c.values.end());
              }
              break;
          }
        }
      }
    }
    p.nodes.push_back(std::move(node));
  }
  for (int token : kept) {
    int head = parse.tokens[token].head;
    if (head >= 0 && node_of.count(head))
      p.edges.push_back({node_of[head], node_of[token], parse.tokens[token].dep_label});
  }
  for (int which = 0; which < 2; ++which) {
    const auto& node = p.nodes[p.capture_node(which == 0 ? "e1" : "e2")];
    ValueSet types = node.entity_set.value_or(ValueSet{});
    (which == 0 ? p.signature.first : p.signature.second) = std::move(types);
  }
  validate(p);
  return p;
}

Pattern from_annotated_sentence(const Sentence& sentence, const Mention& e1,
                                const Mention& e2, std::optional<int> trigger,
                                std::string id) {
  const int n = static_cast<int>(sentence.tokens.size());
  for (const Mention* m : {&e1, &e2}) {
    if (m->start < 0 || m->end >= n || m->start > m->end ||
        !m->contains(m->head_token) ||
        (!m->sentence_id.empty() && m->sentence_id != sentence.id))
      throw Error(ErrorCode::kInvalidArgument,
                  "mention does not belong to sentence " + sentence.id);
  }
  if (trigger) {
    if (*trigger < 0 || *trigger >= n)
      throw Error(ErrorCode::kInvalidArgument, "trigger index out of range");
    if (e1.contains(*trigger) || e2.contains(*trigger))
      throw Error(ErrorCode::kInvalidArgument,
                  "trigger token lies inside an argument mention");
  }
  QueryExample q;
  q.id = id.empty() ? sentence.id : std::move(id);
  for (const auto& t : sentence.tokens) {
    QueryElement el;
    el.surface = t.word;
    q.elements.push_back(std::move(el));
  }
  auto mark_argument = [&](const Mention& m, const char* name) {
    auto& el = q.elements[m.head_token];
    el.role = ElementRole::kCapture;
    el.capture_name = name;
    el.expand = true;
    el.constraints = {Constraint{ConstraintKey::kEntity, {m.entity_type}, false}};
  };
  mark_argument(e1, "e1");
  mark_argument(e2, "e2");
  if (trigger) {
    auto& el = q.elements[*trigger];
    el.role = ElementRole::kCapture;
    el.capture_name = "t";
    el.constraints = {Constraint{ConstraintKey::kLemma, {}, true}};
  }
  q.raw = render(q);
  return compile(q, sentence);
}

// ---- JSON ------------------------------------------------------------------

namespace {

ordered_json set_json(const ValueSet& s) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : s) arr.push_back(v);
  return arr;
}

std::optional<ValueSet> set_from(const json& node, const char* key) {
  if (!node.contains(key) || node.at(key).is_null()) return std::nullopt;
  ValueSet out;
  for (const auto& v : node.at(key)) out.insert(v.get<std::string>());
  return out;
}

}  // namespace

ordered_json to_json(const Pattern& pattern) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : pattern.nodes) {
    ordered_json j = ordered_json::object();
    if (n.word_set) j["word"] = set_json(*n.word_set);
    if (n.lemma_set) j["lemma"] = set_json(*n.lemma_set);
    if (n.pos_set) j["pos"] = set_json(*n.pos_set);
    if (n.entity_set) j["entity"] = set_json(*n.entity_set);
    if (n.capture_name) j["capture"] = *n.capture_name;
    j["expand"] = n.expand;
    nodes.push_back(std::move(j));
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : pattern.edges)
    edges.push_back(ordered_json{{"parent", e.parent}, {"child", e.child}, {"label", e.dep_label}});
  ordered_json captures = ordered_json::object();
  for (std::size_t i = 0; i < pattern.nodes.size(); ++i)
    if (pattern.nodes[i].capture_name) captures[*pattern.nodes[i].capture_name] = i;
  ordered_json out;
  out["id"] = pattern.id;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  out["captures"] = std::move(captures);
  out["signature"] = ordered_json{{"e1", set_json(pattern.signature.first)},
                                  {"e2", set_json(pattern.signature.second)}};
  return out;
}

Pattern pattern_from_json(const json& j) {
  Pattern p;
  try {
    p.id = j.value("id", "");
    for (const auto& jn : j.at("nodes")) {
      PatternNode n;
      n.word_set = set_from(jn, "word");
      n.lemma_set = set_from(jn, "lemma");
      n.pos_set = set_from(jn, "pos");
      n.entity_set = set_from(jn, "entity");
      if (jn.contains("capture")) n.capture_name = jn.at("capture").get<std::string>();
      n.expand = jn.value("expand", false);
      // Word and lemma comparisons are case-insensitive.
      if (n.word_set) n.word_set = lowered({n.word_set->begin(), n.word_set->end()});
      if (n.lemma_set) n.lemma_set = lowered({n.lemma_set->begin(), n.lemma_set->end()});
      p.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.value("edges", json::array()))
      p.edges.push_back({je.at("parent").get<int>(), je.at("child").get<int>(),
                         je.at("label").get<std::string>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad pattern JSON: ") + e.what());
  }
  validate(p, /*require_arguments=*/false);
  int e1 = p.capture_node("e1");
  int e2 = p.capture_node("e2");
  if (e1 >= 0) p.signature.first = p.nodes[e1].entity_set.value_or(ValueSet{});
  if (e2 >= 0) p.signature.second = p.nodes[e2].entity_set.value_or(ValueSet{});
  return p;
}

std::vector<Pattern> patterns_from_json(const json& j) {
  std::vector<Pattern> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(pattern_from_json(item));
  } else {
    out.push_back(pattern_from_json(j));
  }
  return out;
}

}  // namespace synsearch

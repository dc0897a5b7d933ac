#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "synsearch/text.hpp"

namespace synsearch::testkit {

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

const std::vector<std::string> kWords = {"a", "b", "c", "A", "d"};
const std::vector<std::string> kLemmas = {"x", "y", "z"};
const std::vector<std::string> kUpos = {"NOUN", "VERB"};
const std::vector<std::string> kXpos = {"NN", "VB", "JJ"};
const std::vector<std::string> kLabels = {"nsubj", "dobj", "amod"};
const std::vector<std::string> kTypes = {"PER", "ORG"};

struct OracleMention {
  int start, end, head;
  std::string type;
};

// Independent of extract_mentions: maximal B/I runs, head = first token
// whose parent lies outside the run.
std::vector<OracleMention> oracle_mentions(const Sentence& s) {
  std::vector<OracleMention> out;
  const int n = static_cast<int>(s.tokens.size());
  for (int i = 0; i < n;) {
    const std::string& tag = s.tokens[i].entity_tag;
    if (tag.size() < 3 || tag[0] != 'B') {
      ++i;
      continue;
    }
    const std::string type = tag.substr(2);
    int j = i + 1;
    while (j < n && s.tokens[j].entity_tag == "I-" + type) ++j;
    OracleMention m{i, j - 1, -1, type};
    for (int k = i; k < j && m.head < 0; ++k) {
      int h = s.tokens[k].head;
      if (h < i || h >= j) m.head = k;
    }
    out.push_back(m);
    i = j;
  }
  return out;
}

}  // namespace

std::vector<int> random_heads(std::mt19937_64& rng, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n, -1);
  for (int k = 1; k < n; ++k) heads[order[k]] = order[uniform(rng, 0, k - 1)];
  return heads;
}

std::vector<int> brute_force_steiner(const std::vector<int>& heads, const std::vector<int>& marked) {
  const int n = static_cast<int>(heads.size());
  std::uint32_t need = 0;
  for (int m : marked) need |= 1u << m;
  std::uint32_t best = 0;
  int best_size = n + 1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if ((mask & need) != need) continue;
    const int size = std::popcount(mask);
    if (size >= best_size) continue;
    // Connected iff exactly one member has its parent outside the set.
    int tops = 0;
    for (int v = 0; v < n; ++v)
      if ((mask >> v & 1) && (heads[v] < 0 || !(mask >> heads[v] & 1))) ++tops;
    if (tops == 1) {
      best = mask;
      best_size = size;
    }
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (best >> v & 1) out.push_back(v);
  return out;
}

Sentence random_sentence(std::mt19937_64& rng, int n, const std::string& id) {
  Sentence s;
  s.id = id;
  auto heads = random_heads(rng, n);
  for (int i = 0; i < n; ++i) {
    Token t;
    t.index = i;
    t.word = pick(rng, kWords);
    t.lemma = pick(rng, kLemmas);
    t.upos = pick(rng, kUpos);
    t.xpos = pick(rng, kXpos);
    t.head = heads[i];
    t.dep_label = heads[i] < 0 ? "root" : pick(rng, kLabels);
    s.tokens.push_back(std::move(t));
  }
  for (int i = 0; i < n;) {
    if (!chance(rng, 0.4)) {
      ++i;
      continue;
    }
    const std::string type = pick(rng, kTypes);
    const int len = std::min(uniform(rng, 1, 2), n - i);
    s.tokens[i].entity_tag = "B-" + type;
    for (int k = 1; k < len; ++k) s.tokens[i + k].entity_tag = "I-" + type;
    i += len;
    // Keep adjacent mentions apart so runs stay maximal.
    if (i < n) ++i;
  }
  return s;
}

Pattern random_pattern(std::mt19937_64& rng, const Sentence* from) {
  Pattern p;
  p.id = "rand";
  const int k = uniform(rng, 1, 4);
  if (from && !from->tokens.empty()) {
    const Sentence& s = *from;
    const int n = static_cast<int>(s.tokens.size());
    std::vector<int> chosen{uniform(rng, 0, n - 1)};
    for (int tries = 0; static_cast<int>(chosen.size()) < k && tries < 50; ++tries) {
      int v = pick(rng, chosen);
      std::vector<int> nb;
      if (s.tokens[v].head >= 0) nb.push_back(s.tokens[v].head);
      for (int c = 0; c < n; ++c)
        if (s.tokens[c].head == v) nb.push_back(c);
      if (nb.empty()) break;
      int u = pick(rng, nb);
      if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) chosen.push_back(u);
    }
    std::sort(chosen.begin(), chosen.end());
    std::map<int, int> node_of;
    for (std::size_t i = 0; i < chosen.size(); ++i) node_of[chosen[i]] = static_cast<int>(i);
    std::map<int, std::string> head_type;
    for (const auto& m : oracle_mentions(s)) head_type[m.head] = m.type;
    for (int t : chosen) {
      const Token& tok = s.tokens[t];
      PatternNode node;
      switch (uniform(rng, 0, 4)) {
        case 0: node.word_set = ValueSet{to_lower(tok.word)}; break;
        case 1: node.lemma_set = ValueSet{to_lower(tok.lemma), pick(rng, kLemmas)}; break;
        case 2: node.pos_set = ValueSet{chance(rng, 0.5) ? tok.upos : tok.xpos}; break;
        case 3:
          if (head_type.count(t)) node.entity_set = ValueSet{head_type[t]};
          break;
        default: break;
      }
      p.nodes.push_back(std::move(node));
    }
    for (int t : chosen) {
      int h = s.tokens[t].head;
      if (h >= 0 && node_of.count(h))
        p.edges.push_back({node_of[h], node_of[t], s.tokens[t].dep_label});
    }
  } else {
    auto heads = random_heads(rng, k);
    for (int i = 0; i < k; ++i) {
      PatternNode node;
      switch (uniform(rng, 0, 4)) {
        case 0: node.word_set = ValueSet{to_lower(pick(rng, kWords))}; break;
        case 1: node.lemma_set = ValueSet{pick(rng, kLemmas)}; break;
        case 2: node.pos_set = ValueSet{pick(rng, kXpos), pick(rng, kUpos)}; break;
        case 3: node.entity_set = ValueSet{pick(rng, kTypes)}; break;
        default: break;
      }
      p.nodes.push_back(std::move(node));
      if (heads[i] >= 0) p.edges.push_back({heads[i], i, pick(rng, kLabels)});
    }
  }
  const int nodes = static_cast<int>(p.nodes.size());
  std::vector<int> order(nodes);
  for (int i = 0; i < nodes; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::vector<std::string> names = {"e1", "e2", "t"};
  for (int i = 0; i < nodes && i < 3; ++i) {
    if (i >= 2 && chance(rng, 0.5)) break;
    p.nodes[order[i]].capture_name = names[i];
    p.nodes[order[i]].expand = chance(rng, 0.5);
  }
  return p;
}

std::vector<Match> brute_force_matches(const Pattern& pattern, const Sentence& sentence) {
  const int n = static_cast<int>(sentence.tokens.size());
  const int k = static_cast<int>(pattern.nodes.size());
  std::vector<Match> out;
  if (k == 0 || n == 0) return out;
  std::map<int, OracleMention> by_head;
  for (const auto& m : oracle_mentions(sentence)) by_head[m.head] = m;

  auto node_ok = [&](int node, int t) {
    const PatternNode& pn = pattern.nodes[node];
    const Token& tok = sentence.tokens[t];
    if (pn.word_set && !pn.word_set->count(to_lower(tok.word))) return false;
    if (pn.lemma_set && !pn.lemma_set->count(to_lower(tok.lemma))) return false;
    if (pn.pos_set && !pn.pos_set->count(tok.upos) && !pn.pos_set->count(tok.xpos)) return false;
    if (pn.entity_set) {
      auto it = by_head.find(t);
      if (it == by_head.end() || !pn.entity_set->count(it->second.type)) return false;
    }
    return true;
  };
  auto span_of = [&](int node, int t) -> Span {
    const PatternNode& pn = pattern.nodes[node];
    if (!pn.expand) return {t, t};
    if (pn.entity_set) return {by_head.at(t).start, by_head.at(t).end};
    Span s{t, t};
    for (int v = 0; v < n; ++v) {
      for (int u = v; u >= 0; u = sentence.tokens[u].head) {
        if (u == t) {
          s.start = std::min(s.start, v);
          s.end = std::max(s.end, v);
          break;
        }
      }
    }
    return s;
  };

  std::vector<int> a(k, 0);
  long total = 1;
  for (int i = 0; i < k; ++i) total *= n;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < k; ++i) {
      a[i] = static_cast<int>(c % n);
      c /= n;
    }
    std::set<int> distinct(a.begin(), a.end());
    if (static_cast<int>(distinct.size()) != k) continue;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) ok = node_ok(i, a[i]);
    for (const auto& e : pattern.edges) {
      if (!ok) break;
      const Token& child = sentence.tokens[a[e.child]];
      ok = child.head == a[e.parent] && child.dep_label == e.dep_label;
    }
    if (!ok) continue;
    Match m;
    m.sentence_id = sentence.id;
    m.pattern_id = pattern.id;
    m.tokens = a;
    for (int i = 0; i < k; ++i)
      if (pattern.nodes[i].capture_name) m.bindings[*pattern.nodes[i].capture_name] = span_of(i, a[i]);
    if (m.bindings.count("e1") && m.bindings.count("e2") &&
        m.bindings["e1"].overlaps(m.bindings["e2"]))
      continue;
    out.push_back(std::move(m));
  }
  const int root = pattern.root();
  std::sort(out.begin(), out.end(),
            [root](const Match& x, const Match& y) { return match_less(x, y, root); });
  return out;
}

}  // namespace synsearch::testkit

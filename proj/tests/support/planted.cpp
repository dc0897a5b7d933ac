#include "planted.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <random>

namespace synsearch::testkit {

namespace {

const std::vector<std::string> kFirst = {"Mary", "Paul", "John", "Anna", "Tim", "Sara",
                                         "Omar", "Lena", "Ravi", "Chen", "Ines", "Hugo"};
const std::vector<std::string> kLast = {"Allen", "Smith", "Okafor", "Novak", "Berg", "Tanaka"};
const std::vector<std::string> kOrg = {"Microsoft", "Acme", "Globex", "Initech",
                                       "Umbrella", "Hooli", "Vandelay", "Wonka"};
const std::vector<std::string> kOrgSuffix = {"Corp", "Inc", "Labs"};

struct Verb {
  std::string word;
  std::string lemma;
  std::string past_participle;
};

const std::vector<Verb> kUncoveredVerbs = {{"established", "establish", "established"},
                                           {"created", "create", "created"},
                                           {"launched", "launch", "launched"},
                                           {"started", "start", "started"},
                                           {"formed", "form", "formed"}};
const std::vector<std::string> kUncoveredNouns = {"co-founder", "creator", "cofounder"};

struct Entity {
  int head = 0;
  Span span;
};

class Builder {
 public:
  int add(std::string word, std::string lemma, std::string upos, std::string xpos,
          std::string ner = "O") {
    Token t;
    t.index = static_cast<int>(tokens_.size());
    t.word = std::move(word);
    t.lemma = std::move(lemma);
    t.upos = std::move(upos);
    t.xpos = std::move(xpos);
    t.entity_tag = std::move(ner);
    tokens_.push_back(std::move(t));
    return tokens_.back().index;
  }
  int word(const std::string& w, const std::string& lemma, const std::string& upos,
           const std::string& xpos) {
    return add(w, lemma, upos, xpos);
  }
  int punct(const std::string& p) { return add(p, p, "PUNCT", p); }
  void attach(int child, int parent, std::string label) {
    tokens_[child].head = parent;
    tokens_[child].dep_label = std::move(label);
  }
  void root(int t) { attach(t, -1, "root"); }

  Sentence finish(std::string id) {
    Sentence s;
    s.id = std::move(id);
    s.tokens = std::move(tokens_);
    tokens_.clear();
    return s;
  }

 private:
  std::vector<Token> tokens_;
};

class Planter {
 public:
  explicit Planter(const PlantOptions& o) : opts_(o), rng_(o.seed) {}

  const std::string& pick(const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }
  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

  Entity person(Builder& b) {
    if (opts_.multi_token_names && coin()) {
      int first = b.add(pick(kFirst), "", "PROPN", "NNP", "B-PER");
      int last = b.add(pick(kLast), "", "PROPN", "NNP", "I-PER");
      b.attach(first, last, "compound");
      return {last, {first, last}};
    }
    int t = b.add(pick(kFirst), "", "PROPN", "NNP", "B-PER");
    return {t, {t, t}};
  }

  Entity org(Builder& b) {
    if (opts_.multi_token_names && coin()) {
      int name = b.add(pick(kOrg), "", "PROPN", "NNP", "B-ORG");
      int suffix = b.add(pick(kOrgSuffix), "", "PROPN", "NNP", "I-ORG");
      b.attach(name, suffix, "compound");
      return {suffix, {name, suffix}};
    }
    int t = b.add(pick(kOrg), "", "PROPN", "NNP", "B-ORG");
    return {t, {t, t}};
  }

  void year(Builder& b, int attach_to) {
    int in = b.word("in", "in", "ADP", "IN");
    int y = b.add(std::to_string(std::uniform_int_distribution<int>(1900, 2020)(rng_)), "", "NUM",
                  "CD", "B-DATE");
    b.attach(in, y, "case");
    b.attach(y, attach_to, "nmod");
  }

  // Fill in lemmas of proper nouns and numbers from their surface.
  static void finish_lemmas(Sentence& s) {
    for (auto& t : s.tokens)
      if (t.lemma.empty()) t.lemma = t.word;
  }

  // PER <verb> ORG [in YEAR] .
  PlantedPair active(Builder& b, const Verb& v) {
    Entity per = person(b);
    int verb = b.word(v.word, v.lemma, "VERB", "VBD");
    Entity o = org(b);
    b.root(verb);
    b.attach(per.head, verb, "nsubj");
    b.attach(o.head, verb, "dobj");
    if (coin()) year(b, verb);
    b.attach(b.punct("."), verb, "punct");
    return {"", o.span, per.span, Label::kPositive, "active", false};
  }

  // ORG was <verb> by PER .
  PlantedPair passive(Builder& b, const Verb& v) {
    Entity o = org(b);
    int was = b.word("was", "be", "AUX", "VBD");
    int verb = b.word(v.past_participle, v.lemma, "VERB", "VBN");
    int by = b.word("by", "by", "ADP", "IN");
    Entity per = person(b);
    b.root(verb);
    b.attach(o.head, verb, "nsubjpass");
    b.attach(was, verb, "auxpass");
    b.attach(by, per.head, "case");
    b.attach(per.head, verb, "nmod");
    b.attach(b.punct("."), verb, "punct");
    return {"", o.span, per.span, Label::kPositive, "passive", false};
  }

  // ORG <noun> PER likes running .
  PlantedPair possessive(Builder& b, const std::string& noun) {
    Entity o = org(b);
    int n = b.word(noun, noun, "NOUN", "NN");
    Entity per = person(b);
    int likes = b.word("likes", "like", "VERB", "VBZ");
    int running = b.word("running", "run", "VERB", "VBG");
    b.root(likes);
    b.attach(o.head, n, "compound");
    b.attach(n, per.head, "compound");
    b.attach(per.head, likes, "nsubj");
    b.attach(running, likes, "xcomp");
    b.attach(b.punct("."), likes, "punct");
    return {"", o.span, per.span, Label::kPositive, "possessive", false};
  }

  // Typed ORG/PER sentences that do not express founded-by.
  void negative(Builder& b) {
    switch (std::uniform_int_distribution<int>(0, 5)(rng_)) {
      case 0: {  // PER visited ORG .
        Entity per = person(b);
        int v = b.word("visited", "visit", "VERB", "VBD");
        Entity o = org(b);
        b.root(v);
        b.attach(per.head, v, "nsubj");
        b.attach(o.head, v, "dobj");
        b.attach(b.punct("."), v, "punct");
        break;
      }
      case 1: {  // PER joined ORG in YEAR .
        Entity per = person(b);
        int v = b.word("joined", "join", "VERB", "VBD");
        Entity o = org(b);
        b.root(v);
        b.attach(per.head, v, "nsubj");
        b.attach(o.head, v, "dobj");
        year(b, v);
        b.attach(b.punct("."), v, "punct");
        break;
      }
      case 2: {  // ORG hired PER .
        Entity o = org(b);
        int v = b.word("hired", "hire", "VERB", "VBD");
        Entity per = person(b);
        b.root(v);
        b.attach(o.head, v, "nsubj");
        b.attach(per.head, v, "dobj");
        b.attach(b.punct("."), v, "punct");
        break;
      }
      case 3: {  // PER founded a company near ORG .
        Entity per = person(b);
        int v = b.word("founded", "found", "VERB", "VBD");
        int a = b.word("a", "a", "DET", "DT");
        int company = b.word("company", "company", "NOUN", "NN");
        int near = b.word("near", "near", "ADP", "IN");
        Entity o = org(b);
        b.root(v);
        b.attach(per.head, v, "nsubj");
        b.attach(a, company, "det");
        b.attach(company, v, "dobj");
        b.attach(near, o.head, "case");
        b.attach(o.head, company, "nmod");
        b.attach(b.punct("."), v, "punct");
        break;
      }
      case 4: {  // PER and PER met at ORG and ORG .
        Entity p1 = person(b);
        int and1 = b.word("and", "and", "CCONJ", "CC");
        Entity p2 = person(b);
        int met = b.word("met", "meet", "VERB", "VBD");
        int at = b.word("at", "at", "ADP", "IN");
        Entity o1 = org(b);
        int and2 = b.word("and", "and", "CCONJ", "CC");
        Entity o2 = org(b);
        b.root(met);
        b.attach(p1.head, met, "nsubj");
        b.attach(and1, p1.head, "cc");
        b.attach(p2.head, p1.head, "conj");
        b.attach(at, o1.head, "case");
        b.attach(o1.head, met, "nmod");
        b.attach(and2, o1.head, "cc");
        b.attach(o2.head, o1.head, "conj");
        b.attach(b.punct("."), met, "punct");
        break;
      }
      default: {  // ORG critic PER likes running .
        Entity o = org(b);
        int n = b.word("critic", "critic", "NOUN", "NN");
        Entity per = person(b);
        int likes = b.word("likes", "like", "VERB", "VBZ");
        int running = b.word("running", "run", "VERB", "VBG");
        b.root(likes);
        b.attach(o.head, n, "compound");
        b.attach(n, per.head, "compound");
        b.attach(per.head, likes, "nsubj");
        b.attach(running, likes, "xcomp");
        b.attach(b.punct("."), likes, "punct");
        break;
      }
    }
  }

  void spouse(Builder& b) {
    static const std::vector<Verb> verbs = {
        {"married", "marry", ""}, {"wed", "wed", ""}, {"divorced", "divorce", ""}};
    const Verb& v = verbs[std::uniform_int_distribution<std::size_t>(0, verbs.size() - 1)(rng_)];
    Entity a = person(b);
    int verb = b.word(v.word, v.lemma, "VERB", "VBD");
    Entity c = person(b);
    b.root(verb);
    b.attach(a.head, verb, "nsubj");
    b.attach(c.head, verb, "dobj");
    b.attach(b.punct("."), verb, "punct");
  }

  void death(Builder& b) {
    static const std::vector<Verb> verbs = {
        {"died", "die", ""}, {"perished", "perish", ""}, {"succumbed", "succumb", ""}};
    const Verb& v = verbs[std::uniform_int_distribution<std::size_t>(0, verbs.size() - 1)(rng_)];
    Entity a = person(b);
    int verb = b.word(v.word, v.lemma, "VERB", "VBD");
    b.root(verb);
    b.attach(a.head, verb, "nsubj");
    year(b, verb);
    b.attach(b.punct("."), verb, "punct");
  }

  void filler(Builder& b) {
    Entity a = person(b);
    int likes = b.word("likes", "like", "VERB", "VBZ");
    int running = b.word("running", "run", "VERB", "VBG");
    b.root(likes);
    b.attach(a.head, likes, "nsubj");
    b.attach(running, likes, "xcomp");
    b.attach(b.punct("."), likes, "punct");
  }

  PlantedCorpus run() {
    enum Kind { kActive, kPassive, kPossessive, kUncovered, kNegative, kSpouse, kDeath, kFiller };
    std::vector<Kind> plan;
    auto push = [&](Kind k, std::size_t n) { plan.insert(plan.end(), n, k); };
    push(kActive, opts_.active);
    push(kPassive, opts_.passive);
    push(kPossessive, opts_.possessive);
    push(kUncovered, opts_.uncovered);
    push(kNegative, opts_.negative_sentences);
    push(kSpouse, opts_.spouse);
    push(kDeath, opts_.death);
    push(kFiller, opts_.filler);
    std::shuffle(plan.begin(), plan.end(), rng_);

    PlantedCorpus out;
    std::size_t negative_pairs = 0;
    auto emit = [&](Kind kind) {
      Builder b;
      std::optional<PlantedPair> pair;
      switch (kind) {
        case kActive: pair = active(b, {"founded", "found", "founded"}); break;
        case kPassive: pair = passive(b, {"founded", "found", "founded"}); break;
        case kPossessive: pair = possessive(b, "founder"); break;
        case kUncovered:
          switch (std::uniform_int_distribution<int>(0, 2)(rng_)) {
            case 0: pair = active(b, kUncoveredVerbs[std::uniform_int_distribution<std::size_t>(0, 4)(rng_)]); break;
            case 1: pair = passive(b, kUncoveredVerbs[std::uniform_int_distribution<std::size_t>(0, 4)(rng_)]); break;
            default: pair = possessive(b, pick(kUncoveredNouns)); break;
          }
          break;
        case kNegative: negative(b); break;
        case kSpouse: spouse(b); break;
        case kDeath: death(b); break;
        case kFiller: filler(b); break;
      }
      char id[32];
      std::snprintf(id, sizeof id, "p%06zu", out.sentences.size() + 1);
      Sentence s = b.finish(id);
      finish_lemmas(s);
      if (pair) {
        pair->sentence_id = s.id;
        pair->seed_covered = kind != kUncovered;
        out.positives.push_back(*pair);
      } else if (kind == kNegative) {
        auto mentions = extract_mentions(s);
        for (const auto& o : mentions) {
          if (o.entity_type != "ORG") continue;
          for (const auto& p : mentions) {
            if (p.entity_type != "PER") continue;
            out.negatives.push_back(
                {s.id, {o.start, o.end}, {p.start, p.end}, Label::kNegative, "negative", false});
            ++negative_pairs;
          }
        }
      }
      out.sentences.push_back(std::move(s));
    };
    for (Kind k : plan) emit(k);
    while (negative_pairs < opts_.min_negative_pairs) emit(kNegative);
    return out;
  }

 private:
  PlantOptions opts_;
  std::mt19937_64 rng_;
};

}  // namespace

PlantedCorpus plant(const PlantOptions& options) { return Planter(options).run(); }

std::vector<GoldInstance> gold_instances(const PlantedCorpus& corpus, std::size_t max_negatives) {
  std::map<std::string, const Sentence*> by_id;
  for (const auto& s : corpus.sentences) by_id[s.id] = &s;
  std::vector<GoldInstance> gold;
  auto add = [&](const PlantedPair& p, std::size_t n) {
    const Sentence& s = *by_id.at(p.sentence_id);
    GoldInstance g;
    g.id = p.sentence_id + "-" + std::to_string(n);
    for (const auto& t : s.tokens) g.tokens.push_back(t.word);
    g.e1 = p.e1;
    g.e2 = p.e2;
    g.relation = "founded_by";
    g.label = p.label;
    g.parse = s;
    gold.push_back(std::move(g));
  };
  std::size_t n = 0;
  for (const auto& p : corpus.positives) add(p, n++);
  for (std::size_t i = 0; i < corpus.negatives.size() && i < max_negatives; ++i)
    add(corpus.negatives[i], n++);
  return gold;
}

}  // namespace synsearch::testkit

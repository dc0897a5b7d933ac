#include "synsearch/extractor.hpp"

#include <cstdio>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "synsearch/engine.hpp"
#include "synsearch/error.hpp"

namespace synsearch {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> firing_patterns(std::span<const Pattern> patterns,
                                         const GoldInstance& instance) {
  if (!instance.parse)
    throw Error(ErrorCode::kInvalidArgument, "gold instance " + instance.id + " has no parse");
  std::vector<std::string> out;
  if (patterns.empty()) return out;
  const auto mentions = extract_mentions(*instance.parse);
  for (const auto& p : patterns) {
    for (const auto& m : match_pattern(p, *instance.parse, mentions)) {
      auto e1 = m.bindings.find("e1");
      auto e2 = m.bindings.find("e2");
      if (e1 != m.bindings.end() && e2 != m.bindings.end() && e1->second == instance.e1 &&
          e2->second == instance.e2) {
        out.push_back(p.id);
        break;
      }
    }
  }
  return out;
}

bool classify(std::span<const Pattern> patterns, const GoldInstance& instance) {
  return !firing_patterns(patterns, instance).empty();
}

EvalReport evaluate(std::span<const Pattern> patterns, std::span<const GoldInstance> gold) {
  if (gold.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gold list");
  EvalReport r;
  for (const auto& p : patterns) r.fires[p.id] = 0;
  for (const auto& g : gold) {
    auto fired = firing_patterns(patterns, g);
    for (const auto& id : fired) ++r.fires[id];
    const bool predicted = !fired.empty();
    const bool actual = g.label == Label::kPositive;
    if (predicted && actual) ++r.tp;
    else if (predicted) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["tn"] = r.tn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  ordered_json fires = ordered_json::object();
  for (const auto& [id, n] : r.fires) fires[id] = n;
  j["fires"] = std::move(fires);
  return j;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s\n", "metric", "value");
  out << line;
  for (auto [name, v] : {std::pair{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tn", r.tn}}) {
    std::snprintf(line, sizeof line, "%-10s %8zu\n", name, v);
    out << line;
  }
  for (auto [name, v] : {std::pair{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}}) {
    std::snprintf(line, sizeof line, "%-10s %8.4f\n", name, v);
    out << line;
  }
  for (const auto& [id, n] : r.fires) {
    std::snprintf(line, sizeof line, "fires[%s] %zu\n", id.c_str(), n);
    out << line;
  }
  return out.str();
}

std::vector<GoldInstance> read_gold_jsonl(std::istream& in, std::span<const Sentence> sidecar) {
  std::unordered_map<std::string, const Sentence*> by_id;
  for (const auto& s : sidecar) by_id.emplace(s.id, &s);

  std::vector<GoldInstance> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (!j.is_object())
      throw Error(ErrorCode::kMalformedInput, "gold line " + std::to_string(line_no) + ": not a JSON object",
                  "", line_no);
    GoldInstance g;
    try {
      g.id = j.at("id").get<std::string>();
      g.relation = j.value("relation", "");
      g.label = parse_label(j.at("label").get<std::string>());
      g.tokens = j.at("tokens").get<std::vector<std::string>>();
      g.e1 = {j.at("e1").at(0).get<int>(), j.at("e1").at(1).get<int>()};
      g.e2 = {j.at("e2").at(0).get<int>(), j.at("e2").at(1).get<int>()};
      if (j.contains("conllu")) {
        auto parsed = parse_conllu(j.at("conllu").get<std::string>());
        if (parsed.size() != 1)
          throw Error(ErrorCode::kMalformedInput, "inline conllu must hold exactly one sentence");
        g.parse = std::move(parsed.front());
      } else {
        auto it = by_id.find(g.id);
        if (it == by_id.end()) it = by_id.find(j.value("sentence_id", ""));
        if (it != by_id.end()) g.parse = *it->second;
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  "gold line " + std::to_string(line_no) + ": " + e.what(), "", line_no);
    }
    const int n = static_cast<int>(g.tokens.size());
    for (const Span* s : {&g.e1, &g.e2})
      if (s->start < 0 || s->end >= n || s->start > s->end)
        throw Error(ErrorCode::kMalformedInput,
                    "gold line " + std::to_string(line_no) + ": span out of range", "", line_no);
    if (g.parse && static_cast<int>(g.parse->tokens.size()) != n)
      throw Error(ErrorCode::kMalformedInput,
                  "gold line " + std::to_string(line_no) + ": parse/token count mismatch", "", line_no);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace synsearch

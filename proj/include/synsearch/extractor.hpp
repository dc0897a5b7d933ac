#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "synsearch/bootstrap.hpp"
#include "synsearch/corpus.hpp"
#include "synsearch/pattern.hpp"

namespace synsearch {

struct GoldInstance {
  std::string id;
  std::vector<std::string> tokens;
  Span e1;
  Span e2;
  std::string relation;
  Label label = Label::kPositive;
  std::optional<Sentence> parse;
};

// Rule baseline: an instance is positive iff some pattern matches with e1/e2
// bindings exactly equal to the instance's argument spans.
bool classify(std::span<const Pattern> patterns, const GoldInstance& instance);

/// Ids of the patterns that fire on the instance's exact argument pair.
std::vector<std::string> firing_patterns(std::span<const Pattern> patterns,
                                         const GoldInstance& instance);

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, std::size_t> fires;  // per pattern, over all instances
};

EvalReport evaluate(std::span<const Pattern> patterns, std::span<const GoldInstance> gold);

nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

/// Gold JSONL: the dataset schema plus either an inline `conllu` block per
/// record or, failing that, a parse from `sidecar` whose sent_id equals the
/// record id (or its sentence_id).
std::vector<GoldInstance> read_gold_jsonl(std::istream& in,
                                          std::span<const Sentence> sidecar = {});

}  // namespace synsearch

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "synsearch/engine.hpp"
#include "synsearch/pattern.hpp"

namespace synsearch {

enum class Label { kPositive, kNegative };
std::string_view label_name(Label label);
Label parse_label(std::string_view text);

inline constexpr std::string_view kSampledNegativeSource = "sampled-negative";

/// One training instance (s, e1, e2, r) with its label.
struct DatasetExample {
  std::string id;
  std::string relation;
  Label label = Label::kPositive;
  std::string sentence_id;
  std::uint32_t sentence = 0;
  std::vector<std::string> tokens;
  Span e1;
  Span e2;
  int e1_head = -1;  // anchoring tokens, used for pair identity
  int e2_head = -1;
  std::string source;  // pattern id, or "sampled-negative"

  bool operator==(const DatasetExample&) const = default;
};

struct BootstrapConfig {
  std::string relation;
  std::vector<std::string> query_ids;  // empty: every registered pattern
  std::size_t max_positives = 100;
  std::size_t neg_ratio = 10;
  std::uint64_t seed = 0;
  std::optional<Signature> signature;
  bool include_pending = false;

  void validate() const;
};

// ---- query quality ---------------------------------------------------------

enum class Answer : std::uint8_t { kNo, kYes };
enum class Verdict { kKept, kExcluded, kPending };

std::string_view verdict_name(Verdict v);
Verdict parse_verdict(std::string_view text);
Answer parse_answer(std::string_view text);

inline constexpr std::size_t kQualitySampleSize = 5;

/// A query is excluded once more than one of its five sampled matches does
/// not express the relation; fewer than five answers leaves it pending.
Verdict quality_filter(std::span<const Answer> labels);

struct QueryQualityRecord {
  std::string pattern_id;
  std::vector<std::string> sampled;  // "<sentence_id>#<e1>:<e2>" keys
  std::vector<Answer> labels;
  Verdict verdict = Verdict::kPending;
};

// ---- dataset assembly ------------------------------------------------------

struct PositiveStats {
  std::map<std::string, std::size_t> matches_per_pattern;
  std::map<std::string, std::size_t> contributed_per_pattern;
  std::size_t total_matches = 0;
  std::size_t dedup_losses = 0;
  std::size_t unique = 0;
  std::size_t downsampled_to = 0;
};

/// Union of matches over `patterns`, one example per (sentence, e1, e2); the
/// first pattern in id order is credited. Downsampled to `max_positives`.
std::vector<DatasetExample> collect_positives(std::span<const Pattern> patterns,
                                              const CorpusIndex& index,
                                              std::size_t max_positives,
                                              std::uint64_t seed,
                                              PositiveStats* stats = nullptr);

/// Union of the e1 and e2 entity-type sets over `patterns`.
Signature relation_signature(std::span<const Pattern> patterns);

struct NegativeSample {
  std::vector<DatasetExample> examples;
  std::size_t target = 0;
  std::size_t candidates = 0;  // typed ordered mention pairs considered
  std::size_t excluded_by_pattern = 0;
  std::size_t excluded_as_positive = 0;
  std::size_t available = 0;
  std::optional<std::string> shortfall;  // set when available < target
};

/// Typed ordered mention pairs not connected by any kept pattern, sampled
/// uniformly to neg_ratio x |positives|.
NegativeSample sample_negatives(const CorpusIndex& index, const Signature& signature,
                                std::span<const Pattern> kept_patterns,
                                std::span<const DatasetExample> positives,
                                std::size_t neg_ratio, std::uint64_t seed);

struct SkippedPattern {
  std::string id;
  std::string reason;
};

struct Dataset {
  std::string relation;
  std::vector<DatasetExample> examples;  // positives first, then negatives
  std::vector<std::string> kept_patterns;
  std::vector<SkippedPattern> skipped_patterns;
  Signature signature;
  PositiveStats positive_stats;
  NegativeSample negative_stats;  // examples moved out
  std::size_t positives = 0;
  std::size_t negatives = 0;
  BootstrapConfig config;
};

/// Runs collect_positives and sample_negatives over the kept patterns named by
/// the config. `verdicts` maps pattern id to its quality verdict; patterns
/// without an entry count as kept. Excluded patterns are skipped and noted;
/// pending ones raise kConflict unless config.include_pending.
Dataset build_dataset(const BootstrapConfig& config, const CorpusIndex& index,
                      std::span<const Pattern> patterns,
                      const std::map<std::string, Verdict>& verdicts = {});

nlohmann::ordered_json example_to_json(const DatasetExample& example);
nlohmann::ordered_json stats_to_json(const Dataset& dataset);

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset);

/// Tokens with [E1start]/[E1end] and [E2start]/[E2end] around the argument
/// spans, a tab, then the label.
std::string entity_marker_line(const DatasetExample& example);
void export_entity_markers(std::ostream& out, const Dataset& dataset);

inline constexpr std::string_view kDatasetFile = "dataset.jsonl";
inline constexpr std::string_view kStatsFile = "stats.json";
inline constexpr std::string_view kMarkersFile = "entity_markers.txt";

/// Writes dataset.jsonl, stats.json and entity_markers.txt into `dir`.
void write_dataset_files(const Dataset& dataset, const std::filesystem::path& dir);

BootstrapConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const BootstrapConfig& config);

}  // namespace synsearch

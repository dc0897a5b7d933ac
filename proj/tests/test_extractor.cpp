#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "support/planted.hpp"
#include "synsearch/error.hpp"
#include "synsearch/extractor.hpp"

using namespace synsearch;

TEST(Extractor, PlantedCoverageGivesExactRecall) {
  auto planted = testkit::plant({.active = 5, .passive = 5, .possessive = 5, .uncovered = 5,
                                 .negative_sentences = 40, .seed = 8});
  auto gold = testkit::gold_instances(planted, 1000);
  auto seeds = testkit::seed_founded_patterns();
  EvalReport r = evaluate(seeds, gold);
  EXPECT_EQ(r.tp, 15u);
  EXPECT_EQ(r.fn, 5u);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.tn, planted.negatives.size());
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.75);
  EXPECT_DOUBLE_EQ(r.f1, 2 * 0.75 / 1.75);
  EXPECT_EQ(r.fires.at("founded_1") + r.fires.at("founded_2") + r.fires.at("founded_3"), 15u);
}

TEST(Extractor, RequiresExactArgumentSpans) {
  auto planted = testkit::plant({.active = 1, .multi_token_names = false, .seed = 2});
  auto gold = testkit::gold_instances(planted, 0);
  auto seeds = testkit::seed_founded_patterns();
  ASSERT_TRUE(classify(seeds, gold[0]));
  gold[0].e1.end += 1;  // now covers a token past the mention
  EXPECT_FALSE(classify(seeds, gold[0]));
  std::swap(gold[0].e1, gold[0].e2);
  EXPECT_FALSE(classify(seeds, gold[0]));
}

TEST(Extractor, DegenerateCounts) {
  std::vector<GoldInstance> none;
  auto seeds = testkit::seed_founded_patterns();
  EXPECT_THROW(evaluate(seeds, none), Error);

  auto planted = testkit::plant({.negative_sentences = 3, .seed = 2});
  auto gold = testkit::gold_instances(planted, 100);
  EvalReport r = evaluate(seeds, gold);
  EXPECT_EQ(r.tp + r.fp, 0u);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.0);
}

TEST(Extractor, ReportJsonAndText) {
  auto planted = testkit::plant({.active = 2, .negative_sentences = 2, .seed = 2});
  auto seeds = testkit::seed_founded_patterns();
  EvalReport r = evaluate(seeds, testkit::gold_instances(planted, 10));
  auto j = report_to_json(r);
  EXPECT_EQ(j["tp"], 2);
  EXPECT_EQ(j["precision"], 1.0);
  EXPECT_NE(format_report(r).find("precision"), std::string::npos);
}

TEST(GoldReader, InlineAndSidecarParses) {
  auto parses = testkit::fixture_parses();
  const Sentence& s = testkit::parse_for(parses, "founded_2");
  std::vector<Sentence> sidecar{s};
  std::string conllu = to_conllu(sidecar);
  nlohmann::json inline_rec = {{"id", "g1"},
                               {"label", "positive"},
                               {"tokens", {"Mary", "founded", "Microsoft", "."}},
                               {"e1", {2, 2}},
                               {"e2", {0, 0}},
                               {"conllu", conllu}};
  nlohmann::json sidecar_rec = {{"id", "g2"},
                                {"sentence_id", "founded_2"},
                                {"label", "negative"},
                                {"tokens", {"Mary", "founded", "Microsoft", "."}},
                                {"e1", {0, 0}},
                                {"e2", {2, 2}}};
  std::istringstream in(inline_rec.dump() + "\n\n" + sidecar_rec.dump() + "\n");
  auto gold = read_gold_jsonl(in, sidecar);
  ASSERT_EQ(gold.size(), 2u);
  ASSERT_TRUE(gold[0].parse);
  ASSERT_TRUE(gold[1].parse);
  EXPECT_EQ(gold[1].label, Label::kNegative);

  auto seeds = testkit::seed_founded_patterns();
  EvalReport r = evaluate(seeds, gold);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.tn, 1u);

  std::istringstream bad(R"({"id":"x","label":"positive","tokens":["a"],"e1":[0,3],"e2":[0,0]})");
  EXPECT_THROW(read_gold_jsonl(bad), Error);
}

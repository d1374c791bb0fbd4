// Copyright 2026 The serpaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "serpaudit/pipeline.hpp"
#include "synthetic.hpp"

namespace serpaudit {
namespace {

using testing::MarkerProvider;
using testing::make_synthetic;
using testing::SyntheticOptions;

Document marked(const std::string& engine, const std::string& query, int rank, double v) {
  return {engine, query, rank, std::nullopt, testing::marker_sentence(v, rank),
          std::nullopt, std::nullopt};
}

AuditConfig table_config() {
  AuditConfig c;
  c.cutoffs = {{10, {Metric::avg_polarity, Metric::ndcg_senti, Metric::avg_precision}}};
  c.query_sets = {QuerySet::all};
  return c;
}

LexiconProvider default_lexicon() {
  return LexiconProvider(load_lexicon(std::string(SERPAUDIT_DATA_DIR) + "/lexicon/en-default.tsv"));
}

TEST(QueryFilter, KeepsNeutralQueriesWithTopicWords) {
  Lexicon lex;
  lex.entries = {{"disaster", -0.9}, {"great", 0.8}};
  const LexiconProvider provider(lex);
  const TopicConfig brexit{"Brexit", {"Brexit"}, false, std::nullopt};
  const auto d = explain_query_filter(
      brexit, {"brexit vote", "Brexit disaster", "european union", "BREXIT deal"}, provider);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_TRUE(d[0].kept);
  EXPECT_FALSE(d[1].kept);
  EXPECT_NE(d[1].reason.find("sentiment-bearing"), std::string::npos);
  EXPECT_FALSE(d[2].kept);
  EXPECT_NE(d[2].reason.find("brexit"), std::string::npos);
  EXPECT_TRUE(d[3].kept);
  EXPECT_EQ(filter_expanded_queries(brexit, {"brexit vote", "brexit disaster"}, provider),
            (std::vector<std::string>{"brexit vote"}));

  const TopicConfig gun{"Gun Control", {"Gun Control"}, false, std::nullopt};
  EXPECT_EQ(filter_expanded_queries(gun, {"gun control laws", "gun laws", "control gun"}, provider),
            (std::vector<std::string>{"gun control laws", "control gun"}));
  EXPECT_THROW(filter_expanded_queries(gun, {}, provider), ContractViolation);
}

TEST(QueryPartition, StableTopicsWithBuiltInLexicon) {
  auto topics = load_topic_config(std::string(SERPAUDIT_DATA_DIR) + "/topics/stable-62.jsonl");
  ASSERT_EQ(topics.size(), 62u);
  const auto provider = default_lexicon();
  const auto [polar, nonpolar] = partition_polar_queries(topics, provider);
  EXPECT_EQ(polar.size(), 9u);
  EXPECT_EQ(nonpolar.size(), 53u);
  for (const auto& t : topics) ASSERT_TRUE(t.query_polarity.has_value());
  std::map<std::string, double> got;
  for (const auto& t : polar) got[t.topic] = *t.query_polarity;
  const std::map<std::string, double> expected = {
      {"ACLU - Good for America?", 0.70},
      {"Born Gay? Origins of Sexual Orientation", 0.46},
      {"College Education Worth It?", 0.30},
      {"Gay Marriage", 0.42},
      {"Illegal Immigration", -0.50},
      {"Milk - Is It Healthy?", 0.50},
      {"Right to Health Care", 0.29},
      {"Social Media?", 0.03},
      {"Social Security Privatization", 0.03}};
  for (const auto& [topic, p] : expected) {
    ASSERT_TRUE(got.count(topic)) << topic;
    EXPECT_NEAR(got[topic], p, 0.005) << topic;
  }
}

// Two engines, three documents each, traced by hand through pooled
// normalization.
TEST(ScoreTopic, HandTrace) {
  const TopicConfig topic{"T", {"T"}, false, std::nullopt};
  const Corpus corpus = build_corpus(
      {marked("bing", "T", 1, 0.5), marked("bing", "T", 2, -0.5), marked("bing", "T", 3, 0.0),
       marked("google", "T", 1, 1.0), marked("google", "T", 2, 0.0), marked("google", "T", 3, 0.0)},
      {topic});
  const MarkerProvider provider;
  AuditConfig config;
  const auto bing = score_topic(corpus, topic, "bing", Level::document, 3, provider, config);
  EXPECT_NEAR(bing.avg_polarity, 0.0, 1e-15);
  const std::vector<double> bing_norm = {2.0 / 3, 0.0, 1.0 / 3};
  EXPECT_NEAR(bing.ndcg_senti, testing::reference_ndcg(bing_norm), 1e-12);
  EXPECT_NEAR(bing.avg_precision, testing::enumerate_expected_ap(bing_norm), 1e-12);

  const auto google = score_topic(corpus, topic, "google", Level::document, 3, provider, config);
  EXPECT_NEAR(google.avg_polarity, 1.0 / 3, 1e-15);
  EXPECT_DOUBLE_EQ(google.ndcg_senti, 1.0);
  EXPECT_NEAR(google.avg_precision,
              testing::enumerate_expected_ap({1.0, 1.0 / 3, 1.0 / 3}), 1e-12);

  config.normalization = Normalization::per_engine;
  const auto own = score_topic(corpus, topic, "bing", Level::document, 3, provider, config);
  EXPECT_NEAR(own.avg_precision, testing::enumerate_expected_ap({1.0, 0.0, 0.5}), 1e-12);
  EXPECT_NEAR(own.ndcg_senti, testing::reference_ndcg({1.0, 0.0, 0.5}), 1e-12);

  const auto top1 = score_topic(corpus, topic, "bing", Level::document, 1, provider, config);
  EXPECT_DOUBLE_EQ(top1.avg_polarity, 0.5);
}

TEST(ScoreTopic, TransformFlipsPolarityAndRanking) {
  TopicConfig topic{"T", {"T"}, false, std::nullopt};
  std::vector<Document> docs;
  for (int r = 1; r <= 4; ++r) {
    docs.push_back(marked("bing", "T", r, 0.1 * r));
    docs.push_back(marked("google", "T", r, -0.1 * r));
  }
  const Corpus corpus = build_corpus(docs, {topic});
  const MarkerProvider provider;
  const AuditConfig config;
  const auto plain = score_topic(corpus, topic, "bing", Level::document, 4, provider, config);
  topic.transform = true;
  const auto flipped = score_topic(corpus, topic, "bing", Level::document, 4, provider, config);
  EXPECT_NEAR(flipped.avg_polarity, -plain.avg_polarity, 1e-15);
  const auto google = score_topic(corpus, topic, "google", Level::document, 4, provider, config);
  topic.transform = false;
  const auto google_plain =
      score_topic(corpus, topic, "google", Level::document, 4, provider, config);
  // Pooled group is symmetric, so flipping swaps the two engines' roles.
  EXPECT_NEAR(google.ndcg_senti, plain.ndcg_senti, 1e-12);
  EXPECT_NEAR(google.avg_precision, plain.avg_precision, 1e-12);
  EXPECT_NEAR(google_plain.avg_precision, flipped.avg_precision, 1e-12);
}

TEST(ScoreTopic, NeutralListsAreMidpoint) {
  const TopicConfig topic{"T", {"T"}, false, std::nullopt};
  std::vector<Document> docs;
  for (int r = 1; r <= 10; ++r) {
    docs.push_back(marked("bing", "T", r, 0.0));
    docs.push_back(marked("google", "T", r, 0.0));
  }
  const auto s = score_topic(build_corpus(docs, {topic}), topic, "bing", Level::sentence, 10,
                             MarkerProvider{}, AuditConfig{});
  EXPECT_EQ(s.avg_polarity, 0.0);
  EXPECT_DOUBLE_EQ(s.ndcg_senti, 1.0);
  EXPECT_NEAR(s.avg_precision, 0.6069555965470679, 1e-12);
}

// Refuses any text containing "FAIL", as an external scorer might.
class FlakyProvider final : public SentimentProvider {
 public:
  Polarity score(std::string_view text) const override {
    if (text.find("FAIL") != std::string_view::npos) throw ScoringError("scorer refused text");
    return inner_.score(text);
  }
  std::string name() const override { return "flaky"; }

 private:
  MarkerProvider inner_;
};

TEST(ScoreTopic, AveragesQueriesAndLogsExclusions) {
  const TopicConfig topic{"T", {"q1", "q2"}, false, std::nullopt};
  const Corpus corpus = build_corpus(
      {marked("bing", "q1", 1, 0.4), marked("bing", "q1", 2, 0.2), marked("bing", "q2", 1, -0.2),
       {"bing", "q2", 2, std::nullopt, "FAIL v=0.9.", std::nullopt, std::nullopt},
       marked("google", "q1", 1, 0.0), marked("google", "q2", 1, 0.0)},
      {topic});
  AuditLog log;
  const auto s = score_topic(corpus, topic, "bing", Level::sentence, 10, FlakyProvider{},
                             AuditConfig{}, nullptr, &log);
  EXPECT_NEAR(s.avg_polarity, (0.3 + -0.2) / 2, 1e-15);
  ASSERT_EQ(log.excluded.size(), 1u);
  EXPECT_EQ(log.excluded[0].query, "q2");
  EXPECT_EQ(log.excluded[0].rank, 2);
  EXPECT_EQ(log.excluded[0].reason, "scorer refused text");
  EXPECT_THROW(score_topic(corpus, TopicConfig{"U", {"missing"}, false, std::nullopt}, "bing",
                           Level::document, 10, MarkerProvider{}, AuditConfig{}),
               ValidationError);
}

TEST(RunAudit, TableShapeAndOrder) {
  const auto syn = make_synthetic({.seed = 4, .topics = 12});
  const auto report = run_audit(syn.corpus, syn.topics, table_config(), MarkerProvider{});
  ASSERT_EQ(report.comparisons.size(), 18u);
  const std::vector<std::string> names = {"bing-FAIR", "google-FAIR", "bing-google"};
  std::size_t i = 0;
  for (Metric m : {Metric::avg_polarity, Metric::ndcg_senti, Metric::avg_precision}) {
    for (Level level : {Level::document, Level::sentence}) {
      for (const auto& name : names) {
        const auto& row = report.comparisons[i++];
        EXPECT_EQ(row.metric, m);
        EXPECT_EQ(row.level, level);
        EXPECT_EQ(row.name, name);
        ASSERT_TRUE(row.result.has_value());
      }
    }
  }
  EXPECT_EQ(report.comparisons[0].result->kind, TestKind::one_sample);
  EXPECT_EQ(report.comparisons[2].result->kind, TestKind::paired);
  EXPECT_EQ(report.comparisons[6].result->kind, TestKind::two_sample_welch);
  EXPECT_EQ(report.per_topic.size(), 12u * 2 * 2);
  EXPECT_EQ(report.scatter.size(), 6u);
  EXPECT_EQ(report.baselines.at(10).first.samples.size(), 50u);

  const std::string text = render_tables(report);
  EXPECT_NE(text.find("| Comparison  | Analysis Level | p-value"), std::string::npos) << text;
  EXPECT_NE(text.find("NDCG-Senti@10"), std::string::npos);
  EXPECT_NE(text.find("above y=x"), std::string::npos);
}

TEST(RunAudit, DefaultConfigRowCount) {
  const auto syn = make_synthetic({.seed = 9, .topics = 8});
  const auto report = run_audit(syn.corpus, syn.topics, AuditConfig{}, MarkerProvider{});
  // 2 query sets x (3 metrics @10 + avg polarity @100) x 2 levels x 3 rows.
  EXPECT_EQ(report.comparisons.size(), 48u);
  EXPECT_EQ(report.baselines.at(100).first.list_len, 100);
}

TEST(RunAudit, DegenerateTestsBecomeNotes) {
  std::vector<TopicConfig> topics;
  std::vector<Document> docs;
  for (int t = 0; t < 3; ++t) {
    const std::string name = "T" + std::to_string(t);
    topics.push_back({name, {name}, false, std::nullopt});
    for (int r = 1; r <= 3; ++r) {
      docs.push_back(marked("bing", name, r, 0.0));
      docs.push_back(marked("google", name, r, 0.0));
    }
  }
  const auto report =
      run_audit(build_corpus(docs, topics), topics, table_config(), MarkerProvider{});
  ASSERT_EQ(report.comparisons.size(), 18u);
  EXPECT_FALSE(report.comparisons[0].result.has_value());
  EXPECT_NE(report.comparisons[0].note.find("zero variance"), std::string::npos);
  EXPECT_EQ(report.comparisons[2].note, "no detectable difference");
  // NDCG is 1 everywhere but the fair samples vary, so Welch still runs.
  EXPECT_TRUE(report.comparisons[6].result.has_value());
  EXPECT_NE(render_tables(report).find("n/a (no detectable difference)"), std::string::npos);
}

TEST(RunAudit, DeterministicAcrossThreadCounts) {
  const auto syn = make_synthetic({.seed = 21, .topics = 20});
  AuditConfig single;
  AuditConfig many;
  many.jobs = 6;
  const auto a = to_json(run_audit(syn.corpus, syn.topics, single, MarkerProvider{}));
  auto b = to_json(run_audit(syn.corpus, syn.topics, many, MarkerProvider{}));
  b["config"]["jobs"] = single.jobs;
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(RunAudit, SwappingEnginesMirrorsResults) {
  const auto syn = make_synthetic({.seed = 8, .topics = 15, .shift_a = 0.1});
  AuditConfig ab = table_config();
  AuditConfig ba = table_config();
  ba.engines = {"google", "bing"};
  const MarkerProvider provider;
  const auto r1 = run_audit(syn.corpus, syn.topics, ab, provider);
  const auto r2 = run_audit(syn.corpus, syn.topics, ba, provider);
  for (std::size_t i = 0; i < r1.comparisons.size(); i += 3) {
    const auto& x = r1.comparisons;
    const auto& y = r2.comparisons;
    EXPECT_EQ(x[i].result->p_value, y[i + 1].result->p_value);
    EXPECT_EQ(x[i + 1].result->p_value, y[i].result->p_value);
    EXPECT_NEAR(x[i + 2].result->t_stat, -y[i + 2].result->t_stat, 1e-12);
    EXPECT_NEAR(x[i + 2].result->p_value, y[i + 2].result->p_value, 1e-12);
  }
  for (std::size_t s = 0; s < r1.scatter.size(); ++s) {
    EXPECT_EQ(r1.scatter[s].above, r2.scatter[s].below);
    EXPECT_EQ(r1.scatter[s].on, r2.scatter[s].on);
  }
}

// Adding polar topics leaves the non-polar rows unchanged.
TEST(RunAudit, NonPolarSetIndependentOfPolarTopics) {
  auto syn = make_synthetic({.seed = 31, .topics = 10});
  std::vector<TopicConfig> nonpolar = syn.topics;
  std::vector<Document> docs;
  for (const auto& [key, list] : syn.corpus.lists)
    for (const auto& d : list.documents) docs.push_back(d);
  for (int t = 0; t < 3; ++t) {
    const std::string q = "Polar v=0." + std::to_string(t + 1);
    syn.topics.push_back({"Polar " + std::to_string(t), {q}, false, std::nullopt});
    for (int r = 1; r <= 10; ++r) {
      docs.push_back(marked("bing", q, r, 0.05 * r - 0.2));
      docs.push_back(marked("google", q, r, 0.3));
    }
  }
  const Corpus corpus = build_corpus(docs, syn.topics);
  AuditConfig both = table_config();
  both.query_sets = {QuerySet::all, QuerySet::non_polar};
  const MarkerProvider provider;
  const auto full = run_audit(corpus, syn.topics, both, provider);
  const auto only = run_audit(corpus, nonpolar, table_config(), provider);
  EXPECT_EQ(full.polar_topics.size(), 3u);
  EXPECT_TRUE(only.polar_topics.empty());
  ASSERT_EQ(full.comparisons.size(), 36u);
  for (std::size_t i = 0; i < 18; ++i) {
    const auto& a = full.comparisons[18 + i];
    EXPECT_EQ(a.query_set, QuerySet::non_polar);
    EXPECT_EQ(a.result->p_value, only.comparisons[i].result->p_value) << i;
  }
}

TEST(RunAudit, TruncationMatchesPreTruncatedCorpus) {
  const auto longer = make_synthetic({.seed = 2, .topics = 6, .docs = 15});
  std::vector<Document> cut;
  for (const auto& [key, list] : longer.corpus.lists)
    for (const auto& d : truncate_at_k(list, 10).documents) cut.push_back(d);
  const Corpus shorter = build_corpus(cut, longer.topics);
  const MarkerProvider provider;
  const auto a = run_audit(longer.corpus, longer.topics, table_config(), provider);
  const auto b = run_audit(shorter, longer.topics, table_config(), provider);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(RunAudit, RejectsUnknownEngine) {
  const auto syn = make_synthetic({.seed = 1, .topics = 3});
  AuditConfig c = table_config();
  c.engines = {"bing", "yahoo"};
  EXPECT_THROW(run_audit(syn.corpus, syn.topics, c, MarkerProvider{}), ValidationError);
}

TEST(Scatter, CountsAndPercentages) {
  AuditReport r;
  r.config = table_config();
  const double xs[] = {0.1, 0.2, 0.3, 0.4};
  const double ys[] = {0.5, 0.6, 0.7, 0.0};
  for (int i = 0; i < 4; ++i) {
    const std::string t = "t" + std::to_string(i);
    r.per_topic.push_back({t, "bing", Level::document, 10, xs[i], 0, 0});
    r.per_topic.push_back({t, "google", Level::document, 10, ys[i], 0, 0});
  }
  const auto d = emit_scatter_data(r, Metric::avg_polarity, Level::document);
  EXPECT_EQ(d.points.size(), 4u);
  EXPECT_EQ(d.above, 3);
  EXPECT_EQ(d.below, 1);
  EXPECT_EQ(d.on, 0);
  EXPECT_DOUBLE_EQ(d.percent(d.above), 75.0);
  EXPECT_DOUBLE_EQ(d.percent(d.below), 25.0);
  EXPECT_EQ(classify({"x", 0.3, 0.3 + 1e-10}), Side::on);
  EXPECT_EQ(classify({"x", 0.3, 0.3 + 1e-8}), Side::above);
}

TEST(Scatter, FileRoundTrip) {
  const auto syn = make_synthetic({.seed = 5, .topics = 9});
  const auto report = run_audit(syn.corpus, syn.topics, table_config(), MarkerProvider{});
  for (const auto& d : report.scatter) {
    std::istringstream in(format_scatter(d));
    const auto back = parse_scatter(in);
    EXPECT_EQ(back.metric, d.metric);
    EXPECT_EQ(back.level, d.level);
    EXPECT_EQ(back.k, d.k);
    EXPECT_EQ(back.x_engine, d.x_engine);
    ASSERT_EQ(back.points.size(), d.points.size());
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      EXPECT_EQ(back.points[i].topic, d.points[i].topic);
      EXPECT_EQ(back.points[i].x, d.points[i].x);
      EXPECT_EQ(back.points[i].y, d.points[i].y);
    }
    EXPECT_EQ(back.above, d.above);
    EXPECT_EQ(back.below, d.below);
  }
}

TEST(Report, JsonRoundTripRendersIdentically) {
  const auto syn = make_synthetic({.seed = 6, .topics = 7});
  const auto report = run_audit(syn.corpus, syn.topics, AuditConfig{}, MarkerProvider{});
  const auto back = report_from_json(nlohmann::json::parse(to_json(report).dump()));
  EXPECT_EQ(render_tables(back), render_tables(report));
  EXPECT_EQ(to_json(back).dump(), to_json(report).dump());
  EXPECT_THROW(report_from_json(nlohmann::json::object()), ParseError);
}

TEST(Format, PValues) {
  EXPECT_EQ(format_p_value(0.41807, false), "0.41807");
  EXPECT_EQ(format_p_value(0.02263, true), "0.02263*");
  EXPECT_EQ(format_p_value(1.4e-9, false), "1.4E-09");
  EXPECT_EQ(format_p_value(0.00012, false), "0.00012");
}

TEST(AuditConfigJson, RoundTripAndValidation) {
  AuditConfig c;
  c.alpha = 0.05;
  c.gain = Gain::exponential;
  c.engines = {"a", "b"};
  const auto back = audit_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_THROW(audit_config_from_json({{"alpah", 0.1}}), ConfigError);
  EXPECT_THROW(audit_config_from_json({{"alpha", 2.0}}), ConfigError);
  const auto partial = audit_config_from_json({{"alpha", 0.05}}, c);
  EXPECT_EQ(partial.engines.first, "a");
}

}  // namespace
}  // namespace serpaudit

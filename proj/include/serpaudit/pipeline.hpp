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

// End-to-end audit: scores every topic for two engines at each analysis
// level and cutoff, runs the engine-vs-fair and engine-vs-engine t tests,
// and assembles the report, comparison tables and scatter datasets.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "serpaudit/common.hpp"
#include "serpaudit/corpus.hpp"
#include "serpaudit/metrics.hpp"
#include "serpaudit/sentiment.hpp"
#include "serpaudit/stats.hpp"

namespace serpaudit {

enum class Normalization { pooled, per_engine };
enum class QuerySet { all, non_polar };
enum class EngineComparison { paired, welch };

inline std::string_view to_string(Normalization n) {
  return n == Normalization::pooled ? "pooled" : "per_engine";
}
inline std::string_view to_string(QuerySet q) {
  return q == QuerySet::all ? "all" : "non_polar";
}
inline std::string_view to_string(EngineComparison c) {
  return c == EngineComparison::paired ? "paired" : "welch";
}

struct CutoffSpec {
  int k = 10;
  std::vector<Metric> metrics;
};

struct AuditConfig {
  std::pair<std::string, std::string> engines{"bing", "google"};
  std::vector<Level> levels{Level::document, Level::sentence};
  std::vector<CutoffSpec> cutoffs{
      {10, {Metric::avg_polarity, Metric::ndcg_senti, Metric::avg_precision}},
      {100, {Metric::avg_polarity}}};
  std::vector<QuerySet> query_sets{QuerySet::all, QuerySet::non_polar};
  Gain gain = Gain::linear;
  Normalization normalization = Normalization::pooled;
  EngineComparison engine_comparison = EngineComparison::paired;
  EapMethod eap_method = EapMethod::exact;
  double alpha = 0.01;
  std::uint64_t baseline_seed = kDefaultBaselineSeed;
  int baseline_n_lists = 50;
  std::optional<int> baseline_list_len;  // defaults to the cutoff k
  bool include_title = false;
  int jobs = 1;

  void validate() const {
    if (engines.first.empty() || engines.second.empty() ||
        engines.first == engines.second)
      throw ConfigError("audit needs two distinct engines");
    if (levels.empty()) throw ConfigError("no analysis levels configured");
    if (cutoffs.empty()) throw ConfigError("no cutoffs configured");
    for (const auto& c : cutoffs) {
      if (c.k < 1) throw ConfigError("cutoff k must be >= 1");
      if (c.metrics.empty()) throw ConfigError("cutoff without metrics");
    }
    if (query_sets.empty()) throw ConfigError("no query sets configured");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (baseline_n_lists < 2) throw ConfigError("baseline n_lists must be >= 2");
    if (baseline_list_len && *baseline_list_len < 1)
      throw ConfigError("baseline list_len must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

inline nlohmann::json to_json(const AuditConfig& c) {
  nlohmann::json j;
  j["engines"] = {c.engines.first, c.engines.second};
  for (Level l : c.levels) j["levels"].push_back(to_string(l));
  for (const auto& cut : c.cutoffs) {
    nlohmann::json e;
    e["k"] = cut.k;
    for (Metric m : cut.metrics) e["metrics"].push_back(to_string(m));
    j["cutoffs"].push_back(e);
  }
  for (QuerySet q : c.query_sets) j["query_sets"].push_back(to_string(q));
  j["gain"] = to_string(c.gain);
  j["normalization"] = to_string(c.normalization);
  j["engine_comparison"] = to_string(c.engine_comparison);
  j["eap_method"] = to_string(c.eap_method);
  j["alpha"] = c.alpha;
  j["baseline"]["seed"] = c.baseline_seed;
  j["baseline"]["n_lists"] = c.baseline_n_lists;
  j["baseline"]["list_len"] =
      c.baseline_list_len ? nlohmann::json(*c.baseline_list_len) : nlohmann::json();
  j["include_title"] = c.include_title;
  j["jobs"] = c.jobs;
  return j;
}

// Keys absent from `j` keep their defaults; unknown keys are errors.
inline AuditConfig audit_config_from_json(const nlohmann::json& j,
                                          AuditConfig c = {}) {
  if (!j.is_object()) throw ConfigError("audit config must be a JSON object");
  static const std::set<std::string> known = {
      "engines", "levels", "cutoffs", "query_sets", "gain", "normalization",
      "engine_comparison", "eap_method", "alpha", "baseline", "include_title",
      "jobs"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown audit config key '" + key + "'");
  try {
    if (j.contains("engines")) {
      const auto& e = j["engines"];
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("'engines' must list exactly two engines");
      c.engines = {e[0].get<std::string>(), e[1].get<std::string>()};
    }
    if (j.contains("levels")) {
      c.levels.clear();
      for (const auto& l : j["levels"]) c.levels.push_back(parse_level(l.get<std::string>()));
    }
    if (j.contains("cutoffs")) {
      c.cutoffs.clear();
      for (const auto& e : j["cutoffs"]) {
        CutoffSpec cut;
        cut.k = e.at("k").get<int>();
        for (const auto& m : e.at("metrics")) cut.metrics.push_back(parse_metric(m.get<std::string>()));
        c.cutoffs.push_back(cut);
      }
    }
    if (j.contains("query_sets")) {
      c.query_sets.clear();
      for (const auto& q : j["query_sets"]) {
        const auto s = q.get<std::string>();
        if (s == "all") c.query_sets.push_back(QuerySet::all);
        else if (s == "non_polar") c.query_sets.push_back(QuerySet::non_polar);
        else throw ConfigError("unknown query set '" + s + "'");
      }
    }
    if (j.contains("gain")) c.gain = parse_gain(j["gain"].get<std::string>());
    if (j.contains("normalization")) {
      const auto s = j["normalization"].get<std::string>();
      if (s == "pooled") c.normalization = Normalization::pooled;
      else if (s == "per_engine") c.normalization = Normalization::per_engine;
      else throw ConfigError("unknown normalization '" + s + "'");
    }
    if (j.contains("engine_comparison")) {
      const auto s = j["engine_comparison"].get<std::string>();
      if (s == "paired") c.engine_comparison = EngineComparison::paired;
      else if (s == "welch") c.engine_comparison = EngineComparison::welch;
      else throw ConfigError("unknown engine_comparison '" + s + "'");
    }
    if (j.contains("eap_method")) c.eap_method = parse_eap_method(j["eap_method"].get<std::string>());
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("baseline")) {
      const auto& b = j["baseline"];
      for (const auto& [key, value] : b.items())
        if (key != "seed" && key != "n_lists" && key != "list_len")
          throw ConfigError("unknown baseline key '" + key + "'");
      if (b.contains("seed")) c.baseline_seed = b["seed"].get<std::uint64_t>();
      if (b.contains("n_lists")) c.baseline_n_lists = b["n_lists"].get<int>();
      if (b.contains("list_len")) {
        if (b["list_len"].is_null()) c.baseline_list_len.reset();
        else c.baseline_list_len = b["list_len"].get<int>();
      }
    }
    if (j.contains("include_title")) c.include_title = j["include_title"].get<bool>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("audit config: ") + e.what());
  }
  c.validate();
  return c;
}

// Raw per-document polarities keyed by (level, title flag, text). Safe for
// concurrent use; racing inserts of the same key store the same value.
class ScoreCache {
 public:
  std::optional<double> get_or_score(const Document& doc, Level level,
                                     const SentimentProvider& provider,
                                     bool include_title, std::string* error) {
    std::string text = scoring_text(doc, include_title);
    std::string key;
    key.reserve(text.size() + 2);
    key.push_back(level == Level::document ? 'd' : 's');
    key.push_back('\x1f');
    key += text;
    {
      std::lock_guard lock(mu_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        if (!it->second && error) *error = errors_[key];
        return it->second;
      }
    }
    std::optional<double> value;
    std::string why;
    try {
      value = score_at_level(doc, level, provider, include_title).value();
    } catch (const ScoringError& e) {
      why = e.what();
    }
    std::lock_guard lock(mu_);
    entries_.emplace(key, value);
    if (!value) errors_.emplace(key, why);
    if (!value && error) *error = why;
    return value;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::optional<double>> entries_;
  std::unordered_map<std::string, std::string> errors_;
};

struct ExcludedDocument {
  std::string engine;
  std::string query;
  int rank = 0;
  Level level = Level::document;
  std::string reason;
};

struct AuditLog {
  std::vector<std::string> warnings;
  std::vector<ExcludedDocument> excluded;

  void append(AuditLog&& other) {
    for (auto& w : other.warnings) warnings.push_back(std::move(w));
    for (auto& e : other.excluded) excluded.push_back(std::move(e));
  }
};

struct TopicScores {
  std::string topic;
  std::string engine;
  Level level = Level::document;
  int k = 10;
  double avg_polarity = 0.0;
  double ndcg_senti = 0.0;
  double avg_precision = 0.0;

  double value(Metric m) const {
    switch (m) {
      case Metric::avg_polarity: return avg_polarity;
      case Metric::ndcg_senti: return ndcg_senti;
      case Metric::avg_precision: return avg_precision;
    }
    return 0.0;
  }
};

struct FilterDecision {
  std::string query;
  bool kept = false;
  std::string reason;
};

// Keeps a candidate iff it contains every word of the topic name
// (case-insensitive) and its own polarity is exactly 0.
inline std::vector<FilterDecision> explain_query_filter(
    const TopicConfig& topic, const std::vector<std::string>& candidates,
    const SentimentProvider& provider) {
  if (candidates.empty()) throw ContractViolation("no candidate queries");
  const auto topic_words = detail::tokenize(topic.topic);
  std::vector<FilterDecision> out;
  for (const auto& q : candidates) {
    FilterDecision d{q, true, "kept"};
    const auto words = detail::tokenize(q);
    const std::set<std::string> have(words.begin(), words.end());
    for (const auto& w : topic_words) {
      if (!have.count(w)) {
        d = {q, false, "missing topic word '" + w + "'"};
        break;
      }
    }
    if (d.kept) {
      const double p = score_query(q, provider).value();
      if (p != 0.0) {
        std::ostringstream why;
        why << "sentiment-bearing (polarity " << p << ")";
        d = {q, false, why.str()};
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<std::string> filter_expanded_queries(
    const TopicConfig& topic, const std::vector<std::string>& candidates,
    const SentimentProvider& provider) {
  std::vector<std::string> kept;
  for (auto& d : explain_query_filter(topic, candidates, provider))
    if (d.kept) kept.push_back(std::move(d.query));
  return kept;
}

// Caches each topic's query polarity (the most polar of its queries) and
// splits topics into polar (nonzero) and non-polar.
inline std::pair<std::vector<TopicConfig>, std::vector<TopicConfig>>
partition_polar_queries(std::vector<TopicConfig>& topics,
                        const SentimentProvider& provider) {
  std::vector<TopicConfig> polar;
  std::vector<TopicConfig> nonpolar;
  for (auto& t : topics) {
    double best = 0.0;
    for (const auto& q : t.queries) {
      const double p = score_query(q, provider).value();
      if (std::fabs(p) > std::fabs(best)) best = p;
    }
    t.query_polarity = best;
    (best != 0.0 ? polar : nonpolar).push_back(t);
  }
  return {std::move(polar), std::move(nonpolar)};
}

namespace detail {

struct QueryScores {
  double avg_polarity = 0.0;
  double ndcg = 0.0;
  double ap = 0.0;
};

}  // namespace detail

// Sentiment at `level`, sign transform, average polarity over the
// transformed scores, then min-max normalization over the configured group
// for NDCG and expected AP at cutoff k. Several queries are averaged.
inline TopicScores score_topic(const Corpus& corpus, const TopicConfig& topic,
                               const std::string& engine, Level level, int k,
                               const SentimentProvider& provider,
                               const AuditConfig& config,
                               ScoreCache* cache = nullptr,
                               AuditLog* log = nullptr) {
  ScoreCache local_cache;
  if (!cache) cache = &local_cache;
  AuditLog local_log;
  if (!log) log = &local_log;

  std::vector<std::string> group{engine};
  if (config.normalization == Normalization::pooled) {
    for (const auto& e : {config.engines.first, config.engines.second})
      if (std::find(group.begin(), group.end(), e) == group.end()) group.push_back(e);
  }

  std::vector<detail::QueryScores> per_query;
  for (const auto& query : topic.queries) {
    std::vector<double> own;
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& e : group) {
      const RankedList* list = corpus.find(e, query);
      if (!list) throw ValidationError("missing ranked list (" + e + ", " + query + ")");
      std::vector<std::string> warn;
      const RankedList top = truncate_at_k(*list, k, e == engine ? &warn : nullptr);
      for (auto& w : warn) log->warnings.push_back(std::move(w));
      for (const auto& doc : top.documents) {
        std::string why;
        auto raw = cache->get_or_score(doc, level, provider, config.include_title, &why);
        if (!raw) {
          if (e == engine) log->excluded.push_back({doc.engine, doc.query, doc.rank, level, why});
          continue;
        }
        const double p = transform_polarity(topic, Polarity(*raw)).value();
        lo = any ? std::min(lo, p) : p;
        hi = any ? std::max(hi, p) : p;
        any = true;
        if (e == engine) own.push_back(p);
      }
    }
    if (own.empty()) {
      log->warnings.push_back("no scorable documents for (" + engine + ", " + query +
                              "); query skipped");
      continue;
    }
    const auto norm = minmax_normalize(own, lo, hi);
    per_query.push_back({average_sentiment_polarity(own),
                         ndcg_senti(norm, k, config.gain),
                         expected_average_precision(norm, config.eap_method)});
  }
  if (per_query.empty())
    throw ScoringError("topic '" + topic.topic + "' has no scorable documents for " + engine);

  TopicScores s{topic.topic, engine, level, k, 0.0, 0.0, 0.0};
  for (const auto& q : per_query) {
    s.avg_polarity += q.avg_polarity;
    s.ndcg_senti += q.ndcg;
    s.avg_precision += q.ap;
  }
  const double n = static_cast<double>(per_query.size());
  s.avg_polarity /= n;
  s.ndcg_senti /= n;
  s.avg_precision /= n;
  return s;
}

struct ComparisonRow {
  QuerySet query_set = QuerySet::all;
  std::string name;  // e.g. "bing-FAIR", "bing-google"
  Metric metric = Metric::avg_polarity;
  Level level = Level::document;
  int k = 10;
  std::optional<TTestResult> result;  // empty when the test is undefined
  std::string note;
};

struct ScatterPoint {
  std::string topic;
  double x = 0.0;
  double y = 0.0;
};

enum class Side { above, on, below };

inline constexpr double kOnLineTolerance = 1e-9;

inline Side classify(const ScatterPoint& p) {
  const double d = p.y - p.x;
  if (std::fabs(d) <= kOnLineTolerance) return Side::on;
  return d > 0 ? Side::above : Side::below;
}

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::above: return "above";
    case Side::on: return "on";
    case Side::below: return "below";
  }
  return "?";
}

struct ScatterData {
  QuerySet query_set = QuerySet::all;
  Metric metric = Metric::avg_polarity;
  Level level = Level::document;
  int k = 10;
  std::string x_engine;
  std::string y_engine;
  std::vector<ScatterPoint> points;
  int above = 0;
  int on = 0;
  int below = 0;

  double percent(int count) const {
    return points.empty() ? 0.0 : 100.0 * count / static_cast<double>(points.size());
  }

  void recount() {
    above = on = below = 0;
    for (const auto& p : points) {
      switch (classify(p)) {
        case Side::above: ++above; break;
        case Side::on: ++on; break;
        case Side::below: ++below; break;
      }
    }
  }
};

struct AuditReport {
  AuditConfig config;
  std::string provider;
  std::vector<ComparisonRow> comparisons;
  std::vector<TopicScores> per_topic;
  std::vector<ScatterData> scatter;
  std::map<int, std::pair<FairBaseline, FairBaseline>> baselines;  // k -> (ndcg, ap)
  std::vector<std::pair<std::string, double>> polar_topics;
  AuditLog log;
};

namespace detail {

inline std::vector<const TopicScores*> select_scores(
    const std::vector<TopicScores>& all, const std::set<std::string>& topics,
    const std::string& engine, Level level, int k) {
  std::vector<const TopicScores*> out;
  for (const auto& s : all)
    if (s.engine == engine && s.level == level && s.k == k && topics.count(s.topic))
      out.push_back(&s);
  return out;
}

inline std::vector<double> values(const std::vector<const TopicScores*>& xs, Metric m) {
  std::vector<double> out;
  for (const auto* s : xs) out.push_back(s->value(m));
  return out;
}

inline std::set<std::string> topics_in_set(const AuditReport& report, QuerySet qs) {
  std::set<std::string> polar;
  for (const auto& [name, p] : report.polar_topics) polar.insert(name);
  std::set<std::string> out;
  for (const auto& s : report.per_topic)
    if (qs == QuerySet::all || !polar.count(s.topic)) out.insert(s.topic);
  return out;
}

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> workers;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (std::size_t w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// One point per topic (x = first engine, y = second engine) for the given
// selection, classified against the y = x line.
inline ScatterData emit_scatter_data(const AuditReport& report, Metric metric,
                                     Level level, int k = 10,
                                     QuerySet query_set = QuerySet::all) {
  ScatterData d;
  d.query_set = query_set;
  d.metric = metric;
  d.level = level;
  d.k = k;
  d.x_engine = report.config.engines.first;
  d.y_engine = report.config.engines.second;
  const auto topics = detail::topics_in_set(report, query_set);
  std::map<std::string, ScatterPoint> by_topic;
  for (const auto& s : report.per_topic) {
    if (s.level != level || s.k != k || !topics.count(s.topic)) continue;
    auto& p = by_topic[s.topic];
    p.topic = s.topic;
    if (s.engine == d.x_engine) p.x = s.value(metric);
    if (s.engine == d.y_engine) p.y = s.value(metric);
  }
  // Keep the topic order of the report.
  std::set<std::string> placed;
  for (const auto& s : report.per_topic) {
    if (by_topic.count(s.topic) && placed.insert(s.topic).second)
      d.points.push_back(by_topic[s.topic]);
  }
  d.recount();
  return d;
}

inline AuditReport run_audit(const Corpus& corpus, std::vector<TopicConfig> topics,
                             const AuditConfig& config,
                             const SentimentProvider& provider,
                             ScoreCache* cache = nullptr) {
  config.validate();
  const auto& [engine_a, engine_b] = config.engines;
  const auto present = corpus.engines();
  for (const auto& e : {engine_a, engine_b})
    if (!present.count(e)) throw ValidationError("corpus has no lists for engine '" + e + "'");
  if (topics.empty()) throw ValidationError("no topics to audit");

  ScoreCache local_cache;
  if (!cache) cache = &local_cache;

  AuditReport report;
  report.config = config;
  report.provider = provider.name();

  auto [polar, nonpolar] = partition_polar_queries(topics, provider);
  for (const auto& t : polar) report.polar_topics.emplace_back(t.topic, *t.query_polarity);

  for (const auto& cut : config.cutoffs) {
    if (report.baselines.count(cut.k)) continue;
    const auto lists = generate_fair_lists(config.baseline_seed, config.baseline_n_lists,
                                           config.baseline_list_len.value_or(cut.k));
    report.baselines[cut.k] = {fair_ndcg_baseline(lists, config.gain),
                               fair_ap_baseline(lists)};
  }

  struct Task {
    const TopicConfig* topic;
    std::string engine;
    Level level;
    int k;
  };
  std::vector<Task> tasks;
  std::set<int> seen_k;
  for (const auto& cut : config.cutoffs) {
    if (!seen_k.insert(cut.k).second) continue;
    for (Level level : config.levels)
      for (const auto& t : topics)
        for (const auto& e : {engine_a, engine_b}) tasks.push_back({&t, e, level, cut.k});
  }
  std::vector<TopicScores> scores(tasks.size());
  std::vector<AuditLog> logs(tasks.size());
  detail::parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    scores[i] = score_topic(corpus, *t.topic, t.engine, t.level, t.k, provider, config,
                            cache, &logs[i]);
  });
  report.per_topic = std::move(scores);
  for (auto& l : logs) report.log.append(std::move(l));

  auto run_test = [&](ComparisonRow row, auto&& test) {
    try {
      row.result = test();
    } catch (const DegenerateSample& e) {
      row.note = e.what();
    }
    report.comparisons.push_back(std::move(row));
  };

  for (QuerySet qs : config.query_sets) {
    const auto selected = detail::topics_in_set(report, qs);
    if (selected.size() < 2) {
      report.log.warnings.push_back("query set '" + std::string(to_string(qs)) +
                                    "' has fewer than 2 topics; tests undefined");
    }
    for (const auto& cut : config.cutoffs) {
      const auto& [fair_ndcg, fair_ap] = report.baselines.at(cut.k);
      for (Metric metric : cut.metrics) {
        for (Level level : config.levels) {
          const auto a = detail::values(
              detail::select_scores(report.per_topic, selected, engine_a, level, cut.k), metric);
          const auto b = detail::values(
              detail::select_scores(report.per_topic, selected, engine_b, level, cut.k), metric);
          for (const auto* side : {&a, &b}) {
            const std::string& name = side == &a ? engine_a : engine_b;
            ComparisonRow row{qs, name + "-FAIR", metric, level, cut.k, std::nullopt, ""};
            run_test(row, [&] {
              if (metric == Metric::avg_polarity)
                return one_sample_t_test(*side, fair_polarity_baseline(), config.alpha);
              const auto& fair = metric == Metric::ndcg_senti ? fair_ndcg : fair_ap;
              return two_sample_t_test(*side, fair.samples, true, config.alpha);
            });
          }
          ComparisonRow row{qs, engine_a + "-" + engine_b, metric, level, cut.k,
                            std::nullopt, ""};
          run_test(row, [&] {
            return config.engine_comparison == EngineComparison::paired
                       ? paired_t_test(a, b, config.alpha)
                       : two_sample_t_test(a, b, true, config.alpha);
          });
          report.scatter.push_back(emit_scatter_data(report, metric, level, cut.k, qs));
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const TTestResult& r) {
  return {{"kind", to_string(r.kind)}, {"t_stat", r.t_stat},      {"df", r.df},
          {"p_value", r.p_value},      {"alpha", r.alpha},        {"significant", r.significant},
          {"starred", r.starred}};
}

inline nlohmann::json to_json(const FairBaseline& b) {
  return {{"metric", to_string(b.metric)}, {"value", b.value},     {"samples", b.samples},
          {"seed", b.seed},                {"n_lists", b.n_lists}, {"list_len", b.list_len}};
}

inline nlohmann::json to_json(const ScatterData& d) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : d.points) pts.push_back({{"topic", p.topic}, {"x", p.x}, {"y", p.y}});
  return {{"query_set", to_string(d.query_set)},
          {"metric", to_string(d.metric)},
          {"level", to_string(d.level)},
          {"k", d.k},
          {"x_engine", d.x_engine},
          {"y_engine", d.y_engine},
          {"points", pts},
          {"above", d.above},
          {"on", d.on},
          {"below", d.below},
          {"above_pct", d.percent(d.above)},
          {"on_pct", d.percent(d.on)},
          {"below_pct", d.percent(d.below)}};
}

inline nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json j;
  j["config"] = to_json(r.config);
  j["provider"] = r.provider;
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : r.comparisons) {
    nlohmann::json row = {{"query_set", to_string(c.query_set)},
                          {"name", c.name},
                          {"metric", to_string(c.metric)},
                          {"level", to_string(c.level)},
                          {"k", c.k}};
    row["test"] = c.result ? to_json(*c.result) : nlohmann::json();
    if (!c.note.empty()) row["note"] = c.note;
    j["comparisons"].push_back(row);
  }
  j["per_topic"] = nlohmann::json::array();
  for (const auto& s : r.per_topic)
    j["per_topic"].push_back({{"topic", s.topic},
                              {"engine", s.engine},
                              {"level", to_string(s.level)},
                              {"k", s.k},
                              {"avg_polarity", s.avg_polarity},
                              {"ndcg_senti", s.ndcg_senti},
                              {"avg_precision", s.avg_precision}});
  j["scatter"] = nlohmann::json::array();
  for (const auto& d : r.scatter) j["scatter"].push_back(to_json(d));
  j["baselines"] = nlohmann::json::array();
  for (const auto& [k, pair] : r.baselines)
    j["baselines"].push_back({{"k", k},
                              {"avg_polarity", fair_polarity_baseline()},
                              {"ndcg_senti", to_json(pair.first)},
                              {"avg_precision", to_json(pair.second)}});
  j["polar_topics"] = nlohmann::json::array();
  for (const auto& [t, p] : r.polar_topics)
    j["polar_topics"].push_back({{"topic", t}, {"polarity", p}});
  j["warnings"] = r.log.warnings;
  j["excluded"] = nlohmann::json::array();
  for (const auto& e : r.log.excluded)
    j["excluded"].push_back({{"engine", e.engine},
                             {"query", e.query},
                             {"rank", e.rank},
                             {"level", to_string(e.level)},
                             {"reason", e.reason}});
  return j;
}

namespace detail {

inline QuerySet parse_query_set(const std::string& s) {
  if (s == "all") return QuerySet::all;
  if (s == "non_polar") return QuerySet::non_polar;
  throw ParseError("unknown query set '" + s + "'");
}

inline TestKind parse_test_kind(const std::string& s) {
  for (TestKind k : {TestKind::one_sample, TestKind::two_sample_welch,
                     TestKind::two_sample_pooled, TestKind::paired})
    if (to_string(k) == s) return k;
  throw ParseError("unknown test kind '" + s + "'");
}

inline FairBaseline baseline_from_json(const nlohmann::json& j) {
  FairBaseline b;
  b.metric = parse_metric(j.at("metric").get<std::string>());
  b.value = j.at("value").get<double>();
  b.samples = j.at("samples").get<std::vector<double>>();
  b.seed = j.at("seed").get<std::uint64_t>();
  b.n_lists = j.at("n_lists").get<int>();
  b.list_len = j.at("list_len").get<int>();
  return b;
}

}  // namespace detail

// Inverse of to_json(AuditReport), used to re-render saved reports.
inline AuditReport report_from_json(const nlohmann::json& j) {
  AuditReport r;
  try {
    r.config = audit_config_from_json(j.at("config"));
    r.provider = j.at("provider").get<std::string>();
    for (const auto& c : j.at("comparisons")) {
      ComparisonRow row;
      row.query_set = detail::parse_query_set(c.at("query_set").get<std::string>());
      row.name = c.at("name").get<std::string>();
      row.metric = parse_metric(c.at("metric").get<std::string>());
      row.level = parse_level(c.at("level").get<std::string>());
      row.k = c.at("k").get<int>();
      if (const auto& t = c.at("test"); !t.is_null()) {
        TTestResult res;
        res.kind = detail::parse_test_kind(t.at("kind").get<std::string>());
        res.t_stat = t.at("t_stat").get<double>();
        res.df = t.at("df").get<double>();
        res.p_value = t.at("p_value").get<double>();
        res.alpha = t.at("alpha").get<double>();
        res.significant = t.at("significant").get<bool>();
        res.starred = t.at("starred").get<bool>();
        row.result = res;
      }
      if (c.contains("note")) row.note = c["note"].get<std::string>();
      r.comparisons.push_back(std::move(row));
    }
    for (const auto& s : j.at("per_topic")) {
      r.per_topic.push_back({s.at("topic").get<std::string>(), s.at("engine").get<std::string>(),
                             parse_level(s.at("level").get<std::string>()), s.at("k").get<int>(),
                             s.at("avg_polarity").get<double>(), s.at("ndcg_senti").get<double>(),
                             s.at("avg_precision").get<double>()});
    }
    for (const auto& d : j.at("scatter")) {
      ScatterData s;
      s.query_set = detail::parse_query_set(d.at("query_set").get<std::string>());
      s.metric = parse_metric(d.at("metric").get<std::string>());
      s.level = parse_level(d.at("level").get<std::string>());
      s.k = d.at("k").get<int>();
      s.x_engine = d.at("x_engine").get<std::string>();
      s.y_engine = d.at("y_engine").get<std::string>();
      for (const auto& p : d.at("points"))
        s.points.push_back({p.at("topic").get<std::string>(), p.at("x").get<double>(),
                            p.at("y").get<double>()});
      s.recount();
      r.scatter.push_back(std::move(s));
    }
    for (const auto& b : j.at("baselines"))
      r.baselines[b.at("k").get<int>()] = {detail::baseline_from_json(b.at("ndcg_senti")),
                                           detail::baseline_from_json(b.at("avg_precision"))};
    for (const auto& p : j.at("polar_topics"))
      r.polar_topics.emplace_back(p.at("topic").get<std::string>(), p.at("polarity").get<double>());
    r.log.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& e : j.at("excluded"))
      r.log.excluded.push_back({e.at("engine").get<std::string>(), e.at("query").get<std::string>(),
                                e.at("rank").get<int>(), parse_level(e.at("level").get<std::string>()),
                                e.at("reason").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("audit report: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("audit report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text rendering

// Fixed five decimals, or one-decimal scientific ("1.4E-09") below 1e-4;
// an asterisk marks the alpha < p <= 0.05 band.
inline std::string format_p_value(double p, bool starred) {
  char buf[32];
  if (p >= 1e-4 || p == 0.0) std::snprintf(buf, sizeof buf, "%.5f", p);
  else std::snprintf(buf, sizeof buf, "%.1E", p);
  std::string out(buf);
  if (starred) out += "*";
  return out;
}

inline std::string_view level_label(Level l) { return l == Level::document ? "Doc" : "Sent"; }

inline std::string metric_title(Metric m) {
  switch (m) {
    case Metric::avg_polarity: return "average sentiment polarity";
    case Metric::ndcg_senti: return "NDCG-Senti";
    case Metric::avg_precision: return "AP";
  }
  return "?";
}

inline std::string render_tables(const AuditReport& report) {
  std::ostringstream out;
  struct Group {
    QuerySet qs;
    Metric metric;
    int k;
  };
  std::vector<Group> groups;
  for (const auto& c : report.comparisons) {
    bool known = std::any_of(groups.begin(), groups.end(), [&](const Group& g) {
      return g.qs == c.query_set && g.metric == c.metric && g.k == c.k;
    });
    if (!known) groups.push_back({c.query_set, c.metric, c.k});
  }
  char alpha[32];
  std::snprintf(alpha, sizeof alpha, "%g", report.config.alpha);
  for (const auto& g : groups) {
    out << "[" << to_string(g.qs) << " queries] two-tail t-test (alpha:" << alpha
        << ") on " << metric_title(g.metric) << "@" << g.k << "\n";
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"Comparison", "Analysis Level", "p-value", "Significant?"});
    for (const auto& c : report.comparisons) {
      if (c.query_set != g.qs || c.metric != g.metric || c.k != g.k) continue;
      std::string p = c.result ? format_p_value(c.result->p_value, c.result->starred)
                               : "n/a (" + c.note + ")";
      rows.push_back({c.name, std::string(level_label(c.level)), p,
                      c.result && c.result->significant ? "YES" : "NO"});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& r : rows)
      for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], r[i].size());
    auto rule = [&] {
      out << "+";
      for (auto w : width) out << std::string(w + 2, '-') << "+";
      out << "\n";
    };
    rule();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out << "|";
      for (std::size_t i = 0; i < 4; ++i)
        out << " " << rows[r][i] << std::string(width[i] - rows[r][i].size(), ' ') << " |";
      out << "\n";
      if (r == 0) rule();
    }
    rule();
    out << "\n";
  }
  for (const auto& d : report.scatter) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "[%s queries] %s@%d %s: above y=x %d (%.2f%%), on %d (%.2f%%), below %d (%.2f%%)\n",
                  std::string(to_string(d.query_set)).c_str(), std::string(to_string(d.metric)).c_str(),
                  d.k, std::string(level_label(d.level)).c_str(), d.above, d.percent(d.above), d.on,
                  d.percent(d.on), d.below, d.percent(d.below));
    out << line;
  }
  return out.str();
}

// Scatter file: two '#' header lines, a column header, then one
// `topic<TAB>x<TAB>y<TAB>position` row per point. Coordinates use %.17g
// so they re-parse to the same doubles.
inline std::string format_scatter(const ScatterData& d) {
  std::ostringstream out;
  out << "# query_set=" << to_string(d.query_set) << " metric=" << to_string(d.metric)
      << " level=" << to_string(d.level) << " k=" << d.k << " x=" << d.x_engine
      << " y=" << d.y_engine << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "# above=%d (%.2f%%) on=%d (%.2f%%) below=%d (%.2f%%)\n",
                d.above, d.percent(d.above), d.on, d.percent(d.on), d.below, d.percent(d.below));
  out << line;
  out << "topic\tx\ty\tposition\n";
  for (const auto& p : d.points) {
    std::string topic = p.topic;
    std::replace(topic.begin(), topic.end(), '\t', ' ');
    std::snprintf(line, sizeof line, "\t%.17g\t%.17g\t", p.x, p.y);
    out << topic << line << to_string(classify(p)) << "\n";
  }
  return out.str();
}

inline ScatterData parse_scatter(std::istream& in) {
  ScatterData d;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.rfind("# query_set=", 0) == 0) {
      std::istringstream ss(text.substr(2));
      for (std::string kv; ss >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("bad scatter header", line);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "query_set") d.query_set = detail::parse_query_set(value);
        else if (key == "metric") d.metric = parse_metric(value);
        else if (key == "level") d.level = parse_level(value);
        else if (key == "k") d.k = std::stoi(value);
        else if (key == "x") d.x_engine = value;
        else if (key == "y") d.y_engine = value;
      }
      continue;
    }
    if (text.empty() || text[0] == '#') continue;
    if (!header) {
      if (text != "topic\tx\ty\tposition") throw ParseError("missing scatter column header", line);
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(text);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    if (cols.size() != 4) throw ParseError("expected 4 scatter columns", line);
    try {
      d.points.push_back({cols[0], std::stod(cols[1]), std::stod(cols[2])});
    } catch (const std::exception&) {
      throw ParseError("bad scatter coordinate", line);
    }
  }
  d.recount();
  return d;
}

inline std::string scatter_file_name(const ScatterData& d) {
  return "scatter_" + std::string(to_string(d.query_set)) + "_" + std::string(to_string(d.metric)) +
         "_at" + std::to_string(d.k) + "_" + std::string(to_string(d.level)) + ".tsv";
}

// Per-document raw and transformed polarities, for the `score` command.
struct DocumentScore {
  std::string engine;
  std::string query;
  int rank = 0;
  Level level = Level::document;
  std::optional<double> raw;
  std::optional<double> transformed;
  std::string error;
};

inline std::vector<DocumentScore> score_documents(const Corpus& corpus,
                                                  const std::vector<TopicConfig>& topics,
                                                  const std::vector<Level>& levels,
                                                  const SentimentProvider& provider,
                                                  bool include_title = false) {
  std::map<std::string, bool> transform;
  for (const auto& t : topics)
    for (const auto& q : t.queries) transform[q] = t.transform;
  std::vector<DocumentScore> out;
  ScoreCache cache;
  for (const auto& [key, list] : corpus.lists)
    for (const auto& doc : list.documents)
      for (Level level : levels) {
        DocumentScore s{doc.engine, doc.query, doc.rank, level, std::nullopt, std::nullopt, ""};
        s.raw = cache.get_or_score(doc, level, provider, include_title, &s.error);
        if (s.raw) {
          auto it = transform.find(doc.query);
          s.transformed = transform_polarity(it != transform.end() && it->second, Polarity(*s.raw)).value();
        }
        out.push_back(std::move(s));
      }
  return out;
}

}  // namespace serpaudit

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

// Scores a tiny two-engine, two-topic corpus in memory and prints the
// comparison tables.

#include <iostream>

#include "serpaudit/serpaudit.hpp"

int main() {
  using namespace serpaudit;

  Lexicon lex;
  lex.entries = {{"good", 0.7}, {"bad", -0.7}, {"great", 0.8}, {"terrible", -1.0}};
  lex.negators = {"not"};
  const LexiconProvider provider(lex);

  std::vector<TopicConfig> topics = {{"Abortion", {"Abortion"}, false, {}},
                                     {"Brexit", {"Brexit"}, true, {}},
                                     {"Gun Control", {"Gun Control"}, false, {}}};
  const char* bodies[2][3][3] = {
      {{"A good ruling.", "Not good at all.", "Terrible news."},
       {"Great deal.", "A bad plan.", "Good for trade."},
       {"Bad law.", "Good policy.", "Neutral report."}},
      {{"Great outcome.", "Bad idea.", "Good point."},
       {"Terrible plan.", "Good talks.", "Not bad."},
       {"Good law.", "Great step.", "Bad vote."}}};
  std::vector<Document> docs;
  const char* engines[2] = {"bing", "google"};
  for (int e = 0; e < 2; ++e)
    for (int t = 0; t < 3; ++t)
      for (int r = 0; r < 3; ++r)
        docs.push_back({engines[e], topics[t].topic, r + 1, std::nullopt, bodies[e][t][r],
                        std::nullopt, std::nullopt});
  const Corpus corpus = build_corpus(docs, topics);

  AuditConfig config;
  config.cutoffs = {{10, {Metric::avg_polarity, Metric::ndcg_senti, Metric::avg_precision}}};
  config.query_sets = {QuerySet::all};
  const AuditReport report = run_audit(corpus, topics, config, provider);
  std::cout << render_tables(report);
  return 0;
}

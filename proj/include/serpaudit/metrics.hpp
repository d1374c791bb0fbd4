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

// Sentiment ranking metrics: sign transformation, min-max normalization,
// average polarity, NDCG over polarities, expected average precision, and
// the random "fair" baselines they are compared against.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "serpaudit/common.hpp"
#include "serpaudit/corpus.hpp"
#include "serpaudit/sentiment.hpp"

namespace serpaudit {

enum class Metric { avg_polarity, ndcg_senti, avg_precision };
enum class Gain { linear, exponential };
enum class EapMethod { exact, closed_form };

inline constexpr std::uint64_t kDefaultBaselineSeed = 20170425;

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::avg_polarity: return "avg_polarity";
    case Metric::ndcg_senti: return "ndcg_senti";
    case Metric::avg_precision: return "avg_precision";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "avg_polarity") return Metric::avg_polarity;
  if (s == "ndcg_senti" || s == "ndcg") return Metric::ndcg_senti;
  if (s == "avg_precision" || s == "ap") return Metric::avg_precision;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

inline std::string_view to_string(Gain g) {
  return g == Gain::linear ? "linear" : "exponential";
}

inline Gain parse_gain(std::string_view s) {
  if (s == "linear") return Gain::linear;
  if (s == "exponential") return Gain::exponential;
  throw ConfigError("unknown gain '" + std::string(s) + "'");
}

inline std::string_view to_string(EapMethod m) {
  return m == EapMethod::exact ? "exact" : "closed_form";
}

inline EapMethod parse_eap_method(std::string_view s) {
  if (s == "exact") return EapMethod::exact;
  if (s == "closed_form") return EapMethod::closed_form;
  throw ConfigError("unknown eap_method '" + std::string(s) + "'");
}

inline Polarity transform_polarity(bool transform, Polarity p) {
  return transform ? Polarity(-p.value()) : p;
}

inline Polarity transform_polarity(const TopicConfig& topic, Polarity p) {
  return transform_polarity(topic.transform, p);
}

// (x - lo) / (hi - lo) for each score; every score maps to 0.5 when lo == hi.
inline std::vector<double> minmax_normalize(std::span<const double> scores,
                                            double group_min,
                                            double group_max) {
  if (!(group_min <= group_max))
    throw ContractViolation("normalization group min exceeds max");
  std::vector<double> out;
  out.reserve(scores.size());
  const double range = group_max - group_min;
  for (double x : scores) {
    if (!(x >= group_min && x <= group_max))
      throw ContractViolation("score " + std::to_string(x) +
                              " outside normalization group [" +
                              std::to_string(group_min) + ", " +
                              std::to_string(group_max) + "]");
    out.push_back(range == 0.0 ? 0.5
                               : std::clamp((x - group_min) / range, 0.0, 1.0));
  }
  return out;
}

inline double average_sentiment_polarity(std::span<const double> scores) {
  if (scores.empty()) throw ContractViolation("average of an empty score list");
  const double mean =
      std::accumulate(scores.begin(), scores.end(), 0.0) /
      static_cast<double>(scores.size());
  return std::clamp(mean, -1.0, 1.0);
}

namespace detail {

inline void require_unit_interval(std::span<const double> xs, const char* what) {
  for (double x : xs)
    if (!(x >= 0.0 && x <= 1.0))
      throw ContractViolation(std::string(what) + " value " + std::to_string(x) +
                              " outside [0, 1]");
}

inline double dcg(std::span<const double> scores, std::size_t k, Gain gain) {
  double sum = 0.0;
  const std::size_t n = std::min(k, scores.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gain == Gain::linear ? scores[i] : std::exp2(scores[i]) - 1.0;
    sum += g / std::log2(static_cast<double>(i) + 2.0);
  }
  return sum;
}

}  // namespace detail

// DCG@k of the list divided by DCG@k of the same scores sorted descending.
// Scores must already be normalized to [0, 1]. Returns 0 when the ideal
// DCG is 0.
inline double ndcg_senti(std::span<const double> normalized, int k,
                         Gain gain = Gain::linear) {
  if (k < 1) throw ContractViolation("cutoff k must be >= 1");
  detail::require_unit_interval(normalized, "ndcg_senti");
  std::vector<double> ideal(normalized.begin(), normalized.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = detail::dcg(ideal, static_cast<std::size_t>(k), gain);
  if (idcg == 0.0) return 0.0;
  const double score = detail::dcg(normalized, static_cast<std::size_t>(k), gain) / idcg;
  return std::clamp(score, 0.0, 1.0);
}

// Average precision if every document at rank i is independently relevant
// with probability probabilities[i]; an outcome with no relevant document
// has AP 0.
//
// `exact` sums, for each rank i and prefix count c, the chance that rank i
// is relevant with c relevant documents up to it and m after it, weighting
// c / (i (c + m)). Prefix and suffix counts are Poisson-binomial tables,
// so the cost is O(n^3).
//
// `closed_form` is the ratio-of-expectations approximation
//   (1 / sum p) * sum_i (p_i / i) (1 + sum_{j<i} p_j)
// which is exact for 0/1 inputs but overshoots when few documents are
// likely relevant.
inline double expected_average_precision(std::span<const double> probabilities,
                                         EapMethod method = EapMethod::exact) {
  detail::require_unit_interval(probabilities, "expected_average_precision");
  const std::size_t n = probabilities.size();
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  if (total == 0.0) return 0.0;

  if (method == EapMethod::closed_form) {
    double acc = 0.0;
    double prefix = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += probabilities[i] / static_cast<double>(i + 1) * (1.0 + prefix);
      prefix += probabilities[i];
    }
    return std::clamp(acc / total, 0.0, 1.0);
  }

  // suffix[i][m]: probability that ranks i..n-1 hold exactly m relevant.
  std::vector<std::vector<double>> suffix(n + 1);
  suffix[n] = {1.0};
  for (std::size_t i = n; i-- > 0;) {
    const double p = probabilities[i];
    const auto& next = suffix[i + 1];
    auto& cur = suffix[i];
    cur.assign(next.size() + 1, 0.0);
    for (std::size_t m = 0; m < next.size(); ++m) {
      cur[m] += next[m] * (1.0 - p);
      cur[m + 1] += next[m] * p;
    }
  }

  // prefix[c]: probability that ranks 0..i-1 hold exactly c relevant.
  std::vector<double> prefix = {1.0};
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = probabilities[i];
    if (p > 0.0) {
      const auto& after = suffix[i + 1];
      double at_rank = 0.0;
      for (std::size_t before = 0; before < prefix.size(); ++before) {
        if (prefix[before] == 0.0) continue;
        const double c = static_cast<double>(before + 1);
        double inv_total = 0.0;
        for (std::size_t m = 0; m < after.size(); ++m)
          inv_total += after[m] / (c + static_cast<double>(m));
        at_rank += prefix[before] * c * inv_total;
      }
      expected += p * at_rank / static_cast<double>(i + 1);
    }
    std::vector<double> next(prefix.size() + 1, 0.0);
    for (std::size_t c = 0; c < prefix.size(); ++c) {
      next[c] += prefix[c] * (1.0 - p);
      next[c + 1] += prefix[c] * p;
    }
    prefix = std::move(next);
  }
  return std::clamp(expected, 0.0, 1.0);
}

// An unbiased result list averages to neutral polarity.
inline constexpr double fair_polarity_baseline() { return 0.0; }

struct FairLists {
  std::uint64_t seed = kDefaultBaselineSeed;
  int list_len = 10;
  std::vector<std::vector<double>> lists;
};

// `n_lists` lists of `list_len` independent fair 0/1 draws. Each draw is the
// top bit of one mt19937_64 output, so the stream is identical on every
// standard library.
inline FairLists generate_fair_lists(std::uint64_t seed = kDefaultBaselineSeed,
                                     int n_lists = 50, int list_len = 10) {
  if (n_lists < 1 || list_len < 1)
    throw ContractViolation("fair lists need n_lists >= 1 and list_len >= 1");
  FairLists out{seed, list_len, {}};
  std::mt19937_64 gen(seed);
  out.lists.resize(static_cast<std::size_t>(n_lists));
  for (auto& list : out.lists) {
    list.resize(static_cast<std::size_t>(list_len));
    for (auto& x : list) x = static_cast<double>(gen() >> 63);
  }
  return out;
}

struct FairBaseline {
  Metric metric = Metric::avg_polarity;
  double value = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
  int n_lists = 0;
  int list_len = 0;
};

namespace detail {

inline FairBaseline summarize(Metric metric, const FairLists& lists,
                              const std::function<double(std::span<const double>)>& f) {
  FairBaseline b;
  b.metric = metric;
  b.seed = lists.seed;
  b.n_lists = static_cast<int>(lists.lists.size());
  b.list_len = lists.list_len;
  for (const auto& list : lists.lists) b.samples.push_back(f(list));
  b.value = b.samples.empty()
                ? 0.0
                : std::accumulate(b.samples.begin(), b.samples.end(), 0.0) /
                      static_cast<double>(b.samples.size());
  return b;
}

}  // namespace detail

inline FairBaseline fair_polarity_baseline_record() {
  FairBaseline b;
  b.metric = Metric::avg_polarity;
  b.value = fair_polarity_baseline();
  return b;
}

inline FairBaseline fair_ndcg_baseline(const FairLists& lists,
                                       Gain gain = Gain::linear) {
  return detail::summarize(Metric::ndcg_senti, lists,
                           [&](std::span<const double> l) {
                             return ndcg_senti(l, lists.list_len, gain);
                           });
}

inline FairBaseline fair_ap_baseline(const FairLists& lists) {
  return detail::summarize(Metric::avg_precision, lists,
                           [](std::span<const double> l) {
                             return expected_average_precision(l);
                           });
}

}  // namespace serpaudit

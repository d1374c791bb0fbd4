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

// Student t tests with two-tailed p-values and the significance verdicts
// used in the comparison tables.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "serpaudit/common.hpp"

namespace serpaudit {

enum class TestKind { one_sample, two_sample_welch, two_sample_pooled, paired };

inline std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::one_sample: return "one_sample";
    case TestKind::two_sample_welch: return "two_sample_welch";
    case TestKind::two_sample_pooled: return "two_sample_pooled";
    case TestKind::paired: return "paired";
  }
  return "?";
}

// Upper bound of the "starred" band: alpha < p <= this.
inline constexpr double kStarThreshold = 0.05;

struct Verdict {
  bool significant = false;
  bool starred = false;
};

struct TTestResult {
  TestKind kind = TestKind::one_sample;
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  bool significant = false;
  bool starred = false;
};

// Paired samples whose differences are all zero.
class NoDetectableDifference : public DegenerateSample {
 public:
  NoDetectableDifference() : DegenerateSample("no detectable difference") {}
};

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// I_x(a, b) given both x and y = 1 - x, so callers that know 1 - x more
// precisely than the subtraction would give can pass it in.
inline double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0 && b > 0.0)) throw ContractViolation("incomplete_beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, y) / b;
}

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x >= 1.0) return incomplete_beta(a, b, 1.0, 0.0);
  return incomplete_beta(a, b, x, 1.0 - x);
}

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double t_two_tail_p(double t, double df) {
  if (!(df > 0.0)) throw ContractViolation("degrees of freedom must be > 0");
  if (std::isnan(t)) throw ContractViolation("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2));
  return std::clamp(p, 0.0, 1.0);
}

inline Verdict decide_significance(double p, double alpha) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("p-value outside [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("alpha outside (0, 1)");
  return {p < alpha, p > alpha && p <= kStarThreshold};
}

namespace detail {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

// Variance indistinguishable from rounding noise around the mean.
inline bool zero_variance(const Moments& m) {
  const double scale = std::max(1.0, std::fabs(m.mean));
  return m.var <= std::pow(1e-12 * scale, 2);
}

inline TTestResult finish(TestKind kind, double t, double df, double alpha) {
  TTestResult r;
  r.kind = kind;
  r.t_stat = t;
  r.df = df;
  r.p_value = t_two_tail_p(t, df);
  r.alpha = alpha;
  const Verdict v = decide_significance(r.p_value, alpha);
  r.significant = v.significant;
  r.starred = v.starred;
  return r;
}

}  // namespace detail

inline TTestResult one_sample_t_test(std::span<const double> sample, double mu0,
                                     double alpha = 0.01) {
  if (sample.size() < 2) throw DegenerateSample("degenerate sample: fewer than 2 values");
  const auto m = detail::moments(sample);
  if (detail::zero_variance(m)) throw DegenerateSample("degenerate sample: zero variance");
  const double t = (m.mean - mu0) / std::sqrt(m.var / m.n);
  return detail::finish(TestKind::one_sample, t, m.n - 1.0, alpha);
}

inline TTestResult two_sample_t_test(std::span<const double> a,
                                     std::span<const double> b, bool welch = true,
                                     double alpha = 0.01) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateSample("degenerate sample: fewer than 2 values");
  const auto ma = detail::moments(a);
  const auto mb = detail::moments(b);
  const bool za = detail::zero_variance(ma);
  const bool zb = detail::zero_variance(mb);
  if (za && zb) throw DegenerateSample("degenerate sample: zero variance in both samples");
  const double va = za ? 0.0 : ma.var;
  const double vb = zb ? 0.0 : mb.var;
  if (welch) {
    const double sa = va / ma.n;
    const double sb = vb / mb.n;
    const double t = (ma.mean - mb.mean) / std::sqrt(sa + sb);
    const double df = (sa + sb) * (sa + sb) /
                      (sa * sa / (ma.n - 1.0) + sb * sb / (mb.n - 1.0));
    return detail::finish(TestKind::two_sample_welch, t, df, alpha);
  }
  const double df = ma.n + mb.n - 2.0;
  const double pooled = ((ma.n - 1.0) * va + (mb.n - 1.0) * vb) / df;
  const double t = (ma.mean - mb.mean) / std::sqrt(pooled * (1.0 / ma.n + 1.0 / mb.n));
  return detail::finish(TestKind::two_sample_pooled, t, df, alpha);
}

inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                                 double alpha = 0.01) {
  if (a.size() != b.size()) throw ContractViolation("paired samples differ in length");
  if (a.size() < 2) throw DegenerateSample("degenerate sample: fewer than 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  if (std::all_of(diff.begin(), diff.end(), [](double d) { return d == 0.0; }))
    throw NoDetectableDifference();
  TTestResult r = one_sample_t_test(diff, 0.0, alpha);
  r.kind = TestKind::paired;
  return r;
}

}  // namespace serpaudit

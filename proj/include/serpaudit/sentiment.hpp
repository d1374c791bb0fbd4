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

// Sentence splitting, the lexicon scorer and the provider interface used
// to turn document text into polarity.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "serpaudit/common.hpp"
#include "serpaudit/corpus.hpp"

namespace serpaudit {

// Sentiment value in [-1, 1].
class Polarity {
 public:
  constexpr Polarity() = default;
  explicit Polarity(double value) : value_(value) {
    if (!(value >= -1.0 && value <= 1.0))
      throw ContractViolation("polarity " + std::to_string(value) +
                              " outside [-1, 1]");
  }
  static Polarity clamped(double value) {
    if (std::isnan(value)) return Polarity{};
    return Polarity(std::clamp(value, -1.0, 1.0));
  }
  constexpr double value() const { return value_; }
  auto operator<=>(const Polarity&) const = default;

 private:
  double value_ = 0.0;
};

struct Lexicon {
  std::unordered_map<std::string, double> entries;
  std::unordered_map<std::string, double> intensifiers;
  std::unordered_set<std::string> negators;
  int negation_window = 3;
  double negation_factor = -0.5;

  void validate() const {
    for (const auto& [term, p] : entries)
      if (!(p >= -1.0 && p <= 1.0))
        throw ValidationError("lexicon polarity for '" + term +
                              "' outside [-1, 1]");
    for (const auto& [term, f] : intensifiers)
      if (!(f > 0.0))
        throw ValidationError("intensifier factor for '" + term +
                              "' must be > 0");
    if (!(negation_factor > -1.0 && negation_factor < 0.0))
      throw ValidationError("negation factor must lie in (-1, 0)");
    if (negation_window < 0) throw ValidationError("negation window < 0");
  }
};

// Lexicon file: `term<TAB>value[<TAB>tag]` per line, tag one of
// `intensifier` (value = factor) or `negator` (value = negation factor).
// `#window<TAB>n` sets the negation window; other `#` lines are comments.
// Terms are lowercased on load.
inline Lexicon parse_lexicon(std::istream& in) {
  Lexicon lex;
  bool negation_factor_seen = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (detail::trim(text).empty()) continue;

    std::vector<std::string> cols;
    std::stringstream ss(text);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);

    if (text[0] == '#') {
      if (cols.size() == 2 && cols[0] == "#window") {
        try {
          lex.negation_window = std::stoi(cols[1]);
        } catch (const std::exception&) {
          throw ParseError("bad negation window", line);
        }
      }
      continue;
    }
    if (cols.size() < 2 || cols.size() > 3)
      throw ParseError("expected term<TAB>value[<TAB>tag]", line);

    const std::string term = detail::to_lower(detail::trim(cols[0]));
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(cols[1], &used);
      if (!detail::trim(std::string_view(cols[1]).substr(used)).empty())
        throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad numeric value '" + cols[1] + "'", line);
    }
    const std::string tag = cols.size() == 3 ? std::string(detail::trim(cols[2])) : "";
    if (tag.empty()) {
      lex.entries[term] = value;
    } else if (tag == "intensifier") {
      lex.intensifiers[term] = value;
    } else if (tag == "negator") {
      if (negation_factor_seen && value != lex.negation_factor)
        throw ParseError("conflicting negation factors", line);
      lex.negation_factor = value;
      negation_factor_seen = true;
      lex.negators.insert(term);
    } else {
      throw ParseError("unknown tag '" + tag + "'", line);
    }
  }
  lex.validate();
  return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon '" + path + "'");
  return parse_lexicon(in);
}

namespace detail {

inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

// Lowercased word tokens. Apostrophes and hyphens are kept only between
// word characters; the UTF-8 right single quote is read as an apostrophe.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    bool joiner = c == '\'' || c == '-';
    std::size_t width = 1;
    if (c == 0xE2 && text.substr(i, 3) == "\xE2\x80\x99") {
      joiner = true;
      width = 3;
    }
    if (joiner) {
      const std::size_t next = i + width;
      if (!cur.empty() && next < text.size() &&
          std::isalnum(static_cast<unsigned char>(text[next]))) {
        cur.push_back(c == '-' ? '-' : '\'');
      } else {
        flush();
      }
      i += width - 1;
    } else if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> list = {
      "Mr.",   "Mrs.",  "Ms.",   "Dr.",   "Prof.", "Sr.",   "Jr.",  "St.",
      "Mt.",   "Gen.",  "Gov.",  "Sen.",  "Rep.",  "Rev.",  "Col.", "Lt.",
      "Sgt.",  "Capt.", "Inc.",  "Ltd.",  "Co.",   "Corp.", "vs.",  "v.",
      "e.g.",  "i.e.",  "U.S.",  "U.K.",  "U.N.",  "E.U.",  "No.",  "Jan.",
      "Feb.",  "Mar.",  "Apr.",  "Jun.",  "Jul.",  "Aug.",  "Sep.", "Sept.",
      "Oct.",  "Nov.",  "Dec.",  "a.m.",  "p.m.",  "approx.", "Fig.", "Ph.D.",
      "Ave.",  "Dept.", "Univ.", "Calif.", "Mass.", "Wash.", "D.C."};
  return list;
}

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

}  // namespace detail

// Splits on '.', '!' or '?' (plus trailing quotes/brackets) when followed by
// whitespace and an uppercase letter or digit. Known abbreviations and single
// capital initials ("J.") do not end a sentence. Sentences are trimmed.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view s) {
    s = detail::trim(s);
    if (!s.empty()) out.emplace_back(s);
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i;  // one past the terminator run
    while (end < text.size() &&
           (text[end] == '.' || text[end] == '!' || text[end] == '?'))
      ++end;
    while (end < text.size() && detail::is_closer(text[end])) ++end;

    std::size_t next = end;
    while (next < text.size() && detail::is_space(text[next])) ++next;
    bool boundary = next > end && next < text.size();
    if (boundary) {
      char n = text[next];
      if ((n == '"' || n == '\'' || n == '(') && next + 1 < text.size())
        n = text[next + 1];
      boundary = std::isupper(static_cast<unsigned char>(n)) ||
                 std::isdigit(static_cast<unsigned char>(n));
    }
    if (boundary && c == '.' && end == i + 1) {
      std::size_t w = i;
      while (w > start && !detail::is_space(text[w - 1])) --w;
      std::string_view word = text.substr(w, i + 1 - w);
      while (!word.empty() && (word.front() == '(' || word.front() == '"'))
        word.remove_prefix(1);
      const bool initial =
          word.size() == 2 && std::isupper(static_cast<unsigned char>(word[0]));
      if (initial || detail::abbreviations().count(word)) boundary = false;
    }
    if (boundary) {
      emit(text.substr(start, end - start));
      start = next;
    }
    i = end;
  }
  emit(text.substr(start));
  return out;
}

// Mean of matched lexicon term polarities, each scaled by the product of
// the intensifiers directly before it and by the negation factor when a
// negator occurs within the preceding window. Clamped to [-1, 1]; 0 when no
// term matches.
inline Polarity score_text(std::string_view text, const Lexicon& lexicon) {
  const auto tokens = detail::tokenize(text);
  double sum = 0.0;
  std::size_t matched = 0;
  double boost = 1.0;
  long last_negator = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (lexicon.negators.count(tok)) {
      last_negator = static_cast<long>(i);
      boost = 1.0;
      continue;
    }
    if (auto it = lexicon.intensifiers.find(tok); it != lexicon.intensifiers.end()) {
      boost *= it->second;
      continue;
    }
    if (auto it = lexicon.entries.find(tok); it != lexicon.entries.end()) {
      double value = it->second * boost;
      if (last_negator >= 0 &&
          static_cast<long>(i) - last_negator <= lexicon.negation_window)
        value *= lexicon.negation_factor;
      sum += value;
      ++matched;
    }
    boost = 1.0;
  }
  if (matched == 0) return Polarity{};
  return Polarity::clamped(sum / static_cast<double>(matched));
}

// Anything that maps text to a polarity. Implementations must be
// deterministic and safe to call from several threads at once.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual Polarity score(std::string_view text) const = 0;
  // Stable identifier, echoed in audit reports.
  virtual std::string name() const = 0;
};

class LexiconProvider final : public SentimentProvider {
 public:
  explicit LexiconProvider(Lexicon lexicon, std::string name = "lexicon")
      : lexicon_(std::move(lexicon)), name_(std::move(name)) {
    lexicon_.validate();
  }
  Polarity score(std::string_view text) const override {
    return score_text(text, lexicon_);
  }
  std::string name() const override { return name_; }
  const Lexicon& lexicon() const { return lexicon_; }

 private:
  Lexicon lexicon_;
  std::string name_;
};

// Text submitted for scoring: the body, optionally preceded by the title.
inline std::string scoring_text(const Document& doc, bool include_title = false) {
  if (!include_title || !doc.title || detail::trim(*doc.title).empty())
    return doc.body;
  std::string title(detail::trim(*doc.title));
  const char last = title.back();
  title += (last == '.' || last == '!' || last == '?') ? " " : ". ";
  return title + doc.body;
}

inline Polarity score_document_level(const Document& doc,
                                     const SentimentProvider& provider,
                                     bool include_title = false) {
  return provider.score(scoring_text(doc, include_title));
}

inline Polarity score_sentence_level(const Document& doc,
                                     const SentimentProvider& provider,
                                     bool include_title = false) {
  const auto sentences = split_sentences(scoring_text(doc, include_title));
  if (sentences.empty())
    throw ScoringError("unscorable document (" + doc.engine + ", " +
                       doc.query + ", rank " + std::to_string(doc.rank) + ")");
  double sum = 0.0;
  for (const auto& s : sentences) sum += provider.score(s).value();
  return Polarity::clamped(sum / static_cast<double>(sentences.size()));
}

inline Polarity score_at_level(const Document& doc, Level level,
                               const SentimentProvider& provider,
                               bool include_title = false) {
  return level == Level::document
             ? score_document_level(doc, provider, include_title)
             : score_sentence_level(doc, provider, include_title);
}

// Raw query string, case and punctuation untouched.
inline Polarity score_query(std::string_view query,
                            const SentimentProvider& provider) {
  return provider.score(query);
}

}  // namespace serpaudit

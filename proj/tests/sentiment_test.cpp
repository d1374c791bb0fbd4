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
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "serpaudit/corpus.hpp"
#include "serpaudit/sentiment.hpp"
#include "serpaudit/sidecar.hpp"

namespace serpaudit {
namespace {

Lexicon small_lexicon() {
  Lexicon lex;
  lex.entries = {{"good", 0.7}, {"bad", -0.7}, {"great", 0.8}, {"disaster", -0.9}};
  lex.intensifiers = {{"very", 1.3}};
  lex.negators = {"not", "never"};
  return lex;
}

Document doc_with(const std::string& body) {
  return {"bing", "q", 1, std::nullopt, body, std::nullopt, std::nullopt};
}

TEST(SplitSentences, Basics) {
  EXPECT_EQ(split_sentences("It rains."), (std::vector<std::string>{"It rains."}));
  EXPECT_EQ(split_sentences("It rains. It pours!"),
            (std::vector<std::string>{"It rains.", "It pours!"}));
  EXPECT_EQ(split_sentences("Dr. Smith left. He returned."),
            (std::vector<std::string>{"Dr. Smith left.", "He returned."}));
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences(" \n\t ").empty());
}

TEST(SplitSentences, RulesAndAbbreviations) {
  EXPECT_EQ(split_sentences("Is it? 2018 was hot."),
            (std::vector<std::string>{"Is it?", "2018 was hot."}));
  EXPECT_EQ(split_sentences("Prices rose 3.5 percent. Then fell."),
            (std::vector<std::string>{"Prices rose 3.5 percent.", "Then fell."}));
  EXPECT_EQ(split_sentences("The U.S. Senate voted. Mr. Smith agreed."),
            (std::vector<std::string>{"The U.S. Senate voted.", "Mr. Smith agreed."}));
  EXPECT_EQ(split_sentences("J. Smith spoke. Wow!! \"Really?\" She said."),
            (std::vector<std::string>{"J. Smith spoke.", "Wow!!", "\"Really?\"", "She said."}));
  EXPECT_EQ(split_sentences("no split. lowercase next"),
            (std::vector<std::string>{"no split. lowercase next"}));
}

// Sentences are non-empty and, with whitespace removed, concatenate back to
// the input with whitespace removed.
TEST(SplitSentences, CoversInputProperty) {
  std::mt19937 gen(11);
  const std::vector<std::string> pieces = {"Dr.", "Smith", "the", "U.S.", "It", "rains", ".",
                                           "!", "?", " ", "  ", "\n", "2019", "a", "B", "\"Q\""};
  auto squash = [](const std::string& s) {
    std::string out;
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
  };
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int n = gen() % 25;
    for (int i = 0; i < n; ++i) {
      text += pieces[gen() % pieces.size()];
      if (gen() % 2) text += " ";
    }
    const auto sentences = split_sentences(text);
    std::string joined;
    for (const auto& s : sentences) {
      EXPECT_FALSE(detail::trim(s).empty());
      joined += s;
    }
    EXPECT_EQ(squash(joined), squash(text)) << text;
  }
}

TEST(ScoreText, Examples) {
  const Lexicon lex = small_lexicon();
  EXPECT_DOUBLE_EQ(score_text("good", lex).value(), 0.7);
  EXPECT_DOUBLE_EQ(score_text("not good", lex).value(), 0.7 * -0.5);
  EXPECT_DOUBLE_EQ(score_text("the cat sat", lex).value(), 0.0);
  EXPECT_DOUBLE_EQ(score_text("", lex).value(), 0.0);
}

TEST(ScoreText, IntensifiersNegationWindowAndMean) {
  const Lexicon lex = small_lexicon();
  EXPECT_DOUBLE_EQ(score_text("very good", lex).value(), 0.7 * 1.3);
  EXPECT_DOUBLE_EQ(score_text("very very good", lex).value(), std::min(1.0, 0.7 * 1.3 * 1.3));
  EXPECT_DOUBLE_EQ(score_text("not very good", lex).value(), 0.7 * 1.3 * -0.5);
  // Negator three tokens back still applies; four back does not.
  EXPECT_DOUBLE_EQ(score_text("not a b good", lex).value(), 0.7 * -0.5);
  EXPECT_DOUBLE_EQ(score_text("not a b c good", lex).value(), 0.7);
  EXPECT_DOUBLE_EQ(score_text("good and bad and great", lex).value(), (0.7 - 0.7 + 0.8) / 3.0);
  // Term match ignores case and punctuation.
  EXPECT_DOUBLE_EQ(score_text("GOOD!!!", lex).value(), 0.7);
}

TEST(ScoreText, LexiconTermCaseInvariance) {
  std::stringstream lower("good\t0.7\nnot\t-0.5\tnegator\n");
  std::stringstream upper("GoOd\t0.7\nNOT\t-0.5\tnegator\n");
  const Lexicon a = parse_lexicon(lower);
  const Lexicon b = parse_lexicon(upper);
  for (const char* text : {"good", "Not GOOD", "so good, not good"})
    EXPECT_EQ(score_text(text, a).value(), score_text(text, b).value());
}

TEST(Lexicon, ParsesTagsAndRejectsBadLines) {
  std::stringstream in("# comment\n#window\t2\ngood\t0.7\nvery\t1.3\tintensifier\nnot\t-0.4\tnegator\n");
  const Lexicon lex = parse_lexicon(in);
  EXPECT_EQ(lex.negation_window, 2);
  EXPECT_DOUBLE_EQ(lex.negation_factor, -0.4);
  EXPECT_DOUBLE_EQ(lex.intensifiers.at("very"), 1.3);

  std::stringstream out_of_range("good\t1.5\n");
  EXPECT_THROW(parse_lexicon(out_of_range), ValidationError);
  std::stringstream bad_number("good\tx\n");
  EXPECT_THROW(parse_lexicon(bad_number), ParseError);
  std::stringstream bad_tag("good\t0.1\tadverb\n");
  EXPECT_THROW(parse_lexicon(bad_tag), ParseError);
  std::stringstream bad_intensifier("very\t0\tintensifier\n");
  EXPECT_THROW(parse_lexicon(bad_intensifier), ValidationError);
  std::stringstream conflicting("not\t-0.5\tnegator\nnever\t-0.3\tnegator\n");
  EXPECT_THROW(parse_lexicon(conflicting), ParseError);
}

TEST(Lexicon, DefaultFileLoads) {
  const Lexicon lex = load_lexicon(std::string(SERPAUDIT_DATA_DIR) + "/lexicon/en-default.tsv");
  EXPECT_GT(lex.entries.size(), 1000u);
  EXPECT_DOUBLE_EQ(lex.intensifiers.at("very"), 1.3);
  EXPECT_TRUE(lex.negators.count("not"));
  EXPECT_EQ(lex.negation_window, 3);
  EXPECT_DOUBLE_EQ(lex.negation_factor, -0.5);
}

TEST(Polarity, RangeChecked) {
  EXPECT_THROW(Polarity(1.01), ContractViolation);
  EXPECT_THROW(Polarity(std::nan("")), ContractViolation);
  EXPECT_DOUBLE_EQ(Polarity::clamped(4.0).value(), 1.0);
  EXPECT_DOUBLE_EQ(Polarity::clamped(-4.0).value(), -1.0);
}

// Random byte soup never escapes [-1, 1] and scores are reproducible.
TEST(ScoreText, FuzzRangeAndDeterminism) {
  const LexiconProvider provider(
      load_lexicon(std::string(SERPAUDIT_DATA_DIR) + "/lexicon/en-default.tsv"));
  std::mt19937 gen(3);
  const std::vector<std::string> words = {"very", "not", "good", "bad", "great", "terrible",
                                          "really", "never", "best", "worst", "the", "."};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int n = gen() % 40;
    for (int i = 0; i < n; ++i) {
      if (gen() % 4 == 0) text.push_back(static_cast<char>(gen() % 256));
      else text += words[gen() % words.size()] + " ";
    }
    const double p = provider.score(text).value();
    EXPECT_GE(p, -1.0);
    EXPECT_LE(p, 1.0);
    EXPECT_EQ(p, provider.score(text).value());
  }
}

TEST(DocumentLevel, DelegatesToProvider) {
  const LexiconProvider provider(small_lexicon());
  EXPECT_DOUBLE_EQ(score_document_level(doc_with("good"), provider).value(), 0.7);
  EXPECT_DOUBLE_EQ(score_document_level(doc_with("the cat sat"), provider).value(), 0.0);
  const Document one = doc_with("A good day.");
  EXPECT_EQ(score_document_level(one, provider).value(),
            score_sentence_level(one, provider).value());
}

TEST(SentenceLevel, MeanOverSentences) {
  Lexicon lex;
  lex.entries = {{"fine", 0.6}, {"meh", -0.2}};
  lex.negators = {"not"};
  const LexiconProvider provider(lex);
  EXPECT_NEAR(score_sentence_level(doc_with("All fine. Just meh."), provider).value(), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(score_sentence_level(doc_with("One. Two. Three."), provider).value(), 0.0);
  EXPECT_DOUBLE_EQ(score_sentence_level(doc_with("Just meh."), provider).value(), -0.2);
  // Document level pools terms, sentence level averages sentence means.
  EXPECT_NEAR(score_document_level(doc_with("Fine fine. Meh."), provider).value(),
              (0.6 + 0.6 - 0.2) / 3, 1e-15);
  EXPECT_NEAR(score_sentence_level(doc_with("Fine fine. Meh."), provider).value(),
              (0.6 - 0.2) / 2, 1e-15);
  EXPECT_THROW(score_sentence_level(doc_with("   "), provider), ScoringError);
}

TEST(ScoringText, TitleFlag) {
  Document d = doc_with("Bad news.");
  d.title = "Good times";
  EXPECT_EQ(scoring_text(d), "Bad news.");
  EXPECT_EQ(scoring_text(d, true), "Good times. Bad news.");
}

TEST(ScoreQuery, BuiltInLexiconOnReferenceQueries) {
  const LexiconProvider provider(
      load_lexicon(std::string(SERPAUDIT_DATA_DIR) + "/lexicon/en-default.tsv"));
  EXPECT_NEAR(score_query("ACLU - Good for America?", provider).value(), 0.70, 0.005);
  EXPECT_EQ(score_query("Gun Control", provider).value(), 0.0);
  EXPECT_EQ(score_query("", provider).value(), 0.0);
  EXPECT_NEAR(score_query("Illegal Immigration", provider).value(), -0.50, 0.005);
}

TEST(ProcessProvider, LineProtocol) {
  ProcessProvider provider("while IFS= read -r line; do echo 0.25; done");
  EXPECT_DOUBLE_EQ(provider.score("anything\nwith newline").value(), 0.25);
  EXPECT_DOUBLE_EQ(provider.score("again").value(), 0.25);
  EXPECT_EQ(unescape_protocol_line(escape_protocol_line("a\\b\nc\td\r")), "a\\b\nc\td\r");
  EXPECT_EQ(escape_protocol_line("x\ny").find('\n'), std::string::npos);
}

TEST(ProcessProvider, BadRepliesAreScoringErrors) {
  ProcessProvider garbage("while IFS= read -r line; do echo nope; done");
  EXPECT_THROW(garbage.score("x"), ScoringError);
  ProcessProvider out_of_range("while IFS= read -r line; do echo 7; done");
  EXPECT_THROW(out_of_range.score("x"), ScoringError);
  ProcessProvider gone("exit 0");
  EXPECT_THROW(gone.score("x"), ScoringError);
}

bool textblob_available() {
  return std::system("python3 -c 'import textblob' >/dev/null 2>&1") == 0;
}

// The sidecar speaks the protocol through TextBlob; its query polarities
// are the ones the reference tool reports for the polar stable-set topics.
TEST(ProcessProvider, TextBlobSidecarReferenceQueries) {
  if (!textblob_available()) GTEST_SKIP() << "textblob not installed";
  ProcessProvider provider("python3 " SERPAUDIT_SOURCE_DIR "/tools/textblob_provider.py");
  const std::vector<std::pair<std::string, double>> polar = {
      {"ACLU - Good for America?", 0.70},
      {"Born Gay? Origins of Sexual Orientation", 0.46},
      {"College Education Worth It?", 0.30},
      {"Gay Marriage", 0.42},
      {"Illegal Immigration", -0.50},
      {"Milk - Is It Healthy?", 0.50},
      {"Right to Health Care", 0.29},
      {"Social Media?", 0.03},
      {"Social Security Privatization", 0.03}};
  for (const auto& [q, p] : polar)
    EXPECT_NEAR(score_query(q, provider).value(), p, 0.005) << q;
  EXPECT_EQ(score_query("Gun Control", provider).value(), 0.0);
}

}  // namespace
}  // namespace serpaudit

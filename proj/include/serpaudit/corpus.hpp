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

// Corpus data model and the line-delimited on-disk formats.
//
// Corpus file: one JSON object per line with the fields
//   engine (string), query (string), rank (integer >= 1), body (string),
//   title, url, fetched_at (optional strings).
// Topic file: one JSON object per line with the fields
//   topic (string), transform (bool), queries (optional array of strings;
//   defaults to [topic]).
// Blank lines are ignored in both. Record order is not significant.

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "serpaudit/common.hpp"

namespace serpaudit {

struct Document {
  std::string engine;
  std::string query;
  int rank = 0;
  std::optional<std::string> title;
  std::string body;
  std::optional<std::string> url;
  std::optional<std::string> fetched_at;

  bool operator==(const Document&) const = default;
};

struct RankedList {
  std::string engine;
  std::string query;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool operator==(const RankedList&) const = default;
};

struct TopicConfig {
  std::string topic;
  std::vector<std::string> queries;
  bool transform = false;
  // Filled by the pipeline once queries have been scored.
  std::optional<double> query_polarity;

  bool operator==(const TopicConfig&) const = default;
};

using ListKey = std::pair<std::string, std::string>;  // (engine, query)

struct Corpus {
  std::map<ListKey, RankedList> lists;
  std::vector<TopicConfig> topics;

  const RankedList* find(const std::string& engine,
                         const std::string& query) const {
    auto it = lists.find({engine, query});
    return it == lists.end() ? nullptr : &it->second;
  }

  std::set<std::string> engines() const {
    std::set<std::string> out;
    for (const auto& [key, list] : lists) out.insert(key.first);
    return out;
  }

  bool operator==(const Corpus&) const = default;
};

// Throws ValidationError unless ranks are exactly 1..n, the engine/query
// fields are shared and every body is non-blank.
inline void validate_list(const RankedList& list) {
  for (std::size_t i = 0; i < list.documents.size(); ++i) {
    const Document& doc = list.documents[i];
    const std::string where =
        " in list (" + list.engine + ", " + list.query + ")";
    if (doc.engine != list.engine || doc.query != list.query)
      throw ValidationError("mixed engine/query" + where);
    if (doc.rank < 1)
      throw ValidationError("rank " + std::to_string(doc.rank) +
                            " below 1" + where);
    if (i > 0 && doc.rank == list.documents[i - 1].rank)
      throw ValidationError("duplicate rank " + std::to_string(doc.rank) +
                            where);
    if (doc.rank != static_cast<int>(i) + 1)
      throw ValidationError("rank gap: expected " + std::to_string(i + 1) +
                            ", found " + std::to_string(doc.rank) + where);
    if (detail::trim(doc.body).empty())
      throw ValidationError("empty body at rank " + std::to_string(doc.rank) +
                            where);
  }
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& rec, const char* name,
                                   std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end()) throw ParseError(std::string("missing field '") + name + "'", line);
  return *it;
}

inline std::string string_field(const nlohmann::json& rec, const char* name,
                                std::size_t line) {
  const auto& v = field(rec, name, line);
  if (!v.is_string())
    throw ParseError(std::string("field '") + name + "' must be a string", line);
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& rec,
                                                  const char* name,
                                                  std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ParseError(std::string("field '") + name + "' must be a string", line);
  return it->get<std::string>();
}

inline void reject_unknown_fields(const nlohmann::json& rec,
                                  std::initializer_list<const char*> known,
                                  std::size_t line) {
  for (const auto& [key, value] : rec.items()) {
    bool ok = std::any_of(known.begin(), known.end(),
                          [&](const char* k) { return key == k; });
    if (!ok) throw ParseError("unknown field '" + key + "'", line);
  }
}

inline nlohmann::json parse_line(const std::string& text, std::size_t line) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), line);
  }
  if (!rec.is_object()) throw ParseError("record must be a JSON object", line);
  return rec;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

inline Document parse_document(const std::string& text, std::size_t line = 0) {
  const nlohmann::json rec = detail::parse_line(text, line);
  detail::reject_unknown_fields(
      rec, {"engine", "query", "rank", "title", "url", "body", "fetched_at"},
      line);
  Document doc;
  doc.engine = detail::string_field(rec, "engine", line);
  doc.query = detail::string_field(rec, "query", line);
  const auto& rank = detail::field(rec, "rank", line);
  if (!rank.is_number_integer())
    throw ParseError("field 'rank' must be an integer", line);
  doc.rank = rank.get<int>();
  doc.title = detail::optional_string(rec, "title", line);
  doc.body = detail::string_field(rec, "body", line);
  doc.url = detail::optional_string(rec, "url", line);
  doc.fetched_at = detail::optional_string(rec, "fetched_at", line);
  return doc;
}

inline std::string format_document(const Document& doc) {
  nlohmann::json rec;
  rec["engine"] = doc.engine;
  rec["query"] = doc.query;
  rec["rank"] = doc.rank;
  rec["body"] = doc.body;
  if (doc.title) rec["title"] = *doc.title;
  if (doc.url) rec["url"] = *doc.url;
  if (doc.fetched_at) rec["fetched_at"] = *doc.fetched_at;
  return rec.dump();
}

// Groups documents into ranked lists and validates them. When `topics` is
// non-empty every list's query must belong to one of them.
inline Corpus build_corpus(std::vector<Document> docs,
                           std::vector<TopicConfig> topics = {}) {
  Corpus corpus;
  for (auto& doc : docs) {
    auto& list = corpus.lists[{doc.engine, doc.query}];
    list.engine = doc.engine;
    list.query = doc.query;
    list.documents.push_back(std::move(doc));
  }
  for (auto& [key, list] : corpus.lists) {
    std::stable_sort(
        list.documents.begin(), list.documents.end(),
        [](const Document& a, const Document& b) { return a.rank < b.rank; });
    validate_list(list);
  }
  if (!topics.empty()) {
    std::set<std::string> known;
    for (const auto& t : topics) known.insert(t.queries.begin(), t.queries.end());
    for (const auto& [key, list] : corpus.lists)
      if (!known.count(key.second))
        throw ValidationError("unknown query '" + key.second +
                              "' (not in any topic)");
  }
  corpus.topics = std::move(topics);
  return corpus;
}

inline Corpus parse_corpus(std::istream& in,
                           std::vector<TopicConfig> topics = {}) {
  std::vector<Document> docs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    docs.push_back(parse_document(text, line));
  }
  return build_corpus(std::move(docs), std::move(topics));
}

inline Corpus load_corpus(const std::string& path,
                          std::vector<TopicConfig> topics = {}) {
  auto in = detail::open_input(path);
  return parse_corpus(in, std::move(topics));
}

// Canonical form: lists in (engine, query) order, documents in rank order.
inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& [key, list] : corpus.lists)
    for (const auto& doc : list.documents) out << format_document(doc) << '\n';
}

inline std::vector<TopicConfig> parse_topic_config(std::istream& in) {
  std::vector<TopicConfig> topics;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    const nlohmann::json rec = detail::parse_line(text, line);
    detail::reject_unknown_fields(rec, {"topic", "transform", "queries"}, line);
    TopicConfig topic;
    topic.topic = detail::string_field(rec, "topic", line);
    const auto& transform = detail::field(rec, "transform", line);
    if (!transform.is_boolean())
      throw ParseError("field 'transform' must be true or false", line);
    topic.transform = transform.get<bool>();
    if (auto it = rec.find("queries"); it != rec.end()) {
      if (!it->is_array()) throw ParseError("field 'queries' must be an array", line);
      for (const auto& q : *it) {
        if (!q.is_string()) throw ParseError("queries must be strings", line);
        topic.queries.push_back(q.get<std::string>());
      }
      if (topic.queries.empty()) throw ParseError("empty query list", line);
    } else {
      topic.queries.push_back(topic.topic);
    }
    if (!seen.insert(topic.topic).second)
      throw ParseError("duplicate topic '" + topic.topic + "'", line);
    topics.push_back(std::move(topic));
  }
  return topics;
}

inline std::vector<TopicConfig> load_topic_config(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_topic_config(in);
}

inline void write_topic_config(std::ostream& out,
                               const std::vector<TopicConfig>& topics) {
  for (const auto& t : topics) {
    nlohmann::json rec;
    rec["topic"] = t.topic;
    rec["transform"] = t.transform;
    rec["queries"] = t.queries;
    out << rec.dump() << '\n';
  }
}

// First min(k, n) documents. A list shorter than k is returned whole and a
// warning is appended when `warnings` is given.
inline RankedList truncate_at_k(const RankedList& list, int k,
                                std::vector<std::string>* warnings = nullptr) {
  if (k < 1) throw ContractViolation("cutoff k must be >= 1");
  RankedList out{list.engine, list.query, {}};
  const std::size_t n = std::min<std::size_t>(k, list.documents.size());
  out.documents.assign(list.documents.begin(), list.documents.begin() + n);
  if (warnings && list.documents.size() < static_cast<std::size_t>(k)) {
    warnings->push_back("list (" + list.engine + ", " + list.query + ") has " +
                        std::to_string(list.documents.size()) +
                        " documents, fewer than k=" + std::to_string(k));
  }
  return out;
}

}  // namespace serpaudit

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

// Search API clients that snapshot ranked news results into the corpus
// format. Clients talk to an abstract HTTP transport so everything here
// runs offline against recorded fixtures; see http_transport.hpp for the
// live transport.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "serpaudit/common.hpp"
#include "serpaudit/corpus.hpp"

namespace serpaudit {

class FetchError : public Error {
 public:
  using Error::Error;
};
class AuthError : public FetchError {
 public:
  using FetchError::FetchError;
};
class QuotaError : public FetchError {
 public:
  using FetchError::FetchError;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;  // 0: transport-level failure
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url, const Headers& headers) = 0;
};

// Canned responses keyed by exact URL. Each URL serves its queue in order
// and keeps repeating the last entry; unknown URLs get 404.
class FixtureTransport final : public HttpTransport {
 public:
  void add(const std::string& url, HttpResponse response) {
    responses_[url].push_back(std::move(response));
  }
  HttpResponse get(const std::string& url, const Headers&) override {
    requests_.push_back(url);
    auto it = responses_.find(url);
    if (it == responses_.end() || it->second.empty()) return {404, "not found"};
    HttpResponse r = it->second.front();
    if (it->second.size() > 1) it->second.pop_front();
    return r;
  }
  const std::vector<std::string>& requests() const { return requests_; }

 private:
  std::map<std::string, std::deque<HttpResponse>> responses_;
  std::vector<std::string> requests_;
};

class Clock {
 public:
  using time_point = std::chrono::system_clock::time_point;
  using duration = std::chrono::nanoseconds;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::system_clock::now(); }
  void sleep_for(duration d) override { std::this_thread::sleep_for(d); }
};

// Time only moves when slept on, or by `advance`. Records every sleep.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(time_point start = time_point{}) : now_(start) {}
  time_point now() override { return now_; }
  void sleep_for(duration d) override {
    sleeps_.push_back(d);
    now_ += d;
  }
  void advance(duration d) { now_ += d; }
  const std::vector<duration>& sleeps() const { return sleeps_; }

 private:
  time_point now_;
  std::vector<duration> sleeps_;
};

inline std::string format_timestamp(Clock::time_point t) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

// Spaces requests at least 1 / requests_per_second apart, so any half-open
// one-second window holds at most requests_per_second requests.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, double requests_per_second)
      : clock_(clock),
        interval_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second))) {
    if (!(requests_per_second > 0)) throw ConfigError("requests_per_second must be > 0");
  }
  void acquire() {
    auto now = clock_.now();
    if (next_ && now < *next_) {
      clock_.sleep_for(*next_ - now);
      now = clock_.now();
    }
    next_ = now + interval_;
  }

 private:
  Clock& clock_;
  Clock::duration interval_;
  std::optional<Clock::time_point> next_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

inline std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

// Crude visible-text extraction for the optional full-page body.
inline std::string strip_html(std::string_view html) {
  std::string out;
  std::size_t i = 0;
  auto skip_block = [&](std::string_view tag) {
    const std::string close = "</" + std::string(tag);
    auto end = detail::to_lower(html.substr(i)).find(close);
    if (end == std::string::npos) {
      i = html.size();
      return;
    }
    const auto gt = html.find('>', i + end);
    i = gt == std::string_view::npos ? html.size() : gt + 1;
  };
  while (i < html.size()) {
    if (html[i] == '<') {
      const std::string head = detail::to_lower(html.substr(i, 8));
      if (head.rfind("<script", 0) == 0) { skip_block("script"); continue; }
      if (head.rfind("<style", 0) == 0) { skip_block("style"); continue; }
      const auto close = html.find('>', i);
      i = close == std::string_view::npos ? html.size() : close + 1;
      out.push_back(' ');
      continue;
    }
    if (html[i] == '&') {
      static const std::pair<std::string_view, char> entities[] = {
          {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''},
          {"&nbsp;", ' '}};
      bool matched = false;
      for (const auto& [name, ch] : entities) {
        if (html.substr(i, name.size()) == name) {
          out.push_back(ch);
          i += name.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(html[i++]);
  }
  std::string collapsed;
  for (char c : out) {
    if (detail::is_space(c)) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
    } else {
      collapsed.push_back(c);
    }
  }
  return std::string(detail::trim(collapsed));
}

class EngineClient {
 public:
  virtual ~EngineClient() = default;
  virtual std::string engine() const = 0;
  // Up to `count` results for `query`, ranks 1..n.
  virtual RankedList fetch(const std::string& query, int count, const std::string& market) = 0;
};

struct ClientOptions {
  double requests_per_second = 3.0;
  RetryPolicy retry;
  bool fetch_full_page = false;
};

// Shared plumbing for JSON search APIs: rate limiting, bounded retries with
// exponential backoff, result-to-document conversion.
class HttpEngineClient : public EngineClient {
 public:
  HttpEngineClient(std::string engine, HttpTransport& transport, Clock& clock,
                   ClientOptions options)
      : engine_(std::move(engine)),
        transport_(transport),
        clock_(clock),
        options_(options),
        limiter_(clock, options.requests_per_second) {}

  std::string engine() const override { return engine_; }

 protected:
  struct Hit {
    std::string title;
    std::string url;
    std::string snippet;
  };

  // 401/403 fail at once; 429 and 5xx/transport failures are retried.
  nlohmann::json get_json(const std::string& url, const Headers& headers) {
    auto backoff = std::chrono::duration_cast<Clock::duration>(options_.retry.initial_backoff);
    std::string last;
    bool quota = false;
    for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
      limiter_.acquire();
      const HttpResponse r = transport_.get(url, headers);
      if (r.status == 200) {
        try {
          return nlohmann::json::parse(r.body);
        } catch (const nlohmann::json::parse_error&) {
          throw FetchError(engine_ + ": malformed JSON from " + url);
        }
      }
      if (r.status == 401 || r.status == 403)
        throw AuthError(engine_ + ": authentication failed (HTTP " + std::to_string(r.status) + ")");
      const bool transient = r.status == 0 || r.status == 429 || r.status >= 500;
      quota = r.status == 429;
      last = "HTTP " + std::to_string(r.status);
      if (!transient) break;
      if (attempt < options_.retry.max_attempts) {
        clock_.sleep_for(backoff);
        backoff = std::chrono::duration_cast<Clock::duration>(backoff * options_.retry.multiplier);
      }
    }
    if (quota) throw QuotaError(engine_ + ": quota exhausted (" + last + ")");
    throw FetchError(engine_ + ": request failed after retries (" + last + ")");
  }

  RankedList to_list(const std::string& query, const std::vector<Hit>& hits, int count) {
    RankedList list{engine_, query, {}};
    const std::string stamp = format_timestamp(clock_.now());
    for (const auto& h : hits) {
      if (static_cast<int>(list.documents.size()) >= count) break;
      std::string body = h.snippet;
      if (options_.fetch_full_page && !h.url.empty()) {
        limiter_.acquire();
        const HttpResponse page = transport_.get(h.url, {});
        if (page.status == 200) {
          std::string text = strip_html(page.body);
          if (!text.empty()) body = std::move(text);
        }
      }
      if (detail::trim(body).empty()) body = h.title;
      if (detail::trim(body).empty()) continue;
      Document doc;
      doc.engine = engine_;
      doc.query = query;
      doc.rank = static_cast<int>(list.documents.size()) + 1;
      if (!h.title.empty()) doc.title = h.title;
      doc.body = std::move(body);
      if (!h.url.empty()) doc.url = h.url;
      doc.fetched_at = stamp;
      list.documents.push_back(std::move(doc));
    }
    return list;
  }

  static std::string str(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
  }

  std::string engine_;
  HttpTransport& transport_;
  Clock& clock_;
  ClientOptions options_;
  RateLimiter limiter_;
};

// Bing News Search v7: one request of up to 100 results.
class BingNewsClient final : public HttpEngineClient {
 public:
  BingNewsClient(HttpTransport& transport, Clock& clock, std::string api_key,
                 std::string endpoint = "https://api.bing.microsoft.com/v7.0/news/search",
                 ClientOptions options = {}, std::string engine = "bing")
      : HttpEngineClient(std::move(engine), transport, clock, options),
        api_key_(std::move(api_key)),
        endpoint_(std::move(endpoint)) {}

  static std::string request_url(const std::string& endpoint, const std::string& query,
                                 int count, const std::string& market) {
    return endpoint + "?q=" + url_encode(query) + "&count=" + std::to_string(count) +
           "&offset=0&mkt=" + url_encode("en-" + market);
  }

  RankedList fetch(const std::string& query, int count, const std::string& market) override {
    const auto j = get_json(request_url(endpoint_, query, count, market),
                            {{"Ocp-Apim-Subscription-Key", api_key_}});
    std::vector<Hit> hits;
    if (auto it = j.find("value"); it != j.end() && it->is_array())
      for (const auto& v : *it) hits.push_back({str(v, "name"), str(v, "url"), str(v, "description")});
    return to_list(query, hits, count);
  }

 private:
  std::string api_key_;
  std::string endpoint_;
};

// Google Custom Search JSON API: pages of 10 results.
class GoogleSearchClient final : public HttpEngineClient {
 public:
  GoogleSearchClient(HttpTransport& transport, Clock& clock, std::string api_key,
                     std::string engine_id,
                     std::string endpoint = "https://www.googleapis.com/customsearch/v1",
                     ClientOptions options = {}, std::string engine = "google")
      : HttpEngineClient(std::move(engine), transport, clock, options),
        api_key_(std::move(api_key)),
        engine_id_(std::move(engine_id)),
        endpoint_(std::move(endpoint)) {}

  static std::string request_url(const std::string& endpoint, const std::string& key,
                                 const std::string& cx, const std::string& query, int start,
                                 int num, const std::string& market) {
    return endpoint + "?key=" + url_encode(key) + "&cx=" + url_encode(cx) + "&q=" +
           url_encode(query) + "&start=" + std::to_string(start) + "&num=" + std::to_string(num) +
           "&gl=" + url_encode(detail::to_lower(market));
  }

  RankedList fetch(const std::string& query, int count, const std::string& market) override {
    std::vector<Hit> hits;
    for (int start = 1; start <= count; start += 10) {
      const int num = std::min(10, count - start + 1);
      const auto j =
          get_json(request_url(endpoint_, api_key_, engine_id_, query, start, num, market), {});
      auto it = j.find("items");
      if (it == j.end() || !it->is_array() || it->empty()) break;
      for (const auto& v : *it) hits.push_back({str(v, "title"), str(v, "link"), str(v, "snippet")});
      if (static_cast<int>(it->size()) < num) break;
    }
    return to_list(query, hits, count);
  }

 private:
  std::string api_key_;
  std::string engine_id_;
  std::string endpoint_;
};

inline RankedList fetch_results(EngineClient& client, const std::string& query, int count,
                                const std::string& market) {
  if (count < 1 || count > 100) throw ContractViolation("count must lie in 1..100");
  RankedList list = client.fetch(query, count, market);
  if (static_cast<int>(list.size()) > count) list.documents.resize(static_cast<std::size_t>(count));
  validate_list(list);
  return list;
}

struct FetchRecord {
  std::string query;
  std::string engine;
  std::string fetched_at;
  bool ok = false;
  int documents = 0;
  std::string error;
};

struct SnapshotManifest {
  std::string started_at;
  std::string market;
  int count = 10;
  double skew_bound_seconds = 5.0;
  std::vector<FetchRecord> fetches;
  std::map<std::string, double> skew_seconds;  // per query, both engines ok
  std::vector<std::string> warnings;
  int failures = 0;
};

inline nlohmann::json to_json(const SnapshotManifest& m) {
  nlohmann::json j;
  j["started_at"] = m.started_at;
  j["market"] = m.market;
  j["count"] = m.count;
  j["skew_bound_seconds"] = m.skew_bound_seconds;
  j["fetches"] = nlohmann::json::array();
  for (const auto& f : m.fetches) {
    nlohmann::json r = {{"query", f.query}, {"engine", f.engine}, {"fetched_at", f.fetched_at},
                        {"ok", f.ok},       {"documents", f.documents}};
    if (!f.error.empty()) r["error"] = f.error;
    j["fetches"].push_back(r);
  }
  j["skew_seconds"] = m.skew_seconds;
  j["warnings"] = m.warnings;
  j["failures"] = m.failures;
  return j;
}

// Too many failed fetches; carries the manifest gathered so far.
class SnapshotError : public Error {
 public:
  SnapshotError(const std::string& what, SnapshotManifest manifest)
      : Error(what), manifest_(std::move(manifest)) {}
  const SnapshotManifest& manifest() const { return manifest_; }

 private:
  SnapshotManifest manifest_;
};

struct SnapshotOptions {
  int count = 10;
  std::string market = "US";
  double skew_bound_seconds = 5.0;
  double max_failure_fraction = 0.25;
};

struct Snapshot {
  Corpus corpus;
  SnapshotManifest manifest;
};

// Fetches each query from both engines back to back before moving on.
// Failed (engine, query) fetches are recorded and left out of the corpus;
// throws SnapshotError when the failed fraction exceeds the bound.
inline Snapshot snapshot_pair(const std::vector<std::string>& queries,
                              std::pair<EngineClient*, EngineClient*> clients, Clock& clock,
                              const SnapshotOptions& options = {}) {
  if (!clients.first || !clients.second) throw ContractViolation("snapshot needs two clients");
  Snapshot snap;
  auto& m = snap.manifest;
  m.started_at = format_timestamp(clock.now());
  m.market = options.market;
  m.count = options.count;
  m.skew_bound_seconds = options.skew_bound_seconds;
  std::vector<Document> docs;
  for (const auto& q : queries) {
    std::optional<Clock::time_point> started[2];
    for (int side = 0; side < 2; ++side) {
      EngineClient& client = side == 0 ? *clients.first : *clients.second;
      FetchRecord rec{q, client.engine(), "", false, 0, ""};
      const auto t = clock.now();
      rec.fetched_at = format_timestamp(t);
      try {
        RankedList list = fetch_results(client, q, options.count, options.market);
        rec.ok = true;
        rec.documents = static_cast<int>(list.size());
        started[side] = t;
        for (auto& d : list.documents) docs.push_back(std::move(d));
      } catch (const Error& e) {
        rec.error = e.what();
        ++m.failures;
      }
      m.fetches.push_back(std::move(rec));
    }
    if (started[0] && started[1]) {
      const double skew = std::fabs(std::chrono::duration<double>(*started[1] - *started[0]).count());
      m.skew_seconds[q] = skew;
      if (skew > options.skew_bound_seconds) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "skew %.3fs exceeds bound %.3fs for query ", skew,
                      options.skew_bound_seconds);
        m.warnings.push_back(buf + q);
      }
    }
  }
  const double total = 2.0 * static_cast<double>(queries.size());
  if (total > 0 && m.failures / total > options.max_failure_fraction)
    throw SnapshotError("snapshot failed: " + std::to_string(m.failures) + " of " +
                        std::to_string(static_cast<int>(total)) + " fetches failed",
                        m);
  snap.corpus = build_corpus(std::move(docs));
  return snap;
}

}  // namespace serpaudit

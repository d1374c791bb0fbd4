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

// Command-line front end. `run_cli` is what the serpaudit binary calls;
// it is a header so tests can drive commands in-process.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime failure.
// Errors are reported as one line: `error: <kind>: <message>`.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "serpaudit/corpus.hpp"
#include "serpaudit/crawl.hpp"
#include "serpaudit/metrics.hpp"
#include "serpaudit/pipeline.hpp"
#include "serpaudit/sentiment.hpp"
#include "serpaudit/sidecar.hpp"

#ifndef SERPAUDIT_DATA_DIR
#define SERPAUDIT_DATA_DIR "data"
#endif

namespace serpaudit::cli {

namespace fs = std::filesystem;

using TransportFactory = std::function<std::unique_ptr<HttpTransport>()>;

inline std::string default_lexicon_path() {
  if (const char* env = std::getenv("SERPAUDIT_LEXICON")) return env;
  return std::string(SERPAUDIT_DATA_DIR) + "/lexicon/en-default.tsv";
}

namespace detail {

inline std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Files are staged in memory and written together; on any write failure
// the ones already written are removed.
class OutputSet {
 public:
  void add(fs::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }
  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        written.push_back(path);
        out << content;
        if (!out.flush()) throw Error("cannot write '" + path.string() + "'");
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

struct ProviderOptions {
  std::string lexicon;
  std::string provider_cmd;

  void attach(CLI::App* app) {
    app->add_option("--lexicon", lexicon, "Lexicon file for the built-in scorer");
    app->add_option("--provider-cmd", provider_cmd,
                    "External scorer command speaking the provider line protocol");
  }

  std::unique_ptr<SentimentProvider> make() const {
    if (!provider_cmd.empty()) return std::make_unique<ProcessProvider>(provider_cmd);
    const std::string path = lexicon.empty() ? default_lexicon_path() : lexicon;
    return std::make_unique<LexiconProvider>(load_lexicon(path), "lexicon:" + fs::path(path).filename().string());
  }

  nlohmann::json echo() const {
    if (!provider_cmd.empty()) return {{"provider_cmd", provider_cmd}};
    return {{"lexicon", lexicon.empty() ? default_lexicon_path() : lexicon}};
  }
};

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   TransportFactory live_transport = nullptr) {
  CLI::App app{"serpaudit: sentiment bias audits of ranked search results"};
  app.require_subcommand(1);
  std::function<void()> action;

  // audit -----------------------------------------------------------------
  auto* audit = app.add_subcommand("audit", "Run the full two-engine audit");
  struct {
    std::string corpus, topics, config, out_dir, engines, gain, normalization, comparison, eap;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<int> jobs;
    bool include_title = false, dry_run = false;
    detail::ProviderOptions provider;
  } a;
  audit->add_option("--corpus", a.corpus, "Corpus file (JSON lines)")->required();
  audit->add_option("--topics", a.topics, "Topic config file (JSON lines)")->required();
  audit->add_option("--config", a.config, "Audit config file (JSON)");
  audit->add_option("--out-dir", a.out_dir, "Directory for report files")->required();
  audit->add_option("--engines", a.engines, "Override engines as A,B");
  audit->add_option("--seed", a.seed, "Fair baseline seed (default 20170425)");
  audit->add_option("--alpha", a.alpha, "Significance level");
  audit->add_option("--gain", a.gain, "NDCG gain: linear|exponential");
  audit->add_option("--normalization", a.normalization, "pooled|per_engine");
  audit->add_option("--engine-comparison", a.comparison, "paired|welch");
  audit->add_option("--eap-method", a.eap, "exact|closed_form");
  audit->add_option("--jobs", a.jobs, "Scoring threads");
  audit->add_flag("--include-title", a.include_title, "Score title together with body");
  audit->add_flag("--dry-run", a.dry_run, "Validate inputs and print the effective config");
  a.provider.attach(audit);
  audit->callback([&] {
    action = [&] {
      AuditConfig cfg;
      if (!a.config.empty()) cfg = audit_config_from_json(detail::read_json_file(a.config));
      nlohmann::json overrides = nlohmann::json::object();
      if (!a.engines.empty()) {
        const auto comma = a.engines.find(',');
        if (comma == std::string::npos) throw ConfigError("--engines expects A,B");
        overrides["engines"] = {a.engines.substr(0, comma), a.engines.substr(comma + 1)};
      }
      if (a.seed) overrides["baseline"]["seed"] = *a.seed;
      if (a.alpha) overrides["alpha"] = *a.alpha;
      if (!a.gain.empty()) overrides["gain"] = a.gain;
      if (!a.normalization.empty()) overrides["normalization"] = a.normalization;
      if (!a.comparison.empty()) overrides["engine_comparison"] = a.comparison;
      if (!a.eap.empty()) overrides["eap_method"] = a.eap;
      if (a.jobs) overrides["jobs"] = *a.jobs;
      if (a.include_title) overrides["include_title"] = true;
      cfg = audit_config_from_json(overrides, cfg);

      auto topics = load_topic_config(a.topics);
      const Corpus corpus = load_corpus(a.corpus, topics);
      auto provider = a.provider.make();
      nlohmann::json effective = {{"audit", to_json(cfg)}, {"provider", a.provider.echo()},
                                  {"corpus", a.corpus},    {"topics", a.topics},
                                  {"out_dir", a.out_dir}};
      if (a.dry_run) {
        out << effective.dump(2) << "\n";
        return;
      }
      const AuditReport report = run_audit(corpus, topics, cfg, *provider);
      nlohmann::json log = {{"warnings", report.log.warnings}};
      log["excluded"] = to_json(report)["excluded"];
      detail::OutputSet files;
      const fs::path dir(a.out_dir);
      files.add(dir / "report.json", to_json(report).dump(2) + "\n");
      files.add(dir / "report.txt", render_tables(report));
      files.add(dir / "manifest.json", log.dump(2) + "\n");
      for (const auto& s : report.scatter) files.add(dir / scatter_file_name(s), format_scatter(s));
      files.commit();
      out << render_tables(report);
    };
  });

  // score -----------------------------------------------------------------
  auto* score = app.add_subcommand("score", "Dump per-document polarities");
  struct {
    std::string corpus, topics, level = "both", out_path;
    bool include_title = false, dry_run = false;
    detail::ProviderOptions provider;
  } s;
  score->add_option("--corpus", s.corpus, "Corpus file")->required();
  score->add_option("--topics", s.topics, "Topic config file (enables transformed column)");
  score->add_option("--level", s.level, "document|sentence|both")
      ->check(CLI::IsMember({"document", "sentence", "both"}));
  score->add_option("--out", s.out_path, "Output TSV (default stdout)");
  score->add_flag("--include-title", s.include_title, "Score title together with body");
  score->add_flag("--dry-run", s.dry_run, "Validate inputs and print the effective config");
  s.provider.attach(score);
  score->callback([&] {
    action = [&] {
      std::vector<TopicConfig> topics;
      if (!s.topics.empty()) topics = load_topic_config(s.topics);
      const Corpus corpus = load_corpus(s.corpus, topics);
      std::vector<Level> levels;
      if (s.level != "sentence") levels.push_back(Level::document);
      if (s.level != "document") levels.push_back(Level::sentence);
      auto provider = s.provider.make();
      if (s.dry_run) {
        out << nlohmann::json({{"corpus", s.corpus}, {"topics", s.topics}, {"level", s.level},
                               {"include_title", s.include_title}, {"provider", s.provider.echo()},
                               {"lists", corpus.lists.size()}})
                   .dump(2)
            << "\n";
        return;
      }
      std::ostringstream tsv;
      tsv << "engine\tquery\trank\tlevel\traw\ttransformed\terror\n";
      char num[64];
      for (const auto& d : score_documents(corpus, topics, levels, *provider, s.include_title)) {
        tsv << d.engine << '\t' << d.query << '\t' << d.rank << '\t' << to_string(d.level) << '\t';
        if (d.raw) { std::snprintf(num, sizeof num, "%.17g", *d.raw); tsv << num; }
        tsv << '\t';
        if (d.transformed) { std::snprintf(num, sizeof num, "%.17g", *d.transformed); tsv << num; }
        tsv << '\t' << d.error << '\n';
      }
      if (s.out_path.empty()) {
        out << tsv.str();
      } else {
        detail::OutputSet files;
        files.add(s.out_path, tsv.str());
        files.commit();
      }
    };
  });

  // baseline --------------------------------------------------------------
  auto* baseline = app.add_subcommand("baseline", "Print fair baseline values");
  struct {
    std::uint64_t seed = kDefaultBaselineSeed;
    int n_lists = 50, list_len = 10;
    std::string gain = "linear";
    bool samples = false, dry_run = false;
  } b;
  baseline->add_option("--seed", b.seed, "RNG seed (default 20170425)");
  baseline->add_option("--n-lists", b.n_lists, "Number of random lists (default 50)");
  baseline->add_option("--list-len", b.list_len, "Documents per list (default 10)");
  baseline->add_option("--gain", b.gain, "linear|exponential")
      ->check(CLI::IsMember({"linear", "exponential"}));
  baseline->add_flag("--samples", b.samples, "Include per-list scores");
  baseline->add_flag("--dry-run", b.dry_run, "Print the effective parameters only");
  baseline->callback([&] {
    action = [&] {
      nlohmann::json params = {{"seed", b.seed}, {"n_lists", b.n_lists}, {"list_len", b.list_len},
                               {"gain", b.gain}};
      if (b.n_lists < 1 || b.list_len < 1) throw ConfigError("--n-lists and --list-len must be >= 1");
      if (b.dry_run) {
        out << params.dump(2) << "\n";
        return;
      }
      const auto lists = generate_fair_lists(b.seed, b.n_lists, b.list_len);
      auto ndcg = to_json(fair_ndcg_baseline(lists, parse_gain(b.gain)));
      auto ap = to_json(fair_ap_baseline(lists));
      if (!b.samples) {
        ndcg.erase("samples");
        ap.erase("samples");
      }
      out << nlohmann::json({{"params", params},
                             {"avg_polarity", fair_polarity_baseline()},
                             {"ndcg_senti", ndcg},
                             {"avg_precision", ap}})
                 .dump(2)
          << "\n";
    };
  });

  // filter-queries --------------------------------------------------------
  auto* filter = app.add_subcommand("filter-queries",
                                    "Apply the topic-word and neutrality filters; list polar topics");
  struct {
    std::string topics, candidates;
    bool dry_run = false;
    detail::ProviderOptions provider;
  } f;
  filter->add_option("--topics", f.topics, "Topic config file")->required();
  filter->add_option("--candidates", f.candidates,
                     "JSON lines of {\"topic\": ..., \"candidates\": [...]} (default: each topic's queries)");
  filter->add_flag("--dry-run", f.dry_run, "Validate inputs and print the effective config");
  f.provider.attach(filter);
  filter->callback([&] {
    action = [&] {
      auto topics = load_topic_config(f.topics);
      std::map<std::string, std::vector<std::string>> candidates;
      if (!f.candidates.empty()) {
        std::ifstream in(f.candidates);
        if (!in) throw ConfigError("cannot open '" + f.candidates + "'");
        std::string text;
        std::size_t line = 0;
        while (std::getline(in, text)) {
          ++line;
          if (serpaudit::detail::trim(text).empty()) continue;
          const auto rec = serpaudit::detail::parse_line(text, line);
          try {
            auto& list = candidates[rec.at("topic").get<std::string>()];
            for (const auto& c : rec.at("candidates")) list.push_back(c.get<std::string>());
          } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), line);
          }
        }
        for (const auto& [name, list] : candidates) {
          const bool known = std::any_of(topics.begin(), topics.end(),
                                         [&](const TopicConfig& t) { return t.topic == name; });
          if (!known) throw ValidationError("candidates for unknown topic '" + name + "'");
        }
      }
      auto provider = f.provider.make();
      if (f.dry_run) {
        out << nlohmann::json({{"topics", f.topics}, {"candidates", f.candidates},
                               {"provider", f.provider.echo()}})
                   .dump(2)
            << "\n";
        return;
      }
      char num[64];
      for (const auto& t : topics) {
        const auto it = candidates.find(t.topic);
        const auto& list = it != candidates.end() ? it->second : t.queries;
        if (list.empty()) continue;
        for (const auto& d : explain_query_filter(t, list, *provider))
          out << (d.kept ? "kept" : "dropped") << '\t' << t.topic << '\t' << d.query << '\t'
              << d.reason << '\n';
      }
      auto [polar, nonpolar] = partition_polar_queries(topics, *provider);
      for (const auto& t : topics) {
        std::snprintf(num, sizeof num, "%.2f", *t.query_polarity);
        out << (*t.query_polarity != 0.0 ? "polar" : "non-polar") << '\t' << t.topic << '\t'
            << num << '\n';
      }
      out << "# " << polar.size() << " polar, " << nonpolar.size() << " non-polar\n";
    };
  });

  // crawl -----------------------------------------------------------------
  auto* crawl = app.add_subcommand("crawl", "Snapshot both engines' results for every topic query");
  struct {
    std::string topics, config, out_path, manifest;
    bool dry_run = false;
  } c;
  crawl->add_option("--topics", c.topics, "Topic config file (queries to send)")->required();
  crawl->add_option("--config", c.config, "Crawl config file (JSON)")->required();
  crawl->add_option("--out", c.out_path, "Corpus file to write")->required();
  crawl->add_option("--manifest", c.manifest, "Snapshot manifest to write")->required();
  crawl->add_flag("--dry-run", c.dry_run, "Validate inputs and print the effective config");
  crawl->callback([&] {
    action = [&] {
      const auto topics = load_topic_config(c.topics);
      std::vector<std::string> queries;
      for (const auto& t : topics) queries.insert(queries.end(), t.queries.begin(), t.queries.end());
      const auto cfg = detail::read_json_file(c.config);

      SnapshotOptions opts;
      ClientOptions client_opts;
      std::unique_ptr<HttpTransport> transport;
      std::unique_ptr<Clock> clock;
      try {
        opts.count = cfg.value("count", 10);
        opts.market = cfg.value("market", std::string("US"));
        opts.skew_bound_seconds = cfg.value("skew_bound_seconds", 5.0);
        opts.max_failure_fraction = cfg.value("max_failure_fraction", 0.25);
        client_opts.requests_per_second = cfg.value("requests_per_second", 3.0);
        client_opts.fetch_full_page = cfg.value("fetch_full_page", false);
        client_opts.retry.max_attempts = cfg.value("max_attempts", 4);
        if (opts.count < 1 || opts.count > 100) throw ConfigError("count must lie in 1..100");
        if (cfg.contains("fixture")) {
          // Recorded responses: {"<url>": {"status": 200, "body": "..."}, ...}
          auto fixture = std::make_unique<FixtureTransport>();
          auto path = fs::path(cfg["fixture"].get<std::string>());
          if (path.is_relative()) path = fs::path(c.config).parent_path() / path;
          const auto recorded = detail::read_json_file(path.string());
          for (const auto& [url, r] : recorded.items())
            fixture->add(url, {r.at("status").get<int>(), r.at("body").get<std::string>()});
          transport = std::move(fixture);
          clock = std::make_unique<ManualClock>(
              Clock::time_point{} + std::chrono::seconds(cfg.value("fixture_epoch_seconds", 1533000000LL)));
        } else {
          if (!live_transport) throw ConfigError("live crawling is not available in this build");
          transport = live_transport();
          clock = std::make_unique<SystemClock>();
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("crawl config: ") + e.what());
      }

      auto env = [&](const nlohmann::json& e, const char* key) -> std::string {
        if (!e.contains(key)) return "";
        const auto name = e[key].get<std::string>();
        const char* v = std::getenv(name.c_str());
        if (!v && !cfg.contains("fixture"))
          throw ConfigError("environment variable " + name + " is not set");
        return v ? v : "";
      };
      std::vector<std::unique_ptr<EngineClient>> clients;
      try {
        const auto& engines = cfg.at("engines");
        if (!engines.is_array() || engines.size() != 2)
          throw ConfigError("crawl config needs exactly two engines");
        for (const auto& e : engines) {
          const auto type = e.at("type").get<std::string>();
          const auto name = e.value("name", type);
          if (type == "bing") {
            clients.push_back(std::make_unique<BingNewsClient>(
                *transport, *clock, env(e, "key_env"),
                e.value("endpoint", std::string("https://api.bing.microsoft.com/v7.0/news/search")),
                client_opts, name));
          } else if (type == "google") {
            clients.push_back(std::make_unique<GoogleSearchClient>(
                *transport, *clock, env(e, "key_env"), env(e, "cx_env"),
                e.value("endpoint", std::string("https://www.googleapis.com/customsearch/v1")),
                client_opts, name));
          } else {
            throw ConfigError("unknown engine type '" + type + "'");
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("crawl config: ") + e.what());
      }
      if (c.dry_run) {
        out << nlohmann::json({{"topics", c.topics}, {"queries", queries.size()}, {"config", cfg},
                               {"out", c.out_path}, {"manifest", c.manifest}})
                   .dump(2)
            << "\n";
        return;
      }
      const Snapshot snap = snapshot_pair(queries, {clients[0].get(), clients[1].get()}, *clock, opts);
      std::ostringstream corpus_text;
      write_corpus(corpus_text, snap.corpus);
      detail::OutputSet files;
      files.add(c.out_path, corpus_text.str());
      files.add(c.manifest, to_json(snap.manifest).dump(2) + "\n");
      files.commit();
      out << "fetched " << snap.corpus.lists.size() << " lists, " << snap.manifest.failures
          << " failures\n";
    };
  });

  // report ----------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "Re-render tables and scatter files from report.json");
  struct {
    std::string report, out_dir;
    bool dry_run = false;
  } r;
  report_cmd->add_option("--report", r.report, "Saved report.json")->required();
  report_cmd->add_option("--out-dir", r.out_dir, "Directory for rendered files (default: print only)");
  report_cmd->add_flag("--dry-run", r.dry_run, "Validate the report and print its config");
  report_cmd->callback([&] {
    action = [&] {
      const AuditReport report = report_from_json(detail::read_json_file(r.report));
      if (r.dry_run) {
        out << to_json(report.config).dump(2) << "\n";
        return;
      }
      if (!r.out_dir.empty()) {
        detail::OutputSet files;
        const fs::path dir(r.out_dir);
        files.add(dir / "report.txt", render_tables(report));
        for (const auto& s : report.scatter) files.add(dir / scatter_file_name(s), format_scatter(s));
        files.commit();
      }
      out << render_tables(report);
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << detail::one_line(e.what()) << "\n";
    return 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const ConfigError& e) {
    err << "error: config: " << detail::one_line(e.what()) << "\n";
  } catch (const ParseError& e) {
    err << "error: parse: " << detail::one_line(e.what()) << "\n";
  } catch (const ValidationError& e) {
    err << "error: validation: " << detail::one_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    err << "error: runtime: " << detail::one_line(e.what()) << "\n";
    return 2;
  }
  return 1;
}

inline int run_cli(int argc, char** argv, TransportFactory live_transport = nullptr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr, std::move(live_transport));
}

}  // namespace serpaudit::cli

#!/usr/bin/env python3
# Copyright 2026 The serpaudit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the small audit fixture under data/fixtures/.

Documents are stitched together from template sentences so the built-in
lexicon gives each engine a slightly different tilt per topic.
"""

import argparse
import json
import pathlib
import random
import urllib.parse

TOPICS = [
    ("Minimum Wage", True),
    ("School Uniforms", True),
    ("Gun Control", False),
    ("Death Penalty", False),
]

POSITIVE = ["good", "great", "effective", "successful", "popular", "safe", "fair"]
NEGATIVE = ["bad", "poor", "dangerous", "unfair", "difficult", "weak"]

TEMPLATES = [
    "Supporters of {t} called the proposal {w}.",
    "A new study described {t} as {w} for families.",
    "Lawmakers debated whether {t} is {w}.",
    "Critics said the {t} plan looks {w}.",
]
NEUTRAL = [
    "The hearing is scheduled for Tuesday.",
    "Officials released the figures on Monday.",
    "The committee will meet again next month.",
]

# Probability that a sentiment word is positive, per (topic, engine).
TILT = {
    ("Minimum Wage", "bing"): 0.30, ("Minimum Wage", "google"): 0.40,
    ("School Uniforms", "bing"): 0.20, ("School Uniforms", "google"): 0.45,
    ("Gun Control", "bing"): 0.75, ("Gun Control", "google"): 0.60,
    ("Death Penalty", "bing"): 0.70, ("Death Penalty", "google"): 0.55,
}


def sentence(rng, topic, tilt):
    if rng.random() < 0.25:
        return rng.choice(NEUTRAL)
    pool = POSITIVE if rng.random() < tilt else NEGATIVE
    return rng.choice(TEMPLATES).format(t=topic.lower(), w=rng.choice(pool))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).parent.parent / "data" / "fixtures"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "topics.jsonl", "w") as f:
        for name, transform in TOPICS:
            f.write(json.dumps({"topic": name, "queries": [name], "transform": transform}) + "\n")

    with open(out / "corpus.jsonl", "w") as f:
        for name, _ in TOPICS:
            for engine in ("bing", "google"):
                for rank in range(1, 11):
                    n = rng.randint(1, 3)
                    body = " ".join(sentence(rng, name, TILT[(name, engine)]) for _ in range(n))
                    doc = {"engine": engine, "query": name, "rank": rank,
                           "title": f"{name} news {rank}", "body": body,
                           "url": f"https://{engine}.example/{name.lower().replace(' ', '-')}/{rank}"}
                    f.write(json.dumps(doc) + "\n")

    audit = {
        "engines": ["bing", "google"],
        "levels": ["document", "sentence"],
        "cutoffs": [{"k": 10, "metrics": ["avg_polarity", "ndcg_senti", "avg_precision"]}],
        "query_sets": ["all"],
        "alpha": 0.01,
        "baseline": {"seed": 20170425, "n_lists": 50},
    }
    with open(out / "audit.json", "w") as f:
        json.dump(audit, f, indent=2)
        f.write("\n")

    write_crawl_fixture(rng, out)


def quote(s):
    return urllib.parse.quote(s, safe="-_.~")


def write_crawl_fixture(rng, out):
    """Recorded API responses for `serpaudit crawl` with no live network."""
    responses = {}
    for name, _ in TOPICS:
        q = quote(name)
        bing = {"value": [{"name": f"{name} headline {i}",
                           "url": f"https://news.example/{q}/{i}",
                           "description": sentence(rng, name, 0.5)} for i in range(1, 11)]}
        responses[f"https://bing.example/news?q={q}&count=10&offset=0&mkt=en-US"] = {
            "status": 200, "body": json.dumps(bing)}
        google = {"items": [{"title": f"{name} page {i}",
                             "link": f"https://web.example/{q}/{i}",
                             "snippet": sentence(rng, name, 0.5)} for i in range(1, 11)]}
        responses[f"https://google.example/cse?key=&cx=&q={q}&start=1&num=10&gl=us"] = {
            "status": 200, "body": json.dumps(google)}
    with open(out / "crawl-responses.json", "w") as f:
        json.dump(responses, f, indent=2, sort_keys=True)
        f.write("\n")
    crawl = {
        "engines": [
            {"type": "bing", "name": "bing", "key_env": "BING_API_KEY",
             "endpoint": "https://bing.example/news"},
            {"type": "google", "name": "google", "key_env": "GOOGLE_API_KEY",
             "cx_env": "GOOGLE_CX", "endpoint": "https://google.example/cse"},
        ],
        "count": 10,
        "market": "US",
        "requests_per_second": 3,
        "fixture": "crawl-responses.json",
    }
    with open(out / "crawl.json", "w") as f:
        json.dump(crawl, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()

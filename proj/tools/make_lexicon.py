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
"""Regenerates data/lexicon/en-default.tsv from the pattern en-sentiment.xml
adjective lexicon (PDDL) shipped with TextBlob.

Usage: make_lexicon.py path/to/en-sentiment.xml > data/lexicon/en-default.tsv
"""
import collections
import sys
import xml.etree.ElementTree as ET

NEGATORS = [
    "not", "no", "never", "nor", "neither", "none", "nobody", "nothing",
    "without", "hardly", "cannot", "can't", "don't", "doesn't", "didn't",
    "isn't", "aren't", "wasn't", "weren't", "won't", "wouldn't",
    "shouldn't", "couldn't",
]


def main(path):
    polarities = collections.defaultdict(list)
    intensity = {}
    for word in ET.parse(path).getroot().iter("word"):
        form = word.get("form").lower()
        if " " in form:
            continue
        polarities[form].append(float(word.get("polarity")))
        factor = float(word.get("intensity"))
        if factor != 1.0:
            intensity[form] = factor

    out = sys.stdout
    out.write("# term\tvalue\t[tag]\n")
    out.write("# value is the base polarity for plain terms, the multiplicative\n")
    out.write("# factor for intensifiers and the negation factor for negators.\n")
    out.write("# Derived from the pattern en-sentiment.xml lexicon (PDDL).\n")
    out.write("#window\t3\n")
    for term in NEGATORS:
        out.write(f"{term}\t-0.5\tnegator\n")
    for term in sorted(intensity):
        out.write(f"{term}\t{intensity[term]:g}\tintensifier\n")
    for term in sorted(polarities):
        if term in intensity or term in NEGATORS:
            continue
        values = polarities[term]
        out.write(f"{term}\t{round(sum(values) / len(values), 6):g}\n")


if __name__ == "__main__":
    main(sys.argv[1])

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
"""Sidecar scorer speaking the serpaudit provider line protocol via TextBlob.

Run as: serpaudit audit --provider-cmd "python3 tools/textblob_provider.py" ...
"""
import sys

from textblob import TextBlob


def unescape(line):
    out, i = [], 0
    while i < len(line):
        c = line[i]
        if c == "\\" and i + 1 < len(line):
            i += 1
            out.append({"n": "\n", "r": "\r", "t": "\t"}.get(line[i], line[i]))
        else:
            out.append(c)
        i += 1
    return "".join(out)


def main():
    for raw in sys.stdin:
        text = unescape(raw.rstrip("\n"))
        polarity = TextBlob(text).sentiment.polarity
        sys.stdout.write(repr(float(polarity)) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()

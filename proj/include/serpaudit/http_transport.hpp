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

// Live HttpTransport over cpp-httplib. Define CPPHTTPLIB_OPENSSL_SUPPORT and
// link OpenSSL for https endpoints.

#pragma once

#include <string>

#include <httplib.h>

#include "serpaudit/crawl.hpp"

namespace serpaudit {

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(int timeout_seconds = 20) : timeout_seconds_(timeout_seconds) {}

  HttpResponse get(const std::string& url, const Headers& headers) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return {0, "bad url"};
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Get(path, h);
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  }

 private:
  int timeout_seconds_;
};

}  // namespace serpaudit

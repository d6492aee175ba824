/*
 * Copyright 2026 The cui Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>

#include "cui/error.h"
#include "cui/harness/config.h"
#include "cui/harness/io.h"
#include "csv_util.h"

namespace cui::harness {
namespace {

std::string logits_header(int k, bool has_current) {
  std::string h = "id,domain,label";
  for (int i = 0; i < k; ++i) h += fmt::format(",src_{}", i);
  if (has_current) {
    for (int i = 0; i < k; ++i) h += fmt::format(",crt_{}", i);
  }
  return h;
}

}  // namespace

void write_logits(const std::filesystem::path& path, const LogitsTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << logits_header(table.num_classes, table.has_current) << '\n';
  std::string line;
  for (const auto& r : table.rows) {
    line = fmt::format("{},{},{}", r.id, r.domain, r.label);
    for (double v : r.src) line += fmt::format(",{:.17g}", v);
    if (table.has_current) {
      for (double v : r.crt) line += fmt::format(",{:.17g}", v);
    }
    out << line << '\n';
  }
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

LogitsTable read_logits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  auto malformed = [&](std::size_t line_no, const std::string& why) {
    return ExitError(kExitMalformedRow,
                     fmt::format("{}:{}: {}", path.string(), line_no, why));
  };

  std::string line;
  if (!std::getline(in, line)) throw malformed(1, "missing header");
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 5 || header[0] != "id" || header[1] != "domain" ||
      header[2] != "label") {
    throw malformed(1, "header must start with id,domain,label");
  }
  const std::size_t value_cols = header.size() - 3;
  int k = 0;
  while (3 + k < static_cast<int>(header.size()) &&
         header[3 + k] == fmt::format("src_{}", k)) {
    ++k;
  }
  LogitsTable table;
  table.num_classes = k;
  table.has_current = value_cols == 2 * static_cast<std::size_t>(k);
  if (k < 2 || (value_cols != static_cast<std::size_t>(k) && !table.has_current) ||
      split_csv(logits_header(k, table.has_current)) != header) {
    throw malformed(1, "header must be id,domain,label,src_0..src_{K-1}[,crt_0..crt_{K-1}]");
  }

  std::unordered_set<std::string> ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw malformed(line_no, fmt::format("expected {} fields, found {}", header.size(),
                                           f.size()));
    }
    LogitsRecord r;
    r.id = f[0];
    if (r.id.empty()) throw malformed(line_no, "empty id");
    if (!ids.insert(r.id).second) throw malformed(line_no, "duplicate id '" + r.id + "'");
    if (!parse_uint(f[1], r.domain)) throw malformed(line_no, "bad domain '" + f[1] + "'");
    if (!parse_int(f[2], r.label) || r.label < 0 || r.label >= k) {
      throw malformed(line_no, "label '" + f[2] + "' outside 0..K-1");
    }
    r.src.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      if (!parse_double(f[3 + i], r.src[i]) || !std::isfinite(r.src[i])) {
        throw malformed(line_no, "bad logit '" + f[3 + i] + "'");
      }
    }
    if (table.has_current) {
      r.crt.resize(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) {
        if (!parse_double(f[3 + k + i], r.crt[i]) || !std::isfinite(r.crt[i])) {
          throw malformed(line_no, "bad logit '" + f[3 + k + i] + "'");
        }
      }
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

}  // namespace cui::harness

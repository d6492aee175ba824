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

#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "cui/error.h"
#include "cui/harness/config.h"
#include "cui/harness/io.h"
#include "csv_util.h"

namespace cui::harness {
namespace {

std::string fixed6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.6f}", v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string batch_csv_header() {
  return "seed,batch,domain,method,alpha,beta,batch_size,rho_raw,rho_centered,"
         "threshold,batch_err,batch_cov,batch_ine,cum_err,cum_cov,cum_ine,loss,"
         "mean_gamma,config_hash";
}

std::string format_batch_row(const BatchRow& r, const std::string& config_hash) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.seed,
                     r.batch, r.domain, to_string(r.method), fixed6(r.alpha),
                     fixed6(r.beta), r.batch_size, fixed6(r.rho_raw),
                     fixed6(r.rho_centered), fixed6(r.threshold), fixed6(r.batch_err),
                     fixed6(r.batch_cov), fixed6(r.batch_ine), fixed6(r.cum_err),
                     fixed6(r.cum_cov), fixed6(r.cum_ine), fixed6(r.loss),
                     fixed6(r.mean_gamma), config_hash);
}

void write_batch_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows,
                     const std::string& config_hash) {
  std::ofstream out = open_out(path);
  out << batch_csv_header() << '\n';
  for (const auto& r : rows) out << format_batch_row(r, config_hash) << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string summary_csv_header() {
  return "seed,method,alpha,beta,domain,samples,err,cov,ine,kappa";
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_out(path);
  out << summary_csv_header() << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.seed, to_string(r.method),
                       fixed6(r.alpha), fixed6(r.beta),
                       r.domain ? std::to_string(*r.domain) : std::string("all"),
                       r.samples, fixed6(r.err), fixed6(r.cov), fixed6(r.ine),
                       fixed6(r.kappa));
  }
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || strip_cr(line) != summary_csv_header()) {
    throw ExitError(kExitMalformedRow,
                    fmt::format("{}:1: unexpected summary header", path.string()));
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line);
    auto malformed = [&](const std::string& why) {
      return ExitError(kExitMalformedRow,
                       fmt::format("{}:{}: {}", path.string(), line_no, why));
    };
    if (f.size() != 10) throw malformed("expected 10 fields");
    SummaryRow r;
    try {
      r.method = parse_method(f[1]);
    } catch (const Error&) {
      throw malformed("unknown method '" + f[1] + "'");
    }
    std::size_t domain = 0;
    if (!parse_uint(f[0], r.seed) || !parse_double(f[2], r.alpha) ||
        !parse_double(f[3], r.beta) || !parse_uint(f[5], r.samples) ||
        !parse_double(f[6], r.err) || !parse_double(f[7], r.cov) ||
        !parse_double(f[8], r.ine) || !parse_double(f[9], r.kappa)) {
      throw malformed("unparsable field");
    }
    if (f[4] != "all") {
      if (!parse_uint(f[4], domain)) throw malformed("bad domain");
      r.domain = domain;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cui::harness

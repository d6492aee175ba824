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

// On-disk formats: per-batch result CSV, per-domain summary CSV and the
// logits replay CSV.

#ifndef CUI_HARNESS_IO_H_
#define CUI_HARNESS_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cui/predictors.h"

namespace cui::harness {

struct BatchRow {
  std::uint64_t seed = 0;
  std::size_t batch = 0;
  std::size_t domain = 0;
  Method method = Method::kThr;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t batch_size = 0;
  double rho_raw = 0.0;
  double rho_centered = 0.0;
  double threshold = 0.0;
  double batch_err = 0.0;
  double batch_cov = 0.0;
  double batch_ine = 0.0;
  double cum_err = 0.0;
  double cum_cov = 0.0;
  double cum_ine = 0.0;
  double loss = 0.0;
  double mean_gamma = 0.0;
};

// Fixed six-decimal formatting; "inf" for an unbounded threshold.
std::string batch_csv_header();
std::string format_batch_row(const BatchRow& row, const std::string& config_hash);
void write_batch_csv(const std::filesystem::path& path, const std::vector<BatchRow>& rows,
                     const std::string& config_hash);

struct SummaryRow {
  std::uint64_t seed = 0;
  Method method = Method::kThr;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<std::size_t> domain;  // written as "all" when empty
  std::uint64_t samples = 0;
  double err = 0.0;
  double cov = 0.0;
  double ine = 0.0;
  double kappa = 0.0;
};

std::string summary_csv_header();
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows);
// Throws ExitError(kExitMalformedRow) on a bad row.
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

struct LogitsRecord {
  std::string id;
  std::size_t domain = 0;
  int label = 0;
  std::vector<double> src;
  std::vector<double> crt;  // empty when the file has no current-model columns
};

struct LogitsTable {
  int num_classes = 0;
  bool has_current = false;
  std::vector<LogitsRecord> rows;
};

// Header `id,domain,label,src_0..src_{K-1}[,crt_0..crt_{K-1}]`. Values are
// written with 17 significant digits so they read back bit-exactly.
void write_logits(const std::filesystem::path& path, const LogitsTable& table);
// Throws ExitError(kExitMalformedRow) naming the offending line.
LogitsTable read_logits(const std::filesystem::path& path);

}  // namespace cui::harness

#endif  // CUI_HARNESS_IO_H_

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

#ifndef CUI_HARNESS_REPORT_H_
#define CUI_HARNESS_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cui/harness/io.h"

namespace cui::harness {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

struct ReportRow {
  Method method = Method::kThr;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t runs = 0;
  MeanStd err;
  MeanStd cov;
  MeanStd ine;
};

// Groups the overall rows of the summaries by (method, alpha, beta), in
// order of first appearance.
std::vector<ReportRow> aggregate(const std::vector<SummaryRow>& summaries);

// Reads every summary*.csv directly inside `dir`. Throws
// ExitError(kExitInvalidConfig) when there is none.
std::vector<ReportRow> report_directory(const std::filesystem::path& dir);

std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_text(const std::vector<ReportRow>& rows);

}  // namespace cui::harness

#endif  // CUI_HARNESS_REPORT_H_

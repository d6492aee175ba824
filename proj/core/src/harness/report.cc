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

#include "cui/harness/report.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cui/harness/config.h"

namespace cui::harness {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return out;
}

std::vector<ReportRow> aggregate(const std::vector<SummaryRow>& summaries) {
  struct Group {
    Method method;
    double alpha;
    double beta;
    std::vector<double> err, cov, ine;
  };
  std::vector<Group> groups;
  for (const auto& s : summaries) {
    if (s.domain) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.method == s.method && g.alpha == s.alpha && g.beta == s.beta;
    });
    if (it == groups.end()) {
      groups.push_back({s.method, s.alpha, s.beta, {}, {}, {}});
      it = groups.end() - 1;
    }
    it->err.push_back(s.err);
    it->cov.push_back(s.cov);
    it->ine.push_back(s.ine);
  }
  std::vector<ReportRow> rows;
  for (const auto& g : groups) {
    rows.push_back({g.method, g.alpha, g.beta, g.err.size(), mean_std(g.err),
                    mean_std(g.cov), mean_std(g.ine)});
  }
  return rows;
}

std::vector<ReportRow> report_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.starts_with("summary") && name.ends_with(".csv")) {
        files.push_back(e.path());
      }
    }
  }
  if (files.empty()) {
    throw ExitError(kExitInvalidConfig, "no summary CSV files in " + dir.string());
  }
  std::sort(files.begin(), files.end());
  std::vector<SummaryRow> all;
  for (const auto& f : files) {
    auto rows = read_summary_csv(f);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return aggregate(all);
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "method,alpha,beta,runs,err_mean,err_std,cov_mean,cov_std,ine_mean,ine_std\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.6f},{:.6f},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                       to_string(r.method), r.alpha, r.beta, r.runs, r.err.mean, r.err.std,
                       r.cov.mean, r.cov.std, r.ine.mean, r.ine.std);
  }
  return out;
}

std::string report_text(const std::vector<ReportRow>& rows) {
  std::string out = fmt::format("{:<7}{:>7}{:>7}{:>6}  {:>17}  {:>17}  {:>17}\n", "method",
                                "alpha", "beta", "runs", "ERR (%)", "COV (%)", "INE");
  for (const auto& r : rows) {
    out += fmt::format("{:<7}{:>7.2f}{:>7.2f}{:>6}  {:>8.2f} +- {:<5.2f}  {:>8.2f} +- {:<5.2f}"
                       "  {:>8.3f} +- {:<5.3f}\n",
                       to_string(r.method), r.alpha, r.beta, r.runs, 100 * r.err.mean,
                       100 * r.err.std, 100 * r.cov.mean, 100 * r.cov.std, r.ine.mean,
                       r.ine.std);
  }
  return out;
}

}  // namespace cui::harness

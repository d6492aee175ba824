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

#ifndef CUI_HARNESS_PLOTS_H_
#define CUI_HARNESS_PLOTS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cui/harness/experiment.h"

namespace cui::harness {

struct Series {
  std::string label;
  std::vector<double> y;  // one value per domain
};

// Standalone SVG line chart, domains on the x axis.
std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<Series>& series, double y_min, double y_max);

// coverage_by_domain.svg and ine_by_domain.svg, one line per predictor,
// averaged over seeds.
void write_plots(const std::filesystem::path& dir, const std::vector<SeedResult>& results);

}  // namespace cui::harness

#endif  // CUI_HARNESS_PLOTS_H_

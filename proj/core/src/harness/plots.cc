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

#include "cui/harness/plots.h"

#include <algorithm>
#include <array>
#include <fstream>

#include <fmt/format.h>

#include "cui/error.h"

namespace cui::harness {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 64;
constexpr double kRight = 200;  // room for the legend
constexpr double kTop = 40;
constexpr double kBottom = 48;

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string predictor_label(const PredictorConfig& p) {
  if (p.method == Method::kCui) {
    return fmt::format("CUI a={:g} b={:g}", p.alpha, p.beta);
  }
  return fmt::format("{} a={:g}", to_string(p.method), p.alpha);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<Series>& series, double y_min, double y_max) {
  std::size_t points = 0;
  for (const auto& s : series) points = std::max(points, s.y.size());
  if (y_max <= y_min) y_max = y_min + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_at = [&](std::size_t i) {
    return kLeft + (points <= 1 ? plot_w / 2 : plot_w * static_cast<double>(i) /
                                                   static_cast<double>(points - 1));
  };
  auto y_at = [&](double v) {
    return kTop + plot_h * (1.0 - (std::clamp(v, y_min, y_max) - y_min) / (y_max - y_min));
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kLeft, escape(title));
  // Axes, horizontal grid and tick labels.
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"black\"/>\n",
      kLeft, kTop, kTop + plot_h, kLeft + plot_w);
  for (int t = 0; t <= 4; ++t) {
    const double v = y_min + (y_max - y_min) * t / 4.0;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{3}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:.2f}</text>\n",
        kLeft, y_at(v), kLeft + plot_w, kLeft - 6, y_at(v) + 4, v);
  }
  for (std::size_t i = 0; i < points; ++i) {
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       x_at(i), kTop + plot_h + 18, i);
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">domain</text>\n",
                     kLeft + plot_w / 2, kHeight - 8);
  svg += fmt::format(
      "<text x=\"16\" y=\"{0:.1f}\" transform=\"rotate(-90 16 {0:.1f})\" "
      "text-anchor=\"middle\">{1}</text>\n",
      kTop + plot_h / 2, escape(y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPalette.size()];
    std::string pts;
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      pts += fmt::format("{:.1f},{:.1f} ", x_at(i), y_at(series[k].y[i]));
    }
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
        pts);
    const double ly = kTop + 14.0 * static_cast<double>(k);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
        "stroke-width=\"2\"/>\n<text x=\"{4}\" y=\"{5:.1f}\">{6}</text>\n",
        kLeft + plot_w + 12, ly, kLeft + plot_w + 30, color, kLeft + plot_w + 36, ly + 4,
        escape(series[k].label));
  }
  svg += "</svg>\n";
  return svg;
}

void write_plots(const std::filesystem::path& dir, const std::vector<SeedResult>& results) {
  if (results.empty()) return;
  const auto& predictors = results.front().predictors;
  std::vector<Series> cov;
  std::vector<Series> ine;
  double ine_max = 1.0;
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    Series c{predictor_label(predictors[k]), {}};
    Series s{c.label, {}};
    const std::size_t domains = results.front().reports[k].domains.size();
    for (std::size_t d = 0; d < domains; ++d) {
      double cov_sum = 0.0;
      double ine_sum = 0.0;
      for (const auto& r : results) {
        cov_sum += r.reports[k].domains[d].cov;
        ine_sum += r.reports[k].domains[d].ine;
      }
      const double n = static_cast<double>(results.size());
      c.y.push_back(cov_sum / n);
      s.y.push_back(ine_sum / n);
      ine_max = std::max(ine_max, ine_sum / n);
    }
    cov.push_back(std::move(c));
    ine.push_back(std::move(s));
  }
  std::filesystem::create_directories(dir);
  write_file(dir / "coverage_by_domain.svg",
             line_chart_svg("Coverage by domain", "COV", cov, 0.0, 1.0));
  write_file(dir / "ine_by_domain.svg",
             line_chart_svg("Mean set size by domain", "INE", ine, 0.0, ine_max));
}

}  // namespace cui::harness

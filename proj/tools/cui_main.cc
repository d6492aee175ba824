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

// cui: simulate | replay | calibrate | report.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 invalid config or no result
// files, 3 source model below its accuracy floor, 4 CUI without current-model
// logits, 5 malformed logits row.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cui/error.h"
#include "cui/harness/config.h"
#include "cui/harness/experiment.h"
#include "cui/harness/report.h"

namespace {

using cui::harness::ExitError;
using cui::harness::ExperimentConfig;

// Flags shared by simulate and replay, folded into dotted overrides.
struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::string> method;
  std::optional<std::string> output;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON experiment config");
    app->add_option("--set", sets, "Override a config leaf, e.g. model.lr=0.2")
        ->type_name("PATH=VALUE");
    app->add_option("--seed", seed, "Run a single seed");
    app->add_option("--alpha", alpha, "Miscoverage level of the primary predictor");
    app->add_option("--beta", beta, "CUI compensation factor");
    app->add_option("--method", method, "THR, NexCP, QTC or CUI");
    app->add_option("-o,--output", output, "Output directory");
  }

  std::vector<std::string> overrides() const {
    std::vector<std::string> o = sets;
    if (seed) o.push_back(fmt::format("seeds=[{}]", *seed));
    if (alpha) o.push_back(fmt::format("predictor.alpha={}", *alpha));
    if (beta) o.push_back(fmt::format("predictor.beta={}", *beta));
    if (method) o.push_back(fmt::format("predictor.method=\"{}\"", *method));
    if (output) o.push_back(fmt::format("output.dir=\"{}\"", *output));
    return o;
  }

  ExperimentConfig load(const std::vector<std::string>& extra = {}) const {
    std::vector<std::string> o = overrides();
    o.insert(o.end(), extra.begin(), extra.end());
    return config.empty() ? cui::harness::parse_config("", o)
                          : cui::harness::load_config(config, o);
  }
};

void print_summary(const std::vector<cui::harness::SeedResult>& results) {
  std::vector<cui::harness::SummaryRow> all;
  for (const auto& r : results) all.insert(all.end(), r.summary.begin(), r.summary.end());
  std::fputs(cui::harness::report_text(cui::harness::aggregate(all)).c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction under continual shift: experiments and replay"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  bool plots = false;
  bool export_logits = false;
  std::optional<std::size_t> calib_size;
  std::optional<int> jobs;
  auto* sim = app.add_subcommand("simulate", "Pretrain and run the synthetic stream");
  sim_flags.attach(sim);
  sim->add_flag("--plots", plots, "Write coverage and INE plots (SVG)");
  sim->add_flag("--export-logits", export_logits, "Write logits files for replay");
  sim->add_option("--calib-size", calib_size, "Calibration set size");
  sim->add_option("-j,--jobs", jobs, "Seeds run in parallel");

  CommonFlags rep_flags;
  std::string logits_path;
  std::string calib_path;
  auto* rep = app.add_subcommand("replay", "Thresholds and sets from a logits file");
  rep_flags.attach(rep);
  rep->add_option("--logits", logits_path, "Test logits CSV")->required();
  rep->add_option("--calib", calib_path, "Calibration logits CSV")->required();

  std::string cal_file;
  double cal_alpha = 0.1;
  auto* cal = app.add_subcommand("calibrate", "Print the calibration threshold");
  cal->add_option("--calib", cal_file, "Calibration logits CSV")->required();
  cal->add_option("--alpha", cal_alpha, "Miscoverage level")->check(CLI::Range(0.0, 1.0));

  std::string report_dir;
  auto* rpt = app.add_subcommand("report", "Aggregate summary CSVs across seeds");
  rpt->add_option("dir", report_dir, "Directory with summary*.csv files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      std::vector<std::string> extra;
      if (plots) extra.push_back("output.plots=true");
      if (export_logits) extra.push_back("output.export_logits=true");
      if (calib_size) extra.push_back(fmt::format("source.n_calib={}", *calib_size));
      if (jobs) extra.push_back(fmt::format("jobs={}", *jobs));
      const ExperimentConfig cfg = sim_flags.load(extra);
      const auto results = cui::harness::run_simulate(cfg);
      print_summary(results);
      std::fprintf(stderr, "wrote results to %s\n", cfg.output_dir().string().c_str());
    } else if (*rep) {
      const ExperimentConfig cfg = rep_flags.load();
      const auto results = cui::harness::run_replay(cfg, logits_path, calib_path);
      print_summary(results);
    } else if (*cal) {
      const auto table = cui::harness::read_logits(cal_file);
      const cui::Threshold t = cui::harness::calibrate(table, cal_alpha);
      std::printf("%.6f\n", t.value);
    } else if (*rpt) {
      const auto rows = cui::harness::report_directory(report_dir);
      const std::string csv_path = (std::filesystem::path(report_dir) / "report.csv").string();
      std::ofstream(csv_path) << cui::harness::report_csv(rows);
      std::fputs(cui::harness::report_text(rows).c_str(), stdout);
    }
  } catch (const ExitError& e) {
    std::fprintf(stderr, "cui: %s\n", e.what());
    return e.exit_code();
  } catch (const cui::Error& e) {
    std::fprintf(stderr, "cui: %s: %s\n", std::string(cui::error_code_name(e.code())).c_str(),
                 e.what());
    return e.code() == cui::ErrorCode::kInvalidConfig ? cui::harness::kExitInvalidConfig : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cui: %s\n", e.what());
    return 1;
  }
  return 0;
}

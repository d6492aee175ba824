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

#include "cui/harness/config.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cui/error.h"
#include "json.hpp"

namespace cui::harness {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw ExitError(kExitInvalidConfig, "invalid config: " + msg);
}

// Overlays `user` onto `base`. Keys absent from `base` are unknown.
void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) bad(path.empty() ? "top level must be an object" : path + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) bad("unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    bad("override '" + assignment + "' is not of the form path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  // domains[1].severity and domains.1.severity address the same leaf.
  std::string dotted;
  for (char c : path) {
    if (c == '[') {
      dotted += '.';
    } else if (c != ']') {
      dotted += c;
    }
  }
  json* node = &root;
  std::stringstream parts(dotted);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (node->is_object()) {
      if (!node->contains(part)) bad("unknown key '" + path + "'");
      node = &(*node)[part];
    } else if (node->is_array()) {
      char* end = nullptr;
      const unsigned long idx = std::strtoul(part.c_str(), &end, 10);
      if (part.empty() || *end != '\0' || idx >= node->size()) {
        bad("bad array index '" + part + "' in '" + path + "'");
      }
      node = &(*node)[idx];
    } else {
      bad("'" + path + "' descends into a scalar");
    }
  }
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  if (node->is_object() && !value.is_object()) bad("'" + path + "' is a section");
  *node = std::move(value);
}

// Typed field readers. Each checks that the key exists, has the right JSON
// type and, for section objects, that no key is left unread.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_ + " must be an object");
  }
  ~Reader() = default;

  const json& at(const std::string& key) {
    if (!j_.contains(key)) bad("missing key '" + full(key) + "'");
    seen_.push_back(key);
    return j_.at(key);
  }
  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) bad(full(key) + " must be a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) bad(full(key) + " must be an integer");
    return v.get<std::int64_t>();
  }
  std::size_t count(const std::string& key) {
    const auto v = integer(key);
    if (v < 0) bad(full(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  }
  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) bad(full(key) + " must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) bad(full(key) + " must be a string");
    return v.get<std::string>();
  }
  const json& array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) bad(full(key) + " must be an array");
    return v;
  }
  std::string full(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        bad("unknown key '" + full(it.key()) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

// Library parse_* helpers throw cui::Error(kInvalidConfig); rewrap them.
template <typename F>
auto enum_field(Reader& r, const std::string& key, F parse) {
  const std::string s = r.string(key);
  try {
    return parse(s);
  } catch (const Error& e) {
    bad(r.full(key) + ": " + e.what());
  }
}

json to_tree(const ExperimentConfig& c) {
  json j;
  j["task"] = {{"num_classes", c.task.num_classes},
               {"dim", c.task.dim},
               {"radius", c.task.radius},
               {"class_scale", c.task.class_scale}};
  j["source"] = {{"n_train", c.source.n_train},
                 {"n_calib", c.source.n_calib},
                 {"n_heldout", c.source.n_heldout},
                 {"construction", std::string(to_string(c.source.construction))},
                 {"epochs", c.source.epochs},
                 {"lr", c.source.lr},
                 {"l2", c.source.l2},
                 {"accuracy_floor", c.source.accuracy_floor},
                 {"snapshot", c.source.snapshot}};
  json domains = json::array();
  for (const auto& d : c.schedule.domains) {
    domains.push_back({{"kind", std::string(to_string(d.kind))},
                       {"severity", d.severity},
                       {"samples", d.samples}});
  }
  const auto& cp = c.schedule.corruption;
  j["stream"] = {{"batch_size", c.schedule.batch_size},
                 {"domains", domains},
                 {"corruption",
                  {{"theta0", cp.theta0},
                   {"rotate_planes", cp.rotate_planes},
                   {"sigma0", cp.sigma0},
                   {"shift0", cp.shift0},
                   {"c0", cp.c0},
                   {"lambda0", cp.lambda0}}}};
  j["predictor"] = {{"method", std::string(to_string(c.predictor.method))},
                    {"alpha", c.predictor.alpha},
                    {"beta", c.predictor.beta},
                    {"compensation_sign",
                     std::string(to_string(c.predictor.compensation_sign))},
                    {"nexcp_decay", c.predictor.nexcp_decay}};
  json methods = json::array();
  for (Method m : c.sweep.methods) methods.push_back(std::string(to_string(m)));
  j["sweep"] = {{"methods", methods}, {"alphas", c.sweep.alphas}, {"betas", c.sweep.betas}};
  j["shift"] = {{"aggregation", std::string(to_string(c.shift.aggregation))},
                {"centering", std::string(to_string(c.shift.centering))},
                {"calib_subsample", c.shift.calib_subsample}};
  j["model"] = {{"hidden_dim", c.model.hidden_dim},
                {"lr", c.adapt.lr},
                {"ema_momentum", c.model.ema_momentum},
                {"steps_per_batch", c.adapt.steps_per_batch},
                {"teacher_temperature", c.adapt.teacher_temperature},
                {"current", c.adapt.current == CurrentModel::kTeacher ? "teacher" : "student"}};
  j["adaptation"] = {{"enabled", c.adapt.enabled},
                     {"gamma", std::string(to_string(c.adapt.gamma_mode))},
                     {"delta", c.adapt.delta}};
  j["seeds"] = c.seeds;
  j["jobs"] = c.jobs;
  j["output"] = {{"dir", c.output.dir},
                 {"export_logits", c.output.export_logits},
                 {"save_source_snapshot", c.output.save_source_snapshot},
                 {"plots", c.output.plots}};
  return j;
}

std::vector<double> number_list(const json& arr, const std::string& path) {
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) bad(path + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ExperimentConfig from_tree(const json& j) {
  ExperimentConfig c;
  Reader root(j, "");
  {
    Reader r(root.at("task"), "task");
    c.task.num_classes = static_cast<int>(r.integer("num_classes"));
    c.task.dim = static_cast<int>(r.integer("dim"));
    c.task.radius = r.number("radius");
    c.task.class_scale = r.number("class_scale");
    r.finish();
  }
  {
    Reader r(root.at("source"), "source");
    c.source.n_train = r.count("n_train");
    c.source.n_calib = r.count("n_calib");
    c.source.n_heldout = r.count("n_heldout");
    c.source.construction = enum_field(r, "construction", parse_calibration_construction);
    c.source.epochs = static_cast<int>(r.integer("epochs"));
    c.source.lr = r.number("lr");
    c.source.l2 = r.number("l2");
    c.source.accuracy_floor = r.number("accuracy_floor");
    c.source.snapshot = r.string("snapshot");
    r.finish();
  }
  {
    Reader r(root.at("stream"), "stream");
    c.schedule.batch_size = r.count("batch_size");
    c.schedule.domains.clear();
    const json& domains = r.array("domains");
    for (std::size_t i = 0; i < domains.size(); ++i) {
      Reader d(domains[i], fmt::format("stream.domains.{}", i));
      DomainSpec spec;
      spec.kind = enum_field(d, "kind", parse_corruption_kind);
      spec.severity = static_cast<int>(d.integer("severity"));
      spec.samples = d.count("samples");
      d.finish();
      c.schedule.domains.push_back(spec);
    }
    Reader cr(r.at("corruption"), "stream.corruption");
    auto& cp = c.schedule.corruption;
    cp.theta0 = cr.number("theta0");
    cp.rotate_planes = static_cast<int>(cr.integer("rotate_planes"));
    cp.sigma0 = cr.number("sigma0");
    cp.shift0 = cr.number("shift0");
    cp.c0 = cr.number("c0");
    cp.lambda0 = cr.number("lambda0");
    cr.finish();
    r.finish();
  }
  {
    Reader r(root.at("predictor"), "predictor");
    c.predictor.method = enum_field(r, "method", parse_method);
    c.predictor.alpha = r.number("alpha");
    c.predictor.beta = r.number("beta");
    c.predictor.compensation_sign =
        enum_field(r, "compensation_sign", parse_compensation_sign);
    c.predictor.nexcp_decay = r.number("nexcp_decay");
    r.finish();
  }
  {
    Reader r(root.at("sweep"), "sweep");
    for (const auto& m : r.array("methods")) {
      if (!m.is_string()) bad("sweep.methods must contain strings");
      try {
        c.sweep.methods.push_back(parse_method(m.get<std::string>()));
      } catch (const Error& e) {
        bad(std::string("sweep.methods: ") + e.what());
      }
    }
    c.sweep.alphas = number_list(r.array("alphas"), "sweep.alphas");
    c.sweep.betas = number_list(r.array("betas"), "sweep.betas");
    r.finish();
  }
  {
    Reader r(root.at("shift"), "shift");
    c.shift.aggregation = enum_field(r, "aggregation", parse_aggregation);
    c.shift.centering = enum_field(r, "centering", parse_centering);
    c.shift.calib_subsample = r.count("calib_subsample");
    r.finish();
  }
  {
    Reader r(root.at("model"), "model");
    c.model.hidden_dim = static_cast<int>(r.integer("hidden_dim"));
    c.adapt.lr = r.number("lr");
    c.model.ema_momentum = r.number("ema_momentum");
    c.adapt.steps_per_batch = static_cast<int>(r.integer("steps_per_batch"));
    c.adapt.teacher_temperature = r.number("teacher_temperature");
    const std::string current = r.string("current");
    if (current == "teacher") {
      c.adapt.current = CurrentModel::kTeacher;
    } else if (current == "student") {
      c.adapt.current = CurrentModel::kStudent;
    } else {
      bad("model.current must be 'teacher' or 'student'");
    }
    r.finish();
  }
  {
    Reader r(root.at("adaptation"), "adaptation");
    c.adapt.enabled = r.boolean("enabled");
    c.adapt.gamma_mode = enum_field(r, "gamma", parse_gamma_mode);
    c.adapt.delta = r.number("delta");
    r.finish();
  }
  c.seeds.clear();
  for (const auto& s : root.array("seeds")) {
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      bad("seeds must be nonnegative integers");
    }
    c.seeds.push_back(s.get<std::uint64_t>());
  }
  c.jobs = static_cast<int>(root.integer("jobs"));
  {
    Reader r(root.at("output"), "output");
    c.output.dir = r.string("dir");
    c.output.export_logits = r.boolean("export_logits");
    c.output.save_source_snapshot = r.boolean("save_source_snapshot");
    c.output.plots = r.boolean("plots");
    r.finish();
  }
  root.finish();
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.task.num_classes < 2) bad("task.num_classes must be >= 2");
  if (c.task.dim < 2) bad("task.dim must be >= 2");
  if (!(c.task.radius > 0.0)) bad("task.radius must be > 0");
  if (!(c.task.class_scale > 0.0)) bad("task.class_scale must be > 0");
  if (c.source.n_train < 1) bad("source.n_train must be >= 1");
  if (c.source.n_calib < 1) bad("source.n_calib must be >= 1");
  if (c.source.n_heldout < 1) bad("source.n_heldout must be >= 1");
  if (c.source.construction == CalibrationConstruction::kEfficiencyFirst &&
      c.source.n_calib > c.source.n_train) {
    bad("efficiency_first needs source.n_calib <= source.n_train");
  }
  if (c.source.epochs < 0) bad("source.epochs must be >= 0");
  if (!(c.source.lr > 0.0)) bad("source.lr must be > 0");
  if (!(c.source.l2 >= 0.0)) bad("source.l2 must be >= 0");
  if (!(c.source.accuracy_floor >= 0.0 && c.source.accuracy_floor <= 1.0)) {
    bad("source.accuracy_floor must lie in [0,1]");
  }
  if (c.schedule.batch_size < 1) bad("stream.batch_size must be >= 1");
  for (const auto& d : c.schedule.domains) {
    if (d.severity < 0 || d.severity > kMaxSeverity) {
      bad("stream.domains severity must lie in 0..5");
    }
  }
  const auto& cp = c.schedule.corruption;
  if (!(cp.theta0 >= 0.0) || !(cp.sigma0 >= 0.0) || !(cp.shift0 >= 0.0) ||
      !(cp.c0 >= 0.0) || !(cp.lambda0 >= 0.0)) {
    bad("stream.corruption magnitudes must be >= 0");
  }
  if (cp.lambda0 * kMaxSeverity > 1.0) bad("stream.corruption.lambda0 must be <= 0.2");
  if (cp.rotate_planes < 0 || 2 * cp.rotate_planes > c.task.dim) {
    bad("stream.corruption.rotate_planes must lie in 0..dim/2");
  }
  try {
    c.predictor.validate();
    for (double a : c.sweep.alphas) PredictorConfig{Method::kThr, a}.validate();
    for (double b : c.sweep.betas) {
      PredictorConfig p;
      p.beta = b;
      p.validate();
    }
    c.adapt.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (c.model.hidden_dim < 0) bad("model.hidden_dim must be >= 0");
  if (!(c.model.ema_momentum >= 0.0 && c.model.ema_momentum <= 1.0)) {
    bad("model.ema_momentum must lie in [0,1]");
  }
  if (c.seeds.empty()) bad("seeds must not be empty");
  if (c.jobs < 1) bad("jobs must be >= 1");
}

}  // namespace

std::vector<PredictorConfig> ExperimentConfig::predictors() const {
  std::vector<PredictorConfig> out = {predictor};
  auto same = [](const PredictorConfig& a, const PredictorConfig& b) {
    return a.method == b.method && a.alpha == b.alpha &&
           (a.method != Method::kCui || a.beta == b.beta);
  };
  auto add = [&](PredictorConfig p) {
    for (const auto& q : out) {
      if (same(p, q)) return;
    }
    out.push_back(p);
  };
  const std::vector<double> alphas =
      sweep.alphas.empty() ? std::vector<double>{predictor.alpha} : sweep.alphas;
  const std::vector<double> betas =
      sweep.betas.empty() ? std::vector<double>{predictor.beta} : sweep.betas;
  for (Method m : sweep.methods) {
    for (double a : alphas) {
      PredictorConfig p = predictor;
      p.method = m;
      p.alpha = a;
      if (m != Method::kCui) {
        add(p);
        continue;
      }
      for (double b : betas) {
        p.beta = b;
        add(p);
      }
    }
  }
  return out;
}

std::filesystem::path ExperimentConfig::output_dir() const {
  if (!output.dir.empty()) return output.dir;
  if (const char* env = std::getenv("CUI_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "results";
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.schedule = headline_schedule(kMaxSeverity, 4000, 64);
  return c;
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides) {
  json tree = to_tree(default_config());
  if (!json_text.empty()) {
    json user = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (user.is_discarded()) bad("not valid JSON");
    merge_strict(tree, user, "");
  }
  for (const auto& o : overrides) apply_override(tree, o);
  ExperimentConfig c = from_tree(tree);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) bad("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_json(const ExperimentConfig& cfg) { return to_tree(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
  json tree = to_tree(cfg);
  tree.erase("seeds");
  tree.erase("jobs");
  tree.erase("output");
  const std::string text = tree.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cui::harness

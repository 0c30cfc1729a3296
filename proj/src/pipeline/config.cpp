// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gkd/error.hpp"
#include "gkd/pipeline.hpp"

namespace gkd::pipeline {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) {
      throw ValidationError("config section '" + display() + "' must be an object");
    }
  }

  Section child(const char* key) {
    const json* v = find(key);
    return Section(v, qualify(key));
  }

  template <class T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v->is_number_unsigned()) throw ValidationError("");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v->is_number()) throw ValidationError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ValidationError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ValidationError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ValidationError("config key '" + qualify(key) + "' has the wrong type (" + type_name<T>() + " expected)");
    }
  }

  // A null value counts as absent, so canonical_json() output parses back.
  bool has(const char* key) {
    if (node_ == nullptr) return false;
    auto it = node_->find(key);
    if (it == node_->end()) return false;
    if (it->is_null()) seen_.push_back(key);
    return !it->is_null();
  }

  const json* find(const char* key) {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    if (it == node_->end()) return nullptr;
    seen_.push_back(key);
    return it->is_null() ? nullptr : &*it;
  }

  std::string qualify(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw ValidationError("unknown config key '" + qualify(it.key().c_str()) + "'");
      }
    }
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "number";
    if constexpr (std::is_same_v<T, bool>) return "boolean";
    if constexpr (std::is_same_v<T, std::string>) return "string";
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      return "non-negative integer";
    }
    return "value";
  }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json* node_;
  std::string path_;
  std::vector<std::string> seen_;
};

template <class Parse, class Out>
void get_enum(Section& s, const char* key, Out& out, Parse parse) {
  std::string name;
  if (!s.has(key)) return;
  s.get(key, name);
  try {
    out = parse(name);
  } catch (const ValidationError& e) {
    throw ValidationError("config key '" + s.qualify(key) + "': " + e.what());
  }
}

DatasetSource parse_source(const std::string& name) {
  if (name == "synth") return DatasetSource::kSynth;
  if (name == "files") return DatasetSource::kFiles;
  throw ValidationError("unknown dataset source '" + name + "' (expected synth or files)");
}

TeacherMode parse_teacher_mode(const std::string& name) {
  if (name == "none") return TeacherMode::kNone;
  if (name == "mock") return TeacherMode::kMock;
  if (name == "file") return TeacherMode::kFile;
  throw ValidationError("unknown teacher mode '" + name + "' (expected none, mock or file)");
}

const char* source_name(DatasetSource s) { return s == DatasetSource::kSynth ? "synth" : "files"; }

const char* teacher_mode_name(TeacherMode m) {
  switch (m) {
    case TeacherMode::kNone: return "none";
    case TeacherMode::kMock: return "mock";
    case TeacherMode::kFile: return "file";
  }
  return "?";
}

const char* activation_name(teacher::Activation a) {
  switch (a) {
    case teacher::Activation::kGelu: return "gelu";
    case teacher::Activation::kRelu: return "relu";
    case teacher::Activation::kTanh: return "tanh";
    case teacher::Activation::kIdentity: return "identity";
  }
  return "?";
}

const char* aggregator_name(student::Aggregator a) {
  switch (a) {
    case student::Aggregator::kMean: return "mean";
    case student::Aggregator::kSum: return "sum";
    case student::Aggregator::kMax: return "max";
  }
  return "?";
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

RunConfig parse_value(const json& root, const std::filesystem::path& base_dir) {
  RunConfig c;
  Section top(&root, "");
  top.get("name", c.name);
  std::string out_dir = c.output_dir.string();
  top.get("output_dir", out_dir);
  c.output_dir = out_dir;
  top.get("seed", c.seed);

  {
    Section s = top.child("dataset");
    get_enum(s, "source", c.dataset.source, parse_source);
    std::string node_file, edge_file;
    s.get("node_file", node_file);
    s.get("edge_file", edge_file);
    c.dataset.node_file = resolve(base_dir, node_file);
    c.dataset.edge_file = resolve(base_dir, edge_file);
    if (s.has("split_ratios")) {
      std::vector<double> r;
      const json* v = s.find("split_ratios");
      if (!v->is_array() || v->size() != 3) {
        throw ValidationError("config key 'dataset.split_ratios' must be an array of three numbers");
      }
      for (const auto& x : *v) {
        if (!x.is_number()) throw ValidationError("config key 'dataset.split_ratios' must hold numbers");
        r.push_back(x.get<double>());
      }
      c.dataset.split_ratios = {r[0], r[1], r[2]};
    }
    if (s.has("split_seed")) {
      std::uint64_t seed = 0;
      s.get("split_seed", seed);
      c.dataset.split_seed = seed;
    }
    Section syn = s.child("synth");
    syn.get("nodes", c.dataset.synth.nodes);
    syn.get("classes", c.dataset.synth.classes);
    syn.get("homophily", c.dataset.synth.homophily);
    syn.get("feature_dim", c.dataset.synth.feature_dim);
    syn.get("signal", c.dataset.synth.signal);
    syn.get("avg_degree", c.dataset.synth.avg_degree);
    syn.finish();
    s.finish();
  }
  {
    Section s = top.child("prompt");
    s.get("k", c.prompt.k);
    s.get("theta", c.prompt.theta);
    s.get("s_max", c.prompt.s_max);
    s.get("graph_type", c.prompt.graph_type);
    if (s.has("categories")) {
      const json* v = s.find("categories");
      if (!v->is_array()) throw ValidationError("config key 'prompt.categories' must be an array of strings");
      for (const auto& x : *v) {
        if (!x.is_string()) throw ValidationError("config key 'prompt.categories' must be an array of strings");
        c.prompt.categories.push_back(x.get<std::string>());
      }
      c.prompt_categories_set = true;
    }
    if (s.has("criteria")) {
      const json* v = s.find("criteria");
      if (!v->is_null()) {
        if (!v->is_string()) throw ValidationError("config key 'prompt.criteria' must be a string or null");
        c.prompt.criteria = v->get<std::string>();
      }
    }
    s.finish();
  }
  {
    Section s = top.child("teacher");
    get_enum(s, "mode", c.teacher.mode, parse_teacher_mode);
    std::string path;
    s.get("path", path);
    c.teacher.path = resolve(base_dir, path);
    s.get("dim", c.teacher.dim);
    s.get("signal", c.teacher.signal);
    s.get("noise", c.teacher.noise);
    get_enum(s, "activation", c.teacher.activation, teacher::parse_activation);
    s.finish();
  }
  {
    Section s = top.child("student");
    get_enum(s, "arch", c.student.arch, student::parse_arch);
    s.get("layers", c.student.layers);
    s.get("hidden", c.student.hidden);
    get_enum(s, "aggregator", c.student.aggregator, student::parse_aggregator);
    get_enum(s, "norm", c.student.norm, student::parse_norm);
    s.get("dropout", c.student.dropout);
    s.finish();
  }
  {
    Section s = top.child("distill");
    distill::DistillConfig& d = c.train.distill;
    s.get("temperature", d.temperature);
    s.get("negatives", d.negatives);
    get_enum(s, "similarity", d.similarity, distill::parse_similarity);
    get_enum(s, "denominator", d.denominator, distill::parse_denominator);
    get_enum(s, "gamma", d.gamma_mode, distill::parse_gamma_mode);
    get_enum(s, "hops", d.hops, [](const std::string& n) {
      if (n == "all") return distill::HopSelection::kAll;
      if (n == "last_only") return distill::HopSelection::kLastOnly;
      throw ValidationError("unknown hop selection '" + n + "' (expected all or last_only)");
    });
    s.finish();
  }
  {
    Section s = top.child("train");
    train::TrainConfig& t = c.train;
    s.get("lr", t.lr);
    s.get("batch", t.batch);
    s.get("epochs", t.epochs);
    s.get("weight_decay", t.weight_decay);
    s.get("beta1", t.beta1);
    s.get("beta2", t.beta2);
    s.get("eps", t.eps);
    get_enum(s, "loss_weights", t.weight_mode, train::parse_loss_weight_mode);
    s.get("alpha", t.alpha);
    s.get("beta", t.beta);
    s.get("eval_every", t.eval_every);
    s.finish();
  }
  {
    Section s = top.child("ablation");
    if (s.has("seeds")) {
      const json* v = s.find("seeds");
      if (!v->is_array() || v->empty()) {
        throw ValidationError("config key 'ablation.seeds' must be a non-empty array of integers");
      }
      c.ablation_seeds.clear();
      for (const auto& x : *v) {
        if (!x.is_number_unsigned()) throw ValidationError("config key 'ablation.seeds' must hold integers");
        c.ablation_seeds.push_back(x.get<std::uint64_t>());
      }
    }
    s.finish();
  }
  top.finish();
  c.train.filter_activation = c.teacher.activation;
  c.apply_seed(c.seed);
  return c;
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  dataset.synth.seed = s;
  prompt.seed = s;
  student.seed = s;
  train.seed = s;
  train.distill.seed = s;
}

void RunConfig::validate() const {
  if (name.empty()) throw ValidationError("config key 'name' must not be empty");
  double total = 0.0;
  for (double r : dataset.split_ratios) {
    if (r < 0.0) throw ValidationError("config key 'dataset.split_ratios' must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("config key 'dataset.split_ratios' must sum to 1");
  if (dataset.source == DatasetSource::kFiles) {
    for (const auto& p : {dataset.node_file, dataset.edge_file}) {
      if (p.empty()) throw ValidationError("dataset source 'files' needs node_file and edge_file");
      if (!std::filesystem::exists(p)) throw ValidationError("dataset file not found: " + p.string());
    }
  } else {
    if (dataset.synth.nodes == 0 || dataset.synth.classes == 0 || dataset.synth.feature_dim == 0) {
      throw ValidationError("synthetic dataset needs positive nodes, classes and feature_dim");
    }
    if (dataset.synth.homophily < 0.0 || dataset.synth.homophily > 1.0) {
      throw ValidationError("config key 'dataset.synth.homophily' must lie in [0, 1]");
    }
  }
  if (prompt_categories_set) {
    prompt.validate();
  } else {
    prompt::PromptConfig p = prompt;
    p.categories = {"placeholder"};
    p.validate();
  }
  if (teacher.mode == TeacherMode::kFile) {
    if (teacher.path.empty()) throw ValidationError("teacher mode 'file' needs teacher.path");
    if (!std::filesystem::exists(teacher.path)) {
      throw ValidationError("teacher feature file not found: " + teacher.path.string());
    }
  }
  if (teacher.mode == TeacherMode::kMock) {
    if (teacher.dim == 0) throw ValidationError("config key 'teacher.dim' must be positive");
    if (teacher.signal < 0.0 || teacher.noise < 0.0) {
      throw ValidationError("config keys 'teacher.signal' and 'teacher.noise' must be >= 0");
    }
    if (student.layers > prompt.k) {
      throw ValidationError("student.layers (" + std::to_string(student.layers) +
                            ") exceeds prompt.k (" + std::to_string(prompt.k) + ") covered by the mock teacher");
    }
  }
  if (student.hidden == 0) throw ValidationError("config key 'student.hidden' must be positive");
  if (student.dropout < 0.0 || student.dropout >= 1.0) {
    throw ValidationError("config key 'student.dropout' must lie in [0, 1)");
  }
  train.validate();
}

std::string RunConfig::canonical_json() const {
  ordered_json j;
  j["name"] = name;
  j["output_dir"] = output_dir.string();
  j["seed"] = seed;
  ordered_json d;
  d["source"] = source_name(dataset.source);
  d["node_file"] = dataset.node_file.string();
  d["edge_file"] = dataset.edge_file.string();
  d["split_ratios"] = dataset.split_ratios;
  d["split_seed"] = dataset.split_seed ? ordered_json(*dataset.split_seed) : ordered_json(nullptr);
  d["synth"] = {{"nodes", dataset.synth.nodes},         {"classes", dataset.synth.classes},
                {"homophily", dataset.synth.homophily}, {"feature_dim", dataset.synth.feature_dim},
                {"signal", dataset.synth.signal},       {"avg_degree", dataset.synth.avg_degree}};
  j["dataset"] = d;
  ordered_json p;
  p["k"] = prompt.k;
  p["theta"] = prompt.theta;
  p["s_max"] = prompt.s_max;
  p["graph_type"] = prompt.graph_type;
  p["categories"] = prompt_categories_set ? ordered_json(prompt.categories) : ordered_json(nullptr);
  p["criteria"] = prompt.criteria ? ordered_json(*prompt.criteria) : ordered_json(nullptr);
  j["prompt"] = p;
  j["teacher"] = {{"mode", teacher_mode_name(teacher.mode)},
                  {"path", teacher.path.string()},
                  {"dim", teacher.dim},
                  {"signal", teacher.signal},
                  {"noise", teacher.noise},
                  {"activation", activation_name(teacher.activation)}};
  j["student"] = {{"arch", student::arch_name(student.arch)},
                  {"layers", student.layers},
                  {"hidden", student.hidden},
                  {"aggregator", aggregator_name(student.aggregator)},
                  {"norm", student.norm == student::NormKind::kLayer ? "layer" : "batch"},
                  {"dropout", student.dropout}};
  const distill::DistillConfig& dc = train.distill;
  j["distill"] = {
      {"temperature", dc.temperature},
      {"negatives", dc.negatives},
      {"similarity", dc.similarity == distill::Similarity::kCosine ? "cosine" : "dot"},
      {"denominator", dc.denominator == distill::Denominator::kNegativesOnly ? "negatives_only" : "with_positive"},
      {"gamma", dc.gamma_mode == distill::GammaMode::kTrainableSoftmax ? "trainable_softmax" : "fixed_uniform"},
      {"hops", dc.hops == distill::HopSelection::kAll ? "all" : "last_only"}};
  j["train"] = {{"lr", train.lr},
                {"batch", train.batch},
                {"epochs", train.epochs},
                {"weight_decay", train.weight_decay},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"eps", train.eps},
                {"loss_weights", train.weight_mode == train::LossWeightMode::kFixed ? "fixed"
                                                                                  : "trainable_softmax_pair"},
                {"alpha", train.alpha},
                {"beta", train.beta},
                {"eval_every", train.eval_every}};
  j["ablation"] = {{"seeds", ablation_seeds}};
  return j.dump(2) + "\n";
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

std::filesystem::path RunConfig::run_dir() const { return output_dir / (name + "-" + hash()); }

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_value(root, {});
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json root;
  try {
    root = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_value(root, path.parent_path());
}

}  // namespace gkd::pipeline

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gkd/error.hpp"
#include "gkd/pipeline.hpp"

namespace gkd::pipeline {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::filesystem::path prepare_run_dir(const RunConfig& config) {
  const std::filesystem::path dir = config.run_dir();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  std::ofstream out(dir / "config.json", std::ios::trunc);
  out << config.canonical_json();
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  return dir;
}

student::StudentConfig student_config(const RunConfig& config, const graph::TextAttributedGraph& g) {
  student::StudentConfig s = config.student;
  s.in_dim = g.feature_dim();
  return s;
}

}  // namespace

graph::TextAttributedGraph load_dataset(const RunConfig& config) {
  graph::SplitConfig split;
  split.ratios = config.dataset.split_ratios;
  split.seed = config.dataset.split_seed.value_or(config.seed);
  if (config.dataset.source == DatasetSource::kFiles) {
    return graph::load_graph(config.dataset.node_file, config.dataset.edge_file, split);
  }
  graph::SynthConfig synth = config.dataset.synth;
  synth.seed = config.seed;
  synth.split = split;
  return graph::synth_tag(synth);
}

prompt::PromptConfig prompt_config(const RunConfig& config, const graph::TextAttributedGraph& g) {
  prompt::PromptConfig p = config.prompt;
  if (!config.prompt_categories_set) {
    p.categories = g.class_names();
    for (std::size_t c = p.categories.size(); c < g.num_classes(); ++c) p.categories.push_back("class_" + std::to_string(c));
  }
  if (p.categories.size() != g.num_classes()) {
    throw ValidationError("prompt.categories lists " + std::to_string(p.categories.size()) +
                          " names but the dataset has " + std::to_string(g.num_classes()) + " classes");
  }
  p.validate();
  return p;
}

teacher::MockTeacherConfig mock_config(const RunConfig& config) {
  teacher::MockTeacherConfig m;
  m.k = config.prompt.k;
  m.theta = config.prompt.theta;
  m.dim = config.teacher.dim;
  m.signal = config.teacher.signal;
  m.noise = config.teacher.noise;
  m.seed = config.seed;
  return m;
}

std::optional<teacher::RawTeacherStore> load_teacher(const RunConfig& config, const graph::TextAttributedGraph& g) {
  switch (config.teacher.mode) {
    case TeacherMode::kNone:
      return std::nullopt;
    case TeacherMode::kMock:
      return teacher::mock_teacher(g, mock_config(config));
    case TeacherMode::kFile: {
      teacher::RawTeacherStore store = teacher::load_teacher_features(config.teacher.path);
      for (std::uint64_t v : store.nodes()) {
        if (v >= g.node_count()) {
          throw ValidationError("teacher features reference node " + std::to_string(v) +
                                " outside the dataset (" + std::to_string(g.node_count()) + " nodes)");
        }
      }
      return store;
    }
  }
  return std::nullopt;
}

CommandResult cmd_build_prompts(const RunConfig& config) {
  config.validate();
  const graph::TextAttributedGraph g = load_dataset(config);
  const prompt::PromptConfig pc = prompt_config(config, g);
  std::vector<prompt::InstructionPrompt> prompts;
  std::vector<std::size_t> per_hop(pc.k + 1, 0);
  for (graph::NodeId v = 0; v < g.node_count(); ++v) {
    for (auto& p : prompt::build_prompt_set(g, v, pc)) {
      ++per_hop[p.hop];
      prompts.push_back(std::move(p));
    }
  }
  CommandResult r;
  r.run_dir = prepare_run_dir(config);
  const auto path = r.run_dir / "prompts.jsonl";
  prompt::export_jsonl(prompts, path);
  r.artifacts.push_back(path);
  std::ostringstream s;
  s << "wrote " << prompts.size() << " prompts for " << g.node_count() << " nodes to " << path.string() << "\n";
  for (std::size_t l = 0; l < per_hop.size(); ++l) s << "  hop " << l << ": " << per_hop[l] << "\n";
  r.summary = s.str();
  r.metrics["prompts"] = static_cast<double>(prompts.size());
  return r;
}

CommandResult cmd_mock_teacher(const RunConfig& config) {
  config.validate();
  const graph::TextAttributedGraph g = load_dataset(config);
  const teacher::RawTeacherStore store = teacher::mock_teacher(g, mock_config(config));
  CommandResult r;
  r.run_dir = prepare_run_dir(config);
  const auto path = r.run_dir / "teacher.gkdf";
  teacher::write_teacher_features(store, path);
  r.artifacts.push_back(path);
  std::ostringstream s;
  s << "wrote " << store.record_count() << " records (d_L=" << store.dim() << ", hops 0.." << store.max_hop()
    << ", theta=" << store.theta_max() << ") to " << path.string() << "\n";
  r.summary = s.str();
  r.metrics["records"] = static_cast<double>(store.record_count());
  return r;
}

CommandResult cmd_train(const RunConfig& config) {
  config.validate();
  const graph::TextAttributedGraph g = load_dataset(config);
  const std::optional<teacher::RawTeacherStore> store = load_teacher(config, g);
  const student::StudentConfig sc = student_config(config, g);
  CommandResult r;
  r.run_dir = prepare_run_dir(config);
  const auto metrics_path = r.run_dir / "metrics.csv";
  train::MetricsWriter writer(metrics_path, sc.layers);
  train::TrainHooks hooks;
  hooks.on_epoch = [&writer](const train::EpochRecord& rec) { writer.append(rec); };
  const auto last_good_path = r.run_dir / "last_good.ckpt";
  hooks.on_divergence = [&last_good_path](const Checkpoint& c) { save_checkpoint(c, last_good_path); };
  const train::TrainResult result = train::train(g, store ? &*store : nullptr, sc, config.train, hooks);
  save_checkpoint(result.best, r.run_dir / "best.ckpt");
  save_checkpoint(result.last, r.run_dir / "last.ckpt");
  r.artifacts = {metrics_path, r.run_dir / "best.ckpt", r.run_dir / "last.ckpt"};
  const train::RunMetrics& m = result.metrics;
  r.metrics["best_epoch"] = static_cast<double>(m.best_epoch);
  r.metrics["val_acc"] = m.best_val_acc;
  r.metrics["val_f1"] = m.best_val_f1;
  r.metrics["test_acc"] = m.test_acc_at_best;
  r.metrics["test_f1"] = m.test_f1_at_best;
  std::ostringstream s;
  s << (store ? "distilled" : "vanilla") << " run, " << config.train.epochs << " epochs, best epoch " << m.best_epoch
    << "\n"
    << "val_acc=" << fixed(m.best_val_acc) << " val_f1=" << fixed(m.best_val_f1) << "\n"
    << "test_acc=" << fixed(m.test_acc_at_best) << " test_f1=" << fixed(m.test_f1_at_best) << "\n"
    << "artifacts in " << r.run_dir.string() << "\n";
  r.summary = s.str();
  return r;
}

CommandResult cmd_ablate(const RunConfig& config) {
  config.validate();
  if (config.teacher.mode == TeacherMode::kNone) {
    throw ValidationError("ablation needs a teacher (teacher.mode must be mock or file)");
  }
  const graph::TextAttributedGraph g = load_dataset(config);
  const teacher::RawTeacherStore store = *load_teacher(config, g);
  const student::StudentConfig sc = student_config(config, g);
  const auto arms = train::ablation_last_layer(g, store, sc, config.train, config.ablation_seeds);
  CommandResult r;
  r.run_dir = prepare_run_dir(config);
  const auto table = r.run_dir / "ablation.csv";
  std::ofstream out(table, std::ios::trunc);
  out << "seed,full_test_acc,full_test_f1,last_only_test_acc,last_only_test_f1\n";
  std::size_t wins = 0;
  double full_sum = 0.0, last_sum = 0.0;
  for (const auto& arm : arms) {
    const std::string tag = std::to_string(arm.seed);
    const auto full_path = r.run_dir / ("metrics_full_seed" + tag + ".csv");
    const auto last_path = r.run_dir / ("metrics_last_only_seed" + tag + ".csv");
    train::write_metrics_csv(arm.full, sc.layers, full_path);
    train::write_metrics_csv(arm.last_only, sc.layers, last_path);
    r.artifacts.push_back(full_path);
    r.artifacts.push_back(last_path);
    out << arm.seed << "," << arm.full.test_acc_at_best << "," << arm.full.test_f1_at_best << ","
        << arm.last_only.test_acc_at_best << "," << arm.last_only.test_f1_at_best << "\n";
    wins += arm.full.test_acc_at_best >= arm.last_only.test_acc_at_best ? 1 : 0;
    full_sum += arm.full.test_acc_at_best;
    last_sum += arm.last_only.test_acc_at_best;
  }
  if (!out) throw IoError("cannot write " + table.string());
  r.artifacts.push_back(table);
  const double n = static_cast<double>(arms.size());
  r.metrics["full_test_acc"] = full_sum / n;
  r.metrics["last_only_test_acc"] = last_sum / n;
  r.metrics["full_wins"] = static_cast<double>(wins);
  std::ostringstream s;
  s << "layer-adaptive vs last-layer-only over " << arms.size() << " seeds\n"
    << "mean test_acc full=" << fixed(full_sum / n) << " last_only=" << fixed(last_sum / n) << "\n"
    << "full >= last_only on " << wins << " of " << arms.size() << " seeds\n"
    << "artifacts in " << r.run_dir.string() << "\n";
  r.summary = s.str();
  return r;
}

CommandResult cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, graph::Split split) {
  config.validate();
  const graph::TextAttributedGraph g = load_dataset(config);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const train::EvalReport rep = train::evaluate(g, ckpt, student_config(config, g), split);
  CommandResult r;
  r.run_dir = checkpoint.parent_path();
  r.metrics["acc"] = rep.accuracy;
  r.metrics["f1"] = rep.macro_f1;
  std::ostringstream s;
  s << graph::split_name(split) << " nodes=" << rep.count << " acc=" << fixed(rep.accuracy)
    << " macro_f1=" << fixed(rep.macro_f1) << "\n";
  for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
    const auto& pc = rep.per_class[c];
    const std::string name = c < g.class_names().size() ? g.class_names()[c] : "class_" + std::to_string(c);
    s << "  " << name << ": precision=" << fixed(pc.precision) << " recall=" << fixed(pc.recall)
      << " f1=" << fixed(pc.f1) << " support=" << pc.support << "\n";
  }
  r.summary = s.str();
  return r;
}

}  // namespace gkd::pipeline

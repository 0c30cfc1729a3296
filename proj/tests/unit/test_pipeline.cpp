// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>

#include "../support/tempdir.hpp"
#include "gkd/error.hpp"
#include "gkd/pipeline.hpp"

using namespace gkd;
using namespace gkd::pipeline;

namespace {

const std::filesystem::path kFixture = std::filesystem::path(GKD_TEST_DATA_DIR) / "fixture";

std::string small_synth(const std::string& extra = "") {
  return R"({"name": "t", "seed": 5,
    "dataset": {"source": "synth", "synth": {"nodes": 10, "classes": 2, "feature_dim": 4, "avg_degree": 3}},
    "prompt": {"k": 2, "theta": 2},
    "teacher": {"mode": "mock", "dim": 16},
    "student": {"layers": 2, "hidden": 8},
    "train": {"epochs": 3, "batch": 4, "lr": 0.01})" +
         extra + "}";
}

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config errors name the offending key") {
  CHECK(error_of(R"({"trian": {}})") == "unknown config key 'trian'");
  CHECK(error_of(R"({"train": {"lrr": 1}})") == "unknown config key 'train.lrr'");
  CHECK(error_of(R"({"train": {"epochs": -1}})").find("train.epochs") != std::string::npos);
  CHECK(error_of(R"({"train": {"lr": "fast"}})").find("train.lr") != std::string::npos);
  CHECK(error_of(R"({"teacher": {"mode": "gpt"}})").find("unknown teacher mode 'gpt'") != std::string::npos);
  CHECK(error_of("{not json").find("JSON") != std::string::npos);
  CHECK(error_of(R"({"dataset": 3})") == "config section 'dataset' must be an object");
}

TEST_CASE("validation catches inconsistent sections") {
  auto c = parse_run_config(small_synth());
  CHECK_NOTHROW(c.validate());
  auto deep = c;
  deep.student.layers = 3;
  CHECK_THROWS_WITH_AS(deep.validate(), doctest::Contains("exceeds prompt.k"), ValidationError);
  auto ratios = c;
  ratios.dataset.split_ratios = {0.5, 0.2, 0.2};
  CHECK_THROWS_WITH_AS(ratios.validate(), doctest::Contains("sum to 1"), ValidationError);
  auto files = c;
  files.dataset.source = DatasetSource::kFiles;
  files.dataset.node_file = "/nonexistent/nodes.tsv";
  files.dataset.edge_file = "/nonexistent/edges.tsv";
  CHECK_THROWS_WITH_AS(files.validate(), "dataset file not found: /nonexistent/nodes.tsv", ValidationError);
}

TEST_CASE("run directory hash is stable and tracks content") {
  const auto a = parse_run_config(small_synth());
  const auto b = parse_run_config(small_synth());
  CHECK(a.canonical_json() == b.canonical_json());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 8);
  CHECK(a.run_dir() == std::filesystem::path("runs") / ("t-" + a.hash()));
  auto c = a;
  c.train.lr = 0.02;
  CHECK(c.hash() != a.hash());
  // Canonical text parses back to the same config.
  CHECK(parse_run_config(a.canonical_json()).canonical_json() == a.canonical_json());
}

TEST_CASE("seed override reaches every component") {
  auto c = parse_run_config(small_synth());
  CHECK(c.student.seed == 5);
  c.apply_seed(11);
  CHECK(c.seed == 11);
  CHECK(c.dataset.synth.seed == 11);
  CHECK(c.prompt.seed == 11);
  CHECK(c.student.seed == 11);
  CHECK(c.train.seed == 11);
  CHECK(c.train.distill.seed == 11);
}

TEST_CASE("fixture paths resolve relative to the config file") {
  const auto c = load_run_config(kFixture / "prompts.json");
  CHECK(c.dataset.node_file == kFixture / "nodes.tsv");
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(load_run_config(kFixture / "missing.json"), ValidationError);
}

TEST_CASE("mock-teacher and build-prompts artifacts") {
  testing::TempDir dir;
  auto c = parse_run_config(small_synth());
  c.output_dir = dir.path();
  const auto t = cmd_mock_teacher(c);
  CHECK(t.metrics.at("records") == 60.0);
  const auto store = teacher::load_teacher_features(t.artifacts.at(0));
  CHECK(store.record_count() == 60);
  CHECK(store.dim() == 16);
  CHECK(std::filesystem::exists(t.run_dir / "config.json"));

  c.prompt.k = 1;
  c.prompt.theta = 1;
  c.student.layers = 1;
  const auto p = cmd_build_prompts(c);
  const std::string text = testing::slurp(p.artifacts.at(0));
  CHECK(std::count(text.begin(), text.end(), '\n') == 20);
  CHECK(p.metrics.at("prompts") == 20.0);
}

TEST_CASE("train then eval reproduces the stored metric") {
  testing::TempDir dir;
  auto c = parse_run_config(small_synth());
  c.output_dir = dir.path();
  const auto r = cmd_train(c);
  CHECK(std::filesystem::exists(r.run_dir / "metrics.csv"));
  const auto back = train::read_metrics_csv(r.run_dir / "metrics.csv");
  CHECK(back.epochs.size() == 3);
  const auto e = cmd_eval(c, r.run_dir / "best.ckpt", graph::Split::kTest);
  CHECK(e.metrics.at("acc") == r.metrics.at("test_acc"));
  const auto v = cmd_eval(c, r.run_dir / "best.ckpt", graph::Split::kVal);
  CHECK(v.metrics.at("acc") == r.metrics.at("val_acc"));

  SUBCASE("vanilla mode needs no teacher") {
    c.teacher.mode = TeacherMode::kNone;
    const auto vanilla = cmd_train(c);
    CHECK(vanilla.summary.rfind("vanilla run", 0) == 0);
    CHECK_THROWS_AS(cmd_ablate(c), ValidationError);
  }
}

TEST_CASE("teacher files must match the dataset") {
  testing::TempDir dir;
  auto big = parse_run_config(small_synth());
  big.output_dir = dir.path();
  big.dataset.synth.nodes = 12;
  const auto t = cmd_mock_teacher(big);
  auto c = parse_run_config(small_synth());
  c.teacher.mode = TeacherMode::kFile;
  c.teacher.path = t.artifacts.at(0);
  const auto g = load_dataset(c);
  CHECK_THROWS_WITH_AS(load_teacher(c, g), doctest::Contains("outside the dataset"), ValidationError);
}

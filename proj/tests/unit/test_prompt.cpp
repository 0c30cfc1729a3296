// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "../support/tempdir.hpp"
#include "gkd/error.hpp"
#include "gkd/pipeline.hpp"
#include "gkd/prompt.hpp"

using namespace gkd;
using namespace gkd::prompt;
using graph::Edge;
using graph::GraphData;
using graph::TextAttributedGraph;

namespace {

const std::filesystem::path kFixture = std::filesystem::path(GKD_TEST_DATA_DIR) / "fixture";

TextAttributedGraph make_graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> attrs = {}) {
  GraphData d;
  d.node_count = n;
  d.edges = std::move(edges);
  if (attrs.empty()) {
    for (std::size_t i = 0; i < n; ++i) attrs.push_back("paper " + std::to_string(i));
  }
  d.attributes = std::move(attrs);
  d.feature_dim = 1;
  d.features.assign(n, 0.0);
  d.labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) d.labels[i] = static_cast<int>(i % 2);
  d.splits.assign(n, graph::Split::kTrain);
  return TextAttributedGraph(std::move(d));
}

PromptConfig basic_config() {
  PromptConfig cfg;
  cfg.graph_type = "citation network";
  cfg.categories = {"A", "B"};
  return cfg;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("render_instruction") {
  auto cfg = basic_config();
  const std::string text = render_instruction(cfg);
  CHECK(text.rfind("Implement a node classification system for citation network", 0) == 0);
  CHECK(contains(text, "[A, B]"));
  CHECK(text.back() == '.');
  SUBCASE("criteria is appended when present") {
    cfg.criteria = "Use the topic of the abstract";
    CHECK(render_instruction(cfg) == text + " Use the topic of the abstract.");
  }
  SUBCASE("single category has no separator") {
    cfg.categories = {"Only"};
    CHECK(contains(render_instruction(cfg), "[Only]"));
  }
  SUBCASE("empty category name is rejected") {
    cfg.categories = {"A", ""};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
}

TEST_CASE("render_query") {
  std::vector<Edge> edges{{5, 0}, {5, 1}, {5, 2}};
  std::vector<std::string> attrs(7, "x");
  attrs[5] = "T";
  attrs[6] = "line one\nline two";
  const auto g = make_graph(7, edges, attrs);
  CHECK(render_query(g, 5) == "Which category should (node_5, 3, T) be classified as?");
  CHECK(render_query(g, 6) == "Which category should (node_6, 0, line one line two) be classified as?");
  CHECK(sanitize_attribute("a\r\nb\tc") == "a b c");
}

TEST_CASE("encode_structure") {
  const auto path = make_graph(3, {{0, 1}, {1, 2}}, {"p0", "p1", "p2"});
  const auto sub = graph::khop_subgraph(path, 0, 2);
  CHECK(encode_structure(sub, path, 0) == "(node_0, 1, p0)");
  CHECK(encode_structure(sub, path, 2) ==
        "(node_0, 1, p0) is connected within 2 hops to (node_2, 1, p2) through paths that may involve "
        "node_0 \xE2\x86\x92 node_1 \xE2\x86\x92 node_2.");

  const auto triangle = make_graph(3, {{0, 1}, {1, 2}, {2, 0}}, {"t0", "t1", "t2"});
  const auto tsub = graph::khop_subgraph(triangle, 0, 2);
  CHECK(encode_structure(tsub, triangle, 1) ==
        "(node_0, 2, t0) is connected within 1 hops to (node_1, 2, t1), (node_2, 2, t2) through paths that may "
        "involve node_0 \xE2\x86\x92 node_1, node_0 \xE2\x86\x92 node_2.");
  CHECK(encode_structure(tsub, triangle, 2) ==
        "(node_0, 2, t0) is connected within 2 hops to no nodes, as it has no neighbors at hop 2.");
  CHECK_THROWS_AS(encode_structure(tsub, triangle, 3), ContractError);
}

TEST_CASE("encode_structure truncates whole trailing tuples") {
  std::vector<Edge> star;
  for (std::size_t v = 1; v <= 6; ++v) star.emplace_back(0, v);
  const auto g = make_graph(7, star);
  const auto sub = graph::khop_subgraph(g, 0, 1);
  const std::string full = encode_structure(sub, g, 1);
  const std::size_t words = count_words(full);
  const std::string cut = encode_structure(sub, g, 1, words - 1);
  CHECK(count_words(cut) <= words - 1);
  CHECK(contains(cut, "(node_5, 1, paper 5)"));
  CHECK_FALSE(contains(cut, "(node_6"));
  CHECK_FALSE(contains(cut, "node_6"));
  // Budget too small for anything still keeps one tuple.
  CHECK(contains(encode_structure(sub, g, 1, 1), "(node_1, 1, paper 1) through"));
}

TEST_CASE("build_prompt_set") {
  const auto g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}});
  auto cfg = basic_config();
  SUBCASE("theta = 1 gives one prompt per hop") {
    cfg.k = 3;
    cfg.theta = 1;
    const auto set = build_prompt_set(g, 0, cfg);
    REQUIRE(set.size() == 4);
    for (std::size_t l = 0; l < 4; ++l) CHECK(set[l].hop == l);
  }
  SUBCASE("k = 3, theta = 2 stays within eight prompts") {
    cfg.k = 3;
    cfg.theta = 2;
    CHECK(build_prompt_set(g, 1, cfg).size() <= 8);
  }
  SUBCASE("prompt structure") {
    cfg.k = 2;
    for (const auto& p : build_prompt_set(g, 1, cfg)) {
      CHECK(p.full_text == p.instruction + " " + p.structure + " " + p.query);
      CHECK(p.full_text.rfind(p.instruction, 0) == 0);
      CHECK(p.full_text.size() >= p.query.size());
      CHECK(p.full_text.substr(p.full_text.size() - p.query.size()) == p.query);
      CHECK(p.target == "B");
      if (p.hop == 0) {
        CHECK_FALSE(contains(p.full_text, "is connected within"));
      } else {
        CHECK(contains(p.full_text, "is connected within " + std::to_string(p.hop) + " hops"));
      }
    }
  }
}

TEST_CASE("oversized frontiers are subsampled into distinct seeded prompts") {
  std::vector<Edge> star;
  for (std::size_t v = 1; v <= 30; ++v) star.emplace_back(0, v);
  const auto g = make_graph(31, star);
  auto cfg = basic_config();
  cfg.k = 1;
  cfg.theta = 3;
  cfg.s_max = 100;
  cfg.seed = 5;
  const auto a = build_prompt_set(g, 0, cfg);
  const auto b = build_prompt_set(g, 0, cfg);
  REQUIRE(a.size() == 4);
  std::set<std::string> texts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].full_text == b[i].full_text);
    CHECK(count_words(a[i].full_text) <= cfg.word_budget());
    texts.insert(a[i].full_text);
  }
  CHECK(texts.size() == 4);
  cfg.seed = 6;
  CHECK(build_prompt_set(g, 0, cfg)[1].full_text != a[1].full_text);
}

TEST_CASE("paths in structural prompts follow real edges") {
  const auto g = graph::synth_tag({.nodes = 40, .classes = 2, .avg_degree = 3.0, .seed = 3});
  auto cfg = basic_config();
  cfg.k = 3;
  for (graph::NodeId c = 0; c < g.node_count(); ++c) {
    const auto sub = graph::khop_subgraph(g, c, cfg.k);
    for (std::size_t l = 1; l <= cfg.k; ++l) {
      for (graph::NodeId v : sub.frontiers[l]) {
        const auto path = sub.path_to(v);
        CHECK(path.size() == l + 1);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          const auto nb = g.neighbors(path[i]);
          CHECK(std::find(nb.begin(), nb.end(), path[i + 1]) != nb.end());
        }
      }
    }
  }
}

TEST_CASE("jsonl export, escaping and round trip") {
  testing::TempDir dir;
  PromptRecord r{3, 1, 0, "quote \" backslash \\ newline \n arrow \xE2\x86\x92", "B"};
  CHECK(to_jsonl_line(r) ==
        "{\"node\":3,\"hop\":1,\"prompt_index\":0,\"text\":\"quote \\\" backslash \\\\ newline \\n arrow "
        "\xE2\x86\x92\",\"target\":\"B\"}");
  const std::vector<PromptRecord> one{r};
  export_records(one, dir / "a.jsonl");
  const auto back = parse_jsonl(dir / "a.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0] == r);
  export_records(back, dir / "b.jsonl");
  CHECK(testing::slurp(dir / "a.jsonl") == testing::slurp(dir / "b.jsonl"));
  CHECK(testing::slurp(dir / "a.jsonl").back() == '\n');
  CHECK_THROWS_AS(export_records({}, dir / "c.jsonl"), ContractError);
  CHECK_THROWS_AS(export_records(one, dir / "missing" / "c.jsonl"), IoError);
  dir.write("bad.jsonl", "{\"node\":1}\n");
  CHECK_THROWS_AS(parse_jsonl(dir / "bad.jsonl"), FormatError);
}

TEST_CASE("fixture graph reproduces the golden prompt file") {
  testing::TempDir dir;
  auto cfg = pipeline::load_run_config(kFixture / "prompts.json");
  cfg.output_dir = dir.path();
  const auto result = pipeline::cmd_build_prompts(cfg);
  const auto produced = result.run_dir / "prompts.jsonl";
  const std::string golden = testing::slurp(kFixture / "prompts.golden.jsonl");
  CHECK(testing::slurp(produced) == golden);
  // parse -> re-export is byte-identical as well
  export_records(parse_jsonl(produced), dir / "again.jsonl");
  CHECK(testing::slurp(dir / "again.jsonl") == golden);
}

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "../support/probe.hpp"
#include "../support/tempdir.hpp"
#include "gkd/error.hpp"
#include "gkd/graph.hpp"
#include "gkd/rng.hpp"

using namespace gkd;
using namespace gkd::graph;

namespace {

TextAttributedGraph make_graph(std::size_t n, std::vector<Edge> edges, std::vector<int> labels = {}) {
  GraphData d;
  d.node_count = n;
  d.edges = std::move(edges);
  d.attributes.assign(n, "text");
  d.feature_dim = 1;
  d.features.assign(n, 0.0);
  d.labels = labels.empty() ? std::vector<int>(n, 0) : std::move(labels);
  d.splits.assign(n, Split::kTrain);
  return TextAttributedGraph(std::move(d));
}

// All-pairs shortest paths by Floyd-Warshall.
std::vector<std::vector<std::size_t>> apsp(std::size_t n, const std::vector<Edge>& edges) {
  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [u, v] : edges) {
    if (u != v) d[u][v] = d[v][u] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

std::string node_line(std::size_t id, int label, const std::string& text, const std::string& feats) {
  return std::to_string(id) + "\t" + std::to_string(label) + "\t" + text + "\t" + feats + "\n";
}

}  // namespace

TEST_CASE("khop_subgraph on a path graph") {
  const auto g = make_graph(3, {{0, 1}, {1, 2}});
  const auto sub = khop_subgraph(g, 0, 2);
  REQUIRE(sub.frontiers.size() == 3);
  CHECK(sub.frontiers[0] == std::vector<NodeId>{0});
  CHECK(sub.frontiers[1] == std::vector<NodeId>{1});
  CHECK(sub.frontiers[2] == std::vector<NodeId>{2});
  CHECK(sub.path_to(2) == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("khop_subgraph on a triangle leaves hop 2 empty") {
  const auto g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  const auto sub = khop_subgraph(g, 0, 2);
  CHECK(sub.frontiers[1] == std::vector<NodeId>{1, 2});
  CHECK(sub.frontiers[2].empty());
}

TEST_CASE("khop_subgraph with k = 0") {
  const auto g = make_graph(3, {{0, 1}, {1, 2}});
  const auto sub = khop_subgraph(g, 1, 0);
  CHECK(sub.frontiers.size() == 1);
  CHECK(sub.frontiers[0] == std::vector<NodeId>{1});
  CHECK(sub.tree_edges.empty());
  CHECK_THROWS_AS(khop_subgraph(g, 3, 1), ContractError);
}

TEST_CASE("khop_subgraph matches a shortest-path oracle on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(49);
    const std::size_t m = rng.index(2 * n + 1);
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < m; ++e) edges.emplace_back(rng.index(n), rng.index(n));
    const auto g = make_graph(n, edges);
    const auto dist = apsp(n, edges);
    const NodeId center = rng.index(n);
    const std::size_t k = rng.index(6);
    const auto sub = khop_subgraph(g, center, k);
    REQUIRE(sub.frontiers.size() == k + 1);
    std::set<NodeId> seen;
    for (std::size_t l = 0; l <= k; ++l) {
      std::vector<NodeId> expected;
      for (NodeId v = 0; v < n; ++v) {
        if (dist[center][v] == l) expected.push_back(v);
      }
      CHECK(sub.frontiers[l] == expected);
      for (NodeId v : sub.frontiers[l]) {
        CHECK(seen.insert(v).second);
        if (l > 0) {
          const NodeId p = sub.parent.at(v);
          CHECK(dist[center][p] == l - 1);
          const auto nb = g.neighbors(v);
          CHECK(std::find(nb.begin(), nb.end(), p) != nb.end());
        }
      }
    }
    for (NodeId v = 0; v < n; ++v) CHECK((dist[center][v] <= k) == (seen.count(v) == 1));
  }
}

TEST_CASE("graph construction drops self-loops and duplicate edges") {
  const auto g = make_graph(3, {{0, 1}, {1, 0}, {2, 2}, {1, 2}});
  CHECK(g.edge_count() == 2);
  CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(g.degree(2) == 1);
}

TEST_CASE("stratified split follows the ratios") {
  SUBCASE("10 nodes, one class, 6:2:2") {
    const auto splits = stratified_split(std::vector<int>(10, 0), {{6, 2, 2}, 3});
    CHECK(std::count(splits.begin(), splits.end(), Split::kTrain) == 6);
    CHECK(std::count(splits.begin(), splits.end(), Split::kVal) == 2);
    CHECK(std::count(splits.begin(), splits.end(), Split::kTest) == 2);
  }
  SUBCASE("per class within one node") {
    std::vector<int> labels;
    for (int c = 0; c < 5; ++c) labels.insert(labels.end(), 13 + 7 * c, c);
    const auto splits = stratified_split(labels, {{0.6, 0.2, 0.2}, 9});
    for (int c = 0; c < 5; ++c) {
      const double n = 13 + 7 * c;
      std::size_t counts[3] = {0, 0, 0};
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) ++counts[static_cast<int>(splits[i])];
      }
      CHECK(std::abs(static_cast<double>(counts[0]) - 0.6 * n) <= 1.0);
      CHECK(std::abs(static_cast<double>(counts[1]) - 0.2 * n) <= 1.0);
      CHECK(std::abs(static_cast<double>(counts[2]) - 0.2 * n) <= 1.0);
    }
  }
  SUBCASE("seeded") {
    const std::vector<int> labels(40, 1);
    CHECK(stratified_split(labels, {{6, 2, 2}, 1}) == stratified_split(labels, {{6, 2, 2}, 1}));
    CHECK(stratified_split(labels, {{6, 2, 2}, 1}) != stratified_split(labels, {{6, 2, 2}, 2}));
  }
  CHECK_THROWS_AS(stratified_split({0}, {{0, 0, 0}, 0}), ValidationError);
}

TEST_CASE("load_graph reads the TSV formats") {
  testing::TempDir dir;
  const auto nodes = dir.write("nodes.tsv", node_line(0, 1, "alpha", "1,0") + node_line(1, 0, "beta", "0,1") +
                                                node_line(2, 1, "gamma", "0.5,-2e-1"));
  SUBCASE("edges") {
    const auto edges = dir.write("edges.tsv", "0\t1\n1\t2\n2\t1\n");
    const auto g = load_graph(nodes, edges, {});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.raw_edge_records() == 3);
    CHECK(g.num_classes() == 2);
    CHECK(g.feature_dim() == 2);
    CHECK(g.attribute(2) == "gamma");
    CHECK(g.feature_row(2)[1] == -0.2);
    CHECK(g.label(0) == 1);
  }
  SUBCASE("empty edge file gives isolated nodes") {
    const auto g = load_graph(nodes, dir.write("edges.tsv", ""), {});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 0);
    for (NodeId v = 0; v < 3; ++v) CHECK(g.degree(v) == 0);
  }
  SUBCASE("save and reload") {
    const auto g = load_graph(nodes, dir.write("edges.tsv", "0\t2\n"), {});
    save_graph(g, dir / "n2.tsv", dir / "e2.tsv");
    const auto h = load_graph(dir / "n2.tsv", dir / "e2.tsv", {});
    CHECK(h.edges() == g.edges());
    CHECK(h.labels() == g.labels());
    CHECK(std::equal(h.features().begin(), h.features().end(), g.features().begin()));
  }
}

TEST_CASE("load_graph errors name the offending line") {
  testing::TempDir dir;
  const auto good_edges = dir.write("edges.tsv", "0\t1\n");
  auto expect_error = [&](const std::string& node_text, const std::string& edge_text, const std::string& needle) {
    const auto n = dir.write("n.tsv", node_text);
    const auto e = dir.write("e.tsv", edge_text);
    try {
      load_graph(n, e, {});
      FAIL("expected a load error");
    } catch (const ValidationError& err) {
      INFO(err.what());
      CHECK(std::string(err.what()).find(needle) != std::string::npos);
    }
  };
  const std::string two = node_line(0, 0, "a", "1") + node_line(1, 0, "b", "2");
  expect_error(two, "0\t1\n1\t7\n", "e.tsv:2: dangling edge endpoint 7");
  expect_error(two + node_line(1, 0, "c", "3"), "", "n.tsv:3: duplicate node id 1");
  expect_error(two + "2\t\tc\t3\n", "", "n.tsv:3: missing label");
  expect_error(two + "2\n", "", "n.tsv:3: missing label");
  expect_error(two + node_line(2, 0, "c", "3,4"), "", "n.tsv:3: feature dimension 2 differs from 1");
  expect_error(two + node_line(2, 0, "c", "nan"), "", "n.tsv:3: invalid feature value");
  expect_error(node_line(0, 0, "a", "1") + node_line(2, 0, "b", "1"), "", "node ids must be exactly 0..1");
  CHECK_THROWS_AS(load_graph(dir / "missing.tsv", good_edges, {}), IoError);
}

TEST_CASE("synth_tag") {
  SynthConfig cfg;
  cfg.nodes = 100;
  cfg.classes = 4;
  cfg.seed = 11;
  SUBCASE("labels are balanced") {
    const auto g = synth_tag(cfg);
    for (int c = 0; c < 4; ++c) CHECK(std::count(g.labels().begin(), g.labels().end(), c) == 25);
    CHECK(g.attribute(0).find(g.class_names()[static_cast<std::size_t>(g.label(0))]) != std::string::npos);
  }
  SUBCASE("homophily 1 keeps every edge inside a class") {
    cfg.homophily = 1.0;
    const auto g = synth_tag(cfg);
    CHECK(g.edge_count() > 0);
    for (auto [u, v] : g.edges()) CHECK(g.label(u) == g.label(v));
  }
  SUBCASE("homophily 0.7 is roughly respected") {
    cfg.nodes = 600;
    const auto g = synth_tag(cfg);
    std::size_t same = 0;
    for (auto [u, v] : g.edges()) same += g.label(u) == g.label(v);
    const double frac = static_cast<double>(same) / static_cast<double>(g.edge_count());
    CHECK(frac > 0.65);
    CHECK(frac < 0.78);
  }
  SUBCASE("fixed seed is reproducible") {
    const auto a = synth_tag(cfg);
    const auto b = synth_tag(cfg);
    CHECK(a.edges() == b.edges());
    CHECK(a.labels() == b.labels());
    CHECK(std::equal(a.features().begin(), a.features().end(), b.features().begin()));
    cfg.seed = 12;
    CHECK(synth_tag(cfg).edges() != a.edges());
  }
  SUBCASE("feature signal controls probe accuracy") {
    cfg.nodes = 800;
    auto probe = [&](double signal) {
      cfg.signal = signal;
      const auto g = synth_tag(cfg);
      testing::ProbeData tr{g.feature_dim(), {}, {}}, te{g.feature_dim(), {}, {}};
      for (NodeId v = 0; v < g.node_count(); ++v) {
        auto& dst = g.split(v) == Split::kTrain ? tr : te;
        const auto row = g.feature_row(v);
        dst.x.emplace_back(row.begin(), row.end());
        dst.y.push_back(g.label(v));
      }
      return testing::probe_accuracy(tr, te, 4);
    };
    CHECK(probe(0.0) < 0.25 + 0.1);
    CHECK(probe(3.0) > 0.9);
  }
  CHECK_THROWS_AS(synth_tag({.nodes = 2, .classes = 3}), ValidationError);
}

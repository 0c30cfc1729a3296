// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_TESTS_SUPPORT_FIXTURES_HPP_
#define GKD_TESTS_SUPPORT_FIXTURES_HPP_

#include <string>
#include <vector>

#include "gkd/graph.hpp"
#include "gkd/optim.hpp"
#include "gkd/rng.hpp"

namespace gkd::testing {

// Small graph with explicit features and labels; every node is in train.
inline graph::TextAttributedGraph small_graph(std::size_t n, std::vector<graph::Edge> edges, std::size_t dim,
                                              std::uint64_t seed, std::size_t classes = 2) {
  Rng rng(seed);
  graph::GraphData d;
  d.node_count = n;
  d.edges = std::move(edges);
  d.attributes.assign(n, "node");
  d.feature_dim = dim;
  d.features.resize(n * dim);
  for (double& x : d.features) x = rng.uniform(-2, 2);
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(i % classes));
  d.splits.assign(n, graph::Split::kTrain);
  return graph::TextAttributedGraph(std::move(d));
}

inline std::vector<graph::Edge> random_edges(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<graph::Edge> e;
  for (std::size_t i = 0; i < m; ++i) e.emplace_back(rng.index(n), rng.index(n));
  return e;
}

inline void fill(ad::Parameter& p, std::vector<double> values) {
  auto d = p.tensor.mutable_data();
  std::copy(values.begin(), values.end(), d.begin());
}

inline void randomize(ad::Parameter& p, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (double& v : p.tensor.mutable_data()) v = rng.uniform(lo, hi);
}

}  // namespace gkd::testing

#endif  // GKD_TESTS_SUPPORT_FIXTURES_HPP_

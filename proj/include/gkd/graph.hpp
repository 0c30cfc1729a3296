// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_GRAPH_HPP_
#define GKD_GRAPH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gkd::graph {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct SplitConfig {
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
};

// Raw components; TextAttributedGraph normalizes and validates them.
struct GraphData {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::vector<std::string> attributes;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // node_count x feature_dim, row-major
  std::vector<int> labels;
  std::vector<Split> splits;
  std::vector<std::string> class_names;  // optional
  std::size_t raw_edge_records = 0;
};

// Undirected text-attributed graph. Immutable after construction.
class TextAttributedGraph {
 public:
  explicit TextAttributedGraph(GraphData data);

  std::size_t node_count() const { return n_; }
  // Deduplicated undirected edges, each stored once as (min, max), sorted.
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  // Number of edge records read before deduplication (equals edge_count()
  // for generated graphs).
  std::size_t raw_edge_records() const { return raw_edge_records_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t feature_dim() const { return feature_dim_; }

  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
  const std::string& attribute(NodeId v) const { return attributes_.at(v); }
  int label(NodeId v) const { return labels_.at(v); }
  const std::vector<int>& labels() const { return labels_; }
  Split split(NodeId v) const { return splits_.at(v); }
  const std::vector<Split>& splits() const { return splits_; }
  std::span<const double> features() const { return features_; }
  std::span<const double> feature_row(NodeId v) const;
  const std::vector<std::string>& class_names() const { return class_names_; }
  bool contains(NodeId v) const { return v < n_; }

  std::vector<NodeId> nodes_in(Split split) const;

  // Same structure and attributes with a different split assignment.
  TextAttributedGraph with_splits(std::vector<Split> splits) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::string> attributes_;
  std::size_t feature_dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<Split> splits_;
  std::vector<std::string> class_names_;
  std::size_t num_classes_ = 0;
  std::size_t raw_edge_records_ = 0;
};

// Per-class shuffle, then round(ratio * class size) nodes to train and val,
// remainder to test.
std::vector<Split> stratified_split(const std::vector<int>& labels, const SplitConfig& config);

// Node file: node_id \t label_id \t text \t f1,f2,...   (ids dense 0..n-1)
// Edge file: src_id \t dst_id
TextAttributedGraph load_graph(const std::filesystem::path& node_file,
                               const std::filesystem::path& edge_file, const SplitConfig& split);

void save_graph(const TextAttributedGraph& g, const std::filesystem::path& node_file,
                const std::filesystem::path& edge_file);

struct NeighborSubgraph {
  NodeId center = 0;
  // frontiers[l] holds nodes at exact distance l, ascending; frontiers[0] = {center}.
  std::vector<std::vector<NodeId>> frontiers;
  // BFS-tree edges (parent, child); the parent is the smallest-id neighbor
  // one hop closer to the center.
  std::vector<Edge> tree_edges;
  std::map<NodeId, NodeId> parent;
  std::map<NodeId, std::size_t> degrees;

  std::size_t hops() const { return frontiers.size() - 1; }
  // center -> ... -> node along the BFS tree.
  std::vector<NodeId> path_to(NodeId node) const;
};

NeighborSubgraph khop_subgraph(const TextAttributedGraph& g, NodeId center, std::size_t k);

struct SynthConfig {
  std::size_t nodes = 600;
  std::size_t classes = 4;
  double homophily = 0.7;
  std::size_t feature_dim = 32;
  double signal = 1.0;
  double avg_degree = 4.0;
  std::uint64_t seed = 0;
  SplitConfig split{};
};

// Seeded synthetic text-attributed graph with a tunable fraction of
// intra-class edges and class-mean features.
TextAttributedGraph synth_tag(const SynthConfig& config);

}  // namespace gkd::graph

#endif  // GKD_GRAPH_HPP_

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gkd/error.hpp"
#include "gkd/rng.hpp"

namespace gkd::graph {

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + name + "' (expected train, val or test)");
}

TextAttributedGraph::TextAttributedGraph(GraphData data)
    : n_(data.node_count),
      attributes_(std::move(data.attributes)),
      feature_dim_(data.feature_dim),
      features_(std::move(data.features)),
      labels_(std::move(data.labels)),
      splits_(std::move(data.splits)),
      class_names_(std::move(data.class_names)),
      raw_edge_records_(data.raw_edge_records) {
  if (n_ == 0) throw ValidationError("graph must have at least one node");
  if (attributes_.size() != n_) throw ValidationError("every node needs a text attribute");
  if (labels_.size() != n_) throw ValidationError("every node needs a label");
  if (splits_.size() != n_) throw ValidationError("every node needs a split tag");
  if (feature_dim_ == 0) throw ValidationError("feature dimension must be positive");
  if (features_.size() != n_ * feature_dim_) {
    throw ValidationError("feature matrix does not have node_count x feature_dim values");
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw ValidationError("node features must be finite");
  }
  int max_label = -1;
  for (int y : labels_) {
    if (y < 0) throw ValidationError("labels must be non-negative");
    max_label = std::max(max_label, y);
  }
  num_classes_ = static_cast<std::size_t>(max_label + 1);
  if (!class_names_.empty() && class_names_.size() < num_classes_) {
    throw ValidationError("fewer class names than label ids");
  }
  if (class_names_.size() > num_classes_) num_classes_ = class_names_.size();

  std::set<Edge> unique;
  for (auto [u, v] : data.edges) {
    if (u >= n_ || v >= n_) throw ValidationError("edge endpoint outside [0, n)");
    if (u == v) continue;
    unique.emplace(std::min(u, v), std::max(u, v));
  }
  edges_.assign(unique.begin(), unique.end());
  if (raw_edge_records_ == 0) raw_edge_records_ = edges_.size();
  adjacency_.assign(n_, {});
  for (auto [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::span<const double> TextAttributedGraph::feature_row(NodeId v) const {
  if (v >= n_) throw ContractError("node " + std::to_string(v) + " out of range");
  return std::span<const double>(features_).subspan(v * feature_dim_, feature_dim_);
}

std::vector<NodeId> TextAttributedGraph::nodes_in(Split split) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n_; ++v) {
    if (splits_[v] == split) out.push_back(v);
  }
  return out;
}

TextAttributedGraph TextAttributedGraph::with_splits(std::vector<Split> splits) const {
  GraphData d;
  d.node_count = n_;
  d.edges = edges_;
  d.attributes = attributes_;
  d.feature_dim = feature_dim_;
  d.features = features_;
  d.labels = labels_;
  d.splits = std::move(splits);
  d.class_names = class_names_;
  d.raw_edge_records = raw_edge_records_;
  return TextAttributedGraph(std::move(d));
}

std::vector<Split> stratified_split(const std::vector<int>& labels, const SplitConfig& config) {
  double total = 0.0;
  for (double r : config.ratios) {
    if (r < 0.0 || !std::isfinite(r)) throw ValidationError("split ratios must be non-negative");
    total += r;
  }
  if (total <= 0.0) throw ValidationError("split ratios must not all be zero");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<Split> out(labels.size(), Split::kTest);
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(config.seed, {stream::kSplit, static_cast<std::uint64_t>(label)}));
    rng.shuffle(members);
    const double n = static_cast<double>(members.size());
    std::size_t n_train = static_cast<std::size_t>(std::llround(n * config.ratios[0] / total));
    std::size_t n_val = static_cast<std::size_t>(std::llround(n * config.ratios[1] / total));
    n_train = std::min(n_train, members.size());
    n_val = std::min(n_val, members.size() - n_train);
    for (std::size_t i = 0; i < members.size(); ++i) {
      out[members[i]] = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

bool parse_size(std::string_view s, std::size_t& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '+')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

TextAttributedGraph load_graph(const std::filesystem::path& node_file,
                               const std::filesystem::path& edge_file, const SplitConfig& split) {
  std::ifstream nodes(node_file);
  if (!nodes) throw IoError("cannot open node file " + node_file.string());
  std::ifstream edges(edge_file);
  if (!edges) throw IoError("cannot open edge file " + edge_file.string());

  struct Row {
    int label;
    std::string text;
    std::vector<double> features;
  };
  std::map<std::size_t, Row> rows;
  std::map<std::size_t, std::size_t> first_line;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    if (t1 == std::string::npos) fail_line(node_file, line_no, "missing label");
    const std::size_t t2 = line.find('\t', t1 + 1);
    const std::size_t t_last = line.rfind('\t');
    std::size_t id = 0;
    if (!parse_size(std::string_view(line).substr(0, t1), id)) {
      fail_line(node_file, line_no, "invalid node id");
    }
    const std::string_view label_field =
        std::string_view(line).substr(t1 + 1, (t2 == std::string::npos ? line.size() : t2) - t1 - 1);
    std::size_t label = 0;
    if (label_field.empty()) fail_line(node_file, line_no, "missing label");
    if (!parse_size(label_field, label) || label > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
      fail_line(node_file, line_no, "invalid label '" + std::string(label_field) + "'");
    }
    if (t2 == std::string::npos || t_last == t2) {
      fail_line(node_file, line_no, "expected id, label, text and feature columns");
    }
    Row row;
    row.label = static_cast<int>(label);
    row.text = line.substr(t2 + 1, t_last - t2 - 1);
    std::string_view feats = std::string_view(line).substr(t_last + 1);
    while (!feats.empty()) {
      const std::size_t comma = feats.find(',');
      double v = 0.0;
      if (!parse_double(feats.substr(0, comma), v)) fail_line(node_file, line_no, "invalid feature value");
      row.features.push_back(v);
      if (comma == std::string_view::npos) break;
      feats.remove_prefix(comma + 1);
    }
    if (row.features.empty()) fail_line(node_file, line_no, "empty feature vector");
    if (dim == 0) dim = row.features.size();
    if (row.features.size() != dim) {
      fail_line(node_file, line_no,
                "feature dimension " + std::to_string(row.features.size()) + " differs from " +
                    std::to_string(dim));
    }
    if (rows.count(id)) {
      fail_line(node_file, line_no,
                "duplicate node id " + std::to_string(id) + " (first seen on line " +
                    std::to_string(first_line[id]) + ")");
    }
    first_line[id] = line_no;
    rows.emplace(id, std::move(row));
  }
  if (rows.empty()) throw ValidationError(node_file.string() + ": no nodes");
  const std::size_t n = rows.size();
  if (rows.rbegin()->first != n - 1) {
    throw ValidationError(node_file.string() + ": node ids must be exactly 0.." + std::to_string(n - 1));
  }

  GraphData data;
  data.node_count = n;
  data.feature_dim = dim;
  data.features.reserve(n * dim);
  for (auto& [id, row] : rows) {
    data.labels.push_back(row.label);
    data.attributes.push_back(std::move(row.text));
    data.features.insert(data.features.end(), row.features.begin(), row.features.end());
  }

  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    std::size_t u = 0, v = 0;
    if (tab == std::string::npos || !parse_size(std::string_view(line).substr(0, tab), u) ||
        !parse_size(std::string_view(line).substr(tab + 1), v)) {
      fail_line(edge_file, line_no, "expected src_id<TAB>dst_id");
    }
    if (u >= n || v >= n) {
      fail_line(edge_file, line_no, "dangling edge endpoint " + std::to_string(u >= n ? u : v));
    }
    data.edges.emplace_back(u, v);
  }
  data.raw_edge_records = data.edges.size();
  data.splits = stratified_split(data.labels, split);
  return TextAttributedGraph(std::move(data));
}

void save_graph(const TextAttributedGraph& g, const std::filesystem::path& node_file,
                const std::filesystem::path& edge_file) {
  std::ofstream nodes(node_file, std::ios::binary);
  if (!nodes) throw IoError("cannot write " + node_file.string());
  char buf[64];
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::string text = g.attribute(v);
    std::replace(text.begin(), text.end(), '\t', ' ');
    std::replace(text.begin(), text.end(), '\n', ' ');
    nodes << v << '\t' << g.label(v) << '\t' << text << '\t';
    auto row = g.feature_row(v);
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), row[j]);
      if (j) nodes << ',';
      nodes.write(buf, end - buf);
    }
    nodes << '\n';
  }
  std::ofstream edges(edge_file, std::ios::binary);
  if (!edges) throw IoError("cannot write " + edge_file.string());
  for (auto [u, v] : g.edges()) edges << u << '\t' << v << '\n';
  if (!nodes || !edges) throw IoError("write failed");
}

std::vector<NodeId> NeighborSubgraph::path_to(NodeId node) const {
  std::vector<NodeId> path{node};
  while (node != center) {
    auto it = parent.find(node);
    if (it == parent.end()) throw LookupError("node " + std::to_string(node) + " not in subgraph");
    node = it->second;
    path.push_back(node);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

NeighborSubgraph khop_subgraph(const TextAttributedGraph& g, NodeId center, std::size_t k) {
  if (!g.contains(center)) {
    throw ContractError("khop_subgraph: center " + std::to_string(center) + " out of range");
  }
  NeighborSubgraph sub;
  sub.center = center;
  sub.frontiers.push_back({center});
  sub.degrees[center] = g.degree(center);
  std::vector<bool> seen(g.node_count(), false);
  seen[center] = true;
  for (std::size_t l = 1; l <= k; ++l) {
    // Frontier members are visited in ascending order, so the first parent
    // to claim a node is its smallest-id predecessor.
    std::vector<NodeId> next;
    for (NodeId u : sub.frontiers[l - 1]) {
      for (NodeId v : g.neighbors(u)) {
        if (seen[v]) continue;
        seen[v] = true;
        next.push_back(v);
        sub.parent[v] = u;
      }
    }
    std::sort(next.begin(), next.end());
    for (NodeId v : next) {
      sub.tree_edges.emplace_back(sub.parent[v], v);
      sub.degrees[v] = g.degree(v);
    }
    sub.frontiers.push_back(std::move(next));
  }
  return sub;
}

TextAttributedGraph synth_tag(const SynthConfig& config) {
  if (config.classes == 0) throw ValidationError("synth: classes must be positive");
  if (config.nodes < config.classes) throw ValidationError("synth: need at least one node per class");
  if (config.homophily < 0.0 || config.homophily > 1.0) {
    throw ValidationError("synth: homophily must lie in [0, 1]");
  }
  if (config.feature_dim == 0) throw ValidationError("synth: feature_dim must be positive");
  if (config.signal < 0.0) throw ValidationError("synth: signal must be non-negative");
  if (config.avg_degree < 0.0) throw ValidationError("synth: avg_degree must be non-negative");

  Rng rng(derive_seed(config.seed, {stream::kSynth}));
  const std::size_t n = config.nodes, c = config.classes, d = config.feature_dim;

  GraphData data;
  data.node_count = n;
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.labels[i] = static_cast<int>(i % c);
  rng.shuffle(data.labels);
  for (std::size_t k = 0; k < c; ++k) data.class_names.push_back("topic_" + std::to_string(k));

  std::vector<std::vector<NodeId>> members(c);
  for (NodeId v = 0; v < n; ++v) members[static_cast<std::size_t>(data.labels[v])].push_back(v);

  const std::size_t target = static_cast<std::size_t>(std::llround(config.avg_degree * n / 2.0));
  std::set<Edge> edges;
  const std::size_t max_attempts = 50 * target + 1000;
  for (std::size_t attempt = 0; edges.size() < target && attempt < max_attempts; ++attempt) {
    const NodeId u = rng.index(n);
    const auto& same = members[static_cast<std::size_t>(data.labels[u])];
    NodeId v;
    if (rng.uniform() < config.homophily || c == 1) {
      v = same[rng.index(same.size())];
    } else {
      v = rng.index(n);
      while (data.labels[v] == data.labels[u]) v = rng.index(n);
    }
    if (u == v) continue;
    edges.emplace(std::min(u, v), std::max(u, v));
  }
  data.edges.assign(edges.begin(), edges.end());

  std::vector<double> means(c * d);
  for (double& m : means) m = rng.normal();
  data.feature_dim = d;
  data.features.resize(n * d);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t y = static_cast<std::size_t>(data.labels[v]);
    for (std::size_t j = 0; j < d; ++j) {
      data.features[v * d + j] = config.signal * means[y * d + j] + rng.normal();
    }
  }
  data.attributes.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    data.attributes[v] = "Article " + std::to_string(v) + " discusses recent results in " +
                         data.class_names[static_cast<std::size_t>(data.labels[v])] + ".";
  }
  data.splits = stratified_split(data.labels, config.split);
  return TextAttributedGraph(std::move(data));
}

}  // namespace gkd::graph

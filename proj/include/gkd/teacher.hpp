// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_TEACHER_HPP_
#define GKD_TEACHER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkd/graph.hpp"
#include "gkd/ops.hpp"
#include "gkd/optim.hpp"

namespace gkd::teacher {

using graph::NodeId;

// Raw per-prompt teacher vectors keyed by (node, hop, prompt index).
class RawTeacherStore {
 public:
  explicit RawTeacherStore(std::size_t dim = 0) : dim_(dim) {}

  // Prompt indices must arrive in order 0, 1, ... for each (node, hop).
  void add(std::uint64_t node, std::uint16_t hop, std::uint16_t prompt, std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t record_count() const { return records_; }
  bool empty() const { return records_ == 0; }
  // Highest hop present (0 for an empty store).
  std::size_t max_hop() const;
  // Largest prompt count over all (node, hop) pairs.
  std::size_t theta_max() const;
  std::vector<std::uint64_t> nodes() const;

  bool contains(std::uint64_t node, std::size_t hop) const;
  // Throws LookupError when absent.
  const std::vector<std::vector<double>>& prompts(std::uint64_t node, std::size_t hop) const;

  // Every node carries hops 0..max_hop().
  void validate() const;

  const std::map<std::pair<std::uint64_t, std::uint16_t>, std::vector<std::vector<double>>>& entries() const {
    return entries_;
  }

  bool operator==(const RawTeacherStore&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t records_ = 0;
  std::map<std::pair<std::uint64_t, std::uint16_t>, std::vector<std::vector<double>>> entries_;
};

// GKDF, little-endian:
//   "GKDF" | u32 version=1 | u64 n_records | u32 d_L | u8 dtype (0 = f32) | 3 reserved
//   then n_records x (u64 node | u16 hop | u16 prompt | d_L x f32), sorted by key.
inline constexpr std::uint32_t kGkdfVersion = 1;
inline constexpr std::size_t kGkdfHeaderBytes = 24;

struct GkdfHeader {
  std::uint32_t version = kGkdfVersion;
  std::uint64_t records = 0;
  std::uint32_t dim = 0;
  std::uint8_t dtype = 0;
};

GkdfHeader read_gkdf_header(const std::filesystem::path& path);
RawTeacherStore load_teacher_features(const std::filesystem::path& path);
// Values are narrowed to f32.
void write_teacher_features(const RawTeacherStore& store, const std::filesystem::path& path);

// Element-wise mean over the available prompt vectors of (node, hop).
std::vector<double> pool_prompts(const RawTeacherStore& store, std::uint64_t node, std::size_t hop);

enum class Activation { kGelu, kRelu, kTanh, kIdentity };
Activation parse_activation(const std::string& name);

// Hop-specific knowledge filters LayerNorm(act(h W_l + b_l)) followed by one
// affine projector shared across hops. Weights are stored [in, out].
class KnowledgeAdapter {
 public:
  KnowledgeAdapter(std::size_t max_hop, std::size_t teacher_dim, std::size_t distill_dim,
                   Activation activation, Rng& rng);

  std::size_t max_hop() const { return filter_weights_.size() - 1; }
  std::size_t teacher_dim() const { return teacher_dim_; }
  std::size_t distill_dim() const { return distill_dim_; }

  // h: [B, d_L] -> [B, d_L]
  ad::Tensor filter(std::size_t hop, const ad::Tensor& h) const;
  // h_hat: [B, d_L] -> [B, d_k]
  ad::Tensor project(const ad::Tensor& h_hat) const;
  ad::Tensor knowledge(std::size_t hop, const ad::Tensor& pooled) const;

  ad::Parameter& filter_weight(std::size_t hop) { return filter_weights_.at(hop); }
  ad::Parameter& filter_bias(std::size_t hop) { return filter_biases_.at(hop); }
  ad::Parameter& projector_weight() { return projector_weight_; }
  ad::Parameter& projector_bias() { return projector_bias_; }

  std::vector<ad::Parameter*> parameters();
  // Filter parameters of `hop` plus the projector.
  std::vector<ad::Parameter*> parameters_for_hops(std::span<const std::size_t> hops);

 private:
  std::size_t teacher_dim_;
  std::size_t distill_dim_;
  Activation activation_;
  std::vector<ad::Parameter> filter_weights_;
  std::vector<ad::Parameter> filter_biases_;
  ad::Parameter projector_weight_;
  ad::Parameter projector_bias_;
};

// Pooled raw features for a fixed node list, one constant [nodes, d_L]
// tensor per hop, rows in `nodes` order.
struct PooledTeacherFeatures {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> row_of;  // node id -> row, or npos
  std::vector<ad::Tensor> per_hop;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t row(NodeId v) const;
};

PooledTeacherFeatures pool_teacher_features(const RawTeacherStore& store, std::span<const NodeId> nodes,
                                            std::size_t max_hop, std::size_t node_count);

// h_l^T for every requested node and hop, differentiable through the adapter.
struct TeacherKnowledge {
  std::vector<NodeId> nodes;
  std::vector<ad::Tensor> per_hop;  // [nodes, d_k]
};

TeacherKnowledge build_teacher_knowledge(const RawTeacherStore& store, std::span<const NodeId> nodes,
                                         const KnowledgeAdapter& adapter);

struct MockTeacherConfig {
  std::size_t k = 2;
  std::size_t theta = 2;
  std::size_t dim = 64;
  double signal = 1.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

// Seeded stand-in for a language-model teacher:
//   h_l(i) = signal * e_{y_i} + 0.5 * signal * hist_l(i) + noise * N(0, I)
// where hist_l is the label histogram (fractions) of the exact hop-l frontier
// (zero for l = 0). Each prompt copy draws its own noise. Values are rounded
// to f32 so that a GKDF round trip is exact.
RawTeacherStore mock_teacher(const graph::TextAttributedGraph& g, const MockTeacherConfig& config);

}  // namespace gkd::teacher

#endif  // GKD_TEACHER_HPP_

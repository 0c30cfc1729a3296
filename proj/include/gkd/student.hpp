// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_STUDENT_HPP_
#define GKD_STUDENT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gkd/graph.hpp"
#include "gkd/ops.hpp"
#include "gkd/optim.hpp"

namespace gkd::student {

enum class Arch { kGcn, kSage, kGin };
enum class Aggregator { kMean, kSum, kMax };
enum class NormKind { kLayer, kBatch };

Arch parse_arch(const std::string& name);
Aggregator parse_aggregator(const std::string& name);
NormKind parse_norm(const std::string& name);
const char* arch_name(Arch arch);

struct StudentConfig {
  Arch arch = Arch::kGcn;
  std::size_t layers = 2;  // k
  std::size_t in_dim = 0;
  std::size_t hidden = 64;  // d_G, equal to the distillation dimension
  Aggregator aggregator = Aggregator::kMean;  // sage: mean|sum|max, gin: sum|mean
  NormKind norm = NormKind::kLayer;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Constant per-graph operators shared by every forward pass.
struct GraphOperators {
  explicit GraphOperators(const graph::TextAttributedGraph& g);

  std::size_t node_count = 0;
  ad::SparseMatrix gcn;            // D~^-1/2 (A + I) D~^-1/2, D~ = D + I
  ad::SparseMatrix neighbor_sum;   // A
  ad::SparseMatrix neighbor_mean;  // D^-1 A; empty rows for isolated nodes
  ad::NeighborLists neighbors;
  ad::Tensor features;             // [n, d_in]
};

struct StudentFeatures {
  std::vector<ad::Tensor> raw;         // h_l^G, l = 0..k, each [n, d_G]
  std::vector<ad::Tensor> normalized;  // h_l^S

  std::size_t max_hop() const { return normalized.size() - 1; }
};

class StudentGnn {
 public:
  explicit StudentGnn(const StudentConfig& config);

  const StudentConfig& config() const { return config_; }

  // h^(0) = x W_emb + b_emb
  ad::Tensor embed(const ad::Tensor& x) const;
  // Layer l in 1..k applied to all-node features.
  ad::Tensor message_pass(std::size_t layer, const ad::Tensor& h_prev, const GraphOperators& ops) const;
  ad::Tensor normalize(const ad::Tensor& h) const;

  // Full-graph propagation. Dropout is applied to layer inputs only when
  // `dropout_rng` is given.
  StudentFeatures forward(const GraphOperators& ops, Rng* dropout_rng = nullptr) const;

  std::vector<ad::Parameter*> parameters();
  ad::Parameter& parameter(const std::string& name);

 private:
  struct Layer {
    ad::Parameter weight;   // gcn [d, d], sage [2d, d], gin first affine [d, d]
    ad::Parameter bias;     // gin only
    ad::Parameter weight2;  // gin only
    ad::Parameter bias2;    // gin only
    ad::Parameter epsilon;  // gin only, [1]
  };

  StudentConfig config_;
  ad::Parameter embed_weight_;
  ad::Parameter embed_bias_;
  std::vector<Layer> layers_;
};

}  // namespace gkd::student

#endif  // GKD_STUDENT_HPP_

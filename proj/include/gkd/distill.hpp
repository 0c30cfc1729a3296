// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_DISTILL_HPP_
#define GKD_DISTILL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkd/ops.hpp"
#include "gkd/optim.hpp"

namespace gkd::distill {

enum class Similarity { kCosine, kDot };
// negatives_only sums the printed denominator (negatives only); the
// conventional variant adds the positive pair.
enum class Denominator { kNegativesOnly, kWithPositive };
enum class GammaMode { kTrainableSoftmax, kFixedUniform };
// kLastOnly distills hop k alone with gamma fixed at 1.
enum class HopSelection { kAll, kLastOnly };

Similarity parse_similarity(const std::string& name);
Denominator parse_denominator(const std::string& name);
GammaMode parse_gamma_mode(const std::string& name);

struct DistillConfig {
  double temperature = 0.5;
  std::size_t negatives = 8;
  Similarity similarity = Similarity::kCosine;
  Denominator denominator = Denominator::kNegativesOnly;
  GammaMode gamma_mode = GammaMode::kTrainableSoftmax;
  HopSelection hops = HopSelection::kAll;
  std::uint64_t seed = 0;

  void validate() const;
};

// Draws `n` batch positions uniformly with replacement among the entries whose
// label differs from labels[anchor]. Returns nullopt when none exist.
std::optional<std::vector<std::size_t>> sample_negatives(std::span<const int> labels, std::size_t anchor,
                                                         std::size_t n, Rng& rng);

// Per-anchor sampler seed; depends only on (seed, epoch, step, anchor node).
std::uint64_t negative_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t step, std::uint64_t anchor);

// Anchors that have at least one eligible negative, and their negatives
// (anchors.size() * n positions, grouped per anchor). Positions index the batch.
struct NegativePlan {
  std::vector<std::size_t> anchors;
  std::vector<std::size_t> negatives;
  std::size_t per_anchor = 0;
};

NegativePlan plan_negatives(std::span<const std::uint64_t> batch_nodes, std::span<const int> labels, std::size_t n,
                            std::uint64_t seed, std::uint64_t epoch, std::uint64_t step);

// Row-wise similarity of two [B, d] tensors -> [B].
ad::Tensor similarity(const ad::Tensor& a, const ad::Tensor& b, Similarity kind);

// anchors, positives: [A, d]; negatives: [A * N, d] grouped per anchor.
// Mean over anchors of
//   logsumexp(sim(a, neg) / t) - sim(a, pos) / t        (negatives_only)
//   logsumexp([sim(a, pos), sim(a, neg)] / t) - sim(a, pos) / t   (with_positive)
ad::Tensor infonce_layer(const ad::Tensor& anchors, const ad::Tensor& positives, const ad::Tensor& negatives,
                         const DistillConfig& config);

// gamma over hops 0..k. Logits start at zero (uniform gamma).
class LayerWeights {
 public:
  LayerWeights(std::size_t max_hop, GammaMode mode);

  std::size_t size() const { return size_; }
  GammaMode mode() const { return mode_; }
  // Differentiable [k + 1] tensor.
  ad::Tensor gamma() const;
  std::vector<double> values() const;
  ad::Parameter& logits() { return logits_; }
  // Empty in fixed_uniform mode.
  std::vector<ad::Parameter*> parameters();

 private:
  std::size_t size_;
  GammaMode mode_;
  ad::Parameter logits_;
};

struct DistillResult {
  ad::Tensor total;                // scalar; constant zero when no anchor survives
  std::vector<std::size_t> hops;   // selected hops
  std::vector<double> per_layer;   // L_D^l values, aligned with `hops` (0 without anchors)
};

// student[l], teacher[l]: [B, d_k] batch rows for hop l = 0..k. Entries not
// selected by config.hops may be undefined tensors.
DistillResult distill_loss(const std::vector<ad::Tensor>& student, const std::vector<ad::Tensor>& teacher,
                           const NegativePlan& plan, const LayerWeights& weights, const DistillConfig& config);

// Hops that enter L_D for a model of depth k.
std::vector<std::size_t> selected_hops(std::size_t max_hop, HopSelection hops);

}  // namespace gkd::distill

#endif  // GKD_DISTILL_HPP_

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/distill.hpp"

#include "gkd/error.hpp"
#include "gkd/rng.hpp"

namespace gkd::distill {

Similarity parse_similarity(const std::string& name) {
  if (name == "cosine") return Similarity::kCosine;
  if (name == "dot") return Similarity::kDot;
  throw ValidationError("unknown similarity '" + name + "' (expected cosine or dot)");
}

Denominator parse_denominator(const std::string& name) {
  if (name == "negatives_only") return Denominator::kNegativesOnly;
  if (name == "with_positive") return Denominator::kWithPositive;
  throw ValidationError("unknown denominator mode '" + name + "' (expected negatives_only or with_positive)");
}

GammaMode parse_gamma_mode(const std::string& name) {
  if (name == "trainable_softmax") return GammaMode::kTrainableSoftmax;
  if (name == "fixed_uniform") return GammaMode::kFixedUniform;
  throw ValidationError("unknown gamma mode '" + name + "' (expected trainable_softmax or fixed_uniform)");
}

void DistillConfig::validate() const {
  if (!(temperature > 0.0)) throw ValidationError("distill temperature must be positive");
  if (negatives < 1) throw ValidationError("distill negatives must be at least 1");
}

std::optional<std::vector<std::size_t>> sample_negatives(std::span<const int> labels, std::size_t anchor,
                                                         std::size_t n, Rng& rng) {
  if (anchor >= labels.size()) throw ContractError("sample_negatives: anchor outside the batch");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != labels[anchor]) eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;
  std::vector<std::size_t> out(n);
  for (auto& o : out) o = eligible[rng.index(eligible.size())];
  return out;
}

std::uint64_t negative_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t step, std::uint64_t anchor) {
  return derive_seed(seed, {stream::kNegatives, epoch, step, anchor});
}

NegativePlan plan_negatives(std::span<const std::uint64_t> batch_nodes, std::span<const int> labels, std::size_t n,
                            std::uint64_t seed, std::uint64_t epoch, std::uint64_t step) {
  if (batch_nodes.size() != labels.size()) throw ShapeError("plan_negatives: nodes and labels differ in length");
  NegativePlan plan;
  plan.per_anchor = n;
  for (std::size_t a = 0; a < batch_nodes.size(); ++a) {
    Rng rng(negative_seed(seed, epoch, step, batch_nodes[a]));
    auto drawn = sample_negatives(labels, a, n, rng);
    if (!drawn) continue;
    plan.anchors.push_back(a);
    plan.negatives.insert(plan.negatives.end(), drawn->begin(), drawn->end());
  }
  return plan;
}

ad::Tensor similarity(const ad::Tensor& a, const ad::Tensor& b, Similarity kind) {
  return kind == Similarity::kCosine ? ad::cosine_similarity(a, b) : ad::dot_rows(a, b);
}

ad::Tensor infonce_layer(const ad::Tensor& anchors, const ad::Tensor& positives, const ad::Tensor& negatives,
                         const DistillConfig& config) {
  if (anchors.dim() != 2 || anchors.shape() != positives.shape()) {
    throw ShapeError("infonce_layer: anchors " + ad::shape_str(anchors.shape()) + " vs positives " +
                     ad::shape_str(positives.shape()));
  }
  const std::size_t a = anchors.size(0);
  if (a == 0) throw ContractError("infonce_layer: no anchors");
  if (negatives.dim() != 2 || negatives.cols() != anchors.cols() || negatives.size(0) % a != 0 ||
      negatives.size(0) == 0) {
    throw ShapeError("infonce_layer: negatives " + ad::shape_str(negatives.shape()) + " do not group over " +
                     std::to_string(a) + " anchors");
  }
  const std::size_t n = negatives.size(0) / a;
  const double inv_t = 1.0 / config.temperature;

  std::vector<std::size_t> repeat(a * n);
  for (std::size_t i = 0; i < repeat.size(); ++i) repeat[i] = i / n;
  ad::Tensor anchor_rep = ad::embedding_lookup(anchors, repeat);

  ad::Tensor pos = ad::scale(similarity(anchors, positives, config.similarity), inv_t);                    // [A]
  ad::Tensor neg = ad::reshape(ad::scale(similarity(anchor_rep, negatives, config.similarity), inv_t), {a, n});
  ad::Tensor denom_terms =
      config.denominator == Denominator::kWithPositive ? ad::concat({ad::reshape(pos, {a, 1}), neg}) : neg;
  ad::Tensor per_anchor = ad::sub(ad::logsumexp(denom_terms), pos);
  return ad::mean(per_anchor);
}

LayerWeights::LayerWeights(std::size_t max_hop, GammaMode mode) : size_(max_hop + 1), mode_(mode) {
  logits_ = ad::make_zeros("distill.gamma_logits", {size_});
}

ad::Tensor LayerWeights::gamma() const {
  if (mode_ == GammaMode::kFixedUniform) {
    return ad::Tensor::full({size_}, 1.0 / static_cast<double>(size_));
  }
  return ad::softmax(logits_.tensor);
}

std::vector<double> LayerWeights::values() const {
  ad::NoGradGuard guard;
  return gamma().to_vector();
}

std::vector<ad::Parameter*> LayerWeights::parameters() {
  if (mode_ == GammaMode::kFixedUniform) return {};
  return {&logits_};
}

std::vector<std::size_t> selected_hops(std::size_t max_hop, HopSelection hops) {
  if (hops == HopSelection::kLastOnly) return {max_hop};
  std::vector<std::size_t> out(max_hop + 1);
  for (std::size_t l = 0; l <= max_hop; ++l) out[l] = l;
  return out;
}

DistillResult distill_loss(const std::vector<ad::Tensor>& student, const std::vector<ad::Tensor>& teacher,
                           const NegativePlan& plan, const LayerWeights& weights, const DistillConfig& config) {
  if (student.size() != teacher.size() || student.empty()) {
    throw ShapeError("distill_loss: student and teacher must cover the same hops");
  }
  const std::size_t k = student.size() - 1;
  if (weights.size() != k + 1) throw ShapeError("distill_loss: layer weights do not match hop count");
  DistillResult result;
  result.hops = selected_hops(k, config.hops);
  if (plan.anchors.empty()) {
    result.total = ad::Tensor::scalar(0.0);
    result.per_layer.assign(result.hops.size(), 0.0);
    return result;
  }
  ad::Tensor gamma;
  if (config.hops == HopSelection::kAll) gamma = weights.gamma();

  ad::Tensor total;
  for (std::size_t l : result.hops) {
    if (!student[l].defined() || !teacher[l].defined()) {
      throw ContractError("distill_loss: missing features for hop " + std::to_string(l));
    }
    ad::Tensor anchors = ad::embedding_lookup(student[l], plan.anchors);
    ad::Tensor positives = ad::embedding_lookup(teacher[l], plan.anchors);
    ad::Tensor negatives = ad::embedding_lookup(teacher[l], plan.negatives);
    ad::Tensor layer = infonce_layer(anchors, positives, negatives, config);
    result.per_layer.push_back(layer.item());
    if (config.hops == HopSelection::kAll) {
      const std::size_t idx[] = {l};
      layer = ad::mul(layer, ad::embedding_lookup(gamma, idx));
    }
    total = total.defined() ? ad::add(total, layer) : layer;
  }
  result.total = total;
  return result;
}

}  // namespace gkd::distill

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/student.hpp"

#include <cmath>

#include "gkd/error.hpp"
#include "gkd/rng.hpp"

namespace gkd::student {

Arch parse_arch(const std::string& name) {
  if (name == "gcn") return Arch::kGcn;
  if (name == "sage") return Arch::kSage;
  if (name == "gin") return Arch::kGin;
  throw ValidationError("unknown student architecture '" + name + "' (expected gcn, sage or gin)");
}

Aggregator parse_aggregator(const std::string& name) {
  if (name == "mean") return Aggregator::kMean;
  if (name == "sum") return Aggregator::kSum;
  if (name == "max") return Aggregator::kMax;
  throw ValidationError("unknown aggregator '" + name + "' (expected mean, sum or max)");
}

NormKind parse_norm(const std::string& name) {
  if (name == "layer") return NormKind::kLayer;
  if (name == "batch") return NormKind::kBatch;
  throw ValidationError("unknown normalization '" + name + "' (expected layer or batch)");
}

const char* arch_name(Arch arch) {
  switch (arch) {
    case Arch::kGcn: return "gcn";
    case Arch::kSage: return "sage";
    case Arch::kGin: return "gin";
  }
  return "?";
}

void StudentConfig::validate() const {
  if (in_dim == 0) throw ValidationError("student input dimension must be positive");
  if (hidden == 0) throw ValidationError("student hidden dimension must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("student dropout must lie in [0, 1)");
  if (arch == Arch::kGin && aggregator == Aggregator::kMax) {
    throw ValidationError("gin supports sum or mean aggregation");
  }
}

GraphOperators::GraphOperators(const graph::TextAttributedGraph& g) : node_count(g.node_count()) {
  const std::size_t n = g.node_count();
  std::vector<ad::SparseMatrix::Entry> gcn_entries, sum_entries, mean_entries;
  neighbors.resize(n);
  for (graph::NodeId i = 0; i < n; ++i) {
    const double di = static_cast<double>(g.degree(i)) + 1.0;
    gcn_entries.push_back({i, i, 1.0 / di});
    for (graph::NodeId j : g.neighbors(i)) {
      const double dj = static_cast<double>(g.degree(j)) + 1.0;
      gcn_entries.push_back({i, j, 1.0 / std::sqrt(di * dj)});
      sum_entries.push_back({i, j, 1.0});
      mean_entries.push_back({i, j, 1.0 / static_cast<double>(g.degree(i))});
      neighbors[i].push_back(j);
    }
  }
  gcn = ad::SparseMatrix(n, n, std::move(gcn_entries));
  neighbor_sum = ad::SparseMatrix(n, n, std::move(sum_entries));
  neighbor_mean = ad::SparseMatrix(n, n, std::move(mean_entries));
  features = ad::Tensor::from({n, g.feature_dim()}, std::vector<double>(g.features().begin(), g.features().end()));
}

StudentGnn::StudentGnn(const StudentConfig& config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, {stream::kStudentInit}));
  const std::size_t d = config_.hidden;
  embed_weight_ = ad::make_weight("student.embed.weight", config_.in_dim, d, rng);
  embed_bias_ = ad::make_zeros("student.embed.bias", {d});
  layers_.resize(config_.layers);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string prefix = "student.layer." + std::to_string(l + 1) + ".";
    Layer& layer = layers_[l];
    switch (config_.arch) {
      case Arch::kGcn:
        layer.weight = ad::make_weight(prefix + "weight", d, d, rng);
        break;
      case Arch::kSage:
        layer.weight = ad::make_weight(prefix + "weight", 2 * d, d, rng);
        break;
      case Arch::kGin:
        layer.weight = ad::make_weight(prefix + "weight", d, d, rng);
        layer.bias = ad::make_zeros(prefix + "bias", {d});
        layer.weight2 = ad::make_weight(prefix + "weight2", d, d, rng);
        layer.bias2 = ad::make_zeros(prefix + "bias2", {d});
        layer.epsilon = ad::make_zeros(prefix + "epsilon", {1});
        break;
    }
  }
}

ad::Tensor StudentGnn::embed(const ad::Tensor& x) const {
  if (x.dim() != 2 || x.cols() != config_.in_dim) {
    throw ShapeError("embed: expected [n, " + std::to_string(config_.in_dim) + "] features, got " +
                     ad::shape_str(x.shape()));
  }
  return ad::add(ad::matmul(x, embed_weight_.tensor), embed_bias_.tensor);
}

ad::Tensor StudentGnn::message_pass(std::size_t layer, const ad::Tensor& h_prev, const GraphOperators& ops) const {
  if (layer < 1 || layer > layers_.size()) {
    throw ContractError("message_pass: layer " + std::to_string(layer) + " outside 1.." +
                        std::to_string(layers_.size()));
  }
  const Layer& p = layers_[layer - 1];
  switch (config_.arch) {
    case Arch::kGcn:
      return ad::relu(ad::matmul(ad::spmm(ops.gcn, h_prev), p.weight.tensor));
    case Arch::kSage: {
      ad::Tensor agg;
      switch (config_.aggregator) {
        case Aggregator::kMean: agg = ad::spmm(ops.neighbor_mean, h_prev); break;
        case Aggregator::kSum: agg = ad::spmm(ops.neighbor_sum, h_prev); break;
        case Aggregator::kMax: agg = ad::neighbor_max(ops.neighbors, h_prev); break;
      }
      return ad::relu(ad::matmul(ad::concat({h_prev, agg}), p.weight.tensor));
    }
    case Arch::kGin: {
      const ad::SparseMatrix& a =
          config_.aggregator == Aggregator::kMean ? ops.neighbor_mean : ops.neighbor_sum;
      ad::Tensor self = ad::add(h_prev, ad::mul(h_prev, p.epsilon.tensor));
      ad::Tensor z = ad::add(self, ad::spmm(a, h_prev));
      z = ad::relu(ad::add(ad::matmul(z, p.weight.tensor), p.bias.tensor));
      z = ad::add(ad::matmul(z, p.weight2.tensor), p.bias2.tensor);
      return ad::relu(z);
    }
  }
  throw ContractError("message_pass: unknown architecture");
}

ad::Tensor StudentGnn::normalize(const ad::Tensor& h) const {
  return config_.norm == NormKind::kLayer ? ad::layer_norm(h) : ad::batch_norm(h);
}

StudentFeatures StudentGnn::forward(const GraphOperators& ops, Rng* dropout_rng) const {
  StudentFeatures out;
  ad::Tensor h = embed(ops.features);
  out.raw.push_back(h);
  out.normalized.push_back(normalize(h));
  for (std::size_t l = 1; l <= layers_.size(); ++l) {
    ad::Tensor input = h;
    if (dropout_rng != nullptr && config_.dropout > 0.0) input = ad::dropout(input, config_.dropout, *dropout_rng);
    h = message_pass(l, input, ops);
    out.raw.push_back(h);
    out.normalized.push_back(normalize(h));
  }
  return out;
}

std::vector<ad::Parameter*> StudentGnn::parameters() {
  std::vector<ad::Parameter*> out{&embed_weight_, &embed_bias_};
  for (Layer& layer : layers_) {
    out.push_back(&layer.weight);
    if (config_.arch == Arch::kGin) {
      out.push_back(&layer.bias);
      out.push_back(&layer.weight2);
      out.push_back(&layer.bias2);
      out.push_back(&layer.epsilon);
    }
  }
  return out;
}

ad::Parameter& StudentGnn::parameter(const std::string& name) {
  for (ad::Parameter* p : parameters()) {
    if (p->name == name) return *p;
  }
  throw LookupError("student has no parameter '" + name + "'");
}

}  // namespace gkd::student

// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "../common/bytes.hpp"
#include "gkd/error.hpp"

namespace gkd::teacher {

void RawTeacherStore::add(std::uint64_t node, std::uint16_t hop, std::uint16_t prompt,
                          std::vector<double> values) {
  if (dim_ == 0) throw ContractError("teacher store dimension must be positive");
  if (values.size() != dim_) {
    throw ShapeError("teacher vector has dimension " + std::to_string(values.size()) + ", expected " +
                     std::to_string(dim_));
  }
  auto& slot = entries_[{node, hop}];
  if (prompt != slot.size()) {
    throw FormatError("prompt indices for node " + std::to_string(node) + " hop " + std::to_string(hop) +
                      " must be contiguous from 0 (got " + std::to_string(prompt) + ")");
  }
  slot.push_back(std::move(values));
  ++records_;
}

std::size_t RawTeacherStore::max_hop() const {
  std::size_t h = 0;
  for (const auto& [key, v] : entries_) h = std::max<std::size_t>(h, key.second);
  return h;
}

std::size_t RawTeacherStore::theta_max() const {
  std::size_t t = 0;
  for (const auto& [key, v] : entries_) t = std::max(t, v.size());
  return t;
}

std::vector<std::uint64_t> RawTeacherStore::nodes() const {
  std::vector<std::uint64_t> out;
  for (const auto& [key, v] : entries_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

bool RawTeacherStore::contains(std::uint64_t node, std::size_t hop) const {
  return hop <= 0xffff && entries_.count({node, static_cast<std::uint16_t>(hop)}) > 0;
}

const std::vector<std::vector<double>>& RawTeacherStore::prompts(std::uint64_t node, std::size_t hop) const {
  auto it = hop <= 0xffff ? entries_.find({node, static_cast<std::uint16_t>(hop)}) : entries_.end();
  if (it == entries_.end()) {
    throw LookupError("no teacher features for node " + std::to_string(node) + " hop " + std::to_string(hop));
  }
  return it->second;
}

void RawTeacherStore::validate() const {
  const std::size_t k = max_hop();
  for (std::uint64_t node : nodes()) {
    for (std::size_t h = 0; h <= k; ++h) {
      if (!contains(node, h)) {
        throw FormatError("teacher features for node " + std::to_string(node) + " miss hop " +
                          std::to_string(h) + " (store covers hops 0.." + std::to_string(k) + ")");
      }
    }
  }
}

namespace {

using detail::get_le;
using detail::put_le;

GkdfHeader parse_header(const unsigned char* p, const std::filesystem::path& path) {
  if (std::memcmp(p, "GKDF", 4) != 0) throw FormatError(path.string() + ": bad magic at offset 0");
  GkdfHeader h;
  h.version = get_le<std::uint32_t>(p + 4);
  if (h.version != kGkdfVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(h.version) + " at offset 4");
  }
  h.records = get_le<std::uint64_t>(p + 8);
  h.dim = get_le<std::uint32_t>(p + 16);
  h.dtype = p[20];
  if (h.dim == 0) throw FormatError(path.string() + ": zero feature dimension at offset 16");
  if (h.dtype != 0) {
    throw FormatError(path.string() + ": unsupported dtype " + std::to_string(h.dtype) + " at offset 20");
  }
  return h;
}

}  // namespace

GkdfHeader read_gkdf_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open teacher feature file " + path.string());
  std::array<unsigned char, kGkdfHeaderBytes> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw FormatError(path.string() + ": truncated header at offset " + std::to_string(in.gcount()));
  }
  return parse_header(buf.data(), path);
}

RawTeacherStore load_teacher_features(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_all(path, "teacher feature file");
  if (bytes.size() < kGkdfHeaderBytes) {
    throw FormatError(path.string() + ": truncated header at offset " + std::to_string(bytes.size()));
  }
  const GkdfHeader h = parse_header(bytes.data(), path);
  const std::size_t record_bytes = 12 + 4 * static_cast<std::size_t>(h.dim);
  RawTeacherStore store(h.dim);
  std::size_t offset = kGkdfHeaderBytes;
  bool have_prev = false;
  std::tuple<std::uint64_t, std::uint16_t, std::uint16_t> prev{};
  for (std::uint64_t r = 0; r < h.records; ++r) {
    if (bytes.size() - offset < record_bytes) {
      throw FormatError(path.string() + ": truncated record " + std::to_string(r) + " at offset " +
                        std::to_string(offset) + " (" + std::to_string(bytes.size() - offset) + " of " +
                        std::to_string(record_bytes) + " bytes)");
    }
    const unsigned char* p = bytes.data() + offset;
    const auto node = get_le<std::uint64_t>(p);
    const auto hop = get_le<std::uint16_t>(p + 8);
    const auto prompt = get_le<std::uint16_t>(p + 10);
    const auto key = std::make_tuple(node, hop, prompt);
    if (have_prev && !(prev < key)) {
      throw FormatError(path.string() + ": records not sorted at offset " + std::to_string(offset));
    }
    std::vector<double> values(h.dim);
    for (std::size_t j = 0; j < h.dim; ++j) {
      const auto bits = get_le<std::uint32_t>(p + 12 + 4 * j);
      const float f = std::bit_cast<float>(bits);
      if (!std::isfinite(f)) {
        throw FormatError(path.string() + ": non-finite value at offset " + std::to_string(offset + 12 + 4 * j));
      }
      values[j] = static_cast<double>(f);
    }
    try {
      store.add(node, hop, prompt, std::move(values));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what() + " at offset " + std::to_string(offset));
    }
    prev = key;
    have_prev = true;
    offset += record_bytes;
  }
  if (offset != bytes.size()) {
    throw FormatError(path.string() + ": " + std::to_string(bytes.size() - offset) +
                      " trailing bytes at offset " + std::to_string(offset));
  }
  store.validate();
  return store;
}

void write_teacher_features(const RawTeacherStore& store, const std::filesystem::path& path) {
  if (store.dim() == 0 || store.dim() > 0xffffffffULL) throw ContractError("teacher store has invalid dimension");
  std::string buf;
  buf.reserve(kGkdfHeaderBytes + store.record_count() * (12 + 4 * store.dim()));
  buf.append("GKDF", 4);
  put_le<std::uint32_t>(buf, kGkdfVersion);
  put_le<std::uint64_t>(buf, store.record_count());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(store.dim()));
  buf.push_back(0);
  buf.append(3, '\0');
  for (const auto& [key, prompts] : store.entries()) {
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      put_le<std::uint64_t>(buf, key.first);
      put_le<std::uint16_t>(buf, key.second);
      put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(p));
      for (double v : prompts[p]) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  detail::write_atomic(path, buf);
}

std::vector<double> pool_prompts(const RawTeacherStore& store, std::uint64_t node, std::size_t hop) {
  const auto& prompts = store.prompts(node, hop);
  std::vector<double> out(store.dim(), 0.0);
  for (const auto& v : prompts) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[j];
  }
  const double inv = 1.0 / static_cast<double>(prompts.size());
  for (double& x : out) x *= inv;
  return out;
}

Activation parse_activation(const std::string& name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ValidationError("unknown activation '" + name + "' (expected gelu, relu, tanh or identity)");
}

KnowledgeAdapter::KnowledgeAdapter(std::size_t max_hop, std::size_t teacher_dim, std::size_t distill_dim,
                                   Activation activation, Rng& rng)
    : teacher_dim_(teacher_dim), distill_dim_(distill_dim), activation_(activation) {
  if (teacher_dim == 0 || distill_dim == 0) throw ValidationError("adapter dimensions must be positive");
  filter_weights_.reserve(max_hop + 1);
  filter_biases_.reserve(max_hop + 1);
  for (std::size_t l = 0; l <= max_hop; ++l) {
    filter_weights_.push_back(
        ad::make_weight("teacher.filter." + std::to_string(l) + ".weight", teacher_dim, teacher_dim, rng));
    filter_biases_.push_back(ad::make_zeros("teacher.filter." + std::to_string(l) + ".bias", {teacher_dim}));
  }
  projector_weight_ = ad::make_weight("teacher.projector.weight", teacher_dim, distill_dim, rng);
  projector_bias_ = ad::make_zeros("teacher.projector.bias", {distill_dim});
}

ad::Tensor KnowledgeAdapter::filter(std::size_t hop, const ad::Tensor& h) const {
  if (hop > max_hop()) throw ContractError("knowledge filter: hop " + std::to_string(hop) + " beyond k");
  if (h.dim() != 2 || h.cols() != teacher_dim_) {
    throw ContractError("knowledge filter: expected [B, " + std::to_string(teacher_dim_) + "], got " +
                        ad::shape_str(h.shape()));
  }
  ad::Tensor z = ad::add(ad::matmul(h, filter_weights_[hop].tensor), filter_biases_[hop].tensor);
  switch (activation_) {
    case Activation::kGelu: z = ad::gelu(z); break;
    case Activation::kRelu: z = ad::relu(z); break;
    case Activation::kTanh: z = ad::tanh(z); break;
    case Activation::kIdentity: break;
  }
  return ad::layer_norm(z);
}

ad::Tensor KnowledgeAdapter::project(const ad::Tensor& h_hat) const {
  if (h_hat.dim() != 2 || h_hat.cols() != teacher_dim_) {
    throw ContractError("projector: expected [B, " + std::to_string(teacher_dim_) + "], got " +
                        ad::shape_str(h_hat.shape()));
  }
  return ad::add(ad::matmul(h_hat, projector_weight_.tensor), projector_bias_.tensor);
}

ad::Tensor KnowledgeAdapter::knowledge(std::size_t hop, const ad::Tensor& pooled) const {
  return project(filter(hop, pooled));
}

std::vector<ad::Parameter*> KnowledgeAdapter::parameters() {
  std::vector<ad::Parameter*> out;
  for (std::size_t l = 0; l < filter_weights_.size(); ++l) {
    out.push_back(&filter_weights_[l]);
    out.push_back(&filter_biases_[l]);
  }
  out.push_back(&projector_weight_);
  out.push_back(&projector_bias_);
  return out;
}

std::vector<ad::Parameter*> KnowledgeAdapter::parameters_for_hops(std::span<const std::size_t> hops) {
  std::vector<ad::Parameter*> out;
  for (std::size_t l : hops) {
    out.push_back(&filter_weights_.at(l));
    out.push_back(&filter_biases_.at(l));
  }
  out.push_back(&projector_weight_);
  out.push_back(&projector_bias_);
  return out;
}

std::size_t PooledTeacherFeatures::row(NodeId v) const {
  if (v >= row_of.size() || row_of[v] == npos) {
    throw LookupError("node " + std::to_string(v) + " has no pooled teacher features");
  }
  return row_of[v];
}

PooledTeacherFeatures pool_teacher_features(const RawTeacherStore& store, std::span<const NodeId> nodes,
                                            std::size_t max_hop, std::size_t node_count) {
  if (nodes.empty()) throw ContractError("pool_teacher_features: no nodes");
  PooledTeacherFeatures out;
  out.nodes.assign(nodes.begin(), nodes.end());
  out.row_of.assign(node_count, PooledTeacherFeatures::npos);
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    if (nodes[r] >= node_count) throw ContractError("pool_teacher_features: node out of range");
    out.row_of[nodes[r]] = r;
  }
  const std::size_t d = store.dim();
  for (std::size_t hop = 0; hop <= max_hop; ++hop) {
    std::vector<double> values;
    values.reserve(nodes.size() * d);
    for (NodeId v : nodes) {
      const auto pooled = pool_prompts(store, v, hop);
      values.insert(values.end(), pooled.begin(), pooled.end());
    }
    out.per_hop.push_back(ad::Tensor::from({nodes.size(), d}, std::move(values)));
  }
  return out;
}

TeacherKnowledge build_teacher_knowledge(const RawTeacherStore& store, std::span<const NodeId> nodes,
                                         const KnowledgeAdapter& adapter) {
  if (store.dim() != adapter.teacher_dim()) {
    throw ShapeError("teacher store dimension " + std::to_string(store.dim()) + " does not match adapter " +
                     std::to_string(adapter.teacher_dim()));
  }
  std::size_t node_count = 0;
  for (NodeId v : nodes) node_count = std::max(node_count, v + 1);
  const auto pooled = pool_teacher_features(store, nodes, adapter.max_hop(), node_count);
  TeacherKnowledge out;
  out.nodes.assign(nodes.begin(), nodes.end());
  for (std::size_t hop = 0; hop <= adapter.max_hop(); ++hop) {
    out.per_hop.push_back(adapter.knowledge(hop, pooled.per_hop[hop]));
  }
  return out;
}

RawTeacherStore mock_teacher(const graph::TextAttributedGraph& g, const MockTeacherConfig& config) {
  if (config.signal < 0.0) throw ValidationError("mock teacher: signal must be non-negative");
  if (config.noise < 0.0) throw ValidationError("mock teacher: noise must be non-negative");
  if (config.theta < 1 || config.theta > 0xffff) throw ValidationError("mock teacher: theta out of range");
  if (config.k > 0xfffe) throw ValidationError("mock teacher: k out of range");
  if (config.dim < g.num_classes()) {
    throw ValidationError("mock teacher: dim " + std::to_string(config.dim) + " is smaller than the class count " +
                          std::to_string(g.num_classes()));
  }
  const std::size_t c = g.num_classes();
  RawTeacherStore store(config.dim);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto sub = graph::khop_subgraph(g, v, config.k);
    for (std::size_t hop = 0; hop <= config.k; ++hop) {
      std::vector<double> base(config.dim, 0.0);
      base[static_cast<std::size_t>(g.label(v))] += config.signal;
      const auto& frontier = sub.frontiers[hop];
      if (hop >= 1 && !frontier.empty()) {
        std::vector<double> hist(c, 0.0);
        for (NodeId u : frontier) hist[static_cast<std::size_t>(g.label(u))] += 1.0;
        for (std::size_t k = 0; k < c; ++k) {
          base[k] += 0.5 * config.signal * hist[k] / static_cast<double>(frontier.size());
        }
      }
      for (std::size_t p = 0; p < config.theta; ++p) {
        Rng rng(derive_seed(config.seed, {stream::kMockTeacher, v, hop, p}));
        std::vector<double> values(config.dim);
        for (std::size_t j = 0; j < config.dim; ++j) {
          values[j] = static_cast<double>(static_cast<float>(base[j] + config.noise * rng.normal()));
        }
        store.add(v, static_cast<std::uint16_t>(hop), static_cast<std::uint16_t>(p), std::move(values));
      }
    }
  }
  return store;
}

}  // namespace gkd::teacher

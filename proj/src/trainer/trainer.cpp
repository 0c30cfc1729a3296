// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gkd/error.hpp"
#include "gkd/rng.hpp"

namespace gkd::train {

LossWeightMode parse_loss_weight_mode(const std::string& name) {
  if (name == "fixed") return LossWeightMode::kFixed;
  if (name == "trainable_softmax_pair") return LossWeightMode::kTrainableSoftmaxPair;
  throw ValidationError("unknown loss weight mode '" + name + "' (expected fixed or trainable_softmax_pair)");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("train.lr must be a finite value >= 0");
  if (batch == 0) throw ValidationError("train.batch must be positive");
  if (epochs == 0) throw ValidationError("train.epochs must be positive");
  if (eval_every == 0) throw ValidationError("train.eval_every must be positive");
  if (weight_decay < 0.0) throw ValidationError("train.weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("train.betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("train.eps must be positive");
  if (weight_mode == LossWeightMode::kFixed && (alpha < 0.0 || beta < 0.0)) {
    throw ValidationError("train.alpha and train.beta must be >= 0");
  }
  distill.validate();
}

ad::Tensor classify(const ad::Tensor& h, const ad::Tensor& weight, const ad::Tensor& bias) {
  if (h.dim() != 2 || h.cols() != weight.size(0)) {
    throw ShapeError("classify: features " + ad::shape_str(h.shape()) + " do not match classifier " +
                     ad::shape_str(weight.shape()));
  }
  return ad::softmax(ad::add(ad::matmul(h, weight), bias));
}

ad::Tensor cross_entropy(const ad::Tensor& probs, std::span<const int> labels) {
  if (probs.dim() != 2 || probs.size(0) != labels.size()) {
    throw ShapeError("cross_entropy: " + ad::shape_str(probs.shape()) + " probabilities for " +
                     std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols()) {
      throw ContractError("cross_entropy: label " + std::to_string(labels[i]) + " out of range");
    }
    index[i] = static_cast<std::size_t>(labels[i]);
  }
  return ad::scale(ad::mean(ad::log(ad::clamp_min(ad::pick(probs, index), 1e-12))), -1.0);
}

EvalReport score(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes) {
  if (truth.size() != predicted.size()) throw ShapeError("score: truth and predictions differ in length");
  if (truth.empty()) throw ContractError("score: nothing to evaluate");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes ||
        static_cast<std::size_t>(p) >= num_classes) {
      throw ContractError("score: label outside [0, " + std::to_string(num_classes) + ")");
    }
    if (t == p) {
      ++correct;
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  EvalReport r;
  r.count = truth.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  r.per_class.resize(num_classes);
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    ClassReport& cr = r.per_class[c];
    cr.support = tp[c] + fn[c];
    cr.precision = tp[c] + fp[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    cr.recall = cr.support == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(cr.support);
    cr.f1 = cr.precision + cr.recall == 0.0 ? 0.0 : 2.0 * cr.precision * cr.recall / (cr.precision + cr.recall);
    f1_sum += cr.f1;
  }
  r.macro_f1 = num_classes == 0 ? 0.0 : f1_sum / static_cast<double>(num_classes);
  return r;
}

// ---- model ----------------------------------------------------------------

GkdModel::GkdModel(const student::StudentConfig& student_config, std::size_t num_classes,
                   const TrainConfig& config, std::size_t teacher_dim)
    : config_(config),
      student_(student_config),
      num_classes_(num_classes),
      layer_weights_(student_config.layers, config.distill.gamma_mode) {
  if (num_classes == 0) throw ValidationError("model needs at least one class");
  Rng cls_rng(derive_seed(config.seed, {stream::kClassifierInit}));
  classifier_weight_ = ad::make_weight("classifier.weight", student_config.hidden, num_classes, cls_rng);
  classifier_bias_ = ad::make_zeros("classifier.bias", {num_classes});
  if (teacher_dim > 0) {
    Rng teacher_rng(derive_seed(config.seed, {stream::kTeacherInit}));
    adapter_.emplace(student_config.layers, teacher_dim, student_config.hidden, config.filter_activation,
                     teacher_rng);
  }
  loss_logits_ = ad::make_zeros("train.loss_logits", {2});
}

ad::Tensor GkdModel::classify(const ad::Tensor& h) const {
  return train::classify(h, classifier_weight_.tensor, classifier_bias_.tensor);
}

ad::Tensor GkdModel::loss_weights() const {
  if (!distilling()) {
    const double a = config_.weight_mode == LossWeightMode::kFixed ? config_.alpha : 1.0;
    return ad::Tensor::from({2}, {a, 0.0});
  }
  if (config_.weight_mode == LossWeightMode::kTrainableSoftmaxPair) return ad::softmax(loss_logits_.tensor);
  return ad::Tensor::from({2}, {config_.alpha, config_.beta});
}

std::vector<double> GkdModel::loss_weight_values() const {
  ad::NoGradGuard guard;
  return loss_weights().to_vector();
}

std::vector<double> GkdModel::gamma_values() const {
  std::vector<double> out(max_hop() + 1, 0.0);
  if (!distilling()) return out;
  if (config_.distill.hops == distill::HopSelection::kLastOnly) {
    out.back() = 1.0;
    return out;
  }
  return layer_weights_.values();
}

std::vector<int> GkdModel::predict(const student::GraphOperators& ops) const {
  ad::NoGradGuard guard;
  const student::StudentFeatures feats = student_.forward(ops);
  const ad::Tensor logits =
      ad::add(ad::matmul(feats.normalized.back(), classifier_weight_.tensor), classifier_bias_.tensor);
  std::vector<int> out(logits.size(0));
  const std::size_t c = logits.cols();
  auto data = logits.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = data.subspan(i * c, c);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<ad::Parameter*> GkdModel::trainable() {
  std::vector<ad::Parameter*> out = student_.parameters();
  out.push_back(&classifier_weight_);
  out.push_back(&classifier_bias_);
  if (!distilling()) return out;
  const auto hops = distill::selected_hops(max_hop(), config_.distill.hops);
  for (ad::Parameter* p : adapter_->parameters_for_hops(hops)) out.push_back(p);
  if (config_.distill.hops == distill::HopSelection::kAll) {
    for (ad::Parameter* p : layer_weights_.parameters()) out.push_back(p);
  }
  if (config_.weight_mode == LossWeightMode::kTrainableSoftmaxPair) out.push_back(&loss_logits_);
  return out;
}

std::vector<ad::Parameter*> GkdModel::parameters() {
  std::vector<ad::Parameter*> out = student_.parameters();
  out.push_back(&classifier_weight_);
  out.push_back(&classifier_bias_);
  if (!distilling()) return out;
  for (ad::Parameter* p : adapter_->parameters()) out.push_back(p);
  out.push_back(&layer_weights_.logits());
  out.push_back(&loss_logits_);
  return out;
}

// ---- batching -------------------------------------------------------------

std::vector<std::vector<graph::NodeId>> stratified_batches(std::span<const graph::NodeId> nodes,
                                                           std::span<const int> labels, std::size_t batch,
                                                           std::uint64_t seed, std::uint64_t epoch) {
  if (batch == 0) throw ContractError("stratified_batches: batch size must be positive");
  std::vector<int> classes;
  for (graph::NodeId v : nodes) classes.push_back(labels[v]);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  Rng rng(derive_seed(seed, {stream::kBatches, epoch}));
  std::vector<std::pair<double, graph::NodeId>> keyed;
  keyed.reserve(nodes.size());
  for (int c : classes) {
    std::vector<graph::NodeId> members;
    for (graph::NodeId v : nodes) {
      if (labels[v] == c) members.push_back(v);
    }
    rng.shuffle(members);
    const double size = static_cast<double>(members.size());
    for (std::size_t j = 0; j < members.size(); ++j) {
      keyed.emplace_back((static_cast<double>(j) + rng.uniform()) / size, members[j]);
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<graph::NodeId>> out;
  for (std::size_t i = 0; i < keyed.size(); i += batch) {
    std::vector<graph::NodeId> b;
    for (std::size_t j = i; j < std::min(keyed.size(), i + batch); ++j) b.push_back(keyed[j].second);
    out.push_back(std::move(b));
  }
  return out;
}

// ---- training -------------------------------------------------------------

namespace {

struct SplitView {
  std::vector<graph::NodeId> nodes;
  std::vector<int> truth;
};

SplitView split_view(const graph::TextAttributedGraph& g, graph::Split split) {
  SplitView v;
  v.nodes = g.nodes_in(split);
  for (graph::NodeId n : v.nodes) v.truth.push_back(g.label(n));
  return v;
}

EvalReport score_split(const SplitView& view, const std::vector<int>& predicted, std::size_t num_classes) {
  std::vector<int> p;
  p.reserve(view.nodes.size());
  for (graph::NodeId n : view.nodes) p.push_back(predicted[n]);
  return score(view.truth, p, num_classes);
}

}  // namespace

TrainResult train(const graph::TextAttributedGraph& g, const teacher::RawTeacherStore* teacher,
                  const student::StudentConfig& student_config, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  if (student_config.in_dim != g.feature_dim()) {
    throw ValidationError("student input dimension " + std::to_string(student_config.in_dim) +
                          " does not match graph features " + std::to_string(g.feature_dim()));
  }
  const std::size_t k = student_config.layers;
  const std::vector<graph::NodeId> train_nodes = g.nodes_in(graph::Split::kTrain);
  const SplitView val = split_view(g, graph::Split::kVal);
  const SplitView test = split_view(g, graph::Split::kTest);
  if (train_nodes.empty()) throw ContractError("train: the training split is empty");
  if (val.nodes.empty()) throw ContractError("train: the validation split is empty");
  if (test.nodes.empty()) throw ContractError("train: the test split is empty");

  const student::GraphOperators ops(g);
  GkdModel model(student_config, g.num_classes(), config, teacher != nullptr ? teacher->dim() : 0);

  teacher::PooledTeacherFeatures pooled;
  if (teacher != nullptr) {
    if (teacher->max_hop() < k) {
      throw ValidationError("teacher features cover hops 0.." + std::to_string(teacher->max_hop()) +
                            " but the student has k=" + std::to_string(k));
    }
    pooled = teacher::pool_teacher_features(*teacher, train_nodes, k, g.node_count());
  }
  const std::vector<std::size_t> hops = distill::selected_hops(k, config.distill.hops);

  const std::vector<ad::Parameter*> params = model.trainable();
  const ad::AdamWConfig opt{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};
  Rng dropout_rng(derive_seed(config.seed, {stream::kDropout}));

  TrainResult result;
  Checkpoint last_good = model.snapshot();
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = stratified_batches(train_nodes, g.labels(), config.batch, config.seed, epoch);
    double sum_total = 0.0, sum_cls = 0.0, sum_distill = 0.0;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      const std::vector<graph::NodeId>& batch = batches[step];
      std::vector<int> batch_labels;
      for (graph::NodeId v : batch) batch_labels.push_back(g.label(v));
      try {
        const student::StudentFeatures feats = model.student().forward(ops, &dropout_rng);
        const ad::Tensor h_k = ad::embedding_lookup(feats.normalized[k], batch);
        const ad::Tensor l_cls = cross_entropy(model.classify(h_k), batch_labels);
        const ad::Tensor weights = model.loss_weights();
        const std::size_t first[] = {0};
        const std::size_t second[] = {1};
        ad::Tensor total = ad::mul(l_cls, ad::embedding_lookup(weights, first));
        double distill_value = 0.0;
        if (model.distilling()) {
          std::vector<std::size_t> rows;
          std::vector<std::uint64_t> batch_ids;
          for (graph::NodeId v : batch) {
            rows.push_back(pooled.row(v));
            batch_ids.push_back(v);
          }
          std::vector<ad::Tensor> student_rows(k + 1), teacher_rows(k + 1);
          for (std::size_t l : hops) {
            student_rows[l] = ad::embedding_lookup(feats.normalized[l], batch);
            teacher_rows[l] = model.adapter()->knowledge(l, ad::embedding_lookup(pooled.per_hop[l], rows));
          }
          const distill::NegativePlan plan = distill::plan_negatives(
              batch_ids, batch_labels, config.distill.negatives, config.distill.seed, epoch, step);
          const distill::DistillResult d =
              distill::distill_loss(student_rows, teacher_rows, plan, model.layer_weights(), config.distill);
          distill_value = d.total.item();
          total = ad::add(total, ad::mul(d.total, ad::embedding_lookup(weights, second)));
        }
        sum_total += total.item();
        sum_cls += l_cls.item();
        sum_distill += distill_value;
        ad::backward(total);
        ad::adamw_step(params, opt);
      } catch (const NumericError& e) {
        ad::Tape::current().clear();
        ad::zero_grad(params);
        if (hooks.on_divergence) hooks.on_divergence(last_good);
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                              std::to_string(step) + ": " + e.what());
      }
    }

    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      const std::vector<int> predicted = model.predict(ops);
      const EvalReport v = score_split(val, predicted, g.num_classes());
      const EvalReport t = score_split(test, predicted, g.num_classes());
      const double steps = static_cast<double>(batches.size());
      EpochRecord rec;
      rec.epoch = epoch;
      rec.loss_total = sum_total / steps;
      rec.loss_cls = sum_cls / steps;
      rec.loss_distill = sum_distill / steps;
      rec.val_acc = v.accuracy;
      rec.val_f1 = v.macro_f1;
      rec.test_acc = t.accuracy;
      rec.test_f1 = t.macro_f1;
      rec.gamma = model.gamma_values();
      const auto ab = model.loss_weight_values();
      rec.alpha = ab[0];
      rec.beta = ab[1];
      if (!have_best || rec.val_acc > result.metrics.best_val_acc) {
        have_best = true;
        result.best = model.snapshot();
        result.metrics.best_epoch = epoch;
        result.metrics.best_val_acc = rec.val_acc;
        result.metrics.best_val_f1 = rec.val_f1;
        result.metrics.test_acc_at_best = rec.test_acc;
        result.metrics.test_f1_at_best = rec.test_f1;
      }
      result.metrics.epochs.push_back(rec);
      if (hooks.on_epoch) hooks.on_epoch(rec);
    }
    last_good = model.snapshot();
  }
  result.last = std::move(last_good);
  return result;
}

EvalReport evaluate(const graph::TextAttributedGraph& g, const GkdModel& model, graph::Split split) {
  const SplitView view = split_view(g, split);
  if (view.nodes.empty()) {
    throw ContractError(std::string("evaluate: the ") + graph::split_name(split) + " split is empty");
  }
  const student::GraphOperators ops(g);
  return score_split(view, model.predict(ops), model.num_classes());
}

EvalReport evaluate(const graph::TextAttributedGraph& g, const Checkpoint& checkpoint,
                    const student::StudentConfig& student_config, graph::Split split) {
  const NamedTensor* w = checkpoint.find("classifier.weight");
  if (w == nullptr || w->shape.size() != 2) throw LookupError("checkpoint lacks a classifier.weight matrix");
  GkdModel model(student_config, w->shape[1], TrainConfig{}, 0);
  model.restore(checkpoint);
  return evaluate(g, model, split);
}

std::vector<AblationArm> ablation_last_layer(const graph::TextAttributedGraph& g,
                                             const teacher::RawTeacherStore& teacher,
                                             const student::StudentConfig& student_config,
                                             const TrainConfig& config, std::span<const std::uint64_t> seeds) {
  std::vector<AblationArm> out;
  for (std::uint64_t seed : seeds) {
    student::StudentConfig s = student_config;
    s.seed = seed;
    TrainConfig c = config;
    c.seed = seed;
    c.distill.seed = seed;
    AblationArm arm;
    arm.seed = seed;
    c.distill.hops = distill::HopSelection::kAll;
    arm.full = train(g, &teacher, s, c).metrics;
    c.distill.hops = distill::HopSelection::kLastOnly;
    arm.last_only = train(g, &teacher, s, c).metrics;
    out.push_back(std::move(arm));
  }
  return out;
}

}  // namespace gkd::train

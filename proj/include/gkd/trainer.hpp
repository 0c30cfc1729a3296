// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_TRAINER_HPP_
#define GKD_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkd/checkpoint.hpp"
#include "gkd/distill.hpp"
#include "gkd/graph.hpp"
#include "gkd/student.hpp"
#include "gkd/teacher.hpp"

namespace gkd::train {

enum class LossWeightMode { kFixed, kTrainableSoftmaxPair };
LossWeightMode parse_loss_weight_mode(const std::string& name);

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 32;
  std::size_t epochs = 500;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  LossWeightMode weight_mode = LossWeightMode::kFixed;
  double alpha = 1.0;
  double beta = 1.0;
  distill::DistillConfig distill{};
  teacher::Activation filter_activation = teacher::Activation::kGelu;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// softmax(h W_G + b_G) -> [B, C]
ad::Tensor classify(const ad::Tensor& h, const ad::Tensor& weight, const ad::Tensor& bias);
// Mean over rows of -log(max(p[y], 1e-12)).
ad::Tensor cross_entropy(const ad::Tensor& probs, std::span<const int> labels);

struct ClassReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassReport> per_class;
  std::size_t count = 0;
};

// Macro-F1 averages every class in [0, num_classes); a class with no
// predictions or no support contributes F1 = 0.
EvalReport score(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss_total = 0.0;
  double loss_cls = 0.0;
  double loss_distill = 0.0;
  double val_acc = 0.0;
  double val_f1 = 0.0;
  double test_acc = 0.0;
  double test_f1 = 0.0;
  std::vector<double> gamma;  // k + 1 entries
  double alpha = 0.0;
  double beta = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;  // evaluated epochs only
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  double best_val_f1 = 0.0;
  double test_acc_at_best = 0.0;
  double test_f1_at_best = 0.0;

  // First recorded epoch whose validation accuracy reaches `target`.
  std::optional<std::size_t> epochs_to_threshold(double target) const;
  const EpochRecord& final_epoch() const;
};

std::string metrics_header(std::size_t max_hop);
std::string metrics_row(const EpochRecord& record);
void write_metrics_csv(const RunMetrics& metrics, std::size_t max_hop, const std::filesystem::path& path);
// Parses the epoch rows back; best-epoch fields are recomputed.
RunMetrics read_metrics_csv(const std::filesystem::path& path);

// Appends rows as they arrive, flushing after each one.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, std::size_t max_hop);
  void append(const EpochRecord& record);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Everything trainable in one run: student, classifier and, when distilling,
// the teacher adapter, gamma logits and the optional alpha/beta logits.
class GkdModel {
 public:
  // teacher_dim == 0 builds a vanilla model.
  GkdModel(const student::StudentConfig& student_config, std::size_t num_classes, const TrainConfig& config,
           std::size_t teacher_dim);

  bool distilling() const { return adapter_.has_value(); }
  std::size_t max_hop() const { return student_.config().layers; }
  std::size_t num_classes() const { return num_classes_; }

  student::StudentGnn& student() { return student_; }
  const student::StudentGnn& student() const { return student_; }
  ad::Parameter& classifier_weight() { return classifier_weight_; }
  ad::Parameter& classifier_bias() { return classifier_bias_; }
  teacher::KnowledgeAdapter* adapter() { return adapter_ ? &*adapter_ : nullptr; }
  const teacher::KnowledgeAdapter* adapter() const { return adapter_ ? &*adapter_ : nullptr; }
  distill::LayerWeights& layer_weights() { return layer_weights_; }
  const distill::LayerWeights& layer_weights() const { return layer_weights_; }

  ad::Tensor classify(const ad::Tensor& h) const;
  // [alpha, beta]; softmax of the pair logits in trainable mode.
  ad::Tensor loss_weights() const;
  std::vector<double> loss_weight_values() const;
  // gamma as reported in metrics (zeros for vanilla, one-hot on hop k for the
  // last-layer variant).
  std::vector<double> gamma_values() const;

  std::vector<int> predict(const student::GraphOperators& ops) const;

  // Parameters the optimizer updates for this run.
  std::vector<ad::Parameter*> trainable();
  // Every parameter, for checkpoints.
  std::vector<ad::Parameter*> parameters();

  Checkpoint snapshot() { return gkd::snapshot(parameters()); }
  void restore(const Checkpoint& checkpoint) { gkd::restore(checkpoint, parameters()); }

 private:
  TrainConfig config_;
  student::StudentGnn student_;
  std::size_t num_classes_;
  ad::Parameter classifier_weight_;
  ad::Parameter classifier_bias_;
  std::optional<teacher::KnowledgeAdapter> adapter_;
  distill::LayerWeights layer_weights_;
  ad::Parameter loss_logits_;
};

// Per-epoch batches of train nodes: every class is shuffled, then classes are
// interleaved by relative rank so each batch mirrors the class proportions.
std::vector<std::vector<graph::NodeId>> stratified_batches(std::span<const graph::NodeId> nodes,
                                                           std::span<const int> labels, std::size_t batch,
                                                           std::uint64_t seed, std::uint64_t epoch);

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Receives the last good checkpoint before a DivergenceError propagates.
  std::function<void(const Checkpoint&)> on_divergence;
};

struct TrainResult {
  RunMetrics metrics;
  Checkpoint best;
  Checkpoint last;
};

// Vanilla when `teacher` is null (beta forced to 0, no distillation work).
TrainResult train(const graph::TextAttributedGraph& g, const teacher::RawTeacherStore* teacher,
                  const student::StudentConfig& student_config, const TrainConfig& config,
                  const TrainHooks& hooks = {});

EvalReport evaluate(const graph::TextAttributedGraph& g, const GkdModel& model, graph::Split split);
// Rebuilds the student and classifier from `checkpoint`; teacher-side
// entries are ignored.
EvalReport evaluate(const graph::TextAttributedGraph& g, const Checkpoint& checkpoint,
                    const student::StudentConfig& student_config, graph::Split split);

struct AblationArm {
  std::uint64_t seed = 0;
  RunMetrics full;
  RunMetrics last_only;
};

// Full layer-adaptive distillation against the hop-k-only variant, per seed,
// under otherwise identical settings.
std::vector<AblationArm> ablation_last_layer(const graph::TextAttributedGraph& g,
                                             const teacher::RawTeacherStore& teacher,
                                             const student::StudentConfig& student_config,
                                             const TrainConfig& config, std::span<const std::uint64_t> seeds);

}  // namespace gkd::train

#endif  // GKD_TRAINER_HPP_

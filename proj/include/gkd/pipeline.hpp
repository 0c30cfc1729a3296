// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_PIPELINE_HPP_
#define GKD_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gkd/graph.hpp"
#include "gkd/prompt.hpp"
#include "gkd/student.hpp"
#include "gkd/teacher.hpp"
#include "gkd/trainer.hpp"

namespace gkd::pipeline {

enum class DatasetSource { kSynth, kFiles };
enum class TeacherMode { kNone, kMock, kFile };

struct DatasetSection {
  DatasetSource source = DatasetSource::kSynth;
  std::filesystem::path node_file;
  std::filesystem::path edge_file;
  graph::SynthConfig synth{};
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  std::optional<std::uint64_t> split_seed;  // defaults to the run seed
};

struct TeacherSection {
  TeacherMode mode = TeacherMode::kMock;
  std::filesystem::path path;
  std::size_t dim = 64;
  double signal = 1.0;
  double noise = 1.0;
  teacher::Activation activation = teacher::Activation::kGelu;
};

// The run config file is JSON. Unknown keys are rejected with their path.
struct RunConfig {
  std::string name = "run";
  std::filesystem::path output_dir = "runs";
  std::uint64_t seed = 0;
  DatasetSection dataset{};
  prompt::PromptConfig prompt{};
  bool prompt_categories_set = false;
  TeacherSection teacher{};
  student::StudentConfig student{};  // in_dim is taken from the dataset
  train::TrainConfig train{};
  std::vector<std::uint64_t> ablation_seeds{0, 1, 2, 3, 4};

  // Every component seed follows the run seed.
  void apply_seed(std::uint64_t seed);
  // Structural checks plus existence of referenced input files.
  void validate() const;
  // Canonical JSON text (sorted sections, all fields explicit).
  std::string canonical_json() const;
  // First 8 hex digits of FNV-1a over canonical_json().
  std::string hash() const;
  std::filesystem::path run_dir() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

graph::TextAttributedGraph load_dataset(const RunConfig& config);
prompt::PromptConfig prompt_config(const RunConfig& config, const graph::TextAttributedGraph& g);
teacher::MockTeacherConfig mock_config(const RunConfig& config);
// Null in vanilla mode.
std::optional<teacher::RawTeacherStore> load_teacher(const RunConfig& config, const graph::TextAttributedGraph& g);

struct CommandResult {
  std::filesystem::path run_dir;
  std::vector<std::filesystem::path> artifacts;
  std::map<std::string, double> metrics;
  std::string summary;  // human-readable, printed by the CLI
};

CommandResult cmd_build_prompts(const RunConfig& config);
CommandResult cmd_mock_teacher(const RunConfig& config);
CommandResult cmd_train(const RunConfig& config);
CommandResult cmd_ablate(const RunConfig& config);
CommandResult cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, graph::Split split);

}  // namespace gkd::pipeline

#endif  // GKD_PIPELINE_HPP_

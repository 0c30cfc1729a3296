// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end over the C API.
//   gkd build-prompts|mock-teacher|train|ablate --config run.json [--seed N] [--out DIR]
//   gkd eval --config run.json --checkpoint best.ckpt [--split test]
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gkd/gkd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string checkpoint;
  std::string split = "test";
};

int report(gkd_status status) {
  std::fprintf(stderr, "gkd: %s: %s\n", gkd_status_name(status), gkd_last_error());
  return status == GKD_ERR_VALIDATION ? kExitValidation : kExitRuntime;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "run config file (JSON)")->required();
  cmd->add_option("--seed", opt.seed, "override the run seed");
  cmd->add_option("--out", opt.out, "override the output directory");
}

int run(const std::string& command, const Options& opt) {
  gkd_config* config = nullptr;
  gkd_status st = gkd_config_load(opt.config.c_str(), &config);
  if (st != GKD_OK) return report(st);
  if (opt.seed) st = gkd_config_set_seed(config, *opt.seed);
  if (st == GKD_OK && opt.out) st = gkd_config_set_output_dir(config, opt.out->c_str());
  gkd_result* result = nullptr;
  if (st == GKD_OK) {
    if (command == "build-prompts") {
      st = gkd_build_prompts(config, &result);
    } else if (command == "mock-teacher") {
      st = gkd_mock_teacher(config, &result);
    } else if (command == "train") {
      st = gkd_train(config, &result);
    } else if (command == "ablate") {
      st = gkd_ablate(config, &result);
    } else {
      gkd_split split = GKD_SPLIT_TEST;
      if (opt.split == "train") split = GKD_SPLIT_TRAIN;
      if (opt.split == "val") split = GKD_SPLIT_VAL;
      st = gkd_eval(config, opt.checkpoint.c_str(), split, &result);
    }
  }
  gkd_config_free(config);
  if (st != GKD_OK) return report(st);
  std::fputs(gkd_result_summary(result), stdout);
  gkd_result_free(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph knowledge distillation from language-model teachers into GNN students"};
  app.set_version_flag("--version", std::string(gkd_version()));
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"build-prompts", "mock-teacher", "train", "ablate"}) {
    add_common(app.add_subcommand(name, std::string("run the ") + name + " step"), opt);
  }
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
  add_common(eval, opt);
  eval->add_option("--checkpoint", opt.checkpoint, "checkpoint file")->required();
  eval->add_option("--split", opt.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  return run(app.get_subcommands().front()->get_name(), opt);
}

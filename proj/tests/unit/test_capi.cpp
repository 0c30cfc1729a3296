// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#include <doctest.h>

#include <string>
#include <vector>

#include "../support/tempdir.hpp"
#include "gkd/gkd.h"

namespace {

const char* kConfig = R"({"name": "capi", "seed": 2,
  "dataset": {"source": "synth", "synth": {"nodes": 12, "classes": 2, "feature_dim": 4}},
  "prompt": {"k": 1, "theta": 1},
  "teacher": {"mode": "mock", "dim": 8},
  "student": {"layers": 1, "hidden": 4},
  "train": {"epochs": 2, "batch": 4, "lr": 0.01}})";

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(gkd_version()).size() > 0);
  CHECK(std::string(gkd_status_name(GKD_OK)) == "ok");
  CHECK(std::string(gkd_status_name(GKD_ERR_VALIDATION)) == "validation error");
  CHECK(std::string(gkd_status_name(static_cast<gkd_status>(99))) == "unknown status");
}

TEST_CASE("null arguments are rejected") {
  gkd_config* c = nullptr;
  CHECK(gkd_config_parse(nullptr, &c) == GKD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(gkd_last_error()) == "null argument");
  CHECK(gkd_config_validate(nullptr) == GKD_ERR_INVALID_ARGUMENT);
  gkd_result* r = nullptr;
  CHECK(gkd_train(nullptr, &r) == GKD_ERR_INVALID_ARGUMENT);
  double v = 0;
  CHECK(gkd_result_metric(nullptr, "x", &v) == GKD_ERR_INVALID_ARGUMENT);
  CHECK(gkd_result_artifact(nullptr, 0) == nullptr);
  gkd_config_free(nullptr);
  gkd_result_free(nullptr);
}

TEST_CASE("parse errors map to codes with messages") {
  gkd_config* c = nullptr;
  CHECK(gkd_config_parse(R"({"trian": 1})", &c) == GKD_ERR_VALIDATION);
  CHECK(c == nullptr);
  CHECK(std::string(gkd_last_error()) == "unknown config key 'trian'");
  CHECK(gkd_config_load("/nonexistent/run.json", &c) == GKD_ERR_VALIDATION);
  CHECK(std::string(gkd_last_error()).find("/nonexistent/run.json") != std::string::npos);
  REQUIRE(gkd_config_parse(kConfig, &c) == GKD_OK);
  CHECK(std::string(gkd_last_error()).empty());
  gkd_config_free(c);
}

TEST_CASE("run directory buffer protocol") {
  gkd_config* c = nullptr;
  REQUIRE(gkd_config_parse(kConfig, &c) == GKD_OK);
  REQUIRE(gkd_config_set_output_dir(c, "/tmp/out") == GKD_OK);
  size_t needed = 0;
  REQUIRE(gkd_config_run_dir(c, nullptr, 0, &needed) == GKD_OK);
  CHECK(needed == std::string("/tmp/out/capi-").size() + 8 + 1);
  std::vector<char> small(needed - 1);
  CHECK(gkd_config_run_dir(c, small.data(), small.size(), nullptr) == GKD_ERR_VALIDATION);
  std::vector<char> buf(needed);
  REQUIRE(gkd_config_run_dir(c, buf.data(), buf.size(), nullptr) == GKD_OK);
  CHECK(std::string(buf.data()).rfind("/tmp/out/capi-", 0) == 0);
  gkd_config_free(c);
}

TEST_CASE("train, eval and ablate through the C API") {
  gkd::testing::TempDir dir;
  gkd_config* c = nullptr;
  REQUIRE(gkd_config_parse(kConfig, &c) == GKD_OK);
  REQUIRE(gkd_config_set_output_dir(c, dir.path().c_str()) == GKD_OK);
  REQUIRE(gkd_config_validate(c) == GKD_OK);

  gkd_result* r = nullptr;
  REQUIRE(gkd_train(c, &r) == GKD_OK);
  REQUIRE(gkd_result_artifact_count(r) == 3);
  CHECK(gkd_result_artifact(r, 3) == nullptr);
  const std::string best = gkd_result_artifact(r, 1);
  CHECK(best.find("best.ckpt") != std::string::npos);
  double test_acc = -1;
  REQUIRE(gkd_result_metric(r, "test_acc", &test_acc) == GKD_OK);
  double junk = 0;
  CHECK(gkd_result_metric(r, "nope", &junk) == GKD_ERR_LOOKUP);
  CHECK(std::string(gkd_result_summary(r)).rfind("distilled run", 0) == 0);
  CHECK(std::string(gkd_result_run_dir(r)).rfind(dir.path().string(), 0) == 0);
  gkd_result_free(r);

  gkd_result* e = nullptr;
  REQUIRE(gkd_eval(c, best.c_str(), GKD_SPLIT_TEST, &e) == GKD_OK);
  double acc = -1;
  REQUIRE(gkd_result_metric(e, "acc", &acc) == GKD_OK);
  CHECK(acc == test_acc);
  gkd_result_free(e);
  CHECK(gkd_eval(c, best.c_str(), static_cast<gkd_split>(7), &e) == GKD_ERR_INVALID_ARGUMENT);
  CHECK(gkd_eval(c, (dir / "missing.ckpt").c_str(), GKD_SPLIT_TEST, &e) == GKD_ERR_IO);
  CHECK(e == nullptr);

  gkd_result* a = nullptr;
  REQUIRE(gkd_config_set_seed(c, 9) == GKD_OK);
  REQUIRE(gkd_ablate(c, &a) == GKD_OK);
  double wins = -1;
  REQUIRE(gkd_result_metric(a, "full_wins", &wins) == GKD_OK);
  CHECK(wins >= 0.0);
  CHECK(wins <= 5.0);
  gkd_result_free(a);
  gkd_config_free(c);
}

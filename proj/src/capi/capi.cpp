// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/gkd.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "gkd/error.hpp"
#include "gkd/pipeline.hpp"

struct gkd_config {
  gkd::pipeline::RunConfig value;
};

struct gkd_result {
  gkd::pipeline::CommandResult value;
  std::string run_dir;
  std::vector<std::string> artifacts;
};

namespace {

thread_local std::string g_last_error;

gkd_status status_of(gkd::ErrorKind kind) {
  switch (kind) {
    case gkd::ErrorKind::kValidation: return GKD_ERR_VALIDATION;
    case gkd::ErrorKind::kShape: return GKD_ERR_SHAPE;
    case gkd::ErrorKind::kNumeric: return GKD_ERR_NUMERIC;
    case gkd::ErrorKind::kContract: return GKD_ERR_CONTRACT;
    case gkd::ErrorKind::kIo: return GKD_ERR_IO;
    case gkd::ErrorKind::kFormat: return GKD_ERR_FORMAT;
    case gkd::ErrorKind::kLookup: return GKD_ERR_LOOKUP;
    case gkd::ErrorKind::kDivergence: return GKD_ERR_DIVERGENCE;
  }
  return GKD_ERR_INTERNAL;
}

gkd_status fail(gkd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
gkd_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GKD_OK;
  } catch (const gkd::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GKD_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GKD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GKD_ERR_INTERNAL, e.what());
  }
}

template <class Fn>
gkd_status run_command(const gkd_config* config, gkd_result** out, Fn&& fn) {
  if (config == nullptr || out == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* r = new gkd_result{fn(config->value), {}, {}};
    r->run_dir = r->value.run_dir.string();
    for (const auto& a : r->value.artifacts) r->artifacts.push_back(a.string());
    *out = r;
  });
}

}  // namespace

extern "C" {

const char* gkd_version(void) { return "1.0.0"; }

const char* gkd_status_name(gkd_status status) {
  switch (status) {
    case GKD_OK: return "ok";
    case GKD_ERR_VALIDATION: return "validation error";
    case GKD_ERR_SHAPE: return "shape error";
    case GKD_ERR_NUMERIC: return "numeric error";
    case GKD_ERR_CONTRACT: return "contract error";
    case GKD_ERR_IO: return "i/o error";
    case GKD_ERR_FORMAT: return "format error";
    case GKD_ERR_LOOKUP: return "lookup error";
    case GKD_ERR_DIVERGENCE: return "divergence";
    case GKD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GKD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gkd_last_error(void) { return g_last_error.c_str(); }

gkd_status gkd_config_load(const char* path, gkd_config** out) {
  if (path == nullptr || out == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gkd_config{gkd::pipeline::load_run_config(path)}; });
}

gkd_status gkd_config_parse(const char* json_text, gkd_config** out) {
  if (json_text == nullptr || out == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gkd_config{gkd::pipeline::parse_run_config(json_text)}; });
}

gkd_status gkd_config_set_seed(gkd_config* config, uint64_t seed) {
  if (config == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { config->value.apply_seed(seed); });
}

gkd_status gkd_config_set_output_dir(gkd_config* config, const char* dir) {
  if (config == nullptr || dir == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { config->value.output_dir = dir; });
}

gkd_status gkd_config_validate(const gkd_config* config) {
  if (config == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { config->value.validate(); });
}

gkd_status gkd_config_run_dir(const gkd_config* config, char* buf, size_t capacity, size_t* needed) {
  if (config == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    const std::string dir = config->value.run_dir().string();
    if (needed != nullptr) *needed = dir.size() + 1;
    if (buf == nullptr) return;
    if (capacity < dir.size() + 1) throw gkd::ValidationError("run directory buffer too small");
    std::memcpy(buf, dir.c_str(), dir.size() + 1);
  });
}

void gkd_config_free(gkd_config* config) { delete config; }

gkd_status gkd_build_prompts(const gkd_config* config, gkd_result** out) {
  return run_command(config, out, [](const auto& c) { return gkd::pipeline::cmd_build_prompts(c); });
}

gkd_status gkd_mock_teacher(const gkd_config* config, gkd_result** out) {
  return run_command(config, out, [](const auto& c) { return gkd::pipeline::cmd_mock_teacher(c); });
}

gkd_status gkd_train(const gkd_config* config, gkd_result** out) {
  return run_command(config, out, [](const auto& c) { return gkd::pipeline::cmd_train(c); });
}

gkd_status gkd_ablate(const gkd_config* config, gkd_result** out) {
  return run_command(config, out, [](const auto& c) { return gkd::pipeline::cmd_ablate(c); });
}

gkd_status gkd_eval(const gkd_config* config, const char* checkpoint, gkd_split split, gkd_result** out) {
  if (checkpoint == nullptr) return fail(GKD_ERR_INVALID_ARGUMENT, "null checkpoint path");
  if (split != GKD_SPLIT_TRAIN && split != GKD_SPLIT_VAL && split != GKD_SPLIT_TEST) {
    return fail(GKD_ERR_INVALID_ARGUMENT, "unknown split");
  }
  const auto s = static_cast<gkd::graph::Split>(split);
  return run_command(config, out,
                     [&](const auto& c) { return gkd::pipeline::cmd_eval(c, checkpoint, s); });
}

const char* gkd_result_summary(const gkd_result* result) {
  return result == nullptr ? "" : result->value.summary.c_str();
}

const char* gkd_result_run_dir(const gkd_result* result) { return result == nullptr ? "" : result->run_dir.c_str(); }

size_t gkd_result_artifact_count(const gkd_result* result) {
  return result == nullptr ? 0 : result->artifacts.size();
}

const char* gkd_result_artifact(const gkd_result* result, size_t index) {
  if (result == nullptr || index >= result->artifacts.size()) return nullptr;
  return result->artifacts[index].c_str();
}

gkd_status gkd_result_metric(const gkd_result* result, const char* key, double* value) {
  if (result == nullptr || key == nullptr || value == nullptr) {
    return fail(GKD_ERR_INVALID_ARGUMENT, "null argument");
  }
  auto it = result->value.metrics.find(key);
  if (it == result->value.metrics.end()) return fail(GKD_ERR_LOOKUP, std::string("no metric named ") + key);
  *value = it->second;
  return GKD_OK;
}

void gkd_result_free(gkd_result* result) { delete result; }

}  // extern "C"

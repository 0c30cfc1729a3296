/* Copyright 2026 The GKD Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the distillation engine. All handles are opaque; every call
 * returns a gkd_status and leaves a thread-local message for gkd_last_error()
 * when it fails.
 */

#ifndef GKD_GKD_H_
#define GKD_GKD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GKD_API __declspec(dllexport)
#else
#define GKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gkd_status {
  GKD_OK = 0,
  GKD_ERR_VALIDATION = 1,
  GKD_ERR_SHAPE = 2,
  GKD_ERR_NUMERIC = 3,
  GKD_ERR_CONTRACT = 4,
  GKD_ERR_IO = 5,
  GKD_ERR_FORMAT = 6,
  GKD_ERR_LOOKUP = 7,
  GKD_ERR_DIVERGENCE = 8,
  GKD_ERR_INVALID_ARGUMENT = 9,
  GKD_ERR_INTERNAL = 10
} gkd_status;

typedef enum gkd_split { GKD_SPLIT_TRAIN = 0, GKD_SPLIT_VAL = 1, GKD_SPLIT_TEST = 2 } gkd_split;

typedef struct gkd_config gkd_config;
typedef struct gkd_result gkd_result;

GKD_API const char* gkd_version(void);
GKD_API const char* gkd_status_name(gkd_status status);
/* Message of the last failed call on this thread; "" when none. */
GKD_API const char* gkd_last_error(void);

GKD_API gkd_status gkd_config_load(const char* path, gkd_config** out);
GKD_API gkd_status gkd_config_parse(const char* json_text, gkd_config** out);
GKD_API gkd_status gkd_config_set_seed(gkd_config* config, uint64_t seed);
GKD_API gkd_status gkd_config_set_output_dir(gkd_config* config, const char* dir);
/* Validates the config, including that referenced input files exist. */
GKD_API gkd_status gkd_config_validate(const gkd_config* config);
/* Copies the run directory path into buf (NUL-terminated). *needed receives the
 * required size including the terminator; buf may be NULL to query it. */
GKD_API gkd_status gkd_config_run_dir(const gkd_config* config, char* buf, size_t capacity, size_t* needed);
GKD_API void gkd_config_free(gkd_config* config);

GKD_API gkd_status gkd_build_prompts(const gkd_config* config, gkd_result** out);
GKD_API gkd_status gkd_mock_teacher(const gkd_config* config, gkd_result** out);
GKD_API gkd_status gkd_train(const gkd_config* config, gkd_result** out);
GKD_API gkd_status gkd_ablate(const gkd_config* config, gkd_result** out);
GKD_API gkd_status gkd_eval(const gkd_config* config, const char* checkpoint, gkd_split split, gkd_result** out);

/* Borrowed strings stay valid until gkd_result_free. */
GKD_API const char* gkd_result_summary(const gkd_result* result);
GKD_API const char* gkd_result_run_dir(const gkd_result* result);
GKD_API size_t gkd_result_artifact_count(const gkd_result* result);
GKD_API const char* gkd_result_artifact(const gkd_result* result, size_t index);
/* Named scalar such as "test_acc"; GKD_ERR_LOOKUP when absent. */
GKD_API gkd_status gkd_result_metric(const gkd_result* result, const char* key, double* value);
GKD_API void gkd_result_free(gkd_result* result);

#ifdef __cplusplus
}
#endif

#endif /* GKD_GKD_H_ */

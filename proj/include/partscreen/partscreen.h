// Copyright 2026 The partscreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PARTSCREEN_PARTSCREEN_H_
#define PARTSCREEN_PARTSCREEN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1,
  PS_ERR_CONFIG = 2,
  PS_ERR_IO = 3,
  PS_ERR_SHAPE = 4,
  PS_ERR_NUMERIC = 5,
  PS_ERR_VERIFICATION = 6,
  PS_ERR_INTERNAL = 7
} ps_status;

/* Opaque handles. */
typedef struct ps_config ps_config;
typedef struct ps_model ps_model;

/* Message of the last failed call on this thread; empty after a success. */
PS_API const char* ps_last_error(void);
PS_API const char* ps_status_name(ps_status status);
PS_API const char* ps_version(void);

/* Strings returned through char** outputs are owned by the caller. */
PS_API void ps_string_free(char* s);

PS_API ps_status ps_config_default(ps_config** out);
PS_API ps_status ps_config_load(const char* path, ps_config** out);
PS_API ps_status ps_config_parse(const char* text, ps_config** out);
PS_API void ps_config_free(ps_config* config);
/* Dotted key ("train.lr"), value as it would appear in a config file. */
PS_API ps_status ps_config_set(ps_config* config, const char* key, const char* value);
/* Branch preset: "teacher", "ts1", "ts2" or "full". */
PS_API ps_status ps_config_set_branches(ps_config* config, const char* name);
/* Effective configuration in config-file syntax. */
PS_API ps_status ps_config_echo(const ps_config* config, char** out);
PS_API ps_status ps_config_validate(const ps_config* config);

/* Commands; each returns its JSON report. */
PS_API ps_status ps_gendata(const ps_config* config, const char* out_dir, char** report_json);
/* log receives every training-log line when non-null. */
typedef void (*ps_log_fn)(const char* line, void* user);
PS_API ps_status ps_train(const ps_config* config, int resume, ps_log_fn log, void* user,
                          char** report_json);
PS_API ps_status ps_eval(const char* checkpoint, const char* data_dir, char** report_json);
/* Returns PS_ERR_VERIFICATION when any check fails; the report is still set. */
PS_API ps_status ps_verify(uint64_t seed, char** report_json);

/* Inference on a trained checkpoint. */
PS_API ps_status ps_model_load(const char* checkpoint, ps_model** out);
PS_API void ps_model_free(ps_model* model);
PS_API ps_status ps_model_shape(const ps_model* model, size_t* channels, size_t* tasks);
/* images: [n, channels, height, width] row-major; probs: [n, tasks]. */
PS_API ps_status ps_model_predict(const ps_model* model, const double* images, size_t n,
                                  size_t height, size_t width, double* probs);

#ifdef __cplusplus
}
#endif

#endif /* PARTSCREEN_PARTSCREEN_H_ */

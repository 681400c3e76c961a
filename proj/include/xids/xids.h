/*
 * Copyright 2026 The xids Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/*
 * C interface to the xids intrusion-detection and explanation toolkit.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an xids_status; on failure a description is
 * available from xids_last_error() on the calling thread until the next
 * call. Strings returned through char** are owned by the caller and must be
 * released with xids_free_string(). Reports are JSON documents.
 */

#ifndef XIDS_XIDS_H_
#define XIDS_XIDS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(XIDS_BUILDING_LIBRARY)
#define XIDS_API __attribute__((visibility("default")))
#else
#define XIDS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xids_status {
  XIDS_OK = 0,
  XIDS_ERR_USAGE = 1,
  XIDS_ERR_DATA = 2,
  XIDS_ERR_NUMERIC = 3,
  XIDS_ERR_IO = 4,
  XIDS_ERR_BUDGET = 5,
  XIDS_ERR_INTERNAL = 6
} xids_status;

typedef struct xids_dataset xids_dataset;
typedef struct xids_model xids_model;
typedef struct xids_rules xids_rules;
typedef struct xids_service xids_service;

XIDS_API const char* xids_version(void);
XIDS_API const char* xids_last_error(void);
XIDS_API void xids_free_string(char* s);
XIDS_API const char* xids_status_name(xids_status status);

/* Datasets: raw NSL-KDD files in, encoded artifact out. */
XIDS_API xids_status xids_dataset_ingest(const char* train_path, const char* test_path, xids_dataset** out);
XIDS_API xids_status xids_dataset_load(const char* path, xids_dataset** out);
XIDS_API xids_status xids_dataset_save(const xids_dataset* dataset, const char* path);
XIDS_API xids_status xids_dataset_rows(const xids_dataset* dataset, const char* split, size_t* rows);
XIDS_API xids_status xids_dataset_width(const xids_dataset* dataset, int* width);
XIDS_API void xids_dataset_free(xids_dataset* dataset);

XIDS_API xids_status xids_model_load(const char* path, xids_model** out);
XIDS_API xids_status xids_model_save(const xids_model* model, const char* path);
XIDS_API void xids_model_free(xids_model* model);

XIDS_API xids_status xids_rules_load(const char* path, xids_rules** out);
XIDS_API xids_status xids_rules_parse(const char* text, xids_rules** out);
XIDS_API xids_status xids_rules_save(const xids_rules* rules, const char* path);
XIDS_API xids_status xids_rules_text(const xids_rules* rules, char** text);
XIDS_API void xids_rules_free(xids_rules* rules);

/*
 * Pipeline stages. `options_json` may be NULL or "" for defaults; unknown
 * option keys are usage errors.
 */
XIDS_API xids_status xids_ingest_report(const xids_dataset* dataset, uint64_t seed, char** report);
XIDS_API xids_status xids_summary_report(const xids_dataset* dataset, uint64_t seed, char** report);
XIDS_API xids_status xids_train(const xids_dataset* dataset, const char* options_json, uint64_t seed,
                                xids_model** model, char** report);
XIDS_API xids_status xids_eval_report(const xids_model* model, const xids_dataset* dataset, const char* split,
                                      uint64_t seed, char** report);
/* method: "shap" or "lime". */
XIDS_API xids_status xids_explain_report(const xids_model* model, const xids_dataset* dataset, const char* method,
                                         const char* split, size_t index, const char* options_json, uint64_t seed,
                                         char** report);
XIDS_API xids_status xids_explain_summary_report(const xids_model* model, const xids_dataset* dataset,
                                                 const char* split, size_t count, const char* options_json,
                                                 uint64_t seed, char** report);
/* mode: "pn" or "pp". */
XIDS_API xids_status xids_contrast_report(const xids_model* model, const xids_dataset* dataset, const char* mode,
                                          const char* split, size_t index, const char* options_json, uint64_t seed,
                                          char** report);
XIDS_API xids_status xids_contrast_batch_report(const xids_model* model, const xids_dataset* dataset,
                                                const char* mode, const char* split, size_t count,
                                                const char* options_json, uint64_t seed, char** report);
XIDS_API xids_status xids_prototypes_report(const xids_model* model, const xids_dataset* dataset, const char* split,
                                            size_t index, int m, const char* options_json, uint64_t seed,
                                            char** report);
XIDS_API xids_status xids_rules_train(const xids_dataset* dataset, const char* options_json, uint64_t seed,
                                      xids_rules** rules, char** report);
XIDS_API xids_status xids_rules_eval_report(const xids_rules* rules, const xids_dataset* dataset, const char* split,
                                            uint64_t seed, char** report);

/* Renders a plot-bearing report; variant NULL/"" picks the default plot. */
XIDS_API xids_status xids_report_svg(const char* report_json, const char* variant, char** svg);
XIDS_API xids_status xids_report_summary_line(const char* report_json, char** line);

/* HTTP JSON API without a transport. `rules` may be NULL. */
XIDS_API xids_status xids_service_create(const xids_model* model, const xids_dataset* dataset,
                                         const xids_rules* rules, double budget_seconds, uint64_t seed,
                                         xids_service** out);
/* Always produces a response body; http_status carries 2xx/4xx/5xx. */
XIDS_API xids_status xids_service_handle(const xids_service* service, const char* method, const char* path,
                                         const char* query, const char* body, int* http_status,
                                         char** response);
XIDS_API void xids_service_free(xids_service* service);

#ifdef __cplusplus
}
#endif

#endif /* XIDS_XIDS_H_ */

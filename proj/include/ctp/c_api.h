/* Copyright (C) 2026 The ctprune Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C-compatible entry points for foreign-function callers. Buffers are row-major 32-bit
 * floats. Every function returning int reports one of the CTP_* codes; on failure,
 * ctp_last_error() describes the problem for the calling thread.
 */
#ifndef CTP_C_API_H
#define CTP_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CTP_OK 0
#define CTP_ERR_INTERNAL 1
#define CTP_ERR_SHAPE 2
#define CTP_ERR_TENSOR 3
#define CTP_ERR_CONFIG 4
#define CTP_ERR_ARGUMENT 5

/* Mirrors the engine config field-for-field, in declaration order. */
typedef struct ctp_config {
    int64_t retain;
    int64_t pivots;
    int64_t channels;
    double bss_strength;
    double tau0;
    double dtau;
    int64_t batch;
    double blend;
    double eps;
    int32_t raw_swa_weights;
} ctp_config;

typedef struct ctp_request ctp_request;
typedef struct ctp_result ctp_result;

/* Engine semantic version, e.g. "0.1.0". */
const char* ctp_version(void);

/* Defaults with the given retain budget. */
ctp_config ctp_default_config(int64_t retain);

/* Thread-local description of the last failure; empty string if none. */
const char* ctp_last_error(void);

/* Borrows `hidden` (n * d floats) and `keys` (n * d_k floats) without copying; both must
 * outlive the request. Lengths are checked against the declared dimensions and the
 * config is validated. */
int ctp_request_create(const float* hidden, size_t hidden_len, const float* keys, size_t keys_len, size_t n,
                       size_t d, size_t d_k, size_t height, size_t width, size_t frames, const ctp_config* config,
                       ctp_request** out);
void ctp_request_free(ctp_request* request);

int ctp_run(const ctp_request* request, ctp_result** out);

/* Retained token ids in selection order. */
size_t ctp_result_count(const ctp_result* result);
const int64_t* ctp_result_indices(const ctp_result* result);

/* Updated hidden states, one row per retained token in selection order. */
const float* ctp_result_hidden(const ctp_result* result, size_t* rows, size_t* cols);

/* Cluster map as parallel arrays: pair k says discarded token members[k] merged into
 * owners[k]. Runs are grouped by owner in selection order, members ascending. */
size_t ctp_result_cluster_pairs(const ctp_result* result);
const int64_t* ctp_result_cluster_owners(const ctp_result* result);
const int64_t* ctp_result_cluster_members(const ctp_result* result);

void ctp_result_free(ctp_result* result);

#ifdef __cplusplus
}
#endif

#endif /* CTP_C_API_H */

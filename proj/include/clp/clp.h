// Copyright 2026 The CLP Authors
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

/*
 * C interface to the CLP library.
 *
 * Every function returns a clp_status; on failure clp_last_error() holds a
 * message for the calling thread until its next failing call. Dense arrays
 * are row-major doubles: beliefs are node_count x num_classes, compatibility
 * matrices num_classes x num_classes. Strings returned through char** are
 * owned by the caller and released with clp_string_free().
 */
#ifndef CLP_CLP_H_
#define CLP_CLP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CLP_BUILDING_LIBRARY)
#define CLP_API __attribute__((visibility("default")))
#else
#define CLP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clp_status {
  CLP_OK = 0,
  CLP_ERROR_INVALID_ARGUMENT = 1,
  CLP_ERROR_DATA = 2,
  CLP_ERROR_NUMERICAL = 3,
  CLP_ERROR_IO = 4,
  CLP_ERROR_INTERNAL = 5
} clp_status;

typedef enum clp_verdict {
  CLP_VERDICT_CERTIFIED = 0,
  CLP_VERDICT_CONVERGENT = 1,
  CLP_VERDICT_DIVERGENT = 2,
  CLP_VERDICT_INCONCLUSIVE = 3
} clp_verdict;

CLP_API const char* clp_version(void);
CLP_API const char* clp_status_string(clp_status status);
CLP_API const char* clp_last_error(void);

/* ---- graphs ---- */

typedef struct clp_graph clp_graph;

/* directed: 1 or 0 overrides the manifest, -1 keeps it. */
CLP_API clp_status clp_graph_load(const char* dir, int directed, int partial_labels,
                                  clp_graph** out);

/* features may be NULL when feature_dim is 0; labels may be NULL (unlabeled)
 * and may contain -1 for unknown. num_classes <= 0 infers it. */
CLP_API clp_status clp_graph_from_arrays(int64_t node_count, const int32_t* sources,
                                         const int32_t* targets, size_t arc_count,
                                         const double* features, int64_t feature_dim,
                                         const int32_t* labels, int num_classes, int directed,
                                         clp_graph** out);

CLP_API clp_status clp_graph_save(const clp_graph* graph, const char* dir);
CLP_API void clp_graph_free(clp_graph* graph);

CLP_API int64_t clp_graph_node_count(const clp_graph* graph);
CLP_API int64_t clp_graph_arc_count(const clp_graph* graph);
CLP_API int clp_graph_num_classes(const clp_graph* graph);

CLP_API clp_status clp_graph_homophily(const clp_graph* graph, double* edge_homophily,
                                       double* node_homophily);
/* out has room for num_classes^2 values. */
CLP_API clp_status clp_graph_true_compatibility(const clp_graph* graph, double* out,
                                                size_t out_len);

CLP_API clp_status clp_synth_generate(int64_t num_nodes, int num_classes, double avg_degree,
                                      double p_in_fraction, uint64_t seed, clp_graph** out);

/* ---- compatibility and propagation ---- */

/* k x k in and out; deviation and iterations may be NULL. */
CLP_API clp_status clp_sinkhorn(const double* matrix, size_t k, double tol, int max_iters,
                                double* out, double* deviation, int* iterations);

/* base: node_count x C predictions. Writes the estimated compatibility. */
CLP_API clp_status clp_estimate_compatibility(const clp_graph* graph, const double* base,
                                              const int32_t* train, size_t train_len,
                                              double* h_out);

typedef struct clp_edge_weights clp_edge_weights;

CLP_API clp_status clp_edge_weights_create(const clp_graph* graph, const double* prior,
                                           const double* h, clp_edge_weights** out);
CLP_API void clp_edge_weights_free(clp_edge_weights* weights);

/* out has num_classes values. CLP_ERROR_INVALID_ARGUMENT when the arc is absent. */
CLP_API clp_status clp_edge_weight(const clp_edge_weights* weights, int32_t sender,
                                   int32_t receiver, double* out, size_t out_len);

/* teleport and beliefs_out are node_count x C. iterations/status may be NULL;
 * status receives 0 converged, 1 iteration cap, 2 diverged. */
CLP_API clp_status clp_propagate_clp(const clp_edge_weights* weights, const double* teleport,
                                     double alpha, int max_iters, double tol,
                                     int normalize_messages, double* beliefs_out,
                                     int* iterations, int* status);

CLP_API clp_status clp_closed_form_clp(const clp_edge_weights* weights, const double* teleport,
                                       double alpha, double* beliefs_out);

/* verdicts_out has num_classes entries of clp_verdict. */
CLP_API clp_status clp_convergence_check(const clp_edge_weights* weights, double alpha,
                                         int* verdicts_out, size_t out_len);

/* ---- pipelines (JSON in, JSON or CSV out) ---- */

/* Experiment config object; report JSON out. */
CLP_API clp_status clp_run(const char* config_json, char** report_json);
/* {"config": {...}, "h_grid": [...]} -> sweep CSV. */
CLP_API clp_status clp_sweep(const char* request_json, char** csv);
/* {"config": {...}, "schemes": [...]} -> compatibility quality CSV. */
CLP_API clp_status clp_compat_quality(const char* request_json, char** csv);
/* {"config": {...}, "checkpoint": path?} -> diagnostics JSON. */
CLP_API clp_status clp_inspect(const char* request_json, char** report_json);
/* Experiment config object; trains one model per seed. Summary JSON out. */
CLP_API clp_status clp_train(const char* config_json, char** summary_json);
/* {"preset", "scale", "seed", "out"} or {"synthetic": {...}, "out"} -> summary JSON. */
CLP_API clp_status clp_synth(const char* request_json, char** summary_json);

CLP_API void clp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CLP_CLP_H_ */

/* C API of the unionlap shared library: opaque handles + status codes.
 * All functions return UL_OK (0) on success; on failure the thread-local
 * message from ul_last_error() describes the problem. Strings returned
 * through char** are owned by the caller and released with ul_string_free.
 */
#ifndef UNIONLAP_CAPI_H
#define UNIONLAP_CAPI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ul_status {
    UL_OK = 0,
    UL_ERROR = 1,  /* unexpected runtime failure */
    UL_EINVAL = 2, /* validation / domain error */
    UL_ESOLVER = 3 /* eigensolver did not converge */
} ul_status;

typedef struct ul_model ul_model;
typedef struct ul_cloud ul_cloud;
typedef struct ul_graph ul_graph;
typedef struct ul_spectrum ul_spectrum;

const char* ul_version(void);
const char* ul_last_error(void);
void ul_string_free(char* s);

/* -- models ------------------------------------------------------------- */
ul_status ul_model_preset(const char* name, ul_model** out);
ul_status ul_model_from_json(const char* json, ul_model** out);
void ul_model_free(ul_model* model);
int ul_model_component_count(const ul_model* model);
int ul_model_ambient_dim(const ul_model* model);

/* -- sampling ------------------------------------------------------------ */
ul_status ul_sample(const ul_model* model, long long n, uint64_t seed, ul_cloud** out);
ul_status ul_sample_counts(const ul_model* model, const long long* counts, int ncomp,
                           uint64_t seed, ul_cloud** out);
void ul_cloud_free(ul_cloud* cloud);
long long ul_cloud_size(const ul_cloud* cloud);
int ul_cloud_ambient_dim(const ul_cloud* cloud);
/* points: row-major n x dim buffer of length n*dim */
ul_status ul_cloud_points(const ul_cloud* cloud, double* buf, long long len);
ul_status ul_cloud_labels(const ul_cloud* cloud, int* buf, long long len);
ul_status ul_cloud_write_csv(const ul_cloud* cloud, const char* path);

/* -- graphs -------------------------------------------------------------- */
ul_status ul_graph_build(const ul_cloud* cloud, double epsilon, const char* kernel,
                         ul_graph** out);
void ul_graph_free(ul_graph* graph);
long long ul_graph_nnz(const ul_graph* graph);
ul_status ul_graph_degrees(const ul_graph* graph, double* buf, long long len);
ul_status ul_graph_write_edges(const ul_graph* graph, const char* edges_path,
                               const char* degrees_path);

/* -- spectra ------------------------------------------------------------- */
/* kind: "normalized" | "unnormalized" | "unnormalized_scaled" (with d2) */
ul_status ul_spectrum_compute(const ul_graph* graph, const char* kind, int d2, int k, double tol,
                              ul_spectrum** out);
void ul_spectrum_free(ul_spectrum* spectrum);
int ul_spectrum_k(const ul_spectrum* spectrum);
ul_status ul_spectrum_eigenvalues(const ul_spectrum* spectrum, double* buf, int len);
ul_status ul_spectrum_residuals(const ul_spectrum* spectrum, double* buf, int len);
/* eigenvector j (0-based), length n */
ul_status ul_spectrum_vector(const ul_spectrum* spectrum, int j, double* buf, long long len);

/* -- JSON-level orchestration --------------------------------------------
 * config follows the documented experiment schema; results are JSON/CSV
 * strings. */
ul_status ul_run_experiment(const char* config_json, char** result_json);
ul_status ul_run_sweep(const char* config_json, char** csv);
ul_status ul_reference_spectrum(const char* config_json, char** result_json);
ul_status ul_nonlocal_energy(const char* config_json, char** result_json);
ul_status ul_preset_list(char** json);

/* Exact TL2 distance between two equally sized atom lists; points are
 * row-major m x dim. */
ul_status ul_tl2_exact(const double* points_a, const double* values_a, const double* points_b,
                       const double* values_b, long long m, int dim, double* distance);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UNIONLAP_CAPI_H */

/*
 * C interface to the cmseq library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a cmseq_status; on
 * failure cmseq_last_error() returns a thread-local description of the most
 * recent error. Matrices cross the boundary as dense row-major arrays of
 * ((N+1)*dim)^2 doubles, realizations and paths as stacked vectors of
 * (N+1)*dim doubles.
 */
#ifndef CMSEQ_H
#define CMSEQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CMSEQ_BUILDING_LIBRARY)
#    define CMSEQ_API __declspec(dllexport)
#  else
#    define CMSEQ_API __declspec(dllimport)
#  endif
#else
#  define CMSEQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmseq_status {
  CMSEQ_OK = 0,
  CMSEQ_ERR_INVALID_ARGUMENT = 1,
  CMSEQ_ERR_DIMENSION_MISMATCH = 2,
  CMSEQ_ERR_NOT_POSITIVE_DEFINITE = 3,
  CMSEQ_ERR_NOT_WELL_POSED = 4,
  CMSEQ_ERR_INADMISSIBLE = 5,
  CMSEQ_ERR_SINGULAR = 6,
  CMSEQ_ERR_PARSE = 7,
  CMSEQ_ERR_IO = 8,
  CMSEQ_ERR_BUFFER_TOO_SMALL = 9,
  CMSEQ_ERR_INTERNAL = 10
} cmseq_status;

typedef enum cmseq_model_kind {
  CMSEQ_FORWARD_MARKOV = 0,
  CMSEQ_BACKWARD_MARKOV = 1,
  CMSEQ_RECIPROCAL = 2,
  CMSEQ_CML_FORWARD = 3,
  CMSEQ_CMF_FORWARD = 4,
  CMSEQ_CML_BACKWARD = 5,
  CMSEQ_CMF_BACKWARD = 6
} cmseq_model_kind;

typedef enum cmseq_method {
  CMSEQ_METHOD_GENERIC = 0,
  CMSEQ_METHOD_CLOSED_FORM = 1
} cmseq_method;

typedef enum cmseq_matrix_role {
  CMSEQ_SYSTEM_MATRIX = 0,      /* T */
  CMSEQ_NOISE_COVARIANCE = 1,   /* P */
  CMSEQ_INFORMATION_MATRIX = 2, /* J = T' P^-1 T */
  CMSEQ_COVARIANCE = 3          /* C = J^-1 */
} cmseq_matrix_role;

typedef enum cmseq_condition {
  CMSEQ_CONDITION_HOLDS = 0,
  CMSEQ_CONDITION_FAILS = 1,
  CMSEQ_CONDITION_NOT_APPLICABLE = 2
} cmseq_condition;

typedef struct cmseq_model cmseq_model;
typedef struct cmseq_pair cmseq_pair;

typedef struct cmseq_model_info {
  cmseq_model_kind kind;
  int horizon; /* N */
  int dim;
} cmseq_model_info;

typedef struct cmseq_structure_report {
  int is_cml;
  int is_cmf;
  int is_reciprocal;
  int is_markov;
  double tolerance;
  size_t violation_count;
} cmseq_structure_report;

typedef struct cmseq_block_violation {
  int row;
  int col;
  double max_abs;
} cmseq_block_violation;

/* Algebraic reciprocity/Markov identities of a CM model. For non-CM models
 * is_cm_model is 0 and both outcomes are CMSEQ_CONDITION_NOT_APPLICABLE. The
 * *_failure fields hold the first failing index, or -1. */
typedef struct cmseq_condition_report {
  int is_cm_model;
  cmseq_condition reciprocal;
  cmseq_condition markov;
  int reciprocal_failure;
  int markov_failure;
} cmseq_condition_report;

typedef struct cmseq_tolerances {
  double path;
  double precision;
  double noise_cov;
} cmseq_tolerances;

typedef struct cmseq_verification_report {
  double max_path_error;
  double precision_error;
  double noise_cov_error;
  int passed;
  cmseq_tolerances tolerances;
  size_t count;
} cmseq_verification_report;

CMSEQ_API const char* cmseq_version(void);
CMSEQ_API const char* cmseq_last_error(void);
CMSEQ_API const char* cmseq_status_name(cmseq_status status);

CMSEQ_API const char* cmseq_model_kind_name(cmseq_model_kind kind);
CMSEQ_API cmseq_status cmseq_model_kind_from_name(const char* name, cmseq_model_kind* out);
CMSEQ_API cmseq_status cmseq_method_from_name(const char* name, cmseq_method* out);

/* Models */
CMSEQ_API cmseq_status cmseq_model_parse(const char* text, cmseq_model** out);
CMSEQ_API cmseq_status cmseq_model_load(const char* path, cmseq_model** out);
CMSEQ_API cmseq_status cmseq_model_save(const cmseq_model* model, const char* path);
/* Returns a heap string to be released with cmseq_string_free. */
CMSEQ_API cmseq_status cmseq_model_serialize(const cmseq_model* model, char** out);
CMSEQ_API void cmseq_string_free(char* text);
CMSEQ_API void cmseq_model_free(cmseq_model* model);

CMSEQ_API cmseq_status cmseq_model_describe(const cmseq_model* model, cmseq_model_info* out);
CMSEQ_API cmseq_status cmseq_model_matrix(const cmseq_model* model, cmseq_matrix_role role, double* out,
                                          size_t capacity);
CMSEQ_API cmseq_status cmseq_model_solve_path(const cmseq_model* model, const double* xi, size_t length,
                                              double* x_out);

/* Structure */
/* `violations` may be NULL; at most `capacity` entries are written and
 * out->violation_count always holds the total. */
CMSEQ_API cmseq_status cmseq_model_classify(const cmseq_model* model, double tol, cmseq_structure_report* out,
                                            cmseq_block_violation* violations, size_t capacity);
CMSEQ_API cmseq_status cmseq_model_check_conditions(const cmseq_model* model, double tol,
                                                    cmseq_condition_report* out);

/* Equivalence */
CMSEQ_API cmseq_status cmseq_convert(const cmseq_model* source, cmseq_model_kind target, cmseq_method method,
                                     double tol, cmseq_pair** out);
/* Pairs two existing models without checking their equivalence. */
CMSEQ_API cmseq_status cmseq_pair_create(const cmseq_model* source, const cmseq_model* target, cmseq_pair** out);
CMSEQ_API void cmseq_pair_free(cmseq_pair* pair);
CMSEQ_API cmseq_status cmseq_pair_target(const cmseq_pair* pair, cmseq_model** out);
CMSEQ_API cmseq_status cmseq_pair_precision_residual(const cmseq_pair* pair, double* out);
/* path_out may be NULL. */
CMSEQ_API cmseq_status cmseq_pair_map_noise(const cmseq_pair* pair, const double* xi, size_t length,
                                            double* zeta_out, double* path_out);

/* Sampling and verification */
/* Writes count stacked paths, path-major. */
CMSEQ_API cmseq_status cmseq_sample(const cmseq_model* model, uint64_t seed, size_t count, double* paths_out,
                                    size_t capacity);
CMSEQ_API cmseq_status cmseq_sample_save(const cmseq_model* model, uint64_t seed, size_t count, const char* path);
/* tolerances may be NULL for the defaults (1e-8 each). */
CMSEQ_API cmseq_status cmseq_verify(const cmseq_pair* pair, uint64_t seed, size_t count,
                                    const cmseq_tolerances* tolerances, cmseq_verification_report* out);

/* Realization files. With values == NULL only *length (and shape) is reported. */
CMSEQ_API cmseq_status cmseq_realization_read(const char* path, int* horizon, int* dim, double* values,
                                              size_t capacity, size_t* length);
/* path_values may be NULL. */
CMSEQ_API cmseq_status cmseq_realization_write(const char* path, int horizon, int dim, const double* values,
                                               const double* path_values, size_t length);

#ifdef __cplusplus
}
#endif

#endif /* CMSEQ_H */

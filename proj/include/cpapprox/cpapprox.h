/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#ifndef CPAPPROX_CPAPPROX_H
#define CPAPPROX_CPAPPROX_H

/* C interface of libcpapprox.
 *
 * Every call returns a cpa_status. On failure the message, numeric witness
 * and hypothesis tag of the last error on the calling thread are available
 * from cpa_last_error*. Strings handed out through char** parameters are
 * owned by the caller and released with cpa_string_free; strings returned
 * directly are owned by the library. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CPA_API __declspec(dllexport)
#else
#define CPA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CPA_OK = 0,
  CPA_ERR_INVALID_ARGUMENT,
  CPA_ERR_DIMENSION,
  CPA_ERR_NOT_PSD,
  CPA_ERR_SPECTRAL_FLOOR,
  CPA_ERR_NOT_A_STATE,
  CPA_ERR_NOT_GRID_FAITHFUL,
  CPA_ERR_RANGE_CELL_TOO_COARSE,
  CPA_ERR_PRECONDITION,
  CPA_ERR_DEGENERATE_CORNER,
  CPA_ERR_PATTERN_SCALE,
  CPA_ERR_COVER,
  CPA_ERR_CONVERGENCE,
  CPA_ERR_CONFIG,
  CPA_ERR_IO,
  CPA_ERR_INTERNAL
} cpa_status;

typedef struct cpa_state cpa_state;
typedef struct cpa_map cpa_map;
typedef struct cpa_report cpa_report;

CPA_API const char* cpa_version(void);
CPA_API const char* cpa_status_name(cpa_status status);

CPA_API const char* cpa_last_error(void);
CPA_API double cpa_last_error_witness(void);
CPA_API const char* cpa_last_error_tag(void);

CPA_API void cpa_string_free(char* s);

/* States */
CPA_API cpa_status cpa_state_from_json(const char* json, cpa_state** out);
CPA_API cpa_status cpa_state_demo(cpa_state** out);
CPA_API cpa_status cpa_state_rudin(int level, int balance_level, cpa_state** out);
CPA_API cpa_status cpa_state_random(uint64_t seed, int n, int m, int pieces, double lo, double hi, int diagonal,
                                    cpa_state** out);
CPA_API cpa_status cpa_state_to_json(const cpa_state* state, char** json);
CPA_API cpa_status cpa_state_dims(const cpa_state* state, int* n, int* m);
CPA_API cpa_status cpa_state_faithfulness_margin(const cpa_state* state, double* margin);
CPA_API cpa_status cpa_state_is_diagonal(const cpa_state* state, int* diagonal);
CPA_API void cpa_state_free(cpa_state* state);

/* Maps. `functions` are preset names ("constant", "linear", ...). */
CPA_API cpa_status cpa_build_approximation(const cpa_state* state, const char* const* functions, size_t count,
                                           double eps, cpa_map** out, char** diagnostics_json);
CPA_API cpa_status cpa_map_verify_ucp(const cpa_map* map, double tol, int* is_ucp, double* unitality_defect,
                                      double* min_choi_eigenvalue);
CPA_API cpa_status cpa_map_preservation_defect(const cpa_map* map, const cpa_state* state, double* defect);
CPA_API cpa_status cpa_map_numerical_rank(const cpa_map* map, double cutoff, size_t* rank);
CPA_API cpa_status cpa_map_to_json(const cpa_map* map, char** json);
CPA_API cpa_status cpa_map_from_json(const char* json, cpa_map** out);
CPA_API void cpa_map_free(cpa_map* map);

/* Batch commands. The report is produced whenever the config parses far
 * enough to run; check failures show up in its exit code, not the status. */
CPA_API cpa_status cpa_run(const char* config_json, cpa_report** out);
CPA_API int cpa_report_exit_code(const cpa_report* report);
CPA_API cpa_status cpa_report_json(const cpa_report* report, char** json);
CPA_API const char* cpa_report_hash(const cpa_report* report);
CPA_API size_t cpa_report_file_count(const cpa_report* report);
CPA_API const char* cpa_report_file_name(const cpa_report* report, size_t index);
CPA_API const char* cpa_report_file_contents(const cpa_report* report, size_t index);
CPA_API void cpa_report_free(cpa_report* report);

#ifdef __cplusplus
}  // end of extern "C"
#endif

#endif  // CPAPPROX_CPAPPROX_H

#ifndef RANDCERT_H
#define RANDCERT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rc_network rc_network;
typedef struct rc_table rc_table;
typedef struct rc_bound rc_bound;
typedef struct rc_certificate rc_certificate;
typedef struct rc_program rc_program;

typedef enum {
  RC_OK = 0,
  RC_ERR_INVALID_ARGUMENT = 1,
  RC_ERR_PARSE = 2,
  RC_ERR_IO = 3,
  RC_ERR_UNKNOWN_PARTY = 4,
  RC_ERR_ALREADY_INTERRUPTED = 5,
  RC_ERR_SHAPE_MISMATCH = 6,
  RC_ERR_NORMALIZATION = 7,
  RC_ERR_SIGNALING = 8,
  RC_ERR_INVALID_CORRELATORS = 9,
  RC_ERR_DIMENSION_MISMATCH = 10,
  RC_ERR_INCOMPLETE_PROJECTORS = 11,
  RC_ERR_LEVEL_TOO_LARGE = 12,
  RC_ERR_INCOMPATIBLE_INFLATIONS = 13,
  RC_ERR_SOLUTION_SHAPE = 14,
  RC_ERR_UNKNOWN_DISTRIBUTION = 15,
  RC_ERR_INVALID_PARAMS = 16,
  RC_ERR_SOLVER = 17,
  RC_ERR_NULL_HANDLE = 18,
  RC_ERR_INTERNAL = 99
} rc_status;

/* LP outcome, mirrored from the solver. */
typedef enum {
  RC_LP_OPTIMAL = 0,
  RC_LP_INFEASIBLE = 1,
  RC_LP_UNBOUNDED = 2,
  RC_LP_ITERATION_LIMIT = 3,
  RC_LP_NUMERICAL = 4
} rc_lp_status;

typedef enum {
  RC_PROGRAM_BILOC_CLASSICAL_PARENTS = 0,
  RC_PROGRAM_TRIANGLE_CLASSICAL_PARENTS = 1,
  RC_PROGRAM_BILOC_EMBEDDED_BELL = 2,
  RC_PROGRAM_TRIANGLE_EMBEDDED_BELL = 3
} rc_program_kind;

typedef enum { RC_FEASIBLE = 0, RC_INCONCLUSIVE = 1, RC_DISPROVEN_BY_LP = 2 } rc_verdict;

const char* rc_version(void);
const char* rc_status_name(rc_status status);
/* Message of the last failure on the calling thread ("" when none). */
const char* rc_last_error(void);
/* Frees strings returned through char** out-parameters. */
void rc_string_free(char* text);

/* Networks. Built-in names: "bell", "bilocality", "triangle". */
rc_status rc_network_builtin(const char* name, int outcomes, rc_network** out);
rc_status rc_network_parse(const char* text, rc_network** out);
rc_status rc_network_load(const char* path, rc_network** out);
rc_status rc_network_to_text(const rc_network* network, char** out_text);
/* Newline-separated list of invariant violations ("" when valid). */
rc_status rc_network_validate(const rc_network* network, char** out_text);
size_t rc_network_num_parties(const rc_network* network);
void rc_network_free(rc_network* network);

/* Distributions. */
rc_status rc_table_generate(const char* name, const double* params, size_t num_params, rc_table** out);
rc_status rc_table_create(size_t num_parties, const int* outcome_cards, const int* setting_cards,
                          const double* values, size_t num_values, rc_table** out);
rc_status rc_table_load(const char* path, rc_table** out);
rc_status rc_table_save(const rc_table* table, const char* path);
size_t rc_table_num_parties(const rc_table* table);
int rc_table_outcome_card(const rc_table* table, size_t party);
int rc_table_setting_card(const rc_table* table, size_t party);
size_t rc_table_num_values(const rc_table* table);
const double* rc_table_values(const rc_table* table);
/* Content hash written as "fnv1a64:<16 hex digits>"; buffer needs 25 bytes. */
rc_status rc_table_fingerprint(const rc_table* table, char* buffer, size_t size);
/* Newline-separated generator names. */
rc_status rc_distribution_names(char** out_text);
void rc_table_free(rc_table* table);

/* Inflations of the interrupted scenario, one per line: the canonical wiring
 * signature, " ; injectable", then the maximal injectable sets. Targets are
 * comma separated party names; level is "2,2" or "(2, 2)". */
rc_status rc_list_inflations(const rc_network* network, const char* targets, const char* level, int joint,
                             char** out_text);

/* Guessing-probability bounds. `settings` holds one setting per party; a
 * null pointer asks for the worst case over the targets' settings. */
rc_status rc_guessing_bound(const rc_table* table, const rc_network* network, const char* targets,
                            const int* settings, const char* level, int joint, rc_bound** out);
/* Bound from an external solver's solution file for rc_program_guessing at
 * the same arguments; the point is re-verified at `tol`. */
rc_status rc_guessing_bound_import(const rc_table* table, const rc_network* network, const char* targets,
                                   const int* settings, const char* level, int joint, const char* solution_path,
                                   double tol, rc_bound** out);
double rc_bound_value(const rc_bound* bound);
rc_lp_status rc_bound_lp_status(const rc_bound* bound);
size_t rc_bound_inflations(const rc_bound* bound);
/* Report as JSON. `backend` may be null ("reference"). */
rc_status rc_bound_report(const rc_bound* bound, const char* fingerprint, uint64_t seed, double wall_seconds,
                          const char* backend, char** out_json);
void rc_bound_free(rc_bound* bound);

/* No-randomness programs. `hidden_card` is the triangle programs' d;
 * `party` the certified party for triangle classical parents (0, 1, 2);
 * `cover` lists party names for multiparty embedded-Bell runs (null for
 * the single-party program). */
rc_status rc_certify_no_randomness(const rc_table* table, rc_program_kind kind, int hidden_card, int party,
                                   const char* cover, size_t restarts, uint64_t seed, rc_certificate** out);
rc_verdict rc_certificate_verdict(const rc_certificate* cert);
double rc_certificate_residual(const rc_certificate* cert);
double rc_certificate_recovery_error(const rc_certificate* cert);
rc_status rc_certificate_report(const rc_certificate* cert, const char* fingerprint, uint64_t seed,
                                double wall_seconds, char** out_json);
void rc_certificate_free(rc_certificate* cert);

/* Linear programs for export. The guessing program needs explicit settings. */
rc_status rc_program_guessing(const rc_table* table, const rc_network* network, const char* targets,
                              const int* settings, const char* level, int joint, rc_program** out);
rc_status rc_program_biloc_charlie(const rc_table* table, rc_program** out);
size_t rc_program_num_vars(const rc_program* program);
size_t rc_program_num_rows(const rc_program* program);
rc_status rc_program_export_mps(const rc_program* program, const char* path);
/* Solve with the reference simplex, or re-verify a solution file (one
 * decimal per line). `objective` receives the objective value. */
rc_status rc_program_solve(const rc_program* program, rc_lp_status* status, double* objective, double* residual);
rc_status rc_program_import_solution(const rc_program* program, const char* path, double tol, rc_lp_status* status,
                                     double* objective, double* residual);
void rc_program_free(rc_program* program);

/* Writes `content` to `path` through a temporary file and rename. */
rc_status rc_write_file_atomically(const char* path, const char* content);

#ifdef __cplusplus
}
#endif

#endif

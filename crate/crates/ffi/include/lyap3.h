#ifndef LYAP3_H
#define LYAP3_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Lyap3Kind {
  LYAP3_KIND_THM21 = 0,
  LYAP3_KIND_THM22_LEFT = 1,
  LYAP3_KIND_THM22_RIGHT = 2,
  LYAP3_KIND_THM22_FULL = 3,
  LYAP3_KIND_COR21_ABS = 4,
  LYAP3_KIND_ZERO_COUNT = 5,
  LYAP3_KIND_SUP_NORM = 6,
} Lyap3Kind;

/**
 * Status codes; 0 to 4 coincide with the CLI exit codes.
 */
typedef enum Lyap3Status {
  LYAP3_STATUS_OK = 0,
  LYAP3_STATUS_INVARIANT_VIOLATION = 1,
  LYAP3_STATUS_NO_SOLUTION = 2,
  LYAP3_STATUS_INVALID_CONFIG = 3,
  LYAP3_STATUS_RUNTIME_ERROR = 4,
  LYAP3_STATUS_NULL_POINTER = 5,
  LYAP3_STATUS_INVALID_UTF8 = 6,
  LYAP3_STATUS_PANIC = 7,
} Lyap3Status;

typedef enum Lyap3Verdict {
  LYAP3_VERDICT_HOLDS = 0,
  LYAP3_VERDICT_FAILS = 1,
  LYAP3_VERDICT_INCONCLUSIVE = 2,
} Lyap3Verdict;

typedef struct Lyap3Bc1 Lyap3Bc1;

typedef struct Lyap3Bc2 Lyap3Bc2;

/**
 * A parsed scenario that passed the hypothesis gate.
 */
typedef struct Lyap3Scenario Lyap3Scenario;

/**
 * Flat inequality report; absent `c` / `xi` are NaN.
 */
typedef struct Lyap3Report {
  enum Lyap3Kind kind;
  double a;
  double b;
  double c;
  double xi;
  double lhs;
  double threshold;
  double margin;
  double quadrature_error;
  bool holds;
  enum Lyap3Verdict verdict;
} Lyap3Report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *lyap3_last_error(void);

/**
 * `(2/(b-a))^(alpha2 (alpha1 + 1))`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum Lyap3Status lyap3_threshold_power(double a,
                                       double b,
                                       double alpha1,
                                       double alpha2,
                                       double *out);

/**
 * Parses a TOML scenario and runs the hypothesis gate.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` a valid pointer.
 */
enum Lyap3Status lyap3_scenario_from_toml(const char *toml, struct Lyap3Scenario **out);

/**
 * Loads a TOML scenario file and runs the hypothesis gate.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum Lyap3Status lyap3_scenario_load(const char *path, struct Lyap3Scenario **out);

/**
 * # Safety
 * `s` must come from `lyap3_scenario_*` and not be used afterwards.
 */
void lyap3_scenario_free(struct Lyap3Scenario *s);

/**
 * Number of failed hypothesis checks (always 0 for a loaded handle).
 *
 * # Safety
 * `s` must be a live scenario handle; `failed` a valid pointer.
 */
enum Lyap3Status lyap3_scenario_failed_checks(const struct Lyap3Scenario *s, uint32_t *failed);

/**
 * Two-point problem on the scenario interval.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` a valid pointer.
 */
enum Lyap3Status lyap3_solve_bc1(const struct Lyap3Scenario *s, struct Lyap3Bc1 **out);

/**
 * Endpoints, inflection point and `max |u|` of a two-point solution.
 *
 * # Safety
 * `sol` must be a live handle; the out-pointers must be valid.
 */
enum Lyap3Status lyap3_bc1_summary(const struct Lyap3Bc1 *sol,
                                   double *a,
                                   double *b,
                                   double *xi,
                                   double *max_u);

/**
 * `u(x)` from the dense output of a two-point solution.
 *
 * # Safety
 * `sol` must be a live handle; `out` a valid pointer.
 */
enum Lyap3Status lyap3_bc1_u_at(const struct Lyap3Bc1 *sol, double x, double *out);

/**
 * Two-point inequality; with `abs` nonzero the `|q|` variant.
 *
 * # Safety
 * `sol` must be a live handle; `out` a valid pointer.
 */
enum Lyap3Status lyap3_verify_bc1(const struct Lyap3Bc1 *sol, bool abs, struct Lyap3Report *out);

/**
 * # Safety
 * `sol` must come from `lyap3_solve_bc1` and not be used afterwards.
 */
void lyap3_bc1_free(struct Lyap3Bc1 *sol);

/**
 * Three-point problem started at the scenario's `a`.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` a valid pointer.
 */
enum Lyap3Status lyap3_solve_bc2(const struct Lyap3Scenario *s, struct Lyap3Bc2 **out);

/**
 * The three zeros of a three-point solution.
 *
 * # Safety
 * `sol` must be a live handle; the out-pointers must be valid.
 */
enum Lyap3Status lyap3_bc2_zeros(const struct Lyap3Bc2 *sol, double *a, double *b, double *c);

/**
 * Writes the left, right and full reports to `out[0..3]`.
 *
 * # Safety
 * `sol` must be a live handle; `out` must point to three reports.
 */
enum Lyap3Status lyap3_verify_bc2(const struct Lyap3Bc2 *sol, struct Lyap3Report *out);

/**
 * # Safety
 * `sol` must come from `lyap3_solve_bc2` and not be used afterwards.
 */
void lyap3_bc2_free(struct Lyap3Bc2 *sol);

/**
 * Zero-count bound on the scenario interval for the trajectory started
 * with the `[zero_count]` data.
 *
 * # Safety
 * `s` must be a live scenario handle; the out-pointers must be valid.
 */
enum Lyap3Status lyap3_zero_count(const struct Lyap3Scenario *s, uint32_t *n, double *n_bound);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LYAP3_H */

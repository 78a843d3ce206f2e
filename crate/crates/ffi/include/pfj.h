#ifndef PFJ_H
#define PFJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfjStatus {
  PFJ_STATUS_OK = 0,
  PFJ_STATUS_NULL_ARGUMENT = 1,
  PFJ_STATUS_INVALID_UTF8 = 2,
  PFJ_STATUS_SYNTAX_ERROR = 3,
  PFJ_STATUS_CHECK_FAILED = 4,
  PFJ_STATUS_BUDGET_EXHAUSTED = 5,
  PFJ_STATUS_STUCK_NULL = 6,
  PFJ_STATUS_NOT_PROVEN = 7,
  PFJ_STATUS_ILL_FORMED_QUERY = 8,
  PFJ_STATUS_PANIC = 9,
} PfjStatus;

/**
 * A parsed program together with the outcome of its static checks.
 */
typedef struct PfjProgram PfjProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `source` and runs the static checks. A program that parses but
 * fails its checks still yields a handle; analyses on it report
 * `PFJ_STATUS_CHECK_FAILED`.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PfjStatus pfj_program_parse(const char *source, struct PfjProgram **out);

/**
 * # Safety
 * `program` must come from [`pfj_program_parse`] and not be freed twice.
 */
void pfj_program_free(struct PfjProgram *program);

/**
 * Reports the static check verdict; on success writes the type of main.
 *
 * # Safety
 * `program` must be a live handle; `main_type` may be null.
 */
enum PfjStatus pfj_program_check(const struct PfjProgram *program, char **main_type);

/**
 * Reduces main for at most `max_steps` steps and writes the final expression.
 *
 * # Safety
 * `program` must be a live handle; `result` and `steps` may be null.
 */
enum PfjStatus pfj_program_run(const struct PfjProgram *program,
                               size_t max_steps,
                               char **result,
                               size_t *steps);

/**
 * Searches for a derivation assigning `predicate` to main and writes it
 * as an indented tree.
 *
 * # Safety
 * `program` must be a live handle, `predicate` a NUL-terminated string;
 * `derivation` may be null.
 */
enum PfjStatus pfj_program_check_predicate(const struct PfjProgram *program,
                                           const char *predicate,
                                           size_t depth,
                                           char **derivation);

/**
 * Writes every derivable predicate of main, one per line.
 *
 * # Safety
 * `program` must be a live handle; `predicates` may be null.
 */
enum PfjStatus pfj_program_infer(const struct PfjProgram *program, size_t depth, char **predicates);

/**
 * Writes the approximants of main within `steps`, one per line.
 *
 * # Safety
 * `program` must be a live handle; `out` and `complete` may be null.
 */
enum PfjStatus pfj_program_approximants(const struct PfjProgram *program,
                                        size_t steps,
                                        char **out,
                                        bool *complete);

/**
 * Looks for a normal predicate of main. On success writes the predicate;
 * `PFJ_STATUS_NOT_PROVEN` means no evidence was found.
 *
 * # Safety
 * `program` must be a live handle; `predicate` may be null.
 */
enum PfjStatus pfj_program_analyze(const struct PfjProgram *program,
                                   size_t depth,
                                   size_t steps,
                                   char **predicate);

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *pfj_last_error(void);

/**
 * # Safety
 * `s` must be a string returned by this library and not yet freed.
 */
void pfj_string_free(char *s);

const char *pfj_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFJ_H */

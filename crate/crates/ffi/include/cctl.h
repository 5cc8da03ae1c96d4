#ifndef CCTL_H
#define CCTL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which synthesis [`cctl_synthesize`] performs.
 */
typedef enum CctlMode {
  CCTL_MODE_CLASSIC = 0,
  CCTL_MODE_FUTAMURA = 1,
} CctlMode;

/**
 * Result of every fallible call.
 */
typedef enum CctlStatus {
  CCTL_STATUS_OK = 0,
  CCTL_STATUS_NULL_ARGUMENT = 1,
  CCTL_STATUS_INVALID_UTF8 = 2,
  CCTL_STATUS_SYNTAX = 3,
  CCTL_STATUS_POLICY = 4,
  CCTL_STATUS_ANALYSIS = 5,
  CCTL_STATUS_RUN = 6,
  CCTL_STATUS_SPECIALIZE = 7,
  CCTL_STATUS_SYNTHESIS = 8,
  CCTL_STATUS_INVALID_ARGUMENT = 9,
  CCTL_STATUS_PANIC = 10,
} CctlStatus;

/**
 * A state graph produced by analysis.
 */
typedef struct CctlGraph CctlGraph;

/**
 * A parsed logic program.
 */
typedef struct CctlProgram CctlProgram;

/**
 * Outcome of [`cctl_run`].
 */
typedef struct CctlRunStats {
  size_t answers;
  uint64_t inferences;
  /**
   * False when the inference budget cut the search short.
   */
  bool exhausted;
} CctlRunStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *cctl_last_error(void);

/**
 * Parses program text.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum CctlStatus cctl_program_parse(const char *text, struct CctlProgram **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void cctl_program_free(struct CctlProgram *p);

/**
 * Number of clauses in a program, or 0 for null.
 *
 * # Safety
 * `p` must be null or a live program handle.
 */
size_t cctl_program_clause_count(const struct CctlProgram *p);

/**
 * Canonical program text.
 *
 * # Safety
 * `p` must be a live program handle; `out` must be writable.
 */
enum CctlStatus cctl_program_to_string(const struct CctlProgram *p, char **out);

/**
 * Analyzes a program under policy text.
 *
 * # Safety
 * `p` must be a live program handle, `policy` a nul-terminated string and
 * `out` writable.
 */
enum CctlStatus cctl_analyze(const struct CctlProgram *p,
                             const char *policy,
                             size_t max_states,
                             struct CctlGraph **out);

/**
 * # Safety
 * `g` must be null or a graph handle from this library, not yet freed.
 */
void cctl_graph_free(struct CctlGraph *g);

/**
 * Number of states, or 0 for null.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t cctl_graph_state_count(const struct CctlGraph *g);

/**
 * The graph as JSON.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum CctlStatus cctl_graph_to_json(const struct CctlGraph *g, char **out);

/**
 * Synthesizes a left-to-right program from a graph of `p`.
 *
 * # Safety
 * `g` and `p` must be live handles; `out` must be writable.
 */
enum CctlStatus cctl_synthesize(const struct CctlGraph *g,
                                const struct CctlProgram *p,
                                enum CctlMode mode,
                                struct CctlProgram **out);

/**
 * Enumerates all answers of `query` left to right within `max_inferences`.
 *
 * # Safety
 * `p` must be a live program handle, `query` a nul-terminated string and
 * `out` writable.
 */
enum CctlStatus cctl_run(const struct CctlProgram *p,
                         const char *query,
                         uint64_t max_inferences,
                         struct CctlRunStats *out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cctl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCTL_H */

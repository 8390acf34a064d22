/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SNNMAP_H
#define SNNMAP_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. The first four values match the exit
 * codes of the command-line tool.
 */
typedef enum SnnmapStatus {
  SNNMAP_STATUS_OK = 0,
  SNNMAP_STATUS_ANALYSIS_FAILED = 1,
  SNNMAP_STATUS_INVALID_INPUT = 2,
  SNNMAP_STATUS_BUDGET_EXCEEDED = 3,
  SNNMAP_STATUS_NULL_POINTER = 4,
  SNNMAP_STATUS_INVALID_UTF8 = 5,
  SNNMAP_STATUS_BUFFER_TOO_SMALL = 6,
  SNNMAP_STATUS_PANIC = 7,
} SnnmapStatus;

/**
 * Parsed spiking neural network.
 */
typedef struct SnnmapNetwork SnnmapNetwork;

/**
 * Parsed synchronous dataflow graph.
 */
typedef struct SnnmapSdfg SnnmapSdfg;

typedef struct SnnmapThroughput {
  /**
   * Exact period is `period_time / period_iterations` time units.
   */
  uint64_t period_time;
  uint64_t period_iterations;
  double throughput;
} SnnmapThroughput;

typedef struct SnnmapGraphStats {
  double max_in_degree;
  double avg_in_degree;
  double max_out_degree;
  double avg_out_degree;
  size_t diameter;
} SnnmapGraphStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *snnmap_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *snnmap_version(void);

/**
 * Parse an SDFG document (TOML text).
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable. On success `*out`
 * owns a handle to release with [`snnmap_sdfg_free`].
 */
enum SnnmapStatus snnmap_sdfg_parse(const char *text, struct SnnmapSdfg **out);

/**
 * # Safety
 * `g` is null or a handle from [`snnmap_sdfg_parse`] not yet freed.
 */
void snnmap_sdfg_free(struct SnnmapSdfg *g);

/**
 * Number of actors; 0 for a null handle.
 *
 * # Safety
 * `g` is null or a live handle.
 */
size_t snnmap_sdfg_actor_count(const struct SnnmapSdfg *g);

/**
 * Write the repetition vector into `out[0..len]`. `len` must be at least
 * the actor count.
 *
 * # Safety
 * `g` is a live handle; `out` points to `len` writable values.
 */
enum SnnmapStatus snnmap_sdfg_repetition_vector(const struct SnnmapSdfg *g,
                                                uint64_t *out,
                                                size_t len);

/**
 * Set `*deadlock_free` to whether one iteration completes.
 *
 * # Safety
 * `g` is a live handle; `deadlock_free` is writable.
 */
enum SnnmapStatus snnmap_sdfg_check_deadlock(const struct SnnmapSdfg *g, bool *deadlock_free);

/**
 * Self-timed throughput with the capacities stored in the graph.
 * `state_budget` 0 selects the default.
 *
 * # Safety
 * `g` is a live handle; `out` is writable.
 */
enum SnnmapStatus snnmap_sdfg_throughput(const struct SnnmapSdfg *g,
                                         size_t state_budget,
                                         struct SnnmapThroughput *out);

/**
 * Parse an SNN graph document (TOML text).
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable. Release the handle
 * with [`snnmap_network_free`].
 */
enum SnnmapStatus snnmap_network_parse(const char *text, struct SnnmapNetwork **out);

/**
 * # Safety
 * `g` is null or a handle from [`snnmap_network_parse`] not yet freed.
 */
void snnmap_network_free(struct SnnmapNetwork *g);

/**
 * # Safety
 * `g` is a live handle; `out` is writable.
 */
enum SnnmapStatus snnmap_network_stats(const struct SnnmapNetwork *g, struct SnnmapGraphStats *out);

/**
 * Run the full exploration described by the run config at `config_path`,
 * writing results to `out_dir` (null: the config's or the default).
 * `jobs` 0 uses every core.
 *
 * # Safety
 * `config_path` is a NUL-terminated string; `out_dir` is null or one.
 */
enum SnnmapStatus snnmap_explore(const char *config_path, const char *out_dir, size_t jobs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNNMAP_H */

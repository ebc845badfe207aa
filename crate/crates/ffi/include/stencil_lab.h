#ifndef STENCIL_LAB_H
#define STENCIL_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  /**
   * Bad UTF-8, bad enum value or a buffer that is too small.
   */
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_CONFIG = 3,
  SL_STATUS_INPUT = 4,
  SL_STATUS_SINGULAR_LOCAL = 5,
  SL_STATUS_SINGULAR_SYSTEM = 6,
  SL_STATUS_NO_CONVERGENCE = 7,
  SL_STATUS_IO = 8,
  SL_STATUS_PARSE = 9,
  SL_STATUS_PANIC = 10,
} SlStatus;

typedef enum SlGenerator {
  SL_GENERATOR_ADVANCING_FRONT = 0,
  SL_GENERATOR_HALTON = 1,
  SL_GENERATOR_POLAR = 2,
} SlGenerator;

/**
 * A generated node set.
 */
typedef struct SlNodeSet SlNodeSet;

/**
 * Records of an executed sweep.
 */
typedef struct SlRun SlRun;

/**
 * Differentiation weights, one row per node, in CSR layout.
 */
typedef struct SlWeights SlWeights;

typedef struct SlQuality {
  double rho;
  double delta;
  double gamma;
} SlQuality;

/**
 * One row of a stencil-size sweep; failed solves have NaN fields and
 * `ok == 0`.
 */
typedef struct SlSweepRecord {
  size_t n;
  double e_max_poiss;
  double e_avg_poiss;
  double e_max_lap;
  double e_avg_lap;
  double dn_poiss;
  double dn_lap;
  double wall_time_s;
  /**
   * NaN unless the IMEX indicator was requested.
   */
  double imex_avg;
  int32_t ok;
} SlSweepRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *sl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * Generates nodes in `domain`: a name (`disc`, `ball`, ...) or a JSON shape
 * description such as `{"shape":"disc","center":[0,0],"radius":1}`.
 * `generator` is an [`SlGenerator`] value.
 *
 * # Safety
 * `domain` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SlStatus sl_nodes_generate(const char *domain,
                                double h,
                                uint64_t seed,
                                uint32_t generator,
                                struct SlNodeSet **out);

/**
 * # Safety
 * `nodes` must come from `sl_nodes_generate` (or be null).
 */
void sl_nodes_free(struct SlNodeSet *nodes);

/**
 * Number of nodes, 0 for a null handle.
 *
 * # Safety
 * `nodes` must be a live handle or null.
 */
size_t sl_nodes_len(const struct SlNodeSet *nodes);

/**
 * Spatial dimension, 0 for a null handle.
 *
 * # Safety
 * `nodes` must be a live handle or null.
 */
size_t sl_nodes_dim(const struct SlNodeSet *nodes);

/**
 * Copies positions row-major (`len * dim` values) into `buf`.
 *
 * # Safety
 * `buf` must point to `buf_len` writable doubles.
 */
enum SlStatus sl_nodes_positions(const struct SlNodeSet *nodes, double *buf, size_t buf_len);

/**
 * Writes 1 for boundary nodes and 0 for interior nodes.
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes.
 */
enum SlStatus sl_nodes_boundary_mask(const struct SlNodeSet *nodes, uint8_t *buf, size_t buf_len);

/**
 * Fill distance, separation distance and their ratio, estimated with
 * `probe_density^dim` probes.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SlStatus sl_nodes_quality(const struct SlNodeSet *nodes,
                               size_t probe_density,
                               struct SlQuality *out);

/**
 * Weights of `op` (`laplacian`, `identity`, `L1`..`L5`) on the `n`
 * nearest neighbours of every node, with kernel `kernel` (`phs3`,
 * `gauss:1`, ...) and monomials up to degree `m`.
 *
 * # Safety
 * `op` and `kernel` must be NUL-terminated strings, `out` a valid pointer.
 */
enum SlStatus sl_weights_compute(const struct SlNodeSet *nodes,
                                 const char *op,
                                 const char *kernel,
                                 uint32_t m,
                                 size_t n,
                                 struct SlWeights **out);

/**
 * # Safety
 * `weights` must come from `sl_weights_compute` (or be null).
 */
void sl_weights_free(struct SlWeights *weights);

/**
 * Number of stored weights, 0 for a null handle.
 *
 * # Safety
 * `weights` must be a live handle or null.
 */
size_t sl_weights_nnz(const struct SlWeights *weights);

/**
 * Number of rows, 0 for a null handle.
 *
 * # Safety
 * `weights` must be a live handle or null.
 */
size_t sl_weights_rows(const struct SlWeights *weights);

/**
 * Copies the CSR arrays: `row_ptr` (rows + 1), `cols` and `values` (nnz).
 *
 * # Safety
 * Each buffer must hold the stated number of elements.
 */
enum SlStatus sl_weights_csr(const struct SlWeights *weights,
                             size_t *row_ptr,
                             size_t row_ptr_len,
                             size_t *cols,
                             double *values,
                             size_t nnz_len);

/**
 * Executes a sweep described by a TOML or JSON configuration in memory;
 * nothing is written to disk.
 *
 * # Safety
 * `config` must be a NUL-terminated string, `out` a valid pointer.
 */
enum SlStatus sl_sweep_run(const char *config, struct SlRun **out);

/**
 * # Safety
 * `run` must come from `sl_sweep_run` (or be null).
 */
void sl_run_free(struct SlRun *run);

/**
 * Number of records, 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t sl_run_len(const struct SlRun *run);

/**
 * Copies the records into `buf`.
 *
 * # Safety
 * `buf` must point to `buf_len` writable records.
 */
enum SlStatus sl_run_records(const struct SlRun *run, struct SlSweepRecord *buf, size_t buf_len);

/**
 * Runs a configuration file like `stencil-lab run --config`, writing CSV
 * and manifest into the configured output directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum SlStatus sl_run_config_file(const char *path, bool dump_system);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STENCIL_LAB_H */

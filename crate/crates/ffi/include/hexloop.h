#ifndef HEXLOOP_H
#define HEXLOOP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HxlStatus {
  HXL_STATUS_OK = 0,
  HXL_STATUS_NULL_POINTER = 1,
  /**
   * Invalid argument or configuration.
   */
  HXL_STATUS_INVALID = 2,
  /**
   * A documented precondition failed (frozen weights, empty sector, ...).
   */
  HXL_STATUS_PRECONDITION = 3,
  /**
   * An internal consistency check failed.
   */
  HXL_STATUS_INVARIANT = 4,
  HXL_STATUS_PANIC = 5,
} HxlStatus;

/**
 * A flip Markov chain.
 */
typedef struct HxlChain HxlChain;

/**
 * A dimer configuration on a torus.
 */
typedef struct HxlConfig HxlConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hxl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hxl_version(void);

/**
 * Limiting A, B and C edge probabilities for weights `(a, b, c)`.
 *
 * # Safety
 * `out` must point to 3 writable doubles.
 */
enum HxlStatus hxl_edge_probabilities(double a, double b, double c, double *out);

/**
 * Probability that a hexagon carries a given alternating edge triple.
 *
 * # Safety
 * `out` must be writable.
 */
enum HxlStatus hxl_hexagon_triple_probability(double a, double b, double c, double *out);

/**
 * Inverse Kasteleyn entry for the cell displacement `(dn, dm)` from the
 * white to the black vertex.
 *
 * # Safety
 * `value` must be writable; `error_estimate` may be null.
 */
enum HxlStatus hxl_kinv_entry(double a,
                              double b,
                              double c,
                              int32_t dn,
                              int32_t dm,
                              double tol,
                              double *value,
                              double *error_estimate);

/**
 * Number of perfect matchings of the k×k torus by exhaustive search.
 * Sizes above the built-in guard need `allow_large`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HxlStatus hxl_enumerate_count(size_t k, bool allow_large, uint64_t *out);

/**
 * Maximal-height configuration of the k×k torus in sector `(i, j)`.
 *
 * # Safety
 * `out` must be writable; the result is released with [`hxl_config_free`].
 */
enum HxlStatus hxl_config_new(size_t k, int64_t i, int64_t j, struct HxlConfig **out);

/**
 * Decodes the first record of a binary configuration buffer.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum HxlStatus hxl_config_from_bytes(const uint8_t *data, size_t len, struct HxlConfig **out);

/**
 * Serializes a configuration. With `buf` null only `written` is set to the
 * needed size.
 *
 * # Safety
 * `cfg` must be a live handle, `written` writable and `buf` (if not null)
 * must hold `cap` bytes.
 */
enum HxlStatus hxl_config_to_bytes(const struct HxlConfig *cfg,
                                   uint8_t *buf,
                                   size_t cap,
                                   size_t *written);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void hxl_config_free(struct HxlConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum HxlStatus hxl_config_clone(const struct HxlConfig *cfg, struct HxlConfig **out);

/**
 * Number of A, B and C dimers.
 *
 * # Safety
 * `cfg` must be a live handle and `out` must hold 3 values.
 */
enum HxlStatus hxl_config_type_counts(const struct HxlConfig *cfg, size_t *out);

/**
 * Height change around the two fundamental cycles.
 *
 * # Safety
 * `cfg` must be a live handle, `i` and `j` writable.
 */
enum HxlStatus hxl_config_height_change(const struct HxlConfig *cfg, int64_t *i, int64_t *j);

/**
 * Flips face `(n, m)` if it is flippable; `flipped` reports whether it was.
 *
 * # Safety
 * `cfg` must be a live handle; `flipped` may be null.
 */
enum HxlStatus hxl_config_flip(struct HxlConfig *cfg, int32_t n, int32_t m, bool *flipped);

/**
 * SVG picture; the string is released with [`hxl_string_free`].
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum HxlStatus hxl_config_render_svg(const struct HxlConfig *cfg,
                                     bool loops,
                                     bool heights,
                                     char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void hxl_string_free(char *s);

/**
 * Metropolis flip chain started from a copy of `start`.
 *
 * # Safety
 * `start` must be a live handle and `out` writable; the result is released
 * with [`hxl_chain_free`].
 */
enum HxlStatus hxl_chain_new(const struct HxlConfig *start,
                             double a,
                             double b,
                             double c,
                             uint64_t seed,
                             struct HxlChain **out);

/**
 * Runs `sweeps` sweeps; `accepted` (may be null) receives the flip count.
 *
 * # Safety
 * `chain` must be a live handle.
 */
enum HxlStatus hxl_chain_sweep(struct HxlChain *chain, size_t sweeps, uint64_t *accepted);

/**
 * Copy of the chain's current configuration.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
enum HxlStatus hxl_chain_config(const struct HxlChain *chain, struct HxlConfig **out);

/**
 * # Safety
 * `chain` must be null or a handle not yet freed.
 */
void hxl_chain_free(struct HxlChain *chain);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEXLOOP_H */

#ifndef AWH_VLASOV_H
#define AWH_VLASOV_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum AwhStatus {
  AWH_STATUS_OK = 0,
  AWH_STATUS_NULL_POINTER = 1,
  AWH_STATUS_INVALID_ARGUMENT = 2,
  AWH_STATUS_INVALID_CONFIG = 3,
  AWH_STATUS_PARSE = 4,
  AWH_STATUS_NON_CONVERGENCE = 5,
  AWH_STATUS_NUMERICAL = 6,
  AWH_STATUS_IO = 7,
  AWH_STATUS_BUFFER_TOO_SMALL = 8,
  AWH_STATUS_PANIC = 9,
} AwhStatus;

/**
 * Opaque simulation handle.
 */
typedef struct AwhSimulation AwhSimulation;

/**
 * Velocity-basis parameters of one species.
 */
typedef struct AwhBasis {
  double alpha;
  double u;
} AwhBasis;

/**
 * Conservation and field diagnostics at the current time.
 */
typedef struct AwhDiagnostics {
  double time;
  double total_mass;
  double total_momentum;
  double total_energy;
  double potential_energy;
  double mass_err;
  double momentum_err;
  double energy_err;
  double f_min;
  double f_max;
  double e_l2;
} AwhDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The pointer
 * stays valid until the next call into this library from the same thread.
 */
const char *awh_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *awh_version(void);

/**
 * Creates a simulation from configuration text (`key = value` lines; an
 * empty string gives the default two-stream setup).
 *
 * # Safety
 * `config` must be a NUL-terminated string or NULL; `out` must be writable.
 */
enum AwhStatus awh_simulation_create(const char *config, struct AwhSimulation **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `sim` must come from [`awh_simulation_create`] and not be used afterwards.
 */
void awh_simulation_free(struct AwhSimulation *sim);

/**
 * Advances `steps` time steps. On failure the state stays at the last
 * successfully completed step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum AwhStatus awh_simulation_step(struct AwhSimulation *sim, size_t steps);

/**
 * # Safety
 * `sim` must be a live handle and `time` writable.
 */
enum AwhStatus awh_simulation_time(const struct AwhSimulation *sim, double *time);

/**
 * Number of species, highest Hermite index `nv` and highest Fourier index `nx`.
 *
 * # Safety
 * `sim` must be a live handle; output pointers must be writable.
 */
enum AwhStatus awh_simulation_dims(const struct AwhSimulation *sim,
                                   size_t *species,
                                   size_t *nv,
                                   size_t *nx);

/**
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum AwhStatus awh_simulation_basis(const struct AwhSimulation *sim,
                                    size_t species,
                                    struct AwhBasis *out);

/**
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum AwhStatus awh_simulation_diagnostics(const struct AwhSimulation *sim,
                                          struct AwhDiagnostics *out);

/**
 * Copies the Hermite-Fourier coefficients of one species, `(nv+1)*(nx+1)`
 * values each for the real and imaginary parts, row-major in `(n, k)`.
 *
 * # Safety
 * `re` and `im` must each hold `len` doubles.
 */
enum AwhStatus awh_simulation_coefficients(const struct AwhSimulation *sim,
                                           size_t species,
                                           double *re,
                                           double *im,
                                           size_t len);

/**
 * Evaluates `f_s(x, v)` on the tensor grid `x[0..nx_pts] x v[0..nv_pts]`,
 * written x-major into `out` (`out[ix * nv_pts + iv]`).
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum AwhStatus awh_simulation_reconstruct(const struct AwhSimulation *sim,
                                          size_t species,
                                          const double *x,
                                          size_t nx_pts,
                                          const double *v,
                                          size_t nv_pts,
                                          double *out,
                                          size_t out_len);

/**
 * Dense `(nv+1) x (nv+1)` row-major matrix mapping coefficients in basis
 * `from` to basis `to`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum AwhStatus awh_transform_build(struct AwhBasis from,
                                   struct AwhBasis to,
                                   size_t nv,
                                   double *out,
                                   size_t len);

/**
 * Re-expresses one real coefficient column `input[0..=nv]` in basis `to`.
 *
 * # Safety
 * `input` and `output` must each hold `nv + 1` doubles; they may not overlap.
 */
enum AwhStatus awh_transform_apply(struct AwhBasis from,
                                   struct AwhBasis to,
                                   size_t nv,
                                   const double *input,
                                   double *output);

/**
 * `psi_0(v) .. psi_nmax(v)` of the basis `b`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum AwhStatus awh_psi(struct AwhBasis b, double v, size_t nmax, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AWH_VLASOV_H */

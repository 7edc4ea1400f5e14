#ifndef LOOPJORDAN_H
#define LOOPJORDAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum LjStatus {
  LJ_STATUS_OK = 0,
  LJ_STATUS_INVALID_ARGUMENT = 1,
  LJ_STATUS_DEGENERATE_NORMALIZATION = 2,
  LJ_STATUS_DEGENERATE_MEASUREMENT = 3,
  LJ_STATUS_NUMERICAL_FAILURE = 4,
  LJ_STATUS_UNRESOLVED = 5,
  LJ_STATUS_LIMIT_FAILURE = 6,
  LJ_STATUS_NULL_POINTER = 7,
  LJ_STATUS_BUFFER_TOO_SMALL = 8,
  LJ_STATUS_PANIC = 9,
} LjStatus;

typedef enum LjConvention {
  LJ_CONVENTION_PLAIN = 0,
  LJ_CONVENTION_NEGATED = 1,
} LjConvention;

/**
 * Lattice operators that can be read out of a module handle.
 */
typedef enum LjOperator {
  /**
   * Unscaled Hamiltonian, minus the sum of the generators.
   */
  LJ_OPERATOR_HAMILTONIAN = 0,
  /**
   * Symmetric mode `H_n`.
   */
  LJ_OPERATOR_HN = 1,
  /**
   * Left mode `L_n`.
   */
  LJ_OPERATOR_LN = 2,
  /**
   * Right mode `Lbar_n`.
   */
  LJ_OPERATOR_LBAR_N = 3,
  /**
   * Translation by one site.
   */
  LJ_OPERATOR_TRANSLATION = 4,
} LjOperator;

/**
 * Opaque module handle: basis, parameters and cached generators.
 */
typedef struct LjModule LjModule;

/**
 * Result of the b(T, t) limit.
 */
typedef struct LjBttLimit {
  double b1;
  double b2;
  double spread;
  double max_imag;
} LjBttLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a module at central charge `c`.
 *
 * `module` uses the same syntax as the command line, e.g. `"standard:1"` or `"glued-quotient:2"`.
 *
 * # Safety
 * `module` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LjStatus lj_module_new(size_t n,
                            const char *module,
                            enum LjConvention conv,
                            double c,
                            struct LjModule **out);

/**
 * Builds a module with a free loop weight `m` and bulk energy `e_inf`.
 *
 * # Safety
 * As [`lj_module_new`].
 */
enum LjStatus lj_module_new_custom(size_t n,
                                   const char *module,
                                   enum LjConvention conv,
                                   double m,
                                   double e_inf,
                                   struct LjModule **out);

/**
 * Releases a module handle. Null is ignored.
 *
 * # Safety
 * `module` must come from `lj_module_new*` and not be used afterwards.
 */
void lj_module_free(struct LjModule *module);

/**
 * Dimension of the module, or 0 for a null handle.
 *
 * # Safety
 * `module` must be null or a live handle.
 */
size_t lj_module_dim(const struct LjModule *module);

/**
 * Writes an operator as a dense row-major matrix into `re` and `im`, each of length `len >= dim*dim`.
 *
 * `mode` is the Fourier index for `Hn`, `Ln` and `LbarN`, and the power for `Translation`.
 *
 * # Safety
 * `module` must be a live handle; `re` and `im` must hold `len` doubles.
 */
enum LjStatus lj_module_operator(const struct LjModule *module,
                                 enum LjOperator which,
                                 int64_t mode,
                                 double *re,
                                 double *im,
                                 size_t len);

/**
 * Jordan-ness J of two vectors of length `len`, given as split real and imaginary parts.
 *
 * # Safety
 * All four arrays must hold `len` doubles; `out` must be valid.
 */
enum LjStatus lj_j_measure(const double *u_re,
                           const double *u_im,
                           const double *v_re,
                           const double *v_im,
                           size_t len,
                           double *out);

/**
 * b(T, t) at `n` sites, extrapolated to c = 0.
 *
 * # Safety
 * `out` must be valid.
 */
enum LjStatus lj_btt_limit(size_t n, struct LjBttLimit *out);

/**
 * Bulk energy per site of the unscaled Hamiltonian at anisotropy `gamma`.
 *
 * # Safety
 * `out` must be valid.
 */
enum LjStatus lj_e_infinity(double gamma, double *out);

/**
 * Kac weight h_{r,s} at parameter x.
 */
double lj_kac_weight(double r, double s, double x);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or hold `len` bytes.
 */
size_t lj_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lj_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOOPJORDAN_H */

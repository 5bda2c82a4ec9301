#ifndef NELSON_FIBER_H
#define NELSON_FIBER_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NfStatus {
  NF_STATUS_OK = 0,
  NF_STATUS_NULL_POINTER = 1,
  NF_STATUS_INVALID_UTF8 = 2,
  NF_STATUS_INVALID_ARGUMENT = 3,
  NF_STATUS_CONFIG = 4,
  NF_STATUS_CUTOFF_ORDER = 5,
  NF_STATUS_DIMENSION_CEILING = 6,
  NF_STATUS_NUMERICAL = 7,
  NF_STATUS_BUFFER_TOO_SMALL = 8,
  NF_STATUS_IO = 9,
  NF_STATUS_PANIC = 10,
} NfStatus;

// Which operator of an assembled Hamiltonian to read.
typedef enum NfOperator {
  NF_OPERATOR_FULL = 0,
  NF_OPERATOR_RENORMALIZED = 1,
  NF_OPERATOR_LOCAL = 2,
  NF_OPERATOR_TAIL = 3,
} NfOperator;

// Assembled Hamiltonians for one configuration.
typedef struct NfHamiltonian NfHamiltonian;

// Result of the full check suite.
typedef struct NfRun NfRun;

typedef struct NfGroundState {
  double lambda_min;
  double gap;
  double spectral_radius;
  bool strictly_positive;
  bool degenerate;
} NfGroundState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Why the last call on this thread failed, or an empty string if it
// succeeded. The pointer stays valid until the next call into this library
// on the same thread.
const char *nf_last_error(void);

// Library version as a static string.
const char *nf_version(void);

// Assembles every Hamiltonian described by a JSON configuration.
//
// # Safety
// `config_json` must be a nul-terminated string and `out` a valid pointer.
enum NfStatus nf_hamiltonian_new(const char *config_json, struct NfHamiltonian **out);

// # Safety
// `h` must come from [`nf_hamiltonian_new`] and not be used afterwards.
void nf_hamiltonian_free(struct NfHamiltonian *h);

// Writes the number of modes and the Fock space dimension.
//
// # Safety
// All pointers must be valid.
enum NfStatus nf_hamiltonian_shape(const struct NfHamiltonian *h, size_t *modes, size_t *dimension);

// Energy counterterms `E_Λ`, `E_κ` and `E_κ^Λ` used in the assembly.
//
// # Safety
// All pointers must be valid.
enum NfStatus nf_hamiltonian_energies(const struct NfHamiltonian *h,
                                      double *e_lambda,
                                      double *e_kappa,
                                      double *e_window);

// Copies one operator in column-major order. `len` must be at least
// `dim * dim` for that operator; on [`NfStatus::BufferTooSmall`] the
// required length is written to `required`.
//
// # Safety
// `buffer` must hold `len` doubles; `required` may be null.
enum NfStatus nf_hamiltonian_copy(const struct NfHamiltonian *h,
                                  enum NfOperator which,
                                  double *buffer,
                                  size_t len,
                                  size_t *required);

// Ground-state data of one operator.
//
// # Safety
// All pointers must be valid.
enum NfStatus nf_hamiltonian_ground(const struct NfHamiltonian *h,
                                    enum NfOperator which,
                                    double gap_rel,
                                    double tau_pos,
                                    struct NfGroundState *out);

// Smallest entry of `e^{-β H}` for the chosen operator.
//
// # Safety
// All pointers must be valid.
enum NfStatus nf_semigroup_min_entry(const struct NfHamiltonian *h,
                                     enum NfOperator which,
                                     double beta,
                                     double *out);

// Runs the full check suite for a JSON configuration.
//
// # Safety
// `config_json` must be a nul-terminated string and `out` a valid pointer.
enum NfStatus nf_run(const char *config_json, struct NfRun **out);

// Whether the run had no failing fatal or expected-negative checks.
//
// # Safety
// All pointers must be valid.
enum NfStatus nf_run_summary(const struct NfRun *r, bool *passed, size_t *total, size_t *failed);

// The full report as JSON, owned by the handle.
//
// # Safety
// `r` must be a live handle; returns null for a null handle.
const char *nf_run_report_json(const struct NfRun *r);

// # Safety
// `r` must come from [`nf_run`] and not be used afterwards.
void nf_run_free(struct NfRun *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NELSON_FIBER_H */

#ifndef SURFHAM_H
#define SURFHAM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SurfhamStatus {
  SURFHAM_STATUS_OK = 0,
  SURFHAM_STATUS_NULL_POINTER = 1,
  SURFHAM_STATUS_INVALID_UTF8 = 2,
  SURFHAM_STATUS_IO = 3,
  SURFHAM_STATUS_PARSE = 4,
  SURFHAM_STATUS_VALIDATION = 5,
  SURFHAM_STATUS_UNKNOWN_ELEMENT = 6,
  SURFHAM_STATUS_SOLVE = 7,
  SURFHAM_STATUS_CALIBRATION = 8,
  SURFHAM_STATUS_INVALID_ARGUMENT = 9,
  SURFHAM_STATUS_PANIC = 10,
} SurfhamStatus;

// The effective Hamiltonian of one solved cell with its Pauli coefficients.
typedef struct SurfhamCell SurfhamCell;

// A device layout.
typedef struct SurfhamLayout SurfhamLayout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *surfham_version(void);

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *surfham_last_error(void);

// Loads a layout from a TOML (or `.json`) file.
//
// # Safety
// `path` must be a valid C string and `out` a writable pointer.
enum SurfhamStatus surfham_layout_load(const char *path, struct SurfhamLayout **out);

// Parses a layout from TOML text.
//
// # Safety
// `text` must be a valid C string and `out` a writable pointer.
enum SurfhamStatus surfham_layout_from_toml(const char *text, struct SurfhamLayout **out);

// The built-in single reference cell.
//
// # Safety
// `out` must be a writable pointer.
enum SurfhamStatus surfham_layout_default_cell(struct SurfhamLayout **out);

// Releases a layout. Null is ignored.
//
// # Safety
// `layout` must come from this library and not be used afterwards.
void surfham_layout_free(struct SurfhamLayout *layout);

// Number of qubits, or 0 for a null handle.
//
// # Safety
// `layout` must be null or a live handle.
size_t surfham_layout_qubit_count(const struct SurfhamLayout *layout);

// Number of unit cells, or 0 for a null handle.
//
// # Safety
// `layout` must be null or a live handle.
size_t surfham_layout_cell_count(const struct SurfhamLayout *layout);

// Biases one cell: `j_mhz == 0` puts every coupler at hard-OFF, otherwise
// the gate coupler is set to `|J13| = j_mhz` with the others OFF. With
// `resonant != 0` the gate partner is tuned onto the central qubit. The
// result is a new single-cell layout.
//
// # Safety
// `layout` must be a live handle, `cell` a valid C string and `out` writable.
enum SurfhamStatus surfham_layout_calibrate(const struct SurfhamLayout *layout,
                                            const char *cell,
                                            double j_mhz,
                                            int32_t resonant,
                                            struct SurfhamLayout **out);

// Solves one cell. `excitation_cap == 0` keeps the default truncation.
//
// # Safety
// `layout` must be a live handle, `cell` a valid C string and `out` writable.
enum SurfhamStatus surfham_cell_solve(const struct SurfhamLayout *layout,
                                      const char *cell,
                                      size_t excitation_cap,
                                      struct SurfhamCell **out);

// Releases a solved cell. Null is ignored.
//
// # Safety
// `cell` must come from this library and not be used afterwards.
void surfham_cell_free(struct SurfhamCell *cell);

// Number of qubits in a solved cell, or 0 for a null handle.
//
// # Safety
// `cell` must be null or a live handle.
size_t surfham_cell_qubit_count(const struct SurfhamCell *cell);

// Dressed 0→1 frequency of qubit `index` (cell order, central first), MHz.
//
// # Safety
// `cell` must be a live handle and `out` writable.
enum SurfhamStatus surfham_cell_frequency(const struct SurfhamCell *cell,
                                          size_t index,
                                          double *out);

// Normalized Pauli coefficient of a string such as `"ZIZII"`, MHz.
//
// # Safety
// `cell` must be a live handle, `pauli` a valid C string and `out` writable.
enum SurfhamStatus surfham_cell_coefficient(const struct SurfhamCell *cell,
                                            const char *pauli,
                                            double *out);

// Error of an iSWAP at `|J| = j_mhz` with a static Z1Z3 stray `zz_mhz`.
// `t1_ns <= 0` means no decoherence (T2 = T1 otherwise). `process != 0`
// returns the process infidelity instead of the average gate infidelity.
//
// # Safety
// `out` must be writable.
enum SurfhamStatus surfham_gate_error(double j_mhz,
                                      double zz_mhz,
                                      double t1_ns,
                                      int32_t process,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFHAM_H */

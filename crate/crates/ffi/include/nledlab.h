#ifndef NLEDLAB_H
#define NLEDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  NLED_STATUS_OK = 0,
  NLED_STATUS_NULL_POINTER = 1,
  NLED_STATUS_INVALID_ARGUMENT = 2,
  NLED_STATUS_FIELD_BOUND_EXCEEDED = 3,
  NLED_STATUS_NUMERICAL_FAILURE = 4,
  NLED_STATUS_INVALID_STATE = 5,
  NLED_STATUS_BUFFER_TOO_SMALL = 6,
  NLED_STATUS_PANIC = 7,
} NledStatus;

typedef enum {
  // `B` is a flux density in tesla, converted with `c`.
  NLED_INTERPRETATION_TESLA = 0,
  // `B` is already the field-strength component.
  NLED_INTERPRETATION_F_COMPONENT = 1,
} NledInterpretation;

typedef enum {
  NLED_FIELD_COMPONENT_EX = 0,
  NLED_FIELD_COMPONENT_BY = 1,
  NLED_FIELD_COMPONENT_DX = 2,
  NLED_FIELD_COMPONENT_HY = 3,
  NLED_FIELD_COMPONENT_X = 4,
  NLED_FIELD_COMPONENT_Y = 5,
  NLED_FIELD_COMPONENT_DELTA = 6,
  NLED_FIELD_COMPONENT_Z = 7,
} NledFieldComponent;

// Opaque Lagrangian model.
typedef struct NledModel NledModel;

// Opaque 1+1D simulation.
typedef struct NledSimulation NledSimulation;

typedef struct {
  double lagrangian;
  double l_x;
  double l_y;
  double l_xx;
  double l_xy;
  double l_yy;
  double m;
  double n;
  double l;
  double delta;
} NledScalars;

typedef struct {
  double t;
  double em_energy;
  double fluid_mass;
  // NaN when the field is identically zero
  double centroid;
  double max_delta_excursion;
  double div_t_residual;
} NledDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t nled_last_error_message(char *buf, size_t len);

// # Safety
// `out` must be valid for writing one pointer.
NledStatus nled_model_maxwell(double eps0, NledModel **out);

// # Safety
// `out` must be valid for writing one pointer.
NledStatus nled_model_born_infeld(double kappa, double eps0, NledModel **out);

// # Safety
// `model` must be null or a handle from this library, not yet freed.
void nled_model_free(NledModel *model);

// # Safety
// `model` must be a live handle and `out` writable.
NledStatus nled_model_eval_scalars(const NledModel *model, double x, double y, NledScalars *out);

// `(e, b) → (D, H)`; all four arrays hold three doubles.
//
// # Safety
// `model` must be a live handle; the arrays must be valid for three doubles.
NledStatus nled_model_constitutive(const NledModel *model,
                                   const double *e,
                                   const double *b,
                                   double *d_out,
                                   double *h_out);

// Stress-energy tensor with upper indices, row-major `T[a*4 + b]`, index 0 = t.
//
// # Safety
// `model` must be a live handle; `e`, `b` valid for three doubles, `t_out` for sixteen.
NledStatus nled_model_stress_energy(const NledModel *model,
                                    const double *e,
                                    const double *b,
                                    double *t_out);

// Phase speed `1/√(1 + κ²B²)` in units of `c`.
double nled_phase_speed(double kappa, double b);

double nled_kappa_from_electron_radius(void);

// Exact transit delay in seconds for a path of `l0` metres.
//
// # Safety
// `out` must be writable.
NledStatus nled_transit_delay_exact(double l0,
                                    double b,
                                    double kappa,
                                    NledInterpretation interpretation,
                                    double *out);

// Linear estimate `(l0/2) κ |B|`, for comparison only.
//
// # Safety
// `out` must be writable.
NledStatus nled_transit_delay_linear(double l0, double b, double kappa, double *out);

// Smallest `κ` whose exact delay reaches `resolution` seconds.
//
// # Safety
// `out` must be writable.
NledStatus nled_kappa_bound_from_timing(double l0,
                                        double b,
                                        double resolution,
                                        NledInterpretation interpretation,
                                        double *out);

// Builds a simulation from a JSON run configuration (the CLI format).
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
NledStatus nled_simulation_from_json(const char *json, NledSimulation **out);

// # Safety
// `sim` must be null or a handle from this library, not yet freed.
void nled_simulation_free(NledSimulation *sim);

// Advances by `steps` RK4 steps of size `dt`. On failure the state is left at
// the last completed step.
//
// # Safety
// `sim` must be a live handle.
NledStatus nled_simulation_step(NledSimulation *sim, double dt, size_t steps);

// # Safety
// `sim` must be a live handle and the out-pointers writable.
NledStatus nled_simulation_info(const NledSimulation *sim, size_t *n_cells, double *dz, double *t);

// Copies one per-cell quantity into `buf`, which must hold `len >= n_cells` doubles.
//
// # Safety
// `sim` must be a live handle and `buf` valid for `len` doubles.
NledStatus nled_simulation_copy_field(const NledSimulation *sim,
                                      NledFieldComponent which,
                                      double *buf,
                                      size_t len);

// # Safety
// `sim` must be a live handle and `out` writable.
NledStatus nled_simulation_diagnostics(const NledSimulation *sim, NledDiagnostics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLEDLAB_H */

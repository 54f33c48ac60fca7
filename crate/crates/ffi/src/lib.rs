//! C ABI over `nledlab`.
//!
//! Every entry point returns an [`NledStatus`]; results go through out-pointers.
//! Handles are opaque and must be released with the matching `_free` function.
//! On failure the message is kept per thread and can be read with
//! [`nled_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nledlab::cli::ConfigFile;
use nledlab::exact::{self, BInterpretation, ExperimentDesign};
use nledlab::forms::{eb_from_two_form, two_form_from_eb};
use nledlab::nled::LagrangianModel;
use nledlab::solver::Simulation;
use nledlab::NledError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NledStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FieldBoundExceeded = 3,
    NumericalFailure = 4,
    InvalidState = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NledInterpretation {
    /// `B` is a flux density in tesla, converted with `c`.
    Tesla = 0,
    /// `B` is already the field-strength component.
    FComponent = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NledFieldComponent {
    Ex = 0,
    By = 1,
    Dx = 2,
    Hy = 3,
    X = 4,
    Y = 5,
    Delta = 6,
    Z = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NledScalars {
    pub lagrangian: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub l_xx: f64,
    pub l_xy: f64,
    pub l_yy: f64,
    pub m: f64,
    pub n: f64,
    pub l: f64,
    pub delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NledDiagnostics {
    pub t: f64,
    pub em_energy: f64,
    pub fluid_mass: f64,
    /// NaN when the field is identically zero
    pub centroid: f64,
    pub max_delta_excursion: f64,
    pub div_t_residual: f64,
}

/// Opaque Lagrangian model.
pub struct NledModel(LagrangianModel);

/// Opaque 1+1D simulation.
pub struct NledSimulation(Simulation);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &NledError) -> NledStatus {
    match e.root() {
        NledError::FieldBoundExceeded { .. } => NledStatus::FieldBoundExceeded,
        NledError::NumericalFailure(_) => NledStatus::NumericalFailure,
        NledError::InvalidState(_) | NledError::DegenerateInertia(_) => NledStatus::InvalidState,
        _ => NledStatus::InvalidArgument,
    }
}

struct Fail(NledStatus, String);

impl From<NledError> for Fail {
    fn from(e: NledError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NledStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NledStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            NledStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(NledStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(p: *mut T, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    p.write(v);
    Ok(())
}

unsafe fn read3(p: *const f64) -> Result<[f64; 3], Fail> {
    if p.is_null() {
        return Err(null());
    }
    Ok([*p, *p.add(1), *p.add(2)])
}

unsafe fn write_slice(p: *mut f64, v: &[f64]) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    ptr::copy_nonoverlapping(v.as_ptr(), p, v.len());
    Ok(())
}

fn interp(i: NledInterpretation) -> BInterpretation {
    match i {
        NledInterpretation::Tesla => BInterpretation::Tesla,
        NledInterpretation::FComponent => BInterpretation::FComponent,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn nled_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn nled_model_maxwell(eps0: f64, out: *mut *mut NledModel) -> NledStatus {
    guard(|| {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Fail(NledStatus::InvalidArgument, format!("eps0 must be positive, got {eps0}")));
        }
        let m = Box::new(NledModel(LagrangianModel::maxwell().with_eps0(eps0)));
        write(out, Box::into_raw(m))
    })
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn nled_model_born_infeld(kappa: f64, eps0: f64, out: *mut *mut NledModel) -> NledStatus {
    guard(|| {
        if !(kappa >= 0.0 && kappa.is_finite()) || !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Fail(
                NledStatus::InvalidArgument,
                format!("need kappa >= 0 and eps0 > 0, got kappa = {kappa}, eps0 = {eps0}"),
            ));
        }
        let m = Box::new(NledModel(LagrangianModel::born_infeld(kappa).with_eps0(eps0)));
        write(out, Box::into_raw(m))
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nled_model_free(model: *mut NledModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nled_model_eval_scalars(
    model: *const NledModel,
    x: f64,
    y: f64,
    out: *mut NledScalars,
) -> NledStatus {
    guard(|| {
        let s = read(model)?.0.eval_scalars(x, y)?;
        write(
            out,
            NledScalars {
                lagrangian: s.lagrangian,
                l_x: s.l_x,
                l_y: s.l_y,
                l_xx: s.l_xx,
                l_xy: s.l_xy,
                l_yy: s.l_yy,
                m: s.m,
                n: s.n,
                l: s.l,
                delta: s.delta,
            },
        )
    })
}

/// `(e, b) → (D, H)`; all four arrays hold three doubles.
///
/// # Safety
/// `model` must be a live handle; the arrays must be valid for three doubles.
#[no_mangle]
pub unsafe extern "C" fn nled_model_constitutive(
    model: *const NledModel,
    e: *const f64,
    b: *const f64,
    d_out: *mut f64,
    h_out: *mut f64,
) -> NledStatus {
    guard(|| {
        let g = read(model)?.0.constitutive(&two_form_from_eb(read3(e)?, read3(b)?))?;
        let (d, h) = eb_from_two_form(&g);
        write_slice(d_out, &d)?;
        write_slice(h_out, &h)
    })
}

/// Stress-energy tensor with upper indices, row-major `T[a*4 + b]`, index 0 = t.
///
/// # Safety
/// `model` must be a live handle; `e`, `b` valid for three doubles, `t_out` for sixteen.
#[no_mangle]
pub unsafe extern "C" fn nled_model_stress_energy(
    model: *const NledModel,
    e: *const f64,
    b: *const f64,
    t_out: *mut f64,
) -> NledStatus {
    guard(|| {
        let t = read(model)?.0.stress_energy(&two_form_from_eb(read3(e)?, read3(b)?))?;
        let flat: Vec<f64> = t.0.iter().flatten().copied().collect();
        write_slice(t_out, &flat)
    })
}

/// Phase speed `1/√(1 + κ²B²)` in units of `c`.
#[no_mangle]
pub extern "C" fn nled_phase_speed(kappa: f64, b: f64) -> f64 {
    exact::phase_speed(kappa, b)
}

#[no_mangle]
pub extern "C" fn nled_kappa_from_electron_radius() -> f64 {
    exact::kappa_from_electron_radius()
}

fn design(l0: f64, b: f64, kappa: f64, resolution: f64) -> Result<ExperimentDesign, Fail> {
    let d = ExperimentDesign { l0, b_tesla: b, kappa_si: kappa, timing_resolution: resolution };
    d.validate()?;
    Ok(d)
}

/// Exact transit delay in seconds for a path of `l0` metres.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nled_transit_delay_exact(
    l0: f64,
    b: f64,
    kappa: f64,
    interpretation: NledInterpretation,
    out: *mut f64,
) -> NledStatus {
    guard(|| {
        let d = design(l0, b, kappa, 1.0)?;
        write(out, exact::transit_delay_exact(&d, interp(interpretation)))
    })
}

/// Linear estimate `(l0/2) κ |B|`, for comparison only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nled_transit_delay_linear(l0: f64, b: f64, kappa: f64, out: *mut f64) -> NledStatus {
    guard(|| {
        let d = design(l0, b, kappa, 1.0)?;
        write(out, exact::transit_delay_linear(&d))
    })
}

/// Smallest `κ` whose exact delay reaches `resolution` seconds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nled_kappa_bound_from_timing(
    l0: f64,
    b: f64,
    resolution: f64,
    interpretation: NledInterpretation,
    out: *mut f64,
) -> NledStatus {
    guard(|| {
        let d = design(l0, b, 0.0, resolution)?;
        write(out, exact::kappa_bound_from_timing(&d, interp(interpretation))?)
    })
}

/// Builds a simulation from a JSON run configuration (the CLI format).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_from_json(json: *const c_char, out: *mut *mut NledSimulation) -> NledStatus {
    guard(|| {
        if json.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(NledStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let config = ConfigFile::parse(text)
            .and_then(|c| c.to_run_config())
            .map_err(|e| Fail(NledStatus::InvalidArgument, e.to_string()))?;
        let sim = Simulation::new(&config)?;
        write(out, Box::into_raw(Box::new(NledSimulation(sim))))
    })
}

/// # Safety
/// `sim` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_free(sim: *mut NledSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances by `steps` RK4 steps of size `dt`. On failure the state is left at
/// the last completed step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_step(sim: *mut NledSimulation, dt: f64, steps: usize) -> NledStatus {
    guard(|| {
        let s = &mut sim.as_mut().ok_or_else(null)?.0;
        for _ in 0..steps {
            s.step(dt)?;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_info(
    sim: *const NledSimulation,
    n_cells: *mut usize,
    dz: *mut f64,
    t: *mut f64,
) -> NledStatus {
    guard(|| {
        let s = &read(sim)?.0;
        write(n_cells, s.grid.n)?;
        write(dz, s.grid.dz())?;
        write(t, s.t)
    })
}

/// Copies one per-cell quantity into `buf`, which must hold `len >= n_cells` doubles.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_copy_field(
    sim: *const NledSimulation,
    which: NledFieldComponent,
    buf: *mut f64,
    len: usize,
) -> NledStatus {
    guard(|| {
        let s = &read(sim)?.0;
        let f = s.fields();
        let n = s.grid.n;
        if len < n {
            return Err(Fail(NledStatus::BufferTooSmall, format!("buffer holds {len}, need {n}")));
        }
        let z: Vec<f64>;
        let src: &[f64] = match which {
            NledFieldComponent::Ex => &f.e_x,
            NledFieldComponent::By => &f.b_y,
            NledFieldComponent::Dx => &f.d_x,
            NledFieldComponent::Hy => &f.h_y,
            NledFieldComponent::X => &f.x,
            NledFieldComponent::Y => &f.y,
            NledFieldComponent::Delta => &f.delta,
            NledFieldComponent::Z => {
                z = (0..n).map(|i| s.grid.z(i)).collect();
                &z
            }
        };
        write_slice(buf, src)
    })
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nled_simulation_diagnostics(sim: *const NledSimulation, out: *mut NledDiagnostics) -> NledStatus {
    guard(|| {
        let r = read(sim)?.0.diagnostics()?;
        write(
            out,
            NledDiagnostics {
                t: r.t,
                em_energy: r.em_energy,
                fluid_mass: r.fluid_mass,
                centroid: r.centroid.unwrap_or(f64::NAN),
                max_delta_excursion: r.max_delta_excursion,
                div_t_residual: r.div_t_residual,
            },
        )
    })
}

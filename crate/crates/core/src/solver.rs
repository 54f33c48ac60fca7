//! 1+1D method-of-lines solver for the reduced field system
//!
//! ```text
//! ∂t B_y = −∂z E_x,      ∂t D_x = −∂z H_y
//! ```
//!
//! on a periodic grid, with a static transverse background `b_x` and optional
//! cold dust moving along `z`. The conserved variables are `(D_x, B_y)`; `E_x`
//! is recovered per cell by inverting the constitutive relation.
//!
//! The reduction keeps `e_y = 0`. That is exact for the travelling-wave family
//! of [`crate::exact`] and a truncation for general data. Dust is evolved as
//! `m = ρ_m γ`, `w = γu` and the charge-to-mass ratio `q = ρ_e/ρ_m`. Charge
//! moves in the prescribed field without sourcing it.

use crate::error::{NledError, Result};
use crate::exact::{ExactSolutionSpec, Profile};
use crate::fluid::{eom_rhs, EquationOfState, FieldGradient, FluidState};
use crate::forms::two_form_from_eb;
use crate::nled::{LagrangianModel, ModelKind, ScalarBundle};
use serde::{Deserialize, Serialize};

pub const MAX_NEWTON_ITERATIONS: usize = 50;
pub const INVERSION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n: usize,
    pub z0: f64,
    pub z1: f64,
}

impl Grid1D {
    pub fn new(n: usize, z0: f64, z1: f64) -> Result<Self> {
        let g = Grid1D { n, z0, z1 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !(self.z1 > self.z0) || !self.z0.is_finite() || !self.z1.is_finite() {
            return Err(NledError::ContractViolation(format!(
                "grid needs n >= 8 and finite z1 > z0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.z1 - self.z0
    }

    pub fn dz(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z0 + i as f64 * self.dz()
    }

    /// Periodic neighbour `i + k`.
    pub fn wrap(&self, i: usize, k: isize) -> usize {
        (i as isize + k).rem_euclid(self.n as isize) as usize
    }

    fn centered(&self, f: &[f64], i: usize) -> f64 {
        (f[self.wrap(i, 1)] - f[self.wrap(i, -1)]) / (2.0 * self.dz())
    }

    /// undivided fourth difference
    fn fourth(&self, f: &[f64], i: usize) -> f64 {
        f[self.wrap(i, 2)] - 4.0 * f[self.wrap(i, 1)] + 6.0 * f[i] - 4.0 * f[self.wrap(i, -1)]
            + f[self.wrap(i, -2)]
    }
}

/// Reduced constitutive data at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub d_x: f64,
    pub h_y: f64,
    pub x: f64,
    pub y: f64,
    pub scalars: ScalarBundle,
    /// `∂D_x/∂E_x` at fixed `B_y`
    pub dd_de: f64,
    /// `∂D_x/∂B_y` at fixed `E_x`
    pub dd_db: f64,
}

/// `D_x = N E_x + L b_x` and `H_y = N B_y` for `e = (E_x, 0, 0)`, `b = (b_x, B_y, 0)`.
pub fn reduced_constitutive(model: &LagrangianModel, e: f64, by: f64, bx: f64) -> Result<ReducedPoint> {
    let x = e * e - bx * bx - by * by;
    let y = 2.0 * e * bx;
    let s = model.eval_scalars(x, y)?;
    let dn_de = 2.0 * (s.l_xx * 2.0 * e + s.l_xy * 2.0 * bx);
    let dl_de = 2.0 * (s.l_xy * 2.0 * e + s.l_yy * 2.0 * bx);
    let dn_db = 2.0 * s.l_xx * (-2.0 * by);
    let dl_db = 2.0 * s.l_xy * (-2.0 * by);
    Ok(ReducedPoint {
        d_x: s.n * e + s.l * bx,
        h_y: s.n * by,
        x,
        y,
        scalars: s,
        dd_de: s.n + e * dn_de + bx * dl_de,
        dd_db: e * dn_db + bx * dl_db,
    })
}

/// Largest `|E_x|` with `Δ > 2·floor` at this `(B_y, b_x)`.
fn e_limit(model: &LagrangianModel, by: f64, bx: f64) -> f64 {
    let k2 = model.kappa * model.kappa;
    let delta0 = 1.0 + k2 * (bx * bx + by * by);
    ((delta0 - 2.0 * model.delta_floor) / (k2 * (1.0 + k2 * bx * bx))).sqrt()
}

fn closed_form_inverse(model: &LagrangianModel) -> bool {
    model.kind == ModelKind::Maxwell || model.kappa == 0.0
}

pub fn invert_constitutive(model: &LagrangianModel, d_x: f64, by: f64, bx: f64) -> Result<f64> {
    invert_constitutive_from(model, d_x, by, bx, d_x / model.eps0)
}

/// Solve `D_x(E_x; B_y, b_x) = d_x` by Newton's method safeguarded with
/// bisection on the admissible interval, starting from `guess`.
pub fn invert_constitutive_from(
    model: &LagrangianModel,
    d_x: f64,
    by: f64,
    bx: f64,
    guess: f64,
) -> Result<f64> {
    if !(d_x.is_finite() && by.is_finite() && bx.is_finite()) {
        return Err(NledError::NumericalFailure(format!(
            "non-finite inversion input D_x={d_x}, B_y={by}, b_x={bx}"
        )));
    }
    if closed_form_inverse(model) {
        return Ok(d_x / model.eps0);
    }
    let tol = INVERSION_RTOL * d_x.abs().max(1.0);
    let lim = e_limit(model, by, bx);
    if !(lim > 0.0) {
        let delta = 1.0 + model.kappa.powi(2) * (bx * bx + by * by);
        return Err(NledError::FieldBoundExceeded { delta, cell: None });
    }
    let residual = |e: f64| -> Result<(f64, f64)> {
        let p = reduced_constitutive(model, e, by, bx)?;
        Ok((p.d_x - d_x, p.dd_de))
    };
    let (mut lo, mut hi) = (-lim, lim);
    // D_x is increasing in E_x and the bracket is the whole admissible
    // interval, so the ends are only inspected when the iteration fails
    let mut e = if guess.is_finite() { guess.clamp(lo, hi) } else { 0.0 };
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let (r, dr) = residual(e)?;
        if r.abs() <= tol {
            // one polishing step costs little and usually lands on roundoff
            let polished = e - r / dr;
            if dr > 0.0 && polished > lo && polished < hi {
                if let Ok((r2, _)) = residual(polished) {
                    if r2.abs() <= r.abs() {
                        return Ok(polished);
                    }
                }
            }
            return Ok(e);
        }
        if r < 0.0 {
            lo = e;
        } else {
            hi = e;
        }
        let newton = e - r / dr;
        e = if dr > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    let k2 = model.kappa * model.kappa;
    let delta_at = |e: f64| 1.0 - k2 * (e * e - bx * bx - by * by) - k2 * k2 * e * e * bx * bx;
    if residual(lim)?.0 < 0.0 {
        return Err(NledError::FieldBoundExceeded { delta: delta_at(lim), cell: None });
    }
    if residual(-lim)?.0 > 0.0 {
        return Err(NledError::FieldBoundExceeded { delta: delta_at(-lim), cell: None });
    }
    Err(NledError::NumericalFailure(format!(
        "constitutive inversion did not converge in {MAX_NEWTON_ITERATIONS} iterations (D_x={d_x:e})"
    )))
}

/// Field state on the grid: conserved `(D_x, B_y)` plus derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid1D {
    /// static background, `b = (b_x, B_y, 0)`
    pub bx: f64,
    pub d_x: Vec<f64>,
    pub b_y: Vec<f64>,
    pub e_x: Vec<f64>,
    pub h_y: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: Vec<f64>,
    dd_de: Vec<f64>,
    dd_db: Vec<f64>,
}

impl FieldGrid1D {
    fn with_capacity(bx: f64, n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        FieldGrid1D {
            bx,
            d_x: v(),
            b_y: v(),
            e_x: v(),
            h_y: v(),
            x: v(),
            y: v(),
            delta: v(),
            dd_de: v(),
            dd_db: v(),
        }
    }

    fn push(&mut self, e: f64, by: f64, p: &ReducedPoint) {
        self.e_x.push(e);
        self.b_y.push(by);
        self.d_x.push(p.d_x);
        self.h_y.push(p.h_y);
        self.x.push(p.x);
        self.y.push(p.y);
        self.delta.push(p.scalars.delta);
        self.dd_de.push(p.dd_de);
        self.dd_db.push(p.dd_db);
    }

    /// From `(E_x, B_y)` through the forward map.
    pub fn from_primitive(model: &LagrangianModel, bx: f64, e_x: &[f64], b_y: &[f64]) -> Result<Self> {
        let mut g = Self::with_capacity(bx, e_x.len());
        for (i, (&e, &by)) in e_x.iter().zip(b_y).enumerate() {
            let p = reduced_constitutive(model, e, by, bx).map_err(|err| err.at_cell(i))?;
            g.push(e, by, &p);
        }
        Ok(g)
    }

    /// From `(D_x, B_y)`; `guess` holds the previous `E_x` and is updated.
    pub fn from_conserved(
        model: &LagrangianModel,
        bx: f64,
        d_x: &[f64],
        b_y: &[f64],
        guess: &mut [f64],
    ) -> Result<Self> {
        let mut g = Self::with_capacity(bx, d_x.len());
        for i in 0..d_x.len() {
            let e = invert_constitutive_from(model, d_x[i], b_y[i], bx, guess[i])
                .map_err(|err| err.at_cell(i))?;
            let p = reduced_constitutive(model, e, b_y[i], bx).map_err(|err| err.at_cell(i))?;
            guess[i] = e;
            g.push(e, b_y[i], &p);
            // keep the conserved value bit-exact rather than the re-evaluated one
            g.d_x[i] = d_x[i];
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.e_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_x.is_empty()
    }
}

/// Dust parameters; density is `rho_m0` plus an optional profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DustConfig {
    pub rho_m0: f64,
    #[serde(default)]
    pub rho_m_profile: Option<Profile>,
    pub rho_e0: f64,
    pub u0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub profile: Profile,
    /// `b_x = −B0`
    pub b0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub kind: ModelKind,
    pub kappa: f64,
    pub grid: Grid1D,
    pub initial: InitialCondition,
    pub fluid: Option<DustConfig>,
    pub cfl: f64,
    pub t_end: f64,
    /// steps between diagnostics records and snapshots
    pub output_every: usize,
    pub dissipation: f64,
}

impl RunConfig {
    pub fn model(&self) -> LagrangianModel {
        LagrangianModel::new(self.kind, self.kappa)
    }

    pub fn exact_spec(&self) -> ExactSolutionSpec {
        ExactSolutionSpec::new(self.initial.profile.clone(), self.initial.b0, self.model_kappa())
            .periodic(self.grid.length())
    }

    fn model_kappa(&self) -> f64 {
        match self.kind {
            ModelKind::Maxwell => 0.0,
            ModelKind::BornInfeld => self.kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NledError::ContractViolation(m));
        self.grid.validate()?;
        self.initial.profile.validate()?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be finite and >= 0, got {}", self.kappa));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if self.output_every == 0 {
            return bad("output_every must be >= 1".into());
        }
        if !(self.dissipation >= 0.0 && self.dissipation.is_finite()) {
            return bad(format!("dissipation must be finite and >= 0, got {}", self.dissipation));
        }
        if !self.initial.b0.is_finite() {
            return bad("B0 must be finite".into());
        }
        if let Some(d) = &self.fluid {
            if !(d.rho_m0 >= 0.0 && d.rho_m0.is_finite() && d.rho_e0.is_finite() && d.u0.abs() < 1.0) {
                return bad(format!("invalid dust parameters {d:?}"));
            }
            if let Some(p) = &d.rho_m_profile {
                p.validate()?;
            }
        }
        Ok(())
    }

    /// `(steps, dt)` landing exactly on `t_end`.
    pub fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, 0.0);
        }
        let steps = (self.t_end / (self.cfl * self.grid.dz())).ceil() as usize;
        (steps, self.t_end / steps as f64)
    }
}

/// Dust variables per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DustGrid1D {
    /// lab-frame rest-mass density `ρ_m γ`
    pub m: Vec<f64>,
    /// `γ u`
    pub w: Vec<f64>,
    /// `ρ_e / ρ_m`
    pub q: Vec<f64>,
}

impl DustGrid1D {
    pub fn gamma(&self, i: usize) -> f64 {
        (1.0 + self.w[i] * self.w[i]).sqrt()
    }

    pub fn u(&self, i: usize) -> f64 {
        self.w[i] / self.gamma(i)
    }

    pub fn rho_m(&self, i: usize) -> f64 {
        self.m[i] / self.gamma(i)
    }

    pub fn state(&self, i: usize) -> FluidState {
        let rho_m = self.rho_m(i);
        FluidState::dust(rho_m, self.q[i] * rho_m, self.u(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub em_energy: f64,
    pub fluid_mass: f64,
    /// circular mean of `E_x²` on the periodic box, unwrapped along a run;
    /// `None` for a vanishing wave field
    pub centroid: Option<f64>,
    pub max_delta_excursion: f64,
    #[serde(rename = "divT_residual")]
    pub div_t_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub z: Vec<f64>,
    pub fields: FieldGrid1D,
    pub dust: Option<DustGrid1D>,
}

/// Time-stepping state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: LagrangianModel,
    pub grid: Grid1D,
    pub dissipation: f64,
    pub t: f64,
    pub step: usize,
    bx: f64,
    has_dust: bool,
    /// `[D_x | B_y | m | w | q]`
    u: Vec<f64>,
    fields: FieldGrid1D,
    guess: Vec<f64>,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let model = config.model();
        let spec = config.exact_spec();
        let n = grid.n;
        let (mut e, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let (ex, by, _) = spec.sample_reduced(grid.z(i), 0.0);
            e.push(ex);
            b.push(by);
        }
        let bx = -config.initial.b0;
        let fields = FieldGrid1D::from_primitive(&model, bx, &e, &b)?;
        let mut u = fields.d_x.clone();
        u.extend_from_slice(&fields.b_y);
        if let Some(d) = &config.fluid {
            let g = 1.0 / (1.0 - d.u0 * d.u0).sqrt();
            let mut rho = vec![d.rho_m0; n];
            if let Some(p) = &d.rho_m_profile {
                for (i, r) in rho.iter_mut().enumerate() {
                    *r += p.value(grid.z(i));
                }
            }
            if rho.iter().any(|r| !(*r >= 0.0)) {
                return Err(NledError::InvalidState("negative initial dust density".into()));
            }
            let q = if d.rho_m0 > 0.0 || d.rho_e0 == 0.0 {
                d.rho_e0 / d.rho_m0.max(f64::MIN_POSITIVE)
            } else {
                return Err(NledError::InvalidState("charged dust needs rho_m0 > 0".into()));
            };
            u.extend(rho.iter().map(|r| r * g));
            u.extend(std::iter::repeat_n(g * d.u0, n));
            u.extend(std::iter::repeat_n(if d.rho_e0 == 0.0 { 0.0 } else { q }, n));
        }
        Ok(Simulation {
            model,
            grid,
            dissipation: config.dissipation,
            t: 0.0,
            step: 0,
            bx,
            has_dust: config.fluid.is_some(),
            guess: fields.e_x.clone(),
            u,
            fields,
        })
    }

    pub fn fields(&self) -> &FieldGrid1D {
        &self.fields
    }

    pub fn dust(&self) -> Option<DustGrid1D> {
        let n = self.grid.n;
        self.has_dust.then(|| DustGrid1D {
            m: self.u[2 * n..3 * n].to_vec(),
            w: self.u[3 * n..4 * n].to_vec(),
            q: self.u[4 * n..5 * n].to_vec(),
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            step: self.step,
            t: self.t,
            z: (0..self.grid.n).map(|i| self.grid.z(i)).collect(),
            fields: self.fields.clone(),
            dust: self.dust(),
        }
    }

    fn rates(&self, u: &[f64], guess: &mut [f64]) -> Result<Vec<f64>> {
        let n = self.grid.n;
        let g = &self.grid;
        let fields = FieldGrid1D::from_conserved(&self.model, self.bx, &u[..n], &u[n..2 * n], guess)?;
        let mut du = vec![0.0; u.len()];
        for i in 0..n {
            du[i] = -g.centered(&fields.h_y, i);
            du[n + i] = -g.centered(&fields.e_x, i);
        }
        if self.has_dust {
            let (m, w, q) = (&u[2 * n..3 * n], &u[3 * n..4 * n], &u[4 * n..5 * n]);
            let vel: Vec<f64> = w.iter().map(|w| w / (1.0 + w * w).sqrt()).collect();
            let flux: Vec<f64> = m.iter().zip(&vel).map(|(m, v)| m * v).collect();
            for i in 0..n {
                let gamma = (1.0 + w[i] * w[i]).sqrt();
                let rho_m = m[i] / gamma;
                let state = FluidState::dust(rho_m, q[i] * rho_m, vel[i]);
                let (dd, db) = (du[i], du[n + i]);
                let de_dt = (dd - fields.dd_db[i] * db) / fields.dd_de[i];
                let grad = FieldGradient::longitudinal(
                    two_form_from_eb([de_dt, 0.0, 0.0], [0.0, db, 0.0]),
                    two_form_from_eb(
                        [g.centered(&fields.e_x, i), 0.0, 0.0],
                        [0.0, g.centered(&fields.b_y, i), 0.0],
                    ),
                );
                let f = two_form_from_eb([fields.e_x[i], 0.0, 0.0], [self.bx, fields.b_y[i], 0.0]);
                let force = eom_rhs(&self.model, &EquationOfState::ColdDust, &f, &grad, &state, [0.0; 2])
                    .map_err(|e| e.at_cell(i))?;
                du[2 * n + i] = -g.centered(&flux, i);
                du[3 * n + i] = force[3] / m[i] - vel[i] * g.centered(w, i);
                du[4 * n + i] = -vel[i] * g.centered(q, i);
            }
        }
        if self.dissipation > 0.0 {
            let c = self.dissipation / (16.0 * g.dz());
            for (block, rate) in u.chunks(n).zip(du.chunks_mut(n)) {
                for i in 0..n {
                    rate[i] -= c * g.fourth(block, i);
                }
            }
        }
        Ok(du)
    }

    /// One classical RK4 step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt <= self.grid.dz() * (1.0 + 1e-12)) {
            return Err(NledError::ContractViolation(format!(
                "dt = {dt:e} outside (0, dz] with dz = {:e}",
                self.grid.dz()
            )));
        }
        let step = self.step + 1;
        let mut guess = self.guess.clone();
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { self.u.iter().zip(k).map(|(u, k)| u + a * k).collect() };
        let k1 = self.rates(&self.u, &mut guess).map_err(|e| e.in_step(step, 1))?;
        let k2 = self.rates(&axpy(0.5 * dt, &k1), &mut guess).map_err(|e| e.in_step(step, 2))?;
        let k3 = self.rates(&axpy(0.5 * dt, &k2), &mut guess).map_err(|e| e.in_step(step, 3))?;
        let k4 = self.rates(&axpy(dt, &k3), &mut guess).map_err(|e| e.in_step(step, 4))?;
        let next: Vec<f64> = (0..self.u.len())
            .map(|j| self.u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        let n = self.grid.n;
        let fields = FieldGrid1D::from_conserved(&self.model, self.bx, &next[..n], &next[n..2 * n], &mut guess)
            .map_err(|e| e.in_step(step, 5))?;
        if self.has_dust && next[3 * n..4 * n].iter().any(|w| !w.is_finite()) {
            return Err(NledError::NumericalFailure("non-finite dust velocity".into()).in_step(step, 5));
        }
        self.u = next;
        self.fields = fields;
        self.guess = guess;
        self.t += dt;
        self.step = step;
        Ok(())
    }

    /// `Σ T^{tt} dz`
    pub fn em_energy(&self) -> Result<f64> {
        let dz = self.grid.dz();
        let mut total = 0.0;
        for i in 0..self.grid.n {
            let f = self.field_at(i);
            total += self.model.stress_energy(&f).map_err(|e| e.at_cell(i))?.upper(0, 0) * dz;
        }
        Ok(total)
    }

    fn field_at(&self, i: usize) -> crate::forms::TwoForm {
        two_form_from_eb([self.fields.e_x[i], 0.0, 0.0], [self.bx, self.fields.b_y[i], 0.0])
    }

    /// Circular mean of `E_x²` in `[z0, z1)`.
    pub fn wrapped_centroid(&self) -> Option<f64> {
        let (l, z0) = (self.grid.length(), self.grid.z0);
        let (mut s, mut c, mut total) = (0.0, 0.0, 0.0);
        for i in 0..self.grid.n {
            let w = self.fields.e_x[i] * self.fields.e_x[i];
            let th = std::f64::consts::TAU * (self.grid.z(i) - z0) / l;
            s += w * th.sin();
            c += w * th.cos();
            total += w;
        }
        if total == 0.0 || (s == 0.0 && c == 0.0) {
            return None;
        }
        Some(z0 + (s.atan2(c) / std::f64::consts::TAU).rem_euclid(1.0) * l)
    }

    /// `‖∂t T^{tb} + ∂z T^{zb}‖₂` over `b ∈ {t, z}` for the field plus dust.
    pub fn div_t_residual(&self) -> Result<f64> {
        let n = self.grid.n;
        let g = &self.grid;
        let mut guess = self.guess.clone();
        let rates = self.rates(&self.u, &mut guess)?;
        let dust = self.dust();
        let mut tzt = vec![0.0; n];
        let mut tzz = vec![0.0; n];
        let mut dt_tt = vec![0.0; n];
        let mut dt_tz = vec![0.0; n];
        for i in 0..n {
            let (e, by) = (self.fields.e_x[i], self.fields.b_y[i]);
            let t0 = self.model.stress_energy(&self.field_at(i)).map_err(|x| x.at_cell(i))?;
            tzt[i] = t0.upper(3, 0);
            tzz[i] = t0.upper(3, 3);
            let (dd, db) = (rates[i], rates[n + i]);
            let de = (dd - self.fields.dd_db[i] * db) / self.fields.dd_de[i];
            let rate = de.abs().max(db.abs());
            if rate > 0.0 {
                // central difference along the trajectory direction
                let h = 1e-5 * (1.0 + e.abs() + by.abs()) / rate;
                let at = |s: f64| {
                    let f = two_form_from_eb([e + s * de, 0.0, 0.0], [self.bx, by + s * db, 0.0]);
                    self.model.stress_energy(&f)
                };
                let (p, m) = (at(h).map_err(|x| x.at_cell(i))?, at(-h).map_err(|x| x.at_cell(i))?);
                dt_tt[i] = (p.upper(0, 0) - m.upper(0, 0)) / (2.0 * h);
                dt_tz[i] = (p.upper(0, 3) - m.upper(0, 3)) / (2.0 * h);
            }
            if let Some(d) = &dust {
                let (m, w, gamma, u) = (d.m[i], d.w[i], d.gamma(i), d.u(i));
                let (dm, dw) = (rates[2 * n + i], rates[3 * n + i]);
                // dust T^{ab} = ρ_m V^a V^b
                tzt[i] += m * w;
                tzz[i] += m * w * u;
                dt_tt[i] += dm * gamma + m * w * dw / gamma;
                dt_tz[i] += dm * w + m * dw;
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            let rt = dt_tt[i] + g.centered(&tzt, i);
            let rz = dt_tz[i] + g.centered(&tzz, i);
            sum += (rt * rt + rz * rz) * g.dz();
        }
        Ok(sum.sqrt())
    }

    pub fn diagnostics(&self) -> Result<DiagnosticsRecord> {
        let fluid_mass = match self.has_dust {
            true => self.u[2 * self.grid.n..3 * self.grid.n].iter().sum::<f64>() * self.grid.dz(),
            false => 0.0,
        };
        Ok(DiagnosticsRecord {
            t: self.t,
            em_energy: self.em_energy()?,
            fluid_mass,
            centroid: self.wrapped_centroid(),
            max_delta_excursion: self.fields.delta.iter().fold(0.0, |m, d| f64::max(m, (d - 1.0).abs())),
            div_t_residual: self.div_t_residual()?,
        })
    }

    /// L2 error of `(E_x, B_y)` against the travelling wave at the current time.
    pub fn exact_error(&self, spec: &ExactSolutionSpec) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.n {
            let (e, b, _) = spec.sample_reduced(self.grid.z(i), self.t);
            sum += (self.fields.e_x[i] - e).powi(2) + (self.fields.b_y[i] - b).powi(2);
        }
        (sum * self.grid.dz()).sqrt()
    }
}

/// L2 norm of the discrete field-equation residual on the sampled travelling
/// wave: the semi-discrete rates minus `∂t(D_x, B_y)` from the closed form.
pub fn exact_residual(config: &RunConfig, t: f64) -> Result<f64> {
    let mut sim = Simulation::new(config)?;
    let spec = config.exact_spec();
    let n = sim.grid.n;
    let mut e = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let (ex, by, _) = spec.sample_reduced(sim.grid.z(i), t);
        e.push(ex);
        b.push(by);
    }
    sim.fields = FieldGrid1D::from_primitive(&sim.model, sim.bx, &e, &b)?;
    sim.u[..n].copy_from_slice(&sim.fields.d_x);
    sim.u[n..2 * n].copy_from_slice(&sim.fields.b_y);
    sim.guess = e;
    let mut guess = sim.guess.clone();
    let rates = sim.rates(&sim.u, &mut guess)?;
    let v = spec.phase_speed();
    let mut sum = 0.0;
    for i in 0..n {
        let dp = -v * spec.profile_at(sim.grid.z(i), t).1;
        // D_x = ε₀𝓔 on the wave
        let rd = rates[i] - sim.model.eps0 * dp;
        let rb = rates[n + i] - dp;
        sum += (rd * rd + rb * rb) * sim.grid.dz();
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunEvent<'a> {
    Diagnostics(&'a DiagnosticsRecord),
    Snapshot(&'a Snapshot),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub dt: f64,
    /// `None` when the centroid series is degenerate
    pub phase_speed: Option<f64>,
    pub expected_phase_speed: f64,
    pub energy_drift: f64,
    pub final_divt_residual: f64,
    pub final_max_delta_excursion: f64,
    pub exact_l2_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub summary: RunSummary,
}

/// Run to `t_end`, handing every record and snapshot to `sink` as soon as it
/// exists so that output survives a later failure.
pub fn run_streaming(config: &RunConfig, mut sink: impl FnMut(RunEvent<'_>)) -> Result<RunSummary> {
    let mut sim = Simulation::new(config)?;
    let (steps, dt) = config.schedule();
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut emit = |sim: &Simulation, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let mut rec = sim.diagnostics()?;
        if let (Some(prev), Some(c)) = (records.last().and_then(|r| r.centroid), rec.centroid) {
            rec.centroid = Some(unwrap_near(c, prev, sim.grid.length()));
        }
        sink(RunEvent::Diagnostics(&rec));
        sink(RunEvent::Snapshot(&sim.snapshot()));
        records.push(rec);
        Ok(())
    };
    emit(&sim, &mut records)?;
    for s in 1..=steps {
        sim.step(dt)?;
        // avoid accumulating roundoff in the clock
        sim.t = s as f64 * dt;
        if s % config.output_every == 0 || s == steps {
            emit(&sim, &mut records)?;
        }
    }
    let first = &records[0];
    let last = records.last().unwrap_or(first);
    let drift = if first.em_energy != 0.0 {
        (last.em_energy - first.em_energy) / first.em_energy
    } else {
        last.em_energy - first.em_energy
    };
    Ok(RunSummary {
        steps,
        t_final: sim.t,
        dt,
        phase_speed: measure_phase_speed(&records).ok(),
        expected_phase_speed: config.exact_spec().phase_speed(),
        energy_drift: drift,
        final_divt_residual: last.div_t_residual,
        final_max_delta_excursion: last.max_delta_excursion,
        exact_l2_error: sim.exact_error(&config.exact_spec()),
    })
}

pub fn run(config: &RunConfig) -> Result<RunResult> {
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let summary = run_streaming(config, |ev| match ev {
        RunEvent::Diagnostics(r) => records.push(r.clone()),
        RunEvent::Snapshot(s) => snapshots.push(s.clone()),
    })?;
    Ok(RunResult { records, snapshots, summary })
}

fn unwrap_near(c: f64, prev: f64, length: f64) -> f64 {
    c + ((prev - c) / length).round() * length
}

/// Least-squares slope of centroid against time.
pub fn measure_phase_speed(records: &[DiagnosticsRecord]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records.iter().filter_map(|r| r.centroid.map(|c| (r.t, c))).collect();
    if pts.len() < 2 || pts.len() != records.len() {
        return Err(NledError::NumericalFailure("phase speed needs a tracked pulse at >= 2 times".into()));
    }
    let n = pts.len() as f64;
    let (mt, mc) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (mut stt, mut stc) = (0.0, 0.0);
    for (t, c) in &pts {
        stt += (t - mt) * (t - mt);
        stc += (t - mt) * (c - mc);
    }
    if !(stt > 0.0) {
        return Err(NledError::NumericalFailure("phase speed needs a time spread".into()));
    }
    Ok(stc / stt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub n: usize,
    pub dz: f64,
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// least-squares slope of `log error` against `log dz`
    pub order: f64,
}

/// Fit `error ∝ dz^p`.
pub fn fitted_order(dz: &[f64], err: &[f64]) -> Result<f64> {
    if dz.len() < 2 || err.iter().any(|e| !(*e > 0.0)) {
        return Err(NledError::NumericalFailure("order fit needs >= 2 positive errors".into()));
    }
    let xs: Vec<f64> = dz.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Evolve to `t_end` at each grid size and compare with the travelling wave.
pub fn convergence_study(config: &RunConfig, levels: &[usize]) -> Result<ConvergenceReport> {
    if levels.len() < 3 {
        return Err(NledError::ContractViolation("convergence needs >= 3 levels".into()));
    }
    let mut out = Vec::new();
    for &n in levels {
        let mut c = config.clone();
        c.grid.n = n;
        let mut sim = Simulation::new(&c)?;
        let (steps, dt) = c.schedule();
        for s in 1..=steps {
            sim.step(dt)?;
            sim.t = s as f64 * dt;
        }
        out.push(ConvergenceLevel { n, dz: c.grid.dz(), l2_error: sim.exact_error(&c.exact_spec()) });
    }
    let order = fitted_order(
        &out.iter().map(|l| l.dz).collect::<Vec<_>>(),
        &out.iter().map(|l| l.l2_error).collect::<Vec<_>>(),
    )?;
    Ok(ConvergenceReport { levels: out, order })
}

/// Same as [`convergence_study`] for the field-equation residual on the
/// sampled wave, without time stepping.
pub fn residual_study(config: &RunConfig, levels: &[usize], t: f64) -> Result<ConvergenceReport> {
    if levels.len() < 3 {
        return Err(NledError::ContractViolation("convergence needs >= 3 levels".into()));
    }
    let mut out = Vec::new();
    for &n in levels {
        let mut c = config.clone();
        c.grid.n = n;
        out.push(ConvergenceLevel { n, dz: c.grid.dz(), l2_error: exact_residual(&c, t)? });
    }
    let order = fitted_order(
        &out.iter().map(|l| l.dz).collect::<Vec<_>>(),
        &out.iter().map(|l| l.l2_error).collect::<Vec<_>>(),
    )?;
    Ok(ConvergenceReport { levels: out, order })
}

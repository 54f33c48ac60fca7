//! Relativistic thermodynamic fluid: state, equation of state, electrodynamic
//! force terms and the right-hand sides of the equations of motion.
//!
//! Sign conventions follow [`crate::forms::two_form_from_eb`], where the electric
//! field is `eᵢ = F(∂ᵢ, ∂t)`. With that choice the divergence of the vacuum
//! stress-energy tensor is
//!
//! ```text
//! ∇·T = ξ + i_Ĵ F,     ξ = dM + ⋆τ^(LED)_{d̃N},     Ĵ = 𝒥 − η,
//! η̃ = ⋆(dN∧⋆F) + ⋆(dL∧F)
//! ```
//!
//! whenever `d⋆G = 𝒥` holds, and `∇·(T_vac + T_fluid) = 0` gives
//!
//! ```text
//! (ρ + p) ∇̃_V V = Π_V 𝒫,     𝒫 = −i_Ĵ F − dM − dp − ⋆τ^(LED)_{d̃N}
//!                           = −ρ_e i_V F + Π_V(i_η F − ξ − dp)
//! ```
//!
//! For a source-free Born-Infeld field `ξ = i_η F` identically, so the
//! electrodynamic pressure on neutral matter vanishes on shell; the individual
//! terms do not.

use crate::error::{NledError, Result};
use crate::forms::{KForm, OneForm, ThreeForm, TwoForm, Vector4, DIM, T, Z};
use crate::nled::{tau_led_q, LagrangianModel, ScalarBundle};

/// Tolerance on `g(V, V) = −1` accepted by [`project`].
pub const NORMALISATION_TOL: f64 = 1e-9;

/// Fluid state in the 1+1D reduction: velocity along `z` only.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FluidState {
    /// proper mass density
    pub rho_m: f64,
    pub p: f64,
    /// proper charge density
    pub rho_e: f64,
    /// longitudinal 3-velocity, |u| < 1
    pub u: f64,
}

impl FluidState {
    pub fn dust(rho_m: f64, rho_e: f64, u: f64) -> Self {
        FluidState { rho_m, p: 0.0, rho_e, u }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rho_m >= 0.0 && self.p >= 0.0 && self.u.abs() < 1.0 && self.rho_e.is_finite();
        if ok {
            Ok(())
        } else {
            Err(NledError::InvalidState(format!("{self:?}")))
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.u * self.u).sqrt()
    }

    /// `V = γ(∂t + u ∂z)`
    pub fn velocity(&self) -> Vector4 {
        let g = self.gamma();
        Vector4::new(g, 0.0, 0.0, g * self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquationOfState {
    ColdDust,
    /// `𝓔 = p / ((γ − 1) ρ_m)`
    IdealGamma { gamma: f64 },
}

impl EquationOfState {
    pub fn specific_internal_energy(&self, rho_m: f64, p: f64) -> Result<f64> {
        match *self {
            EquationOfState::ColdDust => Ok(0.0),
            EquationOfState::IdealGamma { gamma } => {
                if !(gamma > 1.0) {
                    return Err(NledError::InvalidState(format!("adiabatic index {gamma} <= 1")));
                }
                if p == 0.0 {
                    Ok(0.0)
                } else if rho_m > 0.0 {
                    Ok(p / ((gamma - 1.0) * rho_m))
                } else {
                    Err(NledError::InvalidState(format!(
                        "pressure {p} with vanishing mass density"
                    )))
                }
            }
        }
    }

    /// `ρ = ρ_m (1 + 𝓔(ρ_m, p))`
    pub fn energy_density(&self, rho_m: f64, p: f64) -> Result<f64> {
        let p = if *self == EquationOfState::ColdDust { 0.0 } else { p };
        Ok(rho_m * (1.0 + self.specific_internal_energy(rho_m, p)?))
    }

    /// Discrete `T ΔS = Δ𝓔 + p̄ Δ(1/ρ_m)` between two nearby states, with the
    /// midpoint pressure `p̄`.
    pub fn tds_increment(&self, a: &FluidState, b: &FluidState) -> Result<f64> {
        if *self == EquationOfState::ColdDust {
            return Err(NledError::InvalidState(
                "cold dust carries no thermodynamics".to_string(),
            ));
        }
        a.validate()?;
        b.validate()?;
        if !(a.rho_m > 0.0 && b.rho_m > 0.0) {
            return Err(NledError::InvalidState("tds_increment needs rho_m > 0".to_string()));
        }
        let de = self.specific_internal_energy(b.rho_m, b.p)?
            - self.specific_internal_energy(a.rho_m, a.p)?;
        let p_mid = 0.5 * (a.p + b.p);
        Ok(de + p_mid * (1.0 / b.rho_m - 1.0 / a.rho_m))
    }
}

/// `Π_V α = α + Ṽ (i_V α)`
pub fn project(v: &Vector4, alpha: &OneForm) -> Result<OneForm> {
    let norm = v.dot(v);
    if !((norm + 1.0).abs() <= NORMALISATION_TOL) {
        return Err(NledError::ContractViolation(format!(
            "projection needs a unit timelike vector, g(V,V) = {norm}"
        )));
    }
    if alpha.degree() != 1 {
        return Err(NledError::ContractViolation("projection acts on 1-forms".to_string()));
    }
    Ok(*alpha + v.lower() * alpha.apply(v))
}

/// Convective current `𝒥 = ρ_e ⋆Ṽ`.
pub fn u1_current(state: &FluidState) -> ThreeForm {
    state.velocity().lower().hodge() * state.rho_e
}

/// Coordinate derivatives `∂_a F`, `a ∈ (t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGradient(pub [TwoForm; DIM]);

impl FieldGradient {
    pub fn zero() -> Self {
        FieldGradient([KForm::zero(2); DIM])
    }

    /// 1+1D reduction: only `∂t F` and `∂z F` are non-zero.
    pub fn longitudinal(dt: TwoForm, dz: TwoForm) -> Self {
        let mut g = Self::zero();
        g.0[T] = dt;
        g.0[Z] = dz;
        g
    }
}

/// Exterior derivatives of the Lagrangian-derived scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGradients {
    pub scalars: ScalarBundle,
    pub d_x: OneForm,
    pub d_y: OneForm,
    pub d_m: OneForm,
    pub d_n: OneForm,
    pub d_l: OneForm,
}

/// `dM`, `dN`, `dL` by the chain rule through `(dX, dY)`.
pub fn scalar_gradients(
    model: &LagrangianModel,
    f: &TwoForm,
    grad: &FieldGradient,
) -> Result<ScalarGradients> {
    let (x, y, s) = model.scalars_of(f)?;
    let star_f = f.hodge();
    let mut d_x = KForm::zero(1);
    let mut d_y = KForm::zero(1);
    // X and Y are quadratic: dX = 2⋆(F∧⋆∂F), dY = 2⋆(F∧∂F)
    for a in 0..DIM {
        let g = &grad.0[a];
        d_x.components_mut()[a] = 2.0 * g.wedge(&star_f).hodge()[0];
        d_y.components_mut()[a] = 2.0 * f.wedge(g).hodge()[0];
    }
    let dl_x = d_x * s.l_xx + d_y * s.l_xy;
    let dl_y = d_x * s.l_xy + d_y * s.l_yy;
    Ok(ScalarGradients {
        scalars: s,
        d_x,
        d_y,
        // dM = dℒ − d(Xℒ_X) − d(Yℒ_Y) = −X dℒ_X − Y dℒ_Y
        d_m: -(dl_x * x + dl_y * y),
        d_n: dl_x * 2.0,
        d_l: dl_y * 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceTerms {
    /// `ξ = dM + ⋆τ^(LED)_{d̃N}`
    pub xi: OneForm,
    /// vector dual of `⋆(dN∧⋆F) + ⋆(dL∧F)`
    pub eta: Vector4,
    /// `Ĵ = 𝒥 − η`
    pub j_hat: Vector4,
    /// `∇·T_vac = ξ + i_Ĵ F`
    pub div_t: OneForm,
    /// `𝒫 = −(∇·T_vac) − dp`
    pub p_total: OneForm,
}

/// Force terms for a field `F` with gradient `grad`, given the U(1) current
/// as a vector (`ρ_e V` for a convective current) and the pressure gradient.
pub fn force_terms_with_current(
    model: &LagrangianModel,
    f: &TwoForm,
    grad: &FieldGradient,
    current: &Vector4,
    dp: &OneForm,
) -> Result<ForceTerms> {
    let sg = scalar_gradients(model, f, grad)?;
    let star_f = f.hodge();
    let xi = sg.d_m + tau_led_q(f, &sg.d_n.raise()).hodge();
    let eta_form = sg.d_n.wedge(&star_f).hodge() + sg.d_l.wedge(f).hodge();
    let eta = eta_form.raise();
    let j_hat = *current - eta;
    let div_t = xi + f.interior(&j_hat);
    Ok(ForceTerms { xi, eta, j_hat, div_t, p_total: -(div_t + *dp) })
}

pub fn force_terms(
    model: &LagrangianModel,
    f: &TwoForm,
    grad: &FieldGradient,
    state: &FluidState,
    dp: &OneForm,
) -> Result<ForceTerms> {
    state.validate()?;
    force_terms_with_current(model, f, grad, &(state.velocity() * state.rho_e), dp)
}

/// `(ρ + p) ∇̃_V V` for an arbitrary unit timelike `V`.
pub fn eom_rhs_covariant(
    model: &LagrangianModel,
    f: &TwoForm,
    grad: &FieldGradient,
    v: &Vector4,
    rho_plus_p: f64,
    rho_e: f64,
    dp: &OneForm,
) -> Result<OneForm> {
    if !(rho_plus_p > 0.0) {
        return Err(NledError::DegenerateInertia(rho_plus_p));
    }
    let terms = force_terms_with_current(model, f, grad, &(*v * rho_e), dp)?;
    project(v, &terms.p_total)
}

/// `(ρ + p) ∇̃_V V` for the 1+1D state; `dp = (∂t p, ∂z p)`.
pub fn eom_rhs(
    model: &LagrangianModel,
    eos: &EquationOfState,
    f: &TwoForm,
    grad: &FieldGradient,
    state: &FluidState,
    dp: [f64; 2],
) -> Result<OneForm> {
    state.validate()?;
    let rho = eos.energy_density(state.rho_m, state.p)?;
    let dp = longitudinal_one_form(dp);
    eom_rhs_covariant(model, f, grad, &state.velocity(), rho + state.p, state.rho_e, &dp)
}

/// `(ρ + p) ∇·V = −V(ρ) + i_V(ξ + i_Ĵ F)`; `drho = (∂t ρ, ∂z ρ)`.
pub fn continuity_rhs(
    model: &LagrangianModel,
    eos: &EquationOfState,
    f: &TwoForm,
    grad: &FieldGradient,
    state: &FluidState,
    drho: [f64; 2],
) -> Result<f64> {
    state.validate()?;
    let rho = eos.energy_density(state.rho_m, state.p)?;
    if !(rho + state.p > 0.0) {
        return Err(NledError::DegenerateInertia(rho + state.p));
    }
    let v = state.velocity();
    let terms = force_terms(model, f, grad, state, &KForm::zero(1))?;
    let v_rho = longitudinal_one_form(drho).apply(&v);
    Ok(-v_rho + terms.div_t.apply(&v))
}

fn longitudinal_one_form(d: [f64; 2]) -> OneForm {
    let mut f = KForm::zero(1);
    f.components_mut()[T] = d[0];
    f.components_mut()[Z] = d[1];
    f
}

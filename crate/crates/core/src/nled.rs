//! Lagrangian models `ℒ(X, Y)`, the constitutive map `F ↦ G` and the vacuum
//! stress-energy tensor.
//!
//! Two models ship: Maxwell, with `ℒ = (ε₀/2) X`, and Born-Infeld,
//!
//! ```text
//! ℒ = (ε₀/κ²)(1 − √Δ),   Δ = 1 − κ²X − (κ⁴/4) Y²
//! ```
//!
//! whose derivatives are taken analytically from that expression. With
//! `N = 2ℒ_X` and `L = 2ℒ_Y` the excitation satisfies `⋆G = N⋆F + L F`, so both
//! models give `G = ε₀F` in the weak-field limit.

use crate::error::{NledError, Result};
use crate::forms::{invariant_x, invariant_y, KForm, ThreeForm, TwoForm, Vector4, DIM, METRIC};

/// Default floor below which `Δ` counts as beyond the Born-Infeld bound.
pub const DEFAULT_DELTA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Maxwell,
    BornInfeld,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianModel {
    pub kind: ModelKind,
    /// Natural-unit coupling; ignored by Maxwell.
    pub kappa: f64,
    pub eps0: f64,
    pub delta_floor: f64,
}

/// Scalars derived from `ℒ` at a point `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalarBundle {
    /// `ℒ`
    pub lagrangian: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub l_xx: f64,
    pub l_xy: f64,
    pub l_yy: f64,
    /// `ℒ − Xℒ_X − Yℒ_Y`
    pub m: f64,
    /// `2ℒ_X`
    pub n: f64,
    /// `2ℒ_Y`
    pub l: f64,
    pub delta: f64,
}

impl LagrangianModel {
    pub fn maxwell() -> Self {
        LagrangianModel {
            kind: ModelKind::Maxwell,
            kappa: 0.0,
            eps0: 1.0,
            delta_floor: DEFAULT_DELTA_FLOOR,
        }
    }

    pub fn born_infeld(kappa: f64) -> Self {
        assert!(kappa >= 0.0 && kappa.is_finite(), "kappa must be finite and >= 0");
        LagrangianModel {
            kind: ModelKind::BornInfeld,
            kappa,
            eps0: 1.0,
            delta_floor: DEFAULT_DELTA_FLOOR,
        }
    }

    pub fn new(kind: ModelKind, kappa: f64) -> Self {
        match kind {
            ModelKind::Maxwell => Self::maxwell(),
            ModelKind::BornInfeld => Self::born_infeld(kappa),
        }
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        assert!(eps0 > 0.0, "eps0 must be positive");
        self.eps0 = eps0;
        self
    }

    /// `Δ(X, Y)`; identically 1 for Maxwell.
    pub fn delta(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ModelKind::Maxwell => 1.0,
            ModelKind::BornInfeld => {
                let k2 = self.kappa * self.kappa;
                1.0 - k2 * x - 0.25 * k2 * k2 * y * y
            }
        }
    }

    pub fn eval_scalars(&self, x: f64, y: f64) -> Result<ScalarBundle> {
        let eps0 = self.eps0;
        match self.kind {
            ModelKind::Maxwell => Ok(ScalarBundle {
                lagrangian: 0.5 * eps0 * x,
                l_x: 0.5 * eps0,
                l_y: 0.0,
                l_xx: 0.0,
                l_xy: 0.0,
                l_yy: 0.0,
                m: 0.0,
                n: eps0,
                l: 0.0,
                delta: 1.0,
            }),
            ModelKind::BornInfeld => {
                let k2 = self.kappa * self.kappa;
                let delta = self.delta(x, y);
                if !(delta > self.delta_floor) {
                    return Err(NledError::FieldBoundExceeded { delta, cell: None });
                }
                let root = delta.sqrt();
                let d32 = delta * root;
                // (1 − √Δ)/κ² rewritten without cancellation; exact at κ = 0
                let lagrangian = eps0 * (x + 0.25 * k2 * y * y) / (1.0 + root);
                let l_x = 0.5 * eps0 / root;
                let l_y = 0.25 * eps0 * k2 * y / root;
                let l_xx = 0.25 * eps0 * k2 / d32;
                let l_xy = 0.125 * eps0 * k2 * k2 * y / d32;
                let l_yy = 0.25 * eps0 * k2 / root + eps0 * k2 * k2 * k2 * y * y / (16.0 * d32);
                Ok(ScalarBundle {
                    lagrangian,
                    l_x,
                    l_y,
                    l_xx,
                    l_xy,
                    l_yy,
                    m: lagrangian - x * l_x - y * l_y,
                    n: 2.0 * l_x,
                    l: 2.0 * l_y,
                    delta,
                })
            }
        }
    }

    /// Invariants and scalars of a field 2-form.
    pub fn scalars_of(&self, f: &TwoForm) -> Result<(f64, f64, ScalarBundle)> {
        let x = invariant_x(f);
        let y = invariant_y(f);
        Ok((x, y, self.eval_scalars(x, y)?))
    }

    /// `G` with `⋆G = N⋆F + L F`, i.e. `G = N F − L ⋆F`.
    pub fn constitutive(&self, f: &TwoForm) -> Result<TwoForm> {
        if self.kind == ModelKind::Maxwell {
            return Ok(*f * self.eps0);
        }
        let (_, _, s) = self.scalars_of(f)?;
        Ok(*f * s.n - f.hodge() * s.l)
    }

    /// `T^{ab}` assembled from `τ_a = M ⋆e_a + N τ_a^(LED)`.
    pub fn stress_energy(&self, f: &TwoForm) -> Result<StressTensor> {
        let (_, _, s) = self.scalars_of(f)?;
        let star_f = f.hodge();
        let mut lower = [[0.0; DIM]; DIM];
        for a in 0..DIM {
            let e_a = Vector4::basis(a);
            // e_a = g_ab e^b
            let coframe_a = KForm::coordinate(a) * METRIC[a];
            let tau = coframe_a.hodge() * s.m + tau_led_with(f, &star_f, &e_a) * s.n;
            let row = tau.hodge();
            for b in 0..DIM {
                lower[a][b] = row[b];
            }
        }
        let mut upper = [[0.0; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                upper[a][b] = METRIC[a] * METRIC[b] * lower[a][b];
            }
        }
        Ok(StressTensor(upper))
    }
}

/// Symmetric rank-2 tensor stored with both indices up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressTensor(pub [[f64; DIM]; DIM]);

impl StressTensor {
    pub fn upper(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn lower(&self, a: usize, b: usize) -> f64 {
        METRIC[a] * METRIC[b] * self.0[a][b]
    }

    /// `T^a_a`
    pub fn trace(&self) -> f64 {
        (0..DIM).map(|a| METRIC[a] * self.0[a][a]).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..DIM {
            for b in 0..a {
                m = m.max((self.0[a][b] - self.0[b][a]).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn tau_led_with(f: &TwoForm, star_f: &TwoForm, q: &Vector4) -> ThreeForm {
    (f.interior(q).wedge(star_f) - star_f.interior(q).wedge(f)) * 0.5
}

/// `τ^(LED)_Q = Q^a τ_a^(LED)` with `τ_a^(LED) = ½(i_aF∧⋆F − i_a⋆F∧F)`.
pub fn tau_led_q(f: &TwoForm, q: &Vector4) -> ThreeForm {
    assert_eq!(f.degree(), 2, "tau_led_q expects a 2-form");
    tau_led_with(f, &f.hodge(), q)
}

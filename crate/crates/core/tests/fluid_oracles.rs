#![allow(clippy::needless_range_loop)]

mod common;

use common::{rng, vec3};
use nledlab::fluid::{
    eom_rhs, eom_rhs_covariant, force_terms_with_current, scalar_gradients, EquationOfState,
    FieldGradient, FluidState,
};
use nledlab::forms::{exterior_derivative, two_form_from_eb, KForm, TwoForm, Vector4, METRIC};
use nledlab::nled::LagrangianModel;
use rand::Rng;

/// Potential `A_b = Σ_k a_kb sin(k·x + φ_k)`, giving an exactly closed but
/// otherwise arbitrary (off-shell) field `F = dA`.
struct Potential {
    modes: Vec<([f64; 4], [f64; 4], f64)>,
}

impl Potential {
    fn random(r: &mut rand_chacha::ChaCha8Rng, amp: f64) -> Self {
        let modes = (0..3)
            .map(|_| {
                let k = [0, 1, 2, 3].map(|_| r.random_range(-1.5..1.5));
                let a = [0, 1, 2, 3].map(|_| r.random_range(-amp..amp));
                (k, a, r.random_range(0.0..6.3))
            })
            .collect();
        Potential { modes }
    }

    /// `∂_c ∂_a A_b`, or `∂_a A_b` when `c` is `None`
    fn d_a(&self, x: &[f64; 4], c: Option<usize>, a: usize, b: usize) -> f64 {
        self.modes
            .iter()
            .map(|(k, amp, ph)| {
                let phase: f64 = k.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + ph;
                match c {
                    None => amp[b] * k[a] * phase.cos(),
                    Some(c) => -amp[b] * k[a] * k[c] * phase.sin(),
                }
            })
            .sum()
    }

    fn two_form(&self, x: &[f64; 4], c: Option<usize>) -> TwoForm {
        let mut comps = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                comps.push(self.d_a(x, c, a, b) - self.d_a(x, c, b, a));
            }
        }
        KForm::from_components(2, &comps).unwrap()
    }

    fn field(&self, x: &[f64; 4]) -> TwoForm {
        self.two_form(x, None)
    }

    fn gradient(&self, x: &[f64; 4]) -> FieldGradient {
        FieldGradient([0, 1, 2, 3].map(|c| self.two_form(x, Some(c))))
    }
}

fn shifted(x: &[f64; 4], a: usize, h: f64) -> [f64; 4] {
    let mut y = *x;
    y[a] += h;
    y
}

fn central<T>(x: &[f64; 4], a: usize, h: f64, f: impl Fn(&[f64; 4]) -> T) -> (T, T) {
    (f(&shifted(x, a, h)), f(&shifted(x, a, -h)))
}

#[test]
fn divergence_of_stress_tensor_matches_closed_form_off_shell() {
    let mut r = rng(101);
    let mut checked = 0;
    while checked < 40 {
        let model = LagrangianModel::born_infeld(r.random_range(0.3..1.2));
        let pot = Potential::random(&mut r, 0.4);
        let x = [0, 1, 2, 3].map(|_| r.random_range(-2.0..2.0));
        let f = pot.field(&x);
        match model.scalars_of(&f) {
            Ok((_, _, s)) if s.delta > 0.2 => {}
            _ => continue,
        }
        let h = 1e-5;

        // ∂_a T^{ab}, lowered
        let mut div = [0.0; 4];
        for a in 0..4 {
            let (p, m) = central(&x, a, h, |y| model.stress_energy(&pot.field(y)).unwrap());
            for (b, d) in div.iter_mut().enumerate() {
                *d += (p.upper(a, b) - m.upper(a, b)) / (2.0 * h);
            }
        }
        for (b, d) in div.iter_mut().enumerate() {
            *d *= METRIC[b];
        }

        // the current this field would need: d⋆G = ⋆J̃
        let partials = [0, 1, 2, 3].map(|a| {
            let (p, m) = central(&x, a, h, |y| model.constitutive(&pot.field(y)).unwrap().hodge());
            (p - m) * (1.0 / (2.0 * h))
        });
        let current = exterior_derivative(&partials).hodge().raise();

        let terms =
            force_terms_with_current(&model, &f, &pot.gradient(&x), &current, &KForm::zero(1)).unwrap();
        let scale = div.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for b in 0..4 {
            assert!(
                (terms.div_t[b] - div[b]).abs() < 1e-6 * scale,
                "component {b}: closed form {:e}, finite difference {:e}",
                terms.div_t[b],
                div[b]
            );
        }
        // the individual NLED pieces are not small here, so the check has teeth
        assert!(terms.xi.max_abs() + terms.eta.0.iter().map(|v| v.abs()).sum::<f64>() > 1e-3);
        checked += 1;
    }
}

#[test]
fn maxwell_divergence_is_lorentz_force_density() {
    let mut r = rng(103);
    let model = LagrangianModel::maxwell();
    for _ in 0..20 {
        let pot = Potential::random(&mut r, 1.0);
        let x = [0, 1, 2, 3].map(|_| r.random_range(-2.0..2.0));
        let h = 1e-5;
        let mut div = [0.0; 4];
        for a in 0..4 {
            let (p, m) = central(&x, a, h, |y| model.stress_energy(&pot.field(y)).unwrap());
            for (b, d) in div.iter_mut().enumerate() {
                *d += METRIC[b] * (p.upper(a, b) - m.upper(a, b)) / (2.0 * h);
            }
        }
        let partials = pot.gradient(&x).0.map(|g| g.hodge());
        let current = exterior_derivative(&partials).hodge().raise();
        let lorentz = pot.field(&x).interior(&current);
        for b in 0..4 {
            assert!((lorentz[b] - div[b]).abs() < 1e-7 * (1.0 + div[b].abs()));
        }
    }
}

#[test]
fn chain_rule_gradients_match_finite_differences() {
    let mut r = rng(107);
    let mut checked = 0;
    while checked < 50 {
        let model = LagrangianModel::born_infeld(r.random_range(0.3..1.5));
        let pot = Potential::random(&mut r, 0.5);
        let x = [0, 1, 2, 3].map(|_| r.random_range(-2.0..2.0));
        let Ok(sg) = scalar_gradients(&model, &pot.field(&x), &pot.gradient(&x)) else { continue };
        if sg.scalars.delta < 0.2 {
            continue;
        }
        let h = 1e-6;
        for a in 0..4 {
            let (p, m) = central(&x, a, h, |y| model.scalars_of(&pot.field(y)).unwrap());
            let fd = |sel: fn(&(f64, f64, nledlab::nled::ScalarBundle)) -> f64| (sel(&p) - sel(&m)) / (2.0 * h);
            let pairs = [
                (sg.d_x[a], fd(|s| s.0)),
                (sg.d_y[a], fd(|s| s.1)),
                (sg.d_m[a], fd(|s| s.2.m)),
                (sg.d_n[a], fd(|s| s.2.n)),
                (sg.d_l[a], fd(|s| s.2.l)),
            ];
            for (i, (an, num)) in pairs.iter().enumerate() {
                assert!((an - num).abs() < 1e-7 * (1.0 + num.abs()), "scalar {i}, axis {a}: {an:e} vs {num:e}");
            }
        }
        checked += 1;
    }
}

/// Covector transformation for a boost with velocity `beta` along z.
fn boost_covector(beta: f64, c: &[f64]) -> [f64; 4] {
    let g = 1.0 / (1.0 - beta * beta).sqrt();
    // inverse boost acts on lower indices
    [g * c[0] + g * beta * c[3], c[1], c[2], g * beta * c[0] + g * c[3]]
}

fn boost_vector(beta: f64, v: &Vector4) -> Vector4 {
    let g = 1.0 / (1.0 - beta * beta).sqrt();
    Vector4::new(g * v.0[0] - g * beta * v.0[3], v.0[1], v.0[2], -g * beta * v.0[0] + g * v.0[3])
}

fn boost_two_form(beta: f64, f: &TwoForm) -> TwoForm {
    let m = common::matrix(f);
    let cols: Vec<[f64; 4]> = (0..4).map(|b| boost_covector(beta, &[m[0][b], m[1][b], m[2][b], m[3][b]])).collect();
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        let row = [cols[0][a], cols[1][a], cols[2][a], cols[3][a]];
        out[a] = boost_covector(beta, &row);
    }
    let mut comps = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            comps.push(out[a][b]);
        }
    }
    KForm::from_components(2, &comps).unwrap()
}

#[test]
fn equation_of_motion_is_boost_covariant() {
    let mut r = rng(109);
    let mut checked = 0;
    while checked < 30 {
        let model = LagrangianModel::born_infeld(r.random_range(0.3..1.2));
        let f = two_form_from_eb(vec3(&mut r, 0.5), vec3(&mut r, 0.5));
        let grad = FieldGradient([0, 1, 2, 3].map(|_| two_form_from_eb(vec3(&mut r, 0.5), vec3(&mut r, 0.5))));
        let dp = KForm::from_components(1, &[0.1, -0.2, 0.3, 0.05]).unwrap();
        let state = FluidState::dust(1.0, r.random_range(-1.0..1.0), r.random_range(-0.6..0.6));
        let v = state.velocity();
        let Ok(rhs) = eom_rhs_covariant(&model, &f, &grad, &v, 1.3, state.rho_e, &dp) else { continue };

        let beta = r.random_range(-0.7..0.7);
        let f2 = boost_two_form(beta, &f);
        // ∂' = Λ⁻ᵀ∂, and each derivative is itself a boosted 2-form
        let boosted: Vec<TwoForm> = grad.0.iter().map(|g| boost_two_form(beta, g)).collect();
        let grad2 = FieldGradient([0, 1, 2, 3].map(|c| {
            let mut acc = KForm::zero(2);
            for d in 0..4 {
                let mut unit = [0.0; 4];
                unit[d] = 1.0;
                acc += boosted[d] * boost_covector(beta, &unit)[c];
            }
            acc
        }));
        let dp2 = KForm::from_components(1, &boost_covector(beta, dp.components())).unwrap();
        let rhs2 = eom_rhs_covariant(&model, &f2, &grad2, &boost_vector(beta, &v), 1.3, state.rho_e, &dp2).unwrap();
        let expect = boost_covector(beta, rhs.components());
        for a in 0..4 {
            assert!((rhs2[a] - expect[a]).abs() < 1e-11 * (1.0 + expect[a].abs()), "{a}: {} vs {}", rhs2[a], expect[a]);
        }
        checked += 1;
    }
}

#[test]
fn charged_dust_in_uniform_field_follows_hyperbolic_motion() {
    let (q_over_m, e_field) = (0.5, 1.2);
    let model = LagrangianModel::maxwell();
    let f = two_form_from_eb([0.0, 0.0, e_field], [0.0; 3]);
    let grad = FieldGradient::zero();
    let accel = |w: f64| {
        let u = w / (1.0 + w * w).sqrt();
        let s = FluidState::dust(1.0, q_over_m, u);
        let rhs = eom_rhs(&model, &EquationOfState::ColdDust, &f, &grad, &s, [0.0; 2]).unwrap();
        // ρ ∇̃_V V = ρ γ d(γu)/dt ẑ
        rhs[3] / s.gamma()
    };
    let (mut w, mut z, dt) = (0.0f64, 0.0f64, 1e-3);
    let vel = |w: f64| w / (1.0 + w * w).sqrt();
    for _ in 0..2000 {
        let (k1w, k1z) = (accel(w), vel(w));
        let (k2w, k2z) = (accel(w + 0.5 * dt * k1w), vel(w + 0.5 * dt * k1w));
        let (k3w, k3z) = (accel(w + 0.5 * dt * k2w), vel(w + 0.5 * dt * k2w));
        let (k4w, k4z) = (accel(w + dt * k3w), vel(w + dt * k3w));
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }
    let (a, t) = (q_over_m * e_field, 2.0);
    assert!((w - a * t).abs() < 1e-12);
    assert!((z - ((1.0 + (a * t).powi(2)).sqrt() - 1.0) / a).abs() < 1e-12);
}

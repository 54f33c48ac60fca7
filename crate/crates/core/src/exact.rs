//! Closed-form travelling wave on a static transverse magnetic background,
//! its phase speed, and the transit-time delay used to bound `κ`.
//!
//! In natural units the field
//!
//! ```text
//! F = 𝓔(z − vt) d(z − vt)∧dx − B dy∧dz,     v = 1/√(1 + κ²B²)
//! ```
//!
//! solves the Born-Infeld equations for any smooth profile `𝓔`. In terms of
//! [`two_form_from_eb`] that is `e = (v𝓔, 0, 0)` and `b = (−B, 𝓔, 0)`.

use crate::error::{NledError, Result};
use crate::forms::{two_form_from_eb, TwoForm};

/// CODATA 2018 exact and recommended values.
pub mod si {
    /// Speed of light in vacuum, m/s (exact).
    pub const C: f64 = 299_792_458.0;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Elementary charge, C (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Classical electron radius, m.
    pub const ELECTRON_RADIUS: f64 = 2.817_940_326_2e-15;
}

/// Longitudinal wave profile `𝓔(s)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `A exp(−(s − c)²/(2w²))`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// `A (1 + cos(π(s − c)/w))/2` on `|s − c| < w`, zero outside.
    RaisedCosine { amplitude: f64, width: f64, center: f64 },
    /// Catmull-Rom cubic through `(z, values)`; zero outside the table.
    Tabulated { z: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NledError::ContractViolation(m));
        match self {
            Profile::Gaussian { amplitude, width, center }
            | Profile::RaisedCosine { amplitude, width, center } => {
                if !(amplitude.is_finite() && center.is_finite() && *width > 0.0 && width.is_finite()) {
                    return bad(format!("invalid profile parameters {self:?}"));
                }
            }
            Profile::Tabulated { z, values } => {
                if z.len() != values.len() || z.len() < 4 {
                    return bad("tabulated profile needs >= 4 points and matching lengths".into());
                }
                if !z.windows(2).all(|w| w[1] > w[0]) || !z.iter().chain(values).all(|v| v.is_finite()) {
                    return bad("tabulated profile needs finite, strictly increasing z".into());
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> f64 {
        match self {
            Profile::Gaussian { center, .. } | Profile::RaisedCosine { center, .. } => *center,
            Profile::Tabulated { z, .. } => 0.5 * (z[0] + z[z.len() - 1]),
        }
    }

    /// `(𝓔(s), 𝓔′(s))`
    pub fn eval(&self, s: f64) -> (f64, f64) {
        match *self {
            Profile::Gaussian { amplitude, width, center } => {
                let q = (s - center) / width;
                let v = amplitude * (-0.5 * q * q).exp();
                (v, -v * q / width)
            }
            Profile::RaisedCosine { amplitude, width, center } => {
                let q = (s - center) / width;
                if q.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let arg = std::f64::consts::PI * q;
                (
                    0.5 * amplitude * (1.0 + arg.cos()),
                    -0.5 * amplitude * std::f64::consts::PI / width * arg.sin(),
                )
            }
            Profile::Tabulated { ref z, ref values } => catmull_rom(z, values, s),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        match self.clone() {
            Profile::Gaussian { amplitude, width, center } => {
                Profile::Gaussian { amplitude: amplitude * factor, width, center }
            }
            Profile::RaisedCosine { amplitude, width, center } => {
                Profile::RaisedCosine { amplitude: amplitude * factor, width, center }
            }
            Profile::Tabulated { z, values } => {
                Profile::Tabulated { z, values: values.iter().map(|v| v * factor).collect() }
            }
        }
    }
}

fn catmull_rom(z: &[f64], v: &[f64], s: f64) -> (f64, f64) {
    let n = z.len();
    if s < z[0] || s > z[n - 1] {
        return (0.0, 0.0);
    }
    let i = match z.partition_point(|&zi| zi <= s) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let h = z[i + 1] - z[i];
    // one-sided slopes at the ends
    let slope = |j: usize| -> f64 {
        if j == 0 {
            (v[1] - v[0]) / (z[1] - z[0])
        } else if j == n - 1 {
            (v[n - 1] - v[n - 2]) / (z[n - 1] - z[n - 2])
        } else {
            (v[j + 1] - v[j - 1]) / (z[j + 1] - z[j - 1])
        }
    };
    let (m0, m1) = (slope(i) * h, slope(i + 1) * h);
    let t = (s - z[i]) / h;
    let (t2, t3) = (t * t, t * t * t);
    let val = (2.0 * t3 - 3.0 * t2 + 1.0) * v[i]
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * v[i + 1]
        + (t3 - t2) * m1;
    let der = (6.0 * t2 - 6.0 * t) * v[i]
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * v[i + 1]
        + (3.0 * t2 - 2.0 * t) * m1;
    (val, der / h)
}

/// `v = 1/√(1 + κ²B²)` in natural units.
pub fn phase_speed(kappa: f64, b: f64) -> f64 {
    let kb = kappa * b;
    1.0 / (1.0 + kb * kb).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolutionSpec {
    pub profile: Profile,
    /// static field, `F ∋ −B dy∧dz`
    pub b: f64,
    pub kappa: f64,
    /// Wrap `z − vt` into a box of this length centred on the profile, for
    /// periodic domains.
    pub period: Option<f64>,
}

impl ExactSolutionSpec {
    pub fn new(profile: Profile, b: f64, kappa: f64) -> Self {
        ExactSolutionSpec { profile, b, kappa, period: None }
    }

    pub fn periodic(mut self, length: f64) -> Self {
        self.period = Some(length);
        self
    }

    pub fn phase_speed(&self) -> f64 {
        phase_speed(self.kappa, self.b)
    }

    fn argument(&self, z: f64, t: f64) -> f64 {
        let s = z - self.phase_speed() * t;
        match self.period {
            None => s,
            Some(l) => {
                let c = self.profile.center();
                c - 0.5 * l + (s - (c - 0.5 * l)).rem_euclid(l)
            }
        }
    }

    /// `(𝓔, 𝓔′)` at the retarded argument.
    pub fn profile_at(&self, z: f64, t: f64) -> (f64, f64) {
        self.profile.eval(self.argument(z, t))
    }

    pub fn sample_fields(&self, z: f64, t: f64) -> TwoForm {
        let p = self.profile_at(z, t).0;
        two_form_from_eb([self.phase_speed() * p, 0.0, 0.0], [-self.b, p, 0.0])
    }

    /// Reduced variables `(E_x, B_y, b_x)`.
    pub fn sample_reduced(&self, z: f64, t: f64) -> (f64, f64, f64) {
        let p = self.profile_at(z, t).0;
        (self.phase_speed() * p, p, -self.b)
    }

    /// `∂t F`
    pub fn sample_time_derivative(&self, z: f64, t: f64) -> TwoForm {
        let v = self.phase_speed();
        let dp = -v * self.profile_at(z, t).1;
        two_form_from_eb([v * dp, 0.0, 0.0], [0.0, dp, 0.0])
    }
}

/// How a laboratory field in tesla enters `v = c/√(1 + c²κ²B²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BInterpretation {
    /// The 2-form component is `B_F = c·B_tesla`.
    Tesla,
    /// The number is already the 2-form component.
    FComponent,
}

impl BInterpretation {
    pub fn field_component(self, b_tesla: f64) -> f64 {
        match self {
            BInterpretation::Tesla => si::C * b_tesla,
            BInterpretation::FComponent => b_tesla,
        }
    }
}

/// Magnet-transit experiment in SI units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentDesign {
    /// magnet length, m
    pub l0: f64,
    pub b_tesla: f64,
    pub kappa_si: f64,
    /// s
    pub timing_resolution: f64,
}

impl ExperimentDesign {
    pub fn validate(&self) -> Result<()> {
        let ok = self.l0 > 0.0
            && self.l0.is_finite()
            && self.b_tesla >= 0.0
            && self.b_tesla.is_finite()
            && self.kappa_si >= 0.0
            && self.kappa_si.is_finite()
            && self.timing_resolution > 0.0
            && self.timing_resolution.is_finite();
        if ok {
            Ok(())
        } else {
            Err(NledError::ContractViolation(format!("invalid experiment design {self:?}")))
        }
    }
}

/// `√(1 + x) − 1` without cancellation for small `x`.
pub fn sqrt1pm1(x: f64) -> f64 {
    x / ((1.0 + x).sqrt() + 1.0)
}

fn delay_for_kappa(d: &ExperimentDesign, kappa: f64, interp: BInterpretation) -> f64 {
    let bf = interp.field_component(d.b_tesla);
    let ckb = si::C * kappa * bf;
    d.l0 / si::C * sqrt1pm1(ckb * ckb)
}

/// `τ = (L₀/c)(√(1 + c²κ²B_F²) − 1)`, from the phase speed.
pub fn transit_delay_exact(d: &ExperimentDesign, interp: BInterpretation) -> f64 {
    delay_for_kappa(d, d.kappa_si, interp)
}

/// `τ = (L₀/2) κ |B|` with `B` in tesla, kept for comparison with the exact delay.
pub fn transit_delay_linear(d: &ExperimentDesign) -> f64 {
    0.5 * d.l0 * d.kappa_si * d.b_tesla.abs()
}

/// `ε₀ r₀² / e` with CODATA 2018 constants.
pub fn kappa_from_electron_radius() -> f64 {
    kappa_from_radius(si::ELECTRON_RADIUS)
}

pub fn kappa_from_radius(r0: f64) -> f64 {
    si::EPSILON_0 * r0 * r0 / si::ELEMENTARY_CHARGE
}

const MAX_BISECTION_STEPS: usize = 200;
const BISECTION_RTOL: f64 = 1e-10;

/// Smallest `κ` whose exact delay reaches the timing resolution.
pub fn kappa_bound_from_timing(d: &ExperimentDesign, interp: BInterpretation) -> Result<f64> {
    d.validate()?;
    if !(d.b_tesla > 0.0) {
        return Err(NledError::ContractViolation("kappa bound needs B > 0".into()));
    }
    let target = d.timing_resolution;
    let f = |k: f64| delay_for_kappa(d, k, interp) - target;
    // geometric bracket; the exponent range of f64 bounds the scan
    let (mut lo, mut hi) = (0.0, 1.0);
    if f(hi) < 0.0 {
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(NledError::NumericalFailure("no kappa reaches the timing resolution".into()));
            }
        }
    } else {
        loop {
            let half = 0.5 * hi;
            if half == 0.0 {
                return Ok(0.0);
            }
            if f(half) < 0.0 {
                lo = half;
                break;
            }
            hi = half;
        }
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_RTOL * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(NledError::NumericalFailure(format!(
        "kappa bisection did not converge in {MAX_BISECTION_STEPS} steps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(l0: f64, b: f64, kappa: f64) -> ExperimentDesign {
        ExperimentDesign { l0, b_tesla: b, kappa_si: kappa, timing_resolution: 1e-12 }
    }

    #[test]
    fn phase_speed_values() {
        assert_eq!(phase_speed(0.7, 0.0), 1.0);
        assert_eq!(phase_speed(0.0, 5.0), 1.0);
        assert!((phase_speed(3f64.sqrt(), 1.0) - 0.5).abs() < 1e-15);
        assert!((phase_speed(1.0, 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((phase_speed(0.75, 1.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_profile_is_static_background() {
        let spec = ExactSolutionSpec::new(
            Profile::Gaussian { amplitude: 0.0, width: 1.0, center: 0.0 },
            0.8,
            1.0,
        );
        for (z, t) in [(0.0, 0.0), (3.0, -2.0), (-1.0, 7.5)] {
            assert_eq!(spec.sample_fields(z, t), two_form_from_eb([0.0; 3], [-0.8, 0.0, 0.0]));
        }
    }

    #[test]
    fn travelling_wave_property() {
        let spec = ExactSolutionSpec::new(
            Profile::RaisedCosine { amplitude: 0.3, width: 2.0, center: 1.0 },
            0.75,
            1.0,
        );
        let v = spec.phase_speed();
        for (z, t, d) in [(0.5, 0.25, 0.5), (1.5, 1.0, 2.0), (-0.25, 0.0, 1.0)] {
            assert_eq!(spec.sample_fields(z, t), spec.sample_fields(z - v * d, t - d));
        }
    }

    #[test]
    fn periodic_wrap() {
        let spec = ExactSolutionSpec::new(Profile::Gaussian { amplitude: 1.0, width: 0.5, center: 0.0 }, 0.0, 0.0)
            .periodic(10.0);
        assert!((spec.profile_at(0.25, 10.0).0 - spec.profile_at(0.25, 0.0).0).abs() < 1e-15);
        assert!((spec.profile_at(9.5, 0.0).0 - spec.profile_at(-0.5, 0.0).0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_profile_reproduces_cubics_and_knots() {
        let z: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let values: Vec<f64> = z.iter().map(|s| (s * 1.3).sin()).collect();
        let p = Profile::Tabulated { z: z.clone(), values: values.clone() };
        p.validate().unwrap();
        for (s, v) in z.iter().zip(&values) {
            assert!((p.value(*s) - v).abs() < 1e-15);
        }
        assert_eq!(p.eval(-0.1), (0.0, 0.0));
        // interior derivative is consistent with the value
        let h = 1e-6;
        for s in [0.7, 1.9, 3.3] {
            let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
            assert!((p.eval(s).1 - fd).abs() < 1e-8);
        }
        let linear = Profile::Tabulated { z: z.clone(), values: z.iter().map(|s| 2.0 * s - 1.0).collect() };
        assert!((linear.value(1.1) - 1.2).abs() < 1e-14);
        assert!(Profile::Tabulated { z: vec![0.0, 1.0], values: vec![0.0, 1.0] }.validate().is_err());
    }

    #[test]
    fn analytic_profile_derivatives() {
        let h = 1e-6;
        for p in [
            Profile::Gaussian { amplitude: 0.4, width: 0.7, center: 0.2 },
            Profile::RaisedCosine { amplitude: -1.1, width: 1.5, center: -0.3 },
        ] {
            for s in [-0.9, -0.1, 0.35, 0.8] {
                let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
                assert!((p.eval(s).1 - fd).abs() < 1e-8, "{p:?} at {s}");
            }
        }
    }

    #[test]
    fn delay_examples() {
        assert_eq!(transit_delay_exact(&design(1.0, 0.0, 1e-22), BInterpretation::Tesla), 0.0);
        // x = 8 with L0/c = 1 s
        let d = design(si::C, 8f64.sqrt() / si::C, 1.0);
        assert!((transit_delay_exact(&d, BInterpretation::FComponent) - 2.0).abs() < 1e-15);
        assert!((transit_delay_linear(&design(1.0, 10.0, 1e-22)) - 5e-22).abs() < 1e-37);
        assert!((transit_delay_linear(&design(2.0, 1.0, 1e-22)) - 1e-22).abs() < 1e-37);
        assert_eq!(transit_delay_linear(&design(2.0, 0.0, 1e-22)), 0.0);
    }

    #[test]
    fn sqrt1pm1_is_cancellation_safe() {
        for x in [1e-300, 1e-30, 1e-12, 1e-8] {
            let series = x / 2.0 - x * x / 8.0;
            assert!((sqrt1pm1(x) - series).abs() <= 1e-6 * series);
        }
        assert_eq!(sqrt1pm1(8.0), 2.0);
        assert_eq!(sqrt1pm1(0.0), 0.0);
    }

    #[test]
    fn electron_radius_estimate() {
        let k = kappa_from_electron_radius();
        assert!((k - 4.39e-22).abs() < 0.01e-22, "{k:e}");
        assert_eq!(kappa_from_radius(0.0), 0.0);
        let r = si::ELECTRON_RADIUS;
        assert!((kappa_from_radius(2.0 * r) / kappa_from_radius(r) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_bound_needs_field() {
        let d = design(1.0, 0.0, 0.0);
        assert!(matches!(
            kappa_bound_from_timing(&d, BInterpretation::Tesla),
            Err(NledError::ContractViolation(_))
        ));
    }
}

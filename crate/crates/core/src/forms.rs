//! Numeric exterior algebra on 4D Minkowski space at a single point.
//!
//! Coordinates are ordered `(t, x, y, z)` with metric `diag(-1, 1, 1, 1)` and
//! orientation `vol = dt∧dx∧dy∧dz`. A k-form stores one component per strictly
//! increasing multi-index, in lexicographic order:
//!
//! | degree | components                                   |
//! |--------|----------------------------------------------|
//! | 0      | `1`                                          |
//! | 1      | `t, x, y, z`                                 |
//! | 2      | `tx, ty, tz, xy, xz, yz`                     |
//! | 3      | `txy, txz, tyz, xyz`                         |
//! | 4      | `txyz`                                       |
//!
//! Internally each basis element is a 4-bit mask (bit `a` set when `dx^a` is a
//! factor), which turns wedge signs into inversion counts.
//!
//! All quantities are in natural units (`c = 1`).

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{NledError, Result};

pub const DIM: usize = 4;
pub const T: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;
pub const Z: usize = 3;

/// Diagonal of the Minkowski metric in the orthonormal co-frame.
pub const METRIC: [f64; DIM] = [-1.0, 1.0, 1.0, 1.0];

/// Global sign applied by [`KForm::hodge`]. With `vol = dt∧dx∧dy∧dz` the
/// convention `X(e, 0) = |e|²` already holds, so no flip is needed.
pub const HODGE_ORIENTATION: f64 = 1.0;

const BASIS: [&[u8]; 5] = [
    &[0b0000],
    &[0b0001, 0b0010, 0b0100, 0b1000],
    &[0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100],
    &[0b0111, 0b1011, 0b1101, 0b1110],
    &[0b1111],
];

// Position of a mask within the basis of its own degree.
const POSITION: [usize; 16] = {
    let mut pos = [0usize; 16];
    let mut k = 0;
    while k < 5 {
        let mut i = 0;
        while i < BASIS[k].len() {
            pos[BASIS[k][i] as usize] = i;
            i += 1;
        }
        k += 1;
    }
    pos
};

/// Number of components of a k-form in four dimensions.
pub const fn component_count(degree: usize) -> usize {
    match degree {
        0 | 4 => 1,
        1 | 3 => 4,
        2 => 6,
        _ => 0,
    }
}

/// Sign of `e^I ∧ e^J` relative to the increasing-order basis element of `I ∪ J`.
/// Caller guarantees `I ∩ J = ∅`.
fn wedge_sign(i_mask: u8, j_mask: u8) -> f64 {
    let mut inversions = 0u32;
    for a in 0..DIM {
        if i_mask & (1 << a) != 0 {
            // factors of J that sit to the right of `a` but have a smaller index
            inversions += (j_mask & ((1u8 << a) - 1)).count_ones();
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A differential form of degree 0..=4 with constant components.
#[derive(Clone, Copy, PartialEq)]
pub struct KForm {
    degree: usize,
    comps: [f64; 6],
}

/// 2-forms carry the electromagnetic field and its excitation.
pub type TwoForm = KForm;
pub type OneForm = KForm;
pub type ThreeForm = KForm;

impl std::fmt::Debug for KForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KForm<{}>{:?}", self.degree, self.components())
    }
}

impl KForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "form degree {degree} exceeds {DIM}");
        KForm { degree, comps: [0.0; 6] }
    }

    pub fn scalar(value: f64) -> Self {
        let mut f = KForm::zero(0);
        f.comps[0] = value;
        f
    }

    /// `dt∧dx∧dy∧dz`.
    pub fn volume() -> Self {
        let mut f = KForm::zero(4);
        f.comps[0] = 1.0;
        f
    }

    /// Coordinate basis covector `dx^a`.
    pub fn coordinate(a: usize) -> Self {
        let mut f = KForm::zero(1);
        f.comps[a] = 1.0;
        f
    }

    /// `dx^{i1}∧…∧dx^{ik}` for an arbitrary (not necessarily sorted) index list.
    /// Repeated indices give the zero form.
    pub fn basis(indices: &[usize]) -> Self {
        indices
            .iter()
            .fold(KForm::scalar(1.0), |acc, &a| acc.wedge(&KForm::coordinate(a)))
    }

    pub fn from_components(degree: usize, comps: &[f64]) -> Result<Self> {
        if degree > DIM || comps.len() != component_count(degree) {
            return Err(NledError::ContractViolation(format!(
                "a {degree}-form needs {} components, got {}",
                component_count(degree),
                comps.len()
            )));
        }
        let mut f = KForm::zero(degree);
        f.comps[..comps.len()].copy_from_slice(comps);
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[f64] {
        &self.comps[..component_count(self.degree)]
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        let n = component_count(self.degree);
        &mut self.comps[..n]
    }

    /// Component along the basis element built from the sorted index list.
    pub fn component(&self, sorted_indices: &[usize]) -> f64 {
        debug_assert_eq!(sorted_indices.len(), self.degree);
        let mask = sorted_indices.iter().fold(0u8, |m, &a| m | (1 << a));
        self.comps[POSITION[mask as usize]]
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    /// Exterior product, or a contract violation when `deg a + deg b > 4`.
    pub fn try_wedge(&self, other: &KForm) -> Result<KForm> {
        let degree = self.degree + other.degree;
        if degree > DIM {
            return Err(NledError::ContractViolation(format!(
                "wedge of a {}-form with a {}-form overflows dimension {DIM}",
                self.degree, other.degree
            )));
        }
        let mut out = KForm::zero(degree);
        for (i, &mi) in BASIS[self.degree].iter().enumerate() {
            let a = self.comps[i];
            if a == 0.0 {
                continue;
            }
            for (j, &mj) in BASIS[other.degree].iter().enumerate() {
                if mi & mj != 0 {
                    continue;
                }
                let b = other.comps[j];
                out.comps[POSITION[(mi | mj) as usize]] += wedge_sign(mi, mj) * a * b;
            }
        }
        Ok(out)
    }

    /// Exterior product. Panics on degree overflow; see [`KForm::try_wedge`].
    pub fn wedge(&self, other: &KForm) -> KForm {
        match self.try_wedge(other) {
            Ok(f) => f,
            Err(e) => panic!("{e}"),
        }
    }

    /// Hodge map with `α∧⋆β = g(α, β) vol`.
    pub fn hodge(&self) -> KForm {
        let mut out = KForm::zero(DIM - self.degree);
        for (i, &mi) in BASIS[self.degree].iter().enumerate() {
            let complement = !mi & 0b1111;
            let metric_sign = if mi & 1 != 0 { METRIC[T] } else { 1.0 };
            out.comps[POSITION[complement as usize]] =
                HODGE_ORIENTATION * metric_sign * wedge_sign(mi, complement) * self.comps[i];
        }
        out
    }

    /// Interior product `i_v`, or a contract violation on 0-forms.
    pub fn try_interior(&self, v: &Vector4) -> Result<KForm> {
        if self.degree == 0 {
            return Err(NledError::ContractViolation(
                "interior product of a 0-form".to_string(),
            ));
        }
        let mut out = KForm::zero(self.degree - 1);
        for (i, &mi) in BASIS[self.degree].iter().enumerate() {
            let c = self.comps[i];
            if c == 0.0 {
                continue;
            }
            let mut slot = 0;
            for a in 0..DIM {
                if mi & (1 << a) == 0 {
                    continue;
                }
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                out.comps[POSITION[(mi & !(1 << a)) as usize]] += sign * v.0[a] * c;
                slot += 1;
            }
        }
        Ok(out)
    }

    /// Interior product. Panics on 0-forms; see [`KForm::try_interior`].
    pub fn interior(&self, v: &Vector4) -> KForm {
        match self.try_interior(v) {
            Ok(f) => f,
            Err(e) => panic!("{e}"),
        }
    }

    /// Metric dual of a 1-form.
    pub fn raise(&self) -> Vector4 {
        assert_eq!(self.degree, 1, "only 1-forms can be raised");
        let mut v = [0.0; DIM];
        for a in 0..DIM {
            v[a] = METRIC[a] * self.comps[a];
        }
        Vector4(v)
    }

    /// Evaluates a 1-form on a vector.
    pub fn apply(&self, v: &Vector4) -> f64 {
        assert_eq!(self.degree, 1, "only 1-forms act on vectors");
        (0..DIM).map(|a| self.comps[a] * v.0[a]).sum()
    }
}

impl Index<usize> for KForm {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.components()[i]
    }
}

impl Add for KForm {
    type Output = KForm;
    fn add(mut self, rhs: KForm) -> KForm {
        self += rhs;
        self
    }
}

impl AddAssign for KForm {
    fn add_assign(&mut self, rhs: KForm) {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        for (a, b) in self.comps.iter_mut().zip(rhs.comps) {
            *a += b;
        }
    }
}

impl Sub for KForm {
    type Output = KForm;
    fn sub(self, rhs: KForm) -> KForm {
        self + (-rhs)
    }
}

impl Neg for KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self * -1.0
    }
}

impl Mul<f64> for KForm {
    type Output = KForm;
    fn mul(mut self, s: f64) -> KForm {
        self.comps.iter_mut().for_each(|c| *c *= s);
        self
    }
}

impl Mul<KForm> for f64 {
    type Output = KForm;
    fn mul(self, f: KForm) -> KForm {
        f * self
    }
}

/// Contravariant vector with components along `(∂t, ∂x, ∂y, ∂z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector4(pub [f64; DIM]);

impl Vector4 {
    pub const ZERO: Vector4 = Vector4([0.0; DIM]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Vector4([t, x, y, z])
    }

    /// Frame vector `X_a`.
    pub fn basis(a: usize) -> Self {
        let mut v = [0.0; DIM];
        v[a] = 1.0;
        Vector4(v)
    }

    /// The 1-form `Ṽ = g(V, ·)`.
    pub fn lower(&self) -> OneForm {
        let mut f = KForm::zero(1);
        for a in 0..DIM {
            f.comps[a] = METRIC[a] * self.0[a];
        }
        f
    }

    pub fn dot(&self, other: &Vector4) -> f64 {
        (0..DIM).map(|a| METRIC[a] * self.0[a] * other.0[a]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Add for Vector4 {
    type Output = Vector4;
    fn add(self, rhs: Vector4) -> Vector4 {
        let mut v = self.0;
        v.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        Vector4(v)
    }
}

impl Sub for Vector4 {
    type Output = Vector4;
    fn sub(self, rhs: Vector4) -> Vector4 {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Vector4 {
    type Output = Vector4;
    fn mul(self, s: f64) -> Vector4 {
        Vector4(self.0.map(|c| c * s))
    }
}

/// `X = ⋆(F∧⋆F)`; equals `|e|² − |b|²`.
pub fn invariant_x(f: &TwoForm) -> f64 {
    assert_eq!(f.degree(), 2, "X is defined on 2-forms");
    f.wedge(&f.hodge()).hodge()[0]
}

/// `Y = ⋆(F∧F)`; equals `2 e·b` with this orientation.
pub fn invariant_y(f: &TwoForm) -> f64 {
    assert_eq!(f.degree(), 2, "Y is defined on 2-forms");
    f.wedge(f).hodge()[0]
}

/// `F = Σ eᵢ dxⁱ∧dt + b_x dy∧dz + b_y dz∧dx + b_z dx∧dy`.
pub fn two_form_from_eb(e: [f64; 3], b: [f64; 3]) -> TwoForm {
    // component order: tx, ty, tz, xy, xz, yz
    let mut f = KForm::zero(2);
    f.comps[..6].copy_from_slice(&[-e[0], -e[1], -e[2], b[2], -b[1], b[0]]);
    f
}

/// Inverse of [`two_form_from_eb`].
pub fn eb_from_two_form(f: &TwoForm) -> ([f64; 3], [f64; 3]) {
    assert_eq!(f.degree(), 2, "expected a 2-form");
    let c = f.components();
    ([-c[0], -c[1], -c[2]], [c[5], -c[4], c[3]])
}

/// `dω = Σ_a dx^a ∧ ∂_a ω` from the coordinate derivatives of a k-form.
pub fn exterior_derivative(partials: &[KForm; DIM]) -> KForm {
    let degree = partials[0].degree();
    (0..DIM).fold(KForm::zero(degree + 1), |acc, a| {
        acc + KForm::coordinate(a).wedge(&partials[a])
    })
}

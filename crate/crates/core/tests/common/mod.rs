//! Test-only oracles, independent of the library's bitmask algebra.
#![allow(dead_code, clippy::needless_range_loop)]

use nledlab::forms::{KForm, METRIC};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Permutation symbol ε̂_{abcd} with ε̂_{0123} = +1.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut inversions = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Antisymmetric matrix F_ab of a 2-form (F = ½ F_ab dx^a∧dx^b).
pub fn matrix(f: &KForm) -> [[f64; 4]; 4] {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut m = [[0.0; 4]; 4];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        m[a][b] = f.components()[k];
        m[b][a] = -f.components()[k];
    }
    m
}

/// (⋆F)_cd = ½ F^ab ε_abcd, metric diag(−1,1,1,1).
pub fn hodge_matrix(f: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for c in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += 0.5 * METRIC[a] * METRIC[b] * f[a][b] * levi_civita(a, b, c, d);
                }
            }
            out[c][d] = s;
        }
    }
    out
}

/// ⋆(F∧H) for two 2-forms: (F∧H)_0123 = ¼ ε̂^abcd F_ab H_cd, and ⋆vol = −1.
pub fn star_wedge(f: &[[f64; 4]; 4], h: &[[f64; 4]; 4]) -> f64 {
    let mut top = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    top += 0.25 * levi_civita(a, b, c, d) * f[a][b] * h[c][d];
                }
            }
        }
    }
    -top
}

pub fn oracle_x(f: &KForm) -> f64 {
    let m = matrix(f);
    star_wedge(&m, &hodge_matrix(&m))
}

pub fn oracle_y(f: &KForm) -> f64 {
    let m = matrix(f);
    star_wedge(&m, &m)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Seeded generator so fixtures are reproducible.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vec3(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    [
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    ]
}

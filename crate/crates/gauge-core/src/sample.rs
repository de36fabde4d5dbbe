//! Deterministic sampling: seeded RNG streams, Halton low-discrepancy
//! points for region probes, and small lattices in the structure groups for
//! equivariance checks. Everything here is reproducible from the seed so
//! reports are byte-stable across runs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::liealg::{AlgebraTag, GroupElement, LieValue};

/// Seeded deterministic RNG stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const PRIMES: [usize; 7] = [2, 3, 5, 7, 11, 13, 17];

/// Radical-inverse of `index` in the given base (van der Corput).
pub fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// First `n` Halton points scaled into the box (1-based indices skip the
/// origin). Supports up to 7 dimensions.
pub fn halton_points(n: usize, bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    assert!(bounds.len() <= PRIMES.len(), "too many dimensions for the prime table");
    (1..=n)
        .map(|i| {
            bounds
                .iter()
                .zip(PRIMES.iter())
                .map(|(&(lo, hi), &p)| lo + (hi - lo) * halton(i, p))
                .collect()
        })
        .collect()
}

/// Uniform random points in the box.
pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect()
}

/// Evenly spaced phases on the unit circle.
pub fn u1_lattice(n: usize) -> Vec<GroupElement> {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            GroupElement::new(AlgebraTag::U1, &[Complex64::new(t.cos(), t.sin())]).unwrap()
        })
        .collect()
}

/// Unit quaternion from three uniforms (area-preserving), as an SU(2)
/// matrix [[w + iz, y + ix], [-y + ix, w - iz]].
fn su2_from_cube(u1: f64, u2: f64, u3: f64) -> GroupElement {
    let two_pi = 2.0 * std::f64::consts::PI;
    let (s1, c1) = (two_pi * u2).sin_cos();
    let (s2, c2) = (two_pi * u3).sin_cos();
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (x, y, z, w) = (a * s1, a * c1, b * s2, b * c2);
    GroupElement::new(
        AlgebraTag::Su2,
        &[
            Complex64::new(w, z),
            Complex64::new(y, x),
            Complex64::new(-y, x),
            Complex64::new(w, -z),
        ],
    )
    .unwrap()
}

/// Low-discrepancy lattice in SU(2) via Halton-driven uniform quaternions.
pub fn su2_lattice(n: usize) -> Vec<GroupElement> {
    (1..=n)
        .map(|i| su2_from_cube(halton(i, 2), halton(i, 3), halton(i, 5)))
        .collect()
}

/// Uniform random SU(2) element.
pub fn random_su2(rng: &mut ChaCha8Rng) -> GroupElement {
    su2_from_cube(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>())
}

/// Random group element of the given structure group.
pub fn random_group(rng: &mut ChaCha8Rng, tag: AlgebraTag) -> GroupElement {
    match tag {
        AlgebraTag::U1 => {
            let t = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            GroupElement::new(AlgebraTag::U1, &[Complex64::new(t.cos(), t.sin())]).unwrap()
        }
        AlgebraTag::Su2 => random_su2(rng),
        AlgebraTag::GlnC(_) => crate::liealg::exp(&random_algebra(rng, tag, 0.7)),
    }
}

/// Random algebra element with entries of the given magnitude scale.
pub fn random_algebra(rng: &mut ChaCha8Rng, tag: AlgebraTag, scale: f64) -> LieValue {
    let mut draw = || rng.gen_range(-1.0f64..1.0) * scale;
    match tag {
        AlgebraTag::U1 => LieValue::u1(draw()),
        AlgebraTag::Su2 => {
            let (a, b, c) = (draw(), draw(), draw());
            LieValue::su2(a, b, c)
        }
        AlgebraTag::GlnC(n) => {
            let mut entries = [Complex64::new(0.0, 0.0); 4];
            for e in entries.iter_mut().take(n * n) {
                *e = Complex64::new(draw(), draw());
            }
            LieValue { tag, entries }
        }
    }
}

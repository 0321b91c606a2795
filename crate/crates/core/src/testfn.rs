//! Generators for the test functions used to exercise the inequalities.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::fourier::Signal2D;
use crate::zmod::RingContext;

/// Family a generated test function belongs to; recorded in reports as
/// `witness_kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Gaussian,
    Sparse,
    Delta,
    Indicator,
    Character,
    Box,
    Unimodular,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Gaussian => "gaussian",
            TestKind::Sparse => "sparse",
            TestKind::Delta => "delta",
            TestKind::Indicator => "indicator",
            TestKind::Character => "character",
            TestKind::Box => "box",
            TestKind::Unimodular => "unimodular",
        }
    }
}

/// Standard complex Gaussian: independent N(0, 1/2) real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_values<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

pub fn unimodular<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random support of `size` grid points, ascending row-major indices.
pub fn random_support<R: Rng + ?Sized>(rng: &mut R, grid: usize, size: usize) -> Vec<usize> {
    let mut idx = sample(rng, grid, size.min(grid)).into_vec();
    idx.sort_unstable();
    idx
}

/// Signal with the given support and amplitudes drawn by `amp`.
pub fn supported_signal<R: Rng + ?Sized>(
    ring: &RingContext,
    support: &[usize],
    rng: &mut R,
    mut amp: impl FnMut(&mut R) -> Complex64,
) -> Signal2D {
    let mut f = Signal2D::zeros(ring);
    for &i in support {
        f.values_mut()[i] = amp(rng);
    }
    f
}

pub fn random_gaussian<R: Rng + ?Sized>(ring: &RingContext, rng: &mut R) -> Signal2D {
    Signal2D::new(ring, gaussian_values(rng, ring.n() * ring.n())).expect("finite")
}

/// Indicator of `{(a + d1 i, b + d2 j) : 0 <= i < len1, 0 <= j < len2}`.
pub fn progression_box(ring: &RingContext, start: (u64, u64), steps: (u64, u64), lens: (u64, u64)) -> Signal2D {
    let n = ring.modulus();
    let mut f = Signal2D::zeros(ring);
    for i in 0..lens.0 {
        for j in 0..lens.1 {
            let at = ((start.0 + steps.0 * i) % n, (start.1 + steps.1 * j) % n);
            let k = f.index(at);
            f.values_mut()[k] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// The divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// One member of the structured family, chosen by `index`: deltas, sparse
/// and dense indicators, characters, modulated progression boxes and
/// unimodular noise.
pub fn structured<R: Rng + ?Sized>(ring: &RingContext, rng: &mut R, index: u64) -> (TestKind, Signal2D) {
    let n = ring.modulus();
    let grid = ring.n() * ring.n();
    match index % 6 {
        0 => {
            let at = (rng.random_range(0..n), rng.random_range(0..n));
            (TestKind::Delta, Signal2D::delta(ring, at))
        }
        1 => {
            let size = rng.random_range(1..=grid);
            let support = random_support(rng, grid, size);
            (
                TestKind::Indicator,
                supported_signal(ring, &support, rng, |_| Complex64::new(1.0, 0.0)),
            )
        }
        2 => {
            let m = (rng.random_range(0..n), rng.random_range(0..n));
            let roots = ring.roots_of_unity();
            let f = Signal2D::from_fn(ring, |x1, x2| roots[((x1 as u64 * m.0 + x2 as u64 * m.1) % n) as usize]);
            (TestKind::Character, f)
        }
        3 => {
            let divs = divisors(n);
            let steps = (
                divs[rng.random_range(0..divs.len())],
                divs[rng.random_range(0..divs.len())],
            );
            let lens = (rng.random_range(1..=n / steps.0), rng.random_range(1..=n / steps.1));
            let start = (rng.random_range(0..n), rng.random_range(0..n));
            let mut f = progression_box(ring, start, steps, lens);
            // modulate along a random frequency so the box is not always real
            let m = (rng.random_range(0..n), rng.random_range(0..n));
            let roots = ring.roots_of_unity();
            for x1 in 0..n {
                for x2 in 0..n {
                    let i = (x1 * n + x2) as usize;
                    f.values_mut()[i] *= roots[((x1 * m.0 + x2 * m.1) % n) as usize];
                }
            }
            (TestKind::Box, f)
        }
        4 => {
            let size = rng.random_range(1..=(grid / 8).max(1));
            let support = random_support(rng, grid, size);
            (
                TestKind::Sparse,
                supported_signal(ring, &support, rng, |r| complex_gaussian(r)),
            )
        }
        _ => {
            let support: Vec<usize> = (0..grid).collect();
            (
                TestKind::Unimodular,
                supported_signal(ring, &support, rng, |r| unimodular(r)),
            )
        }
    }
}

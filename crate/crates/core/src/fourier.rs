//! Discrete Fourier analysis on (Z/NZ)^2 with the unitary normalization
//!
//! ```text
//! f^(m) = N^{-1} sum_x f(x) exp(-2 pi i (x . m) / N)
//! ```
//!
//! Transforms are computed row by row and then column by column with direct
//! O(N) sums per output, so a full 2-D transform costs O(N^3). Phases are
//! looked up in the ring's root-of-unity table by `(x . m) mod N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmod::RingContext;

macro_rules! grid_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            ring: RingContext,
            values: Vec<Complex64>,
        }

        impl $name {
            /// Wraps row-major values; rejects wrong lengths and non-finite
            /// entries.
            pub fn new(ring: &RingContext, values: Vec<Complex64>) -> Result<Self> {
                let expected = ring.n() * ring.n();
                if values.len() != expected {
                    return Err(Error::LengthMismatch { expected, found: values.len() });
                }
                if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                Ok(Self { ring: ring.clone(), values })
            }

            pub(crate) fn from_raw(ring: &RingContext, values: Vec<Complex64>) -> Self {
                debug_assert_eq!(values.len(), ring.n() * ring.n());
                Self { ring: ring.clone(), values }
            }

            pub fn zeros(ring: &RingContext) -> Self {
                Self::from_raw(ring, vec![Complex64::new(0.0, 0.0); ring.n() * ring.n()])
            }

            pub fn constant(ring: &RingContext, c: Complex64) -> Self {
                Self::from_raw(ring, vec![c; ring.n() * ring.n()])
            }

            /// Unit mass at `at = (a1, a2)`, coordinates reduced mod N.
            pub fn delta(ring: &RingContext, at: (u64, u64)) -> Self {
                let mut out = Self::zeros(ring);
                let i = out.index(at);
                out.values[i] = Complex64::new(1.0, 0.0);
                out
            }

            pub fn from_fn(ring: &RingContext, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
                let n = ring.n();
                let mut values = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        values.push(f(a, b));
                    }
                }
                Self::from_raw(ring, values)
            }

            pub fn ring(&self) -> &RingContext {
                &self.ring
            }

            pub fn n(&self) -> usize {
                self.ring.n()
            }

            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [Complex64] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<Complex64> {
                self.values
            }

            /// Row-major index of a coordinate pair, reduced mod N.
            pub fn index(&self, (a, b): (u64, u64)) -> usize {
                let n = self.ring.modulus();
                ((a % n) * n + (b % n)) as usize
            }

            pub fn get(&self, at: (u64, u64)) -> Complex64 {
                self.values[self.index(at)]
            }

            pub fn scaled(&self, s: Complex64) -> Self {
                Self::from_raw(&self.ring, self.values.iter().map(|z| z * s).collect())
            }

            /// Serializes to `{ "n": N, "values": [[re, im], ...] }`.
            pub fn to_json(&self) -> GridJson {
                GridJson {
                    n: self.ring.modulus(),
                    values: self.values.iter().map(|z| [z.re, z.im]).collect(),
                    missing: None,
                }
            }

            pub fn from_json(json: &GridJson) -> Result<Self> {
                let ring = RingContext::new(json.n)?;
                Self::new(&ring, json.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            }
        }
    };
}

grid_type!(
    /// A complex-valued function on (Z/NZ)^2 in the space domain, stored
    /// row-major by `(x1, x2)`.
    Signal2D
);

grid_type!(
    /// A complex-valued function on (Z/NZ)^2 in the frequency domain, stored
    /// row-major by `(m1, m2)`.
    Spectrum2D
);

/// Wire format shared by signals, spectra and recovery problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub n: u64,
    pub values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing: Option<Vec<bool>>,
}

/// Transforms every length-N row of `data` in place:
/// `row[m] <- sum_x row[x] kernel[x m mod N]`.
fn transform_rows(data: &mut [Complex64], n: usize, kernel: &[Complex64], scratch: &mut [Complex64]) {
    for row in data.chunks_exact_mut(n) {
        for (m, out) in scratch.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut k = 0usize;
            for &v in row.iter() {
                acc += v * kernel[k];
                k += m;
                if k >= n {
                    k -= n;
                }
            }
            *out = acc;
        }
        row.copy_from_slice(scratch);
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}

pub(crate) fn transform_2d(ring: &RingContext, values: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = ring.n();
    let kernel: Vec<Complex64> = if inverse {
        ring.roots_of_unity().to_vec()
    } else {
        ring.roots_of_unity().iter().map(|w| w.conj()).collect()
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut data = values.to_vec();
    transform_rows(&mut data, n, &kernel, &mut scratch);
    let mut data = transpose(&data, n);
    transform_rows(&mut data, n, &kernel, &mut scratch);
    let mut data = transpose(&data, n);
    let scale = 1.0 / n as f64;
    for z in &mut data {
        *z *= scale;
    }
    data
}

/// Forward transform with the `N^{-1}` (that is, `N^{-d/2}` at `d = 2`)
/// normalization.
pub fn dft(f: &Signal2D) -> Spectrum2D {
    Spectrum2D::from_raw(f.ring(), transform_2d(f.ring(), f.values(), false))
}

/// Inverse transform; same normalization with the conjugate kernel.
pub fn idft(spectrum: &Spectrum2D) -> Signal2D {
    Signal2D::from_raw(spectrum.ring(), transform_2d(spectrum.ring(), spectrum.values(), true))
}

/// Coefficients of `values` (a row-major grid) at the listed frequencies:
/// `out[j] = N^{-1} sum_x values[x] exp(-2 pi i (x . freqs[j]) / N)`.
///
/// Equal to sampling `dft` at those frequencies, at cost `|freqs| N^2`.
pub fn analyze_on(ring: &RingContext, freqs: &[(u64, u64)], values: &[Complex64]) -> Vec<Complex64> {
    let n = ring.n();
    let roots = ring.roots_of_unity();
    let mut acc = vec![Complex64::new(0.0, 0.0); freqs.len()];
    let mut phase = vec![0usize; freqs.len()];
    let step1: Vec<usize> = freqs.iter().map(|&(a, _)| (a % n as u64) as usize).collect();
    let step2: Vec<usize> = freqs.iter().map(|&(_, b)| (b % n as u64) as usize).collect();
    let mut row_start = vec![0usize; freqs.len()];
    for x1 in 0..n {
        phase.copy_from_slice(&row_start);
        for x2 in 0..n {
            let v = values[x1 * n + x2];
            if v.re != 0.0 || v.im != 0.0 {
                for j in 0..freqs.len() {
                    acc[j] += v * roots[phase[j]].conj();
                }
            }
            for j in 0..freqs.len() {
                phase[j] += step2[j];
                if phase[j] >= n {
                    phase[j] -= n;
                }
            }
        }
        for j in 0..freqs.len() {
            row_start[j] += step1[j];
            if row_start[j] >= n {
                row_start[j] -= n;
            }
        }
    }
    let scale = 1.0 / n as f64;
    acc.iter_mut().for_each(|z| *z *= scale);
    acc
}

/// The signal whose spectrum equals `coeffs[j]` at `freqs[j]` and vanishes
/// elsewhere (frequencies must be distinct):
/// `f(x) = N^{-1} sum_j coeffs[j] exp(2 pi i (x . freqs[j]) / N)`.
pub fn synthesize_on(ring: &RingContext, freqs: &[(u64, u64)], coeffs: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(freqs.len(), coeffs.len());
    let n = ring.n();
    let roots = ring.roots_of_unity();
    let scale = 1.0 / n as f64;
    let scaled: Vec<Complex64> = coeffs.iter().map(|c| c * scale).collect();
    let step1: Vec<usize> = freqs.iter().map(|&(a, _)| (a % n as u64) as usize).collect();
    let step2: Vec<usize> = freqs.iter().map(|&(_, b)| (b % n as u64) as usize).collect();
    let mut out = Vec::with_capacity(n * n);
    let mut row_start = vec![0usize; freqs.len()];
    let mut phase = vec![0usize; freqs.len()];
    for _x1 in 0..n {
        phase.copy_from_slice(&row_start);
        for _x2 in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..freqs.len() {
                acc += scaled[j] * roots[phase[j]];
                phase[j] += step2[j];
                if phase[j] >= n {
                    phase[j] -= n;
                }
            }
            out.push(acc);
        }
        for j in 0..freqs.len() {
            row_start[j] += step1[j];
            if row_start[j] >= n {
                row_start[j] -= n;
            }
        }
    }
    out
}

/// `(sum |v|^p)^(1/p)` over a slice.
pub fn lp_norm_slice(values: &[Complex64], p: f64) -> f64 {
    assert!(p > 0.0, "lp norm needs p > 0, got {p}");
    if p == 2.0 {
        return values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return values.iter().map(|z| z.norm()).sum();
    }
    values.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Counting-measure norm `(sum_x |f(x)|^p)^(1/p)`.
pub fn lp_norm(f: &Signal2D, p: f64) -> f64 {
    lp_norm_slice(f.values(), p)
}

/// Averaged norm `(N^{-2} sum_x |f(x)|^p)^(1/p)`.
pub fn normalized_lp_norm(f: &Signal2D, p: f64) -> f64 {
    let count = f.values().len() as f64;
    lp_norm(f, p) / count.powf(1.0 / p)
}

pub fn sup_norm_slice(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn sup_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `sqrt(sum |a - b|^2)`.
pub fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use crate::testfn::gaussian_values;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct O(N^4) double sum with freshly evaluated exponentials.
    fn dft_oracle(f: &Signal2D) -> Vec<Complex64> {
        let n = f.n();
        let mut out = vec![c(0.0, 0.0); n * n];
        for m1 in 0..n {
            for m2 in 0..n {
                let mut acc = c(0.0, 0.0);
                for x1 in 0..n {
                    for x2 in 0..n {
                        let phase = -TAU * ((x1 * m1 + x2 * m2) as f64) / n as f64;
                        acc += f.values()[x1 * n + x2] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[m1 * n + m2] = acc / n as f64;
            }
        }
        out
    }

    fn random_signal(ring: &RingContext, seed: u64, idx: u64) -> Signal2D {
        let mut rng = trial_rng(seed, idx);
        Signal2D::from_raw(ring, gaussian_values(&mut rng, ring.n() * ring.n()))
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        l2_distance(a, b) / lp_norm_slice(b, 2.0).max(1e-300)
    }

    #[test]
    fn delta_and_constant() {
        let ring = RingContext::new(5).unwrap();
        let spec = dft(&Signal2D::delta(&ring, (0, 0)));
        assert!(spec.values().iter().all(|z| (z - c(0.2, 0.0)).norm() < 1e-14));

        let spec = dft(&Signal2D::constant(&ring, c(1.0, 0.0)));
        for (i, z) in spec.values().iter().enumerate() {
            let want = if i == 0 { 5.0 } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-12);
        }
        let back = idft(&spec);
        assert!(back.values().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn characters_transform_to_scaled_deltas() {
        for n in [2u64, 7, 12, 23, 50] {
            let ring = RingContext::new(n).unwrap();
            let m0 = (3 % n, 5 % n);
            let f = Signal2D::from_fn(&ring, |x1, x2| {
                let k = (x1 as u64 * m0.0 + x2 as u64 * m0.1) % n;
                Complex64::from_polar(1.0, TAU * k as f64 / n as f64)
            });
            let spec = dft(&f);
            let target = spec.index(m0);
            for (i, z) in spec.values().iter().enumerate() {
                let want = if i == target { n as f64 } else { 0.0 };
                assert!((z - c(want, 0.0)).norm() < 1e-9, "n={n} i={i} z={z}");
            }
        }
    }

    #[test]
    fn inverse_of_delta_is_a_character() {
        let ring = RingContext::new(7).unwrap();
        let m0 = (2, 6);
        let f = idft(&Spectrum2D::delta(&ring, m0));
        for x1 in 0..7u64 {
            for x2 in 0..7u64 {
                let k = (x1 * m0.0 + x2 * m0.1) % 7;
                let want = Complex64::from_polar(1.0 / 7.0, TAU * k as f64 / 7.0);
                assert!((f.get((x1, x2)) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matches_direct_oracle() {
        for n in [2u64, 3, 6, 9, 12] {
            let ring = RingContext::new(n).unwrap();
            for t in 0..3 {
                let f = random_signal(&ring, 11, t);
                assert!(rel_err(dft(&f).values(), &dft_oracle(&f)) < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for n in [6u64, 10, 15] {
            let ring = RingContext::new(n).unwrap();
            for t in 0..100 {
                let f = random_signal(&ring, n, t);
                let back = idft(&dft(&f));
                assert!(rel_err(back.values(), f.values()) < 1e-10);
            }
        }
    }

    #[test]
    fn plancherel() {
        for n in [6u64, 10, 15, 30, 35] {
            let ring = RingContext::new(n).unwrap();
            for t in 0..5 {
                let f = random_signal(&ring, 3, t);
                let a = lp_norm(&f, 2.0);
                let b = lp_norm_slice(dft(&f).values(), 2.0);
                assert!((a - b).abs() <= 1e-10 * a);
            }
        }
    }

    #[test]
    fn translation_becomes_modulation() {
        let n = 10u64;
        let ring = RingContext::new(n).unwrap();
        let f = random_signal(&ring, 5, 0);
        let a = (3u64, 7u64);
        let shifted = Signal2D::from_fn(&ring, |x1, x2| f.get((x1 as u64 + n - a.0, x2 as u64 + n - a.1)));
        let fhat = dft(&f);
        let lhs = dft(&shifted);
        for m1 in 0..n {
            for m2 in 0..n {
                let k = (a.0 * m1 + a.1 * m2) % n;
                let phase = Complex64::from_polar(1.0, -TAU * k as f64 / n as f64);
                assert!((lhs.get((m1, m2)) - phase * fhat.get((m1, m2))).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn linearity() {
        let ring = RingContext::new(6).unwrap();
        let f = random_signal(&ring, 1, 0);
        let g = random_signal(&ring, 1, 1);
        let alpha = c(0.3, -1.2);
        let combo = Signal2D::from_raw(
            &ring,
            f.values().iter().zip(g.values()).map(|(a, b)| a * alpha + b).collect(),
        );
        let lhs = dft(&combo);
        let (fh, gh) = (dft(&f), dft(&g));
        let rhs: Vec<_> = fh
            .values()
            .iter()
            .zip(gh.values())
            .map(|(a, b)| a * alpha + b)
            .collect();
        assert!(rel_err(lhs.values(), &rhs) < 1e-12);
    }

    #[test]
    fn partial_transforms_agree_with_full_ones() {
        let ring = RingContext::new(9).unwrap();
        let f = random_signal(&ring, 2, 0);
        let freqs = [(0u64, 0u64), (1, 1), (4, 7), (8, 8), (3, 0)];
        let fhat = dft(&f);
        let part = analyze_on(&ring, &freqs, f.values());
        for (z, &m) in part.iter().zip(&freqs) {
            assert!((z - fhat.get(m)).norm() < 1e-12);
        }
        let coeffs = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0), c(3.0, -1.0), c(0.25, 0.25)];
        let mut spec = Spectrum2D::zeros(&ring);
        for (&z, &m) in coeffs.iter().zip(&freqs) {
            let i = spec.index(m);
            spec.values_mut()[i] = z;
        }
        let direct = idft(&spec);
        let synth = synthesize_on(&ring, &freqs, &coeffs);
        assert!(l2_distance(&synth, direct.values()) < 1e-12);
    }

    #[test]
    fn norms() {
        let ring = RingContext::new(5).unwrap();
        let delta = Signal2D::delta(&ring, (0, 0));
        for p in [0.5, 1.0, 4.0 / 3.0, 2.0, 4.0] {
            assert!((lp_norm(&delta, p) - 1.0).abs() < 1e-15);
        }
        let ones = Signal2D::constant(&ring, c(1.0, 0.0));
        assert!((lp_norm(&ones, 4.0 / 3.0) - 25f64.powf(0.75)).abs() < 1e-12);
        assert!((lp_norm(&ones, 4.0 / 3.0) - 11.180339887498949).abs() < 1e-12);
        assert!((normalized_lp_norm(&ones, 4.0 / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        let ring = RingContext::new(3).unwrap();
        assert!(matches!(
            Signal2D::new(&ring, vec![c(0.0, 0.0); 8]),
            Err(Error::LengthMismatch { expected: 9, found: 8 })
        ));
        let mut v = vec![c(0.0, 0.0); 9];
        v[4] = c(f64::NAN, 0.0);
        assert_eq!(Signal2D::new(&ring, v), Err(Error::NonFinite(4)));
    }

    #[test]
    fn json_round_trip() {
        let ring = RingContext::new(4).unwrap();
        let f = random_signal(&ring, 9, 0);
        let text = serde_json::to_string(&f.to_json()).unwrap();
        assert!(text.starts_with("{\"n\":4,\"values\":[["));
        let back = Signal2D::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}

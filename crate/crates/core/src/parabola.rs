//! The parabola `{(t, t^2) : t in Z/NZ}` as a frequency set: exponential
//! sums, additive energy, and the restriction and extension maps.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{analyze_on, synthesize_on, Signal2D, Spectrum2D};
use crate::rng::tagged_rng;
use crate::testfn;
use crate::zmod::RingContext;

/// The frequency set `{(t, t^2 mod N)}` listed in order of `t`.
#[derive(Clone, Debug)]
pub struct ParabolaSet {
    ring: RingContext,
    points: Vec<(u64, u64)>,
}

/// Builds the parabola over `ring`. Its size certificate `|points| / N` is
/// always 1.
pub fn build_parabola(ring: &RingContext) -> ParabolaSet {
    let n = ring.modulus();
    let points = (0..n).map(|t| (t, (t * t) % n)).collect();
    ParabolaSet {
        ring: ring.clone(),
        points,
    }
}

impl ParabolaSet {
    pub fn new(ring: &RingContext) -> Self {
        build_parabola(ring)
    }

    pub fn ring(&self) -> &RingContext {
        &self.ring
    }

    pub fn points(&self) -> &[(u64, u64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|Sigma| / N^{d/2}` with `d = 2`.
    pub fn size_certificate(&self) -> f64 {
        self.points.len() as f64 / self.ring.modulus() as f64
    }

    /// Row-major frequency indices of the points.
    pub fn flat_indices(&self) -> Vec<usize> {
        let n = self.ring.modulus();
        self.points.iter().map(|&(a, b)| (a * n + b) as usize).collect()
    }

    /// Membership mask over the N^2 frequencies.
    pub fn indicator(&self) -> Vec<bool> {
        let mut mask = vec![false; self.ring.n() * self.ring.n()];
        for i in self.flat_indices() {
            mask[i] = true;
        }
        mask
    }

    /// The parameter `t` of a frequency, if it lies on the parabola.
    pub fn parameter_of(&self, (a, b): (u64, u64)) -> Option<usize> {
        let n = self.ring.modulus();
        let (a, b) = (a % n, b % n);
        (self.points[a as usize].1 == b).then_some(a as usize)
    }
}

/// `S(m) = sum_t exp(-2 pi i (m1 t + m2 t^2) / N)`, by direct summation.
pub fn exp_sum(sigma: &ParabolaSet, m: (u64, u64)) -> Complex64 {
    let n = sigma.ring.modulus();
    let roots = sigma.ring.roots_of_unity();
    sigma
        .points
        .iter()
        .map(|&(t, t2)| {
            let k = ((m.0 % n) * t + (m.1 % n) * t2) % n;
            roots[k as usize].conj()
        })
        .sum()
}

/// Magnitudes of the parabola's exponential sums over all frequencies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayProfile {
    pub n: u64,
    /// `|S(m)|` in row-major frequency order; entry 0 is `m = (0, 0)`.
    pub magnitudes: Vec<f64>,
    /// Largest `|S(m)|` over `m != (0, 0)`.
    pub max_nontrivial: f64,
    /// `max_nontrivial / sqrt(N)`; 1 exactly when square-root cancellation
    /// is optimal.
    pub max_ratio: f64,
    /// First frequency (row-major) attaining the maximum, up to rounding.
    pub witness: (u64, u64),
}

/// Exhaustive scan of the N^2 - 1 nontrivial frequencies.
pub fn decay_profile(sigma: &ParabolaSet) -> DecayProfile {
    let n = sigma.ring.modulus();
    let magnitudes: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|i| exp_sum(sigma, (i / n, i % n)).norm())
        .collect();
    let mut best = 0usize;
    for i in 1..magnitudes.len() {
        // ties within rounding go to the smallest index
        if best == 0 || magnitudes[i] > magnitudes[best] + 1e-9 {
            best = i;
        }
    }
    let max_nontrivial = if best == 0 { 0.0 } else { magnitudes[best] };
    DecayProfile {
        n,
        max_ratio: max_nontrivial / (n as f64).sqrt(),
        max_nontrivial,
        witness: (best as u64 / n, best as u64 % n),
        magnitudes,
    }
}

/// Additive energy of a subset of the parabola.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub omega: u32,
    pub subset_size: usize,
    /// `#{(x, y, x', y') in U^4 : x + y = x' + y'}`.
    pub energy: u64,
    /// `2^omega(N) |U|^2`.
    pub bound: u64,
    /// Largest number of ordered pairs in `U^2` sharing one sum.
    pub max_rep: u64,
}

impl EnergyReport {
    /// Whether the energy respects `2^omega |U|^2`.
    pub fn within_bound(&self) -> bool {
        self.energy <= self.bound
    }
}

/// Sorts, deduplicates and range-checks a subset given by parameters `t`.
pub fn normalize_subset(sigma: &ParabolaSet, subset: &[usize]) -> Result<Vec<usize>> {
    let mut v = subset.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&t| t >= sigma.len()) {
        return Err(Error::NotOnParabola {
            index: bad,
            modulus: sigma.ring.modulus(),
        });
    }
    Ok(v)
}

/// Maps frequency points to parameters, rejecting any point off the parabola.
pub fn subset_from_points(sigma: &ParabolaSet, points: &[(u64, u64)]) -> Result<Vec<usize>> {
    let n = sigma.ring.modulus();
    let ts = points
        .iter()
        .map(|&p| {
            sigma.parameter_of(p).ok_or(Error::NotOnParabola {
                index: ((p.0 % n) * n + p.1 % n) as usize,
                modulus: n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_subset(sigma, &ts)
}

/// `rep(k) = #{(x, y) in U^2 : x + y = k}` over the N^2 sums `k`, row-major.
pub fn sum_representations(sigma: &ParabolaSet, subset: &[usize]) -> Vec<u64> {
    let n = sigma.ring.n();
    let mut hist = vec![0u64; n * n];
    for &t in subset {
        let (a1, b1) = sigma.points[t];
        for &s in subset {
            let (a2, b2) = sigma.points[s];
            let k1 = (a1 + a2) as usize % n;
            let k2 = (b1 + b2) as usize % n;
            hist[k1 * n + k2] += 1;
        }
    }
    hist
}

/// Exact additive energy via the sum histogram: `E(U) = sum_k rep(k)^2`.
///
/// `subset` lists parameters `t`; `None` means all of the parabola.
pub fn energy_exact(sigma: &ParabolaSet, subset: Option<&[usize]>) -> Result<EnergyReport> {
    let subset = match subset {
        Some(s) => normalize_subset(sigma, s)?,
        None => (0..sigma.len()).collect(),
    };
    let hist = sum_representations(sigma, &subset);
    let energy = hist.iter().map(|r| r * r).sum();
    let max_rep = hist.iter().copied().max().unwrap_or(0);
    let size = subset.len() as u64;
    Ok(EnergyReport {
        n: sigma.ring.modulus(),
        omega: sigma.ring.omega(),
        subset_size: subset.len(),
        energy,
        bound: (1u64 << sigma.ring.omega()) * size * size,
        max_rep,
    })
}

/// Random subset of the parabola for trial `trial`: size uniform in
/// `1..=|Sigma|`, then a uniform subset of that size, as sorted parameters.
pub fn random_subset(sigma: &ParabolaSet, seed: u64, trial: u64) -> Vec<usize> {
    const TAG_SUBSET: u64 = 0xe4e7;
    let mut rng = tagged_rng(seed, TAG_SUBSET, trial);
    let size = rng.random_range(1..=sigma.len());
    testfn::random_support(&mut rng, sigma.len(), size)
}

/// Representation count of the sum `k` over the whole parabola, computed
/// from square roots of `2 k2 - k1^2`. Only meaningful for odd `N`, where
/// `(t', s')` is recovered from `t' - s'` by halving.
pub fn rep_by_root_count(sigma: &ParabolaSet, k: (u64, u64)) -> Option<u64> {
    let n = sigma.ring.modulus();
    if n.is_multiple_of(2) {
        return None;
    }
    let (k1, k2) = (k.0 % n, k.1 % n);
    let c = (2 * k2 + n * n - (k1 * k1) % n) % n;
    Some(sigma.ring.count_square_roots(c))
}

/// Values of a spectrum along the parabola, in order of `t`.
pub fn restrict_to(sigma: &ParabolaSet, spectrum: &Spectrum2D) -> Result<Vec<Complex64>> {
    sigma.ring.check_same(spectrum.ring())?;
    Ok(sigma.points.iter().map(|&m| spectrum.get(m)).collect())
}

/// Spectrum of `f` along the parabola without computing the full transform.
pub fn restrict_signal(sigma: &ParabolaSet, f: &Signal2D) -> Result<Vec<Complex64>> {
    sigma.ring.check_same(f.ring())?;
    Ok(analyze_on(&sigma.ring, &sigma.points, f.values()))
}

/// The unique signal whose spectrum is `coeffs[t]` at `(t, t^2)` and zero
/// off the parabola.
pub fn extend_from(sigma: &ParabolaSet, coeffs: &[Complex64]) -> Result<Signal2D> {
    if coeffs.len() != sigma.len() {
        return Err(Error::LengthMismatch {
            expected: sigma.len(),
            found: coeffs.len(),
        });
    }
    Signal2D::new(&sigma.ring, synthesize_on(&sigma.ring, &sigma.points, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{dft, idft, lp_norm, lp_norm_slice};
    use crate::rng::trial_rng;
    use crate::testfn::gaussian_values;
    use crate::zmod::make_ring;
    use rand::seq::index::sample;
    use rand::Rng;

    fn sigma(n: u64) -> ParabolaSet {
        build_parabola(&make_ring(n).unwrap())
    }

    fn brute_energy(sigma: &ParabolaSet, subset: &[usize]) -> u64 {
        let n = sigma.ring().modulus();
        let p = |t: usize| sigma.points()[t];
        let mut count = 0;
        for &a in subset {
            for &b in subset {
                for &c in subset {
                    for &d in subset {
                        let (x, y, u, v) = (p(a), p(b), p(c), p(d));
                        if (x.0 + y.0) % n == (u.0 + v.0) % n && (x.1 + y.1) % n == (u.1 + v.1) % n {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn small_parabolas() {
        assert_eq!(sigma(5).points(), &[(0, 0), (1, 1), (2, 4), (3, 4), (4, 1)]);
        assert_eq!(sigma(6).points(), &[(0, 0), (1, 1), (2, 4), (3, 3), (4, 4), (5, 1)]);
        for n in [2u64, 9, 30, 101] {
            let s = sigma(n);
            assert_eq!(s.len(), n as usize);
            assert_eq!(s.size_certificate(), 1.0);
            let mut idx = s.flat_indices();
            idx.sort_unstable();
            idx.dedup();
            assert_eq!(idx.len(), n as usize);
        }
    }

    #[test]
    fn exp_sum_examples() {
        let s5 = sigma(5);
        assert!((exp_sum(&s5, (0, 0)) - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        assert!((exp_sum(&s5, (0, 1)).norm() - 5f64.sqrt()).abs() < 1e-12);
        assert!(exp_sum(&s5, (1, 0)).norm() < 1e-12);
    }

    #[test]
    fn decay_of_prime_parabolas_is_optimal() {
        for p in [5u64, 7, 11, 13] {
            let d = decay_profile(&sigma(p));
            assert!((d.max_ratio - 1.0).abs() < 1e-9, "p={p}");
            assert!((d.max_nontrivial - (p as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn composite_decay_splits_over_crt() {
        // |S(m)| factors as a product of the mod-5 and mod-7 sums; the worst
        // nontrivial frequency is 0 mod 7 (full mod-7 factor) with a
        // Gauss-sum factor mod 5.
        let d = decay_profile(&sigma(35));
        assert!((d.max_nontrivial - 7.0 * 5f64.sqrt()).abs() < 1e-9);
        assert!((d.max_ratio - 7f64.sqrt()).abs() < 1e-9);
        assert_eq!((d.witness.0 % 7, d.witness.1 % 7), (0, 0));
        // frequencies that vanish mod 5 reach 5 sqrt 7
        let m = (0u64, 5u64);
        assert!((d.magnitudes[(m.0 * 35 + m.1) as usize] - 5.0 * 7f64.sqrt()).abs() < 1e-9);
        for n in [35u64, 77] {
            assert!(decay_profile(&sigma(n)).max_ratio > 2.0);
        }
    }

    #[test]
    fn energy_examples() {
        let s3 = sigma(3);
        let all: Vec<usize> = (0..3).collect();
        assert_eq!(brute_energy(&s3, &all), 15);
        assert_eq!(energy_exact(&s3, None).unwrap().energy, 15);

        let s15 = sigma(15);
        let all: Vec<usize> = (0..15).collect();
        assert_eq!(brute_energy(&s15, &all), 675);
        let r = energy_exact(&s15, None).unwrap();
        assert_eq!((r.energy, r.bound, r.max_rep), (675, 900, 4));

        let one = energy_exact(&s15, Some(&[4])).unwrap();
        assert_eq!((one.energy, one.subset_size), (1, 1));
    }

    #[test]
    fn subsets_off_the_parabola_are_rejected() {
        let s = sigma(7);
        assert!(matches!(
            energy_exact(&s, Some(&[0, 7])),
            Err(Error::NotOnParabola { index: 7, .. })
        ));
        assert!(subset_from_points(&s, &[(1, 1), (2, 3)]).is_err());
        assert_eq!(subset_from_points(&s, &[(3, 2), (1, 1), (3, 9)]).unwrap(), vec![1, 3]);
    }

    #[test]
    fn lemma_bound_on_random_subsets() {
        for n in 2..=60u64 {
            let s = sigma(n);
            if !s.ring().is_squarefree() {
                continue;
            }
            let mut rng = trial_rng(n, 0);
            for trial in 0..200 {
                let size = rng.random_range(1..=n as usize);
                let subset = sample(&mut rng, n as usize, size).into_vec();
                let r = energy_exact(&s, Some(&subset)).unwrap();
                assert!(r.within_bound(), "n={n}: {r:?}");
                assert!(r.energy >= (size * size) as u64);
                if size <= 12 && trial % 10 == 0 {
                    assert_eq!(r.energy, brute_energy(&s, &normalize_subset(&s, &subset).unwrap()));
                }
            }
        }
    }

    #[test]
    fn full_energy_is_multiplicative_for_odd_squarefree() {
        for n in (3..=105u64).step_by(2) {
            let s = sigma(n);
            if !s.ring().is_squarefree() {
                continue;
            }
            let closed: u64 = s.ring().prime_factors().iter().map(|&(p, _)| 2 * p * p - p).product();
            assert_eq!(energy_exact(&s, None).unwrap().energy, closed, "n={n}");
        }
    }

    #[test]
    fn representation_counts_follow_square_roots_for_odd_n() {
        for n in [3u64, 5, 15, 21, 35, 9, 25] {
            let s = sigma(n);
            let hist = sum_representations(&s, &(0..n as usize).collect::<Vec<_>>());
            for k1 in 0..n {
                for k2 in 0..n {
                    assert_eq!(hist[(k1 * n + k2) as usize], rep_by_root_count(&s, (k1, k2)).unwrap());
                }
            }
            if s.ring().is_squarefree() {
                assert!(hist.iter().all(|&r| r <= 1 << s.ring().omega()));
            }
        }
        assert_eq!(rep_by_root_count(&sigma(6), (0, 0)), None);
    }

    #[test]
    fn restriction_examples() {
        let ring = make_ring(7).unwrap();
        let s = build_parabola(&ring);
        let c = Complex64::new(0.5, -2.0);
        assert!(restrict_to(&s, &Spectrum2D::constant(&ring, c))
            .unwrap()
            .iter()
            .all(|&z| z == c));
        let r = restrict_to(&s, &dft(&Signal2D::delta(&ring, (0, 0)))).unwrap();
        assert!(r.iter().all(|z| (z - Complex64::new(1.0 / 7.0, 0.0)).norm() < 1e-14));
        let r = restrict_to(&s, &dft(&Signal2D::constant(&ring, Complex64::new(1.0, 0.0)))).unwrap();
        for (t, z) in r.iter().enumerate() {
            let want = if t == 0 { 7.0 } else { 0.0 };
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        let other = make_ring(5).unwrap();
        assert!(matches!(
            restrict_to(&s, &Spectrum2D::zeros(&other)),
            Err(Error::RingMismatch { expected: 7, found: 5 })
        ));
    }

    #[test]
    fn extension_examples() {
        let ring = make_ring(5).unwrap();
        let s = build_parabola(&ring);
        let zero = extend_from(&s, &[Complex64::new(0.0, 0.0); 5]).unwrap();
        assert!(zero.values().iter().all(|z| z.norm() == 0.0));

        let mut c = vec![Complex64::new(0.0, 0.0); 5];
        c[2] = Complex64::new(1.0, 0.0);
        let f = extend_from(&s, &c).unwrap();
        for x1 in 0..5u64 {
            for x2 in 0..5u64 {
                let k = (x1 * 2 + x2 * 4) % 5;
                let want = Complex64::from_polar(0.2, std::f64::consts::TAU * k as f64 / 5.0);
                assert!((f.get((x1, x2)) - want).norm() < 1e-14);
            }
        }

        // c = 1: ||f||_4^4 = N^{-2} E(Sigma) by expanding the fourth power.
        let ones = extend_from(&s, &[Complex64::new(1.0, 0.0); 5]).unwrap();
        let e = energy_exact(&s, None).unwrap().energy as f64;
        assert!((lp_norm(&ones, 4.0).powi(4) - e / 25.0).abs() < 1e-10);
        assert!(extend_from(&s, &[Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn extension_inverts_restriction_and_is_adjoint() {
        for n in [6u64, 10, 15] {
            let ring = make_ring(n).unwrap();
            let s = build_parabola(&ring);
            let mut rng = trial_rng(99, n);
            let c = gaussian_values(&mut rng, n as usize);
            let f = extend_from(&s, &c).unwrap();
            let spec = dft(&f);
            let back = restrict_to(&s, &spec).unwrap();
            assert!(back.iter().zip(&c).all(|(a, b)| (a - b).norm() < 1e-10));
            // zero off the parabola
            let mask = s.indicator();
            assert!(spec.values().iter().zip(&mask).all(|(z, &on)| on || z.norm() < 1e-10));
            // matches the inverse transform of the embedded spectrum
            let mut embedded = Spectrum2D::zeros(&ring);
            for (&i, &z) in s.flat_indices().iter().zip(&c) {
                embedded.values_mut()[i] = z;
            }
            let diff: Vec<_> = idft(&embedded)
                .values()
                .iter()
                .zip(f.values())
                .map(|(a, b)| a - b)
                .collect();
            assert!(lp_norm_slice(&diff, 2.0) < 1e-10);

            // <c, R g^> = <Ext c, g>
            let g = Signal2D::new(&ring, gaussian_values(&mut rng, (n * n) as usize)).unwrap();
            let rg = restrict_signal(&s, &g).unwrap();
            let lhs: Complex64 = c.iter().zip(&rg).map(|(a, b)| a * b.conj()).sum();
            let rhs: Complex64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b.conj()).sum();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
            let via_dft = restrict_to(&s, &dft(&g)).unwrap();
            assert!(rg.iter().zip(&via_dft).all(|(a, b)| (a - b).norm() < 1e-10));
        }
    }
}

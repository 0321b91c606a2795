//! Both sides of the restriction, extension and uncertainty inequalities for
//! the parabola, with concrete constants.
//!
//! Under the unitary transform the (s, r) restriction functional reads
//!
//! ```text
//! ( N^{-1} sum_t |f^(t, t^2)|^s )^{1/s}  <=  C N^{-1} ( sum_x |f(x)|^r )^{1/r}
//! ```
//!
//! and for squarefree N the pair (2, 4/3) holds with `C = 2^{omega(N)/4}`.
//! Every check returns a [`RestrictionReport`] carrying both sides, their
//! ratio and the constant it is measured against.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{dft, lp_norm, lp_norm_slice, normalized_lp_norm, Signal2D, Spectrum2D};
use crate::parabola::{energy_exact, extend_from, restrict_signal, restrict_to, ParabolaSet};
use crate::rng::{tagged_rng, trial_rng};
use crate::testfn::{self, divisors, progression_box, TestKind};
use crate::zmod::RingContext;

/// Absolute slack on `ratio <= constant` absorbing transform round-off.
pub const SATISFACTION_TOL: f64 = 1e-9;

/// Relative threshold on the pivots of the pivoted QR used for rank tests.
pub const RANK_TOL: f64 = 1e-8;

/// Exponents and constant of one restriction inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionParams {
    /// Exponent on the frequency side.
    pub s: f64,
    /// Exponent on the space side.
    pub r: f64,
    pub constant: f64,
}

impl RestrictionParams {
    pub fn new(s: f64, r: f64, constant: f64) -> Result<Self> {
        if !(1.0..=s).contains(&r) {
            return Err(Error::InvalidExponent(r));
        }
        Ok(Self { s, r, constant })
    }

    /// `(2, 4/3)` with `2^{omega/4}`.
    pub fn four_thirds(ring: &RingContext) -> Self {
        Self {
            s: 2.0,
            r: 4.0 / 3.0,
            constant: lemma_constant(ring),
        }
    }

    /// `(2, 6/5)` with a caller-supplied constant.
    pub fn six_fifths(constant: f64) -> Self {
        Self {
            s: 2.0,
            r: 6.0 / 5.0,
            constant,
        }
    }
}

/// `2^{omega(N)/4}`, the constant the energy lemma certifies.
pub fn lemma_constant(ring: &RingContext) -> f64 {
    bounded_factors_constant(ring.omega())
}

/// `2^{K/4}`: valid for every squarefree N with at most `K` prime factors.
pub fn bounded_factors_constant(max_factors: u32) -> f64 {
    2f64.powf(max_factors as f64 / 4.0)
}

/// `N^{1 / (4 log log N)}`, the growth envelope of `2^{omega(N)/4}` along
/// primorials. Only defined for `N >= 3`, where `log log N > 0`.
pub fn general_envelope(n: u64) -> Option<f64> {
    let ll = (n as f64).ln().ln();
    (n >= 3 && ll > 0.0).then(|| (n as f64).powf(1.0 / (4.0 * ll)))
}

/// Smallest `C` with `ratio <= C N^{1/(4 log log N)}` over the observations.
pub fn calibrate_general_constant(observations: &[(u64, f64)]) -> f64 {
    observations
        .iter()
        .filter_map(|&(n, ratio)| general_envelope(n).map(|env| ratio / env))
        .fold(0.0, f64::max)
}

/// Both sides of one inequality for one test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub omega: u32,
    pub squarefree: bool,
    pub r: f64,
    pub lhs: f64,
    /// Right-hand side without the constant.
    pub rhs: f64,
    pub ratio: f64,
    pub constant: f64,
    pub satisfied: bool,
    pub witness_kind: String,
}

impl RestrictionReport {
    fn build(ring: &RingContext, r: f64, lhs: f64, rhs: f64, constant: f64, kind: &str) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            n: ring.modulus(),
            omega: ring.omega(),
            squarefree: ring.is_squarefree(),
            r,
            lhs,
            rhs,
            ratio,
            constant,
            satisfied: ratio <= constant + SATISFACTION_TOL,
            witness_kind: kind.to_string(),
        }
    }
}

/// `((1/|Sigma|) sum_{m in Sigma} |F(m)|^s)^{1/s}`.
pub fn restriction_lhs(spectrum: &Spectrum2D, sigma: &ParabolaSet, s: f64) -> Result<f64> {
    if s < 1.0 {
        return Err(Error::InvalidExponent(s));
    }
    let values = restrict_to(sigma, spectrum)?;
    Ok(average_norm(&values, s))
}

fn average_norm(values: &[Complex64], s: f64) -> f64 {
    lp_norm_slice(values, s) / (values.len() as f64).powf(1.0 / s)
}

/// `N^{-d/2} (sum_x |f(x)|^r)^{1/r}` at `d = 2`.
pub fn restriction_rhs(f: &Signal2D, r: f64) -> f64 {
    lp_norm(f, r) / f.ring().modulus() as f64
}

/// The restriction ratio for any modulus, with no squarefree gate.
pub fn restriction_report(
    sigma: &ParabolaSet,
    f: &Signal2D,
    params: &RestrictionParams,
    kind: &str,
) -> Result<RestrictionReport> {
    sigma.ring().check_same(f.ring())?;
    let lhs = average_norm(&restrict_signal(sigma, f)?, params.s);
    let rhs = restriction_rhs(f, params.r);
    Ok(RestrictionReport::build(
        sigma.ring(),
        params.r,
        lhs,
        rhs,
        params.constant,
        kind,
    ))
}

/// Checks the (2, 4/3) estimate with constant `2^{omega(N)/4}`. Squarefree
/// moduli only.
pub fn verify_main_theorem(sigma: &ParabolaSet, f: &Signal2D) -> Result<RestrictionReport> {
    sigma.ring().require_squarefree()?;
    sigma.ring().check_same(f.ring())?;
    let lhs = restriction_lhs(&dft(f), sigma, 2.0)?;
    let rhs = restriction_rhs(f, 4.0 / 3.0);
    Ok(RestrictionReport::build(
        sigma.ring(),
        4.0 / 3.0,
        lhs,
        rhs,
        lemma_constant(sigma.ring()),
        "input",
    ))
}

/// Size and energy certificates of the universal restriction estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalCertificate {
    #[serde(rename = "N")]
    pub n: u64,
    pub omega: u32,
    /// `|Sigma| / N`.
    pub lambda_size: f64,
    /// Largest representation count of a sum over the whole parabola. Since
    /// `rep_U(k) <= rep_Sigma(k)`, every `U` has `E(U) <= lambda_energy |U|^2`.
    pub lambda_energy: u64,
    /// `lambda_size^{-1/2} lambda_energy^{1/4}`.
    pub implied_constant: f64,
    /// `2^{omega/4}`, from the lemma's `2^omega` energy bound.
    pub lemma_constant: f64,
}

pub fn universal_certificate(sigma: &ParabolaSet) -> Result<UniversalCertificate> {
    sigma.ring().require_squarefree()?;
    let energy = energy_exact(sigma, None)?;
    let lambda_size = sigma.size_certificate();
    Ok(UniversalCertificate {
        n: sigma.ring().modulus(),
        omega: sigma.ring().omega(),
        lambda_size,
        lambda_energy: energy.max_rep,
        implied_constant: lambda_size.powf(-0.5) * (energy.max_rep as f64).powf(0.25),
        lemma_constant: lemma_constant(sigma.ring()),
    })
}

/// The L^4 extension estimate for `f = Ext c`: averaged `||f||_4` against
/// averaged `||f||_2`, constant `2^{omega/4}`. The averaged ratio equals the
/// counting-norm ratio `||f||_4 / (N^{-1/2} ||f||_2)`.
pub fn verify_dual(sigma: &ParabolaSet, coeffs: &[Complex64]) -> Result<RestrictionReport> {
    sigma.ring().require_squarefree()?;
    let f = extend_from(sigma, coeffs)?;
    Ok(RestrictionReport::build(
        sigma.ring(),
        4.0,
        normalized_lp_norm(&f, 4.0),
        normalized_lp_norm(&f, 2.0),
        lemma_constant(sigma.ring()),
        "input",
    ))
}

/// The L^2 / L^1 consequence of the L^4 bound through Holder: averaged
/// `||f||_2 <= K^{q/(q-2)}` averaged `||f||_1` with `q = 4`, i.e. `K^2`.
pub fn verify_l1_l2(sigma: &ParabolaSet, coeffs: &[Complex64]) -> Result<RestrictionReport> {
    sigma.ring().require_squarefree()?;
    let f = extend_from(sigma, coeffs)?;
    let k = lemma_constant(sigma.ring());
    Ok(RestrictionReport::build(
        sigma.ring(),
        1.0,
        normalized_lp_norm(&f, 2.0),
        normalized_lp_norm(&f, 1.0),
        k * k,
        "input",
    ))
}

/// The intermediate quantities of the duality argument that derives the
/// extension bound from the restriction bound, for `f = Ext c`,
/// `g = f conj(f)^2` and `h = conj(g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityChain {
    /// `sum_x |f|^4`.
    pub fourth_power_sum: f64,
    /// `sum_x f g`, which equals the fourth-power sum.
    pub pairing: Complex64,
    /// `sum_{m in Sigma} f^(m) conj(h^(m))`, the pairing on the frequency side.
    pub spectral_pairing: Complex64,
    /// `||f||_2 ||1_Sigma h^||_2`.
    pub cauchy_schwarz: f64,
    /// `||f||_2 K N^{-1/2} ||h||_{4/3}`, with `||h||_{4/3} = (sum |f|^4)^{3/4}`.
    pub restriction_bound: f64,
    /// `||h||_{4/3}`.
    pub h_four_thirds: f64,
    pub constant: f64,
}

impl DualityChain {
    /// Each link: the two identities to `tol` relative, then the two
    /// inequalities with relative slack `tol`.
    pub fn links_hold(&self, tol: f64) -> [bool; 4] {
        let scale = self.fourth_power_sum.max(1e-300);
        [
            (self.pairing - Complex64::new(self.fourth_power_sum, 0.0)).norm() <= tol * scale,
            (self.spectral_pairing - self.pairing).norm() <= tol * scale,
            self.spectral_pairing.norm() <= self.cauchy_schwarz * (1.0 + tol) + tol * scale,
            self.cauchy_schwarz <= self.restriction_bound * (1.0 + tol) + tol * scale,
        ]
    }
}

pub fn duality_chain(sigma: &ParabolaSet, coeffs: &[Complex64]) -> Result<DualityChain> {
    sigma.ring().require_squarefree()?;
    let f = extend_from(sigma, coeffs)?;
    let n = sigma.ring().modulus() as f64;
    let g: Vec<Complex64> = f.values().iter().map(|z| z * z.conj() * z.conj()).collect();
    let h = Signal2D::new(sigma.ring(), g.iter().map(|z| z.conj()).collect())?;
    let fourth_power_sum = lp_norm(&f, 4.0).powi(4);
    let pairing: Complex64 = f.values().iter().zip(&g).map(|(a, b)| a * b).sum();
    let h_on_sigma = restrict_signal(sigma, &h)?;
    let spectral_pairing: Complex64 = coeffs.iter().zip(&h_on_sigma).map(|(a, b)| a * b.conj()).sum();
    let f2 = lp_norm(&f, 2.0);
    let k = lemma_constant(sigma.ring());
    let h43 = lp_norm(&h, 4.0 / 3.0);
    Ok(DualityChain {
        fourth_power_sum,
        pairing,
        spectral_pairing,
        cauchy_schwarz: f2 * lp_norm_slice(&h_on_sigma, 2.0),
        restriction_bound: f2 * k * n.powf(-0.5) * h43,
        h_four_thirds: h43,
        constant: k,
    })
}

/// Which random families a fuzzing run draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzPlan {
    pub random: u64,
    pub structured: u64,
    pub seed: u64,
}

const TAG_RANDOM: u64 = 1;
const TAG_STRUCTURED: u64 = 2;
const TAG_COEFFS: u64 = 3;

fn fuzz_inputs(ring: &RingContext, plan: &FuzzPlan, i: u64) -> (TestKind, Signal2D) {
    if i < plan.random {
        let mut rng = tagged_rng(plan.seed, TAG_RANDOM, i);
        (TestKind::Gaussian, testfn::random_gaussian(ring, &mut rng))
    } else {
        let j = i - plan.random;
        let mut rng = tagged_rng(plan.seed, TAG_STRUCTURED, j);
        testfn::structured(ring, &mut rng, j)
    }
}

/// Runs [`verify_main_theorem`] over `plan.random` Gaussian and
/// `plan.structured` structured inputs. Reports come back in trial order.
pub fn fuzz_main_theorem(sigma: &ParabolaSet, plan: &FuzzPlan) -> Result<Vec<RestrictionReport>> {
    sigma.ring().require_squarefree()?;
    (0..plan.random + plan.structured)
        .into_par_iter()
        .map(|i| {
            let (kind, f) = fuzz_inputs(sigma.ring(), plan, i);
            let mut report = verify_main_theorem(sigma, &f)?;
            report.witness_kind = kind.as_str().to_string();
            Ok(report)
        })
        .collect()
}

/// Like [`fuzz_main_theorem`] for arbitrary exponents and constant, computed
/// through the partial transform. Squarefree moduli only.
pub fn fuzz_restriction(
    sigma: &ParabolaSet,
    plan: &FuzzPlan,
    params: &RestrictionParams,
) -> Result<Vec<RestrictionReport>> {
    sigma.ring().require_squarefree()?;
    (0..plan.random + plan.structured)
        .into_par_iter()
        .map(|i| {
            let (kind, f) = fuzz_inputs(sigma.ring(), plan, i);
            restriction_report(sigma, &f, params, kind.as_str())
        })
        .collect()
}

/// Coefficient vectors for the extension-side checks: Gaussian for the
/// random part; single characters, constants, unimodular and sparse vectors
/// for the structured part.
pub fn fuzz_coefficients(n: usize, plan: &FuzzPlan, i: u64) -> (TestKind, Vec<Complex64>) {
    if i < plan.random {
        let mut rng = tagged_rng(plan.seed, TAG_COEFFS, i);
        return (TestKind::Gaussian, testfn::gaussian_values(&mut rng, n));
    }
    let j = i - plan.random;
    let mut rng = tagged_rng(plan.seed, TAG_COEFFS ^ TAG_STRUCTURED, j);
    let zero = Complex64::new(0.0, 0.0);
    match j % 4 {
        0 => {
            let mut c = vec![zero; n];
            c[rng.random_range(0..n)] = testfn::unimodular(&mut rng);
            (TestKind::Character, c)
        }
        1 => (TestKind::Indicator, vec![Complex64::new(1.0, 0.0); n]),
        2 => (
            TestKind::Unimodular,
            (0..n).map(|_| testfn::unimodular(&mut rng)).collect(),
        ),
        _ => {
            let k = rng.random_range(1..=n);
            let mut c = vec![zero; n];
            for t in testfn::random_support(&mut rng, n, k) {
                c[t] = testfn::complex_gaussian(&mut rng);
            }
            (TestKind::Sparse, c)
        }
    }
}

/// Which extension-side inequality to fuzz.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionCheck {
    Dual,
    L1L2,
}

pub fn fuzz_extension(sigma: &ParabolaSet, plan: &FuzzPlan, check: ExtensionCheck) -> Result<Vec<RestrictionReport>> {
    sigma.ring().require_squarefree()?;
    (0..plan.random + plan.structured)
        .into_par_iter()
        .map(|i| {
            let (kind, c) = fuzz_coefficients(sigma.len(), plan, i);
            let mut report = match check {
                ExtensionCheck::Dual => verify_dual(sigma, &c)?,
                ExtensionCheck::L1L2 => verify_l1_l2(sigma, &c)?,
            };
            report.witness_kind = kind.as_str().to_string();
            Ok(report)
        })
        .collect()
}

/// Outcome of a search for a nonzero signal with spectrum on the parabola
/// and small support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum UncertaintyVerdict {
    NoWitness {
        exhaustive_supports: u64,
        random_supports: u64,
    },
    Witness {
        /// Row-major indices of the support.
        support: Vec<usize>,
        /// Parabola coefficients `c` of the witness `Ext c`.
        coefficients: Vec<[f64; 2]>,
    },
}

/// Search settings: supports of size `exhaustive_size` are enumerated
/// completely; `random_samples` further supports are drawn uniformly with
/// sizes cycling through `exhaustive_size + 1 ..= max_support`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub exhaustive_size: usize,
    pub random_samples: u64,
    pub seed: u64,
}

/// `N^2 / 2^omega(N)`: with constant `C = 2^{omega/4}`, any nonzero signal
/// whose spectrum lies on the parabola has support at least `N^2 / C^4`.
pub fn support_lower_bound(ring: &RingContext) -> f64 {
    (ring.modulus() * ring.modulus()) as f64 / (1u64 << ring.omega()) as f64
}

/// Rank tester for supports: a support `T` carries a nonzero `f = Ext c`
/// iff the extension matrix restricted to rows outside `T` has a kernel.
pub struct ExtensionRank {
    n: usize,
    // N^2 x N matrix with entries exp(2 pi i x . (t, t^2) / N)
    rows: Vec<Complex64>,
}

impl ExtensionRank {
    pub fn new(sigma: &ParabolaSet) -> Self {
        let ring = sigma.ring();
        let n = ring.n();
        let roots = ring.roots_of_unity();
        let mut rows = Vec::with_capacity(n * n * n);
        for x1 in 0..n {
            for x2 in 0..n {
                for &(a, b) in sigma.points() {
                    rows.push(roots[(x1 * a as usize + x2 * b as usize) % n]);
                }
            }
        }
        Self { n, rows }
    }

    fn off_support(&self, support: &[usize]) -> DMatrix<Complex64> {
        let n = self.n;
        let m = n * n - support.len();
        let mut mat = DMatrix::zeros(m, n);
        let mut r = 0;
        let mut skip = support.iter().peekable();
        for x in 0..n * n {
            if skip.peek() == Some(&&x) {
                skip.next();
                continue;
            }
            for t in 0..n {
                mat[(r, t)] = self.rows[x * n + t];
            }
            r += 1;
        }
        mat
    }

    /// Whether some nonzero `Ext c` vanishes off `support` (sorted indices).
    pub fn admits_signal(&self, support: &[usize]) -> bool {
        let qr = self.off_support(support).col_piv_qr();
        let r = qr.unpack_r();
        let k = r.nrows().min(r.ncols());
        let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].norm()).collect();
        let largest = pivots.iter().copied().fold(0.0, f64::max);
        let rank = pivots.iter().filter(|&&p| p > RANK_TOL * largest).count();
        rank < self.n
    }

    /// A kernel vector for a support that admits a signal.
    pub fn kernel_vector(&self, support: &[usize]) -> Vec<Complex64> {
        let svd = self.off_support(support).svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        (0..self.n).map(|t| v_t[(imin, t)].conj()).collect()
    }
}

fn next_combination(comb: &mut [usize], universe: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < universe - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Looks for a nonzero signal with spectrum on the parabola and support of
/// at most `max_support` points. Supports are monotone (a witness on `T`
/// is a witness on every superset), so enumerating all supports of size
/// `exhaustive_size` covers every smaller size too.
pub fn uncertainty_search(
    sigma: &ParabolaSet,
    max_support: usize,
    config: &SearchConfig,
) -> Result<UncertaintyVerdict> {
    let ring = sigma.ring();
    ring.require_squarefree()?;
    let bound = support_lower_bound(ring);
    if max_support == 0 || max_support as f64 >= bound {
        return Err(Error::OutsideForbiddenZone { max_support, bound });
    }
    let grid = ring.n() * ring.n();
    let tester = ExtensionRank::new(sigma);
    let witness = |support: Vec<usize>| {
        let c = tester.kernel_vector(&support);
        UncertaintyVerdict::Witness {
            support,
            coefficients: c.iter().map(|z| [z.re, z.im]).collect(),
        }
    };

    let exhaustive_size = config.exhaustive_size.min(max_support);
    let mut exhaustive = 0u64;
    if exhaustive_size > 0 {
        // one parallel task per leading element keeps the first witness
        // (lexicographic order) independent of scheduling
        let found: Vec<Option<Vec<usize>>> = (0..=grid - exhaustive_size)
            .into_par_iter()
            .map(|first| {
                let mut rest: Vec<usize> = (first + 1..first + exhaustive_size).collect();
                loop {
                    let mut support = Vec::with_capacity(exhaustive_size);
                    support.push(first);
                    support.extend_from_slice(&rest);
                    if tester.admits_signal(&support) {
                        return Some(support);
                    }
                    if rest.is_empty() || !next_combination_from(&mut rest, first + 1, grid) {
                        return None;
                    }
                }
            })
            .collect();
        if let Some(support) = found.into_iter().flatten().next() {
            return Ok(witness(support));
        }
        exhaustive = binomial(grid as u64, exhaustive_size as u64);
    }

    let sizes: Vec<usize> = (exhaustive_size + 1..=max_support).collect();
    let mut random = 0u64;
    if !sizes.is_empty() && config.random_samples > 0 {
        const CHUNK: u64 = 4096;
        let chunks = config.random_samples.div_ceil(CHUNK);
        let found: Vec<Option<Vec<usize>>> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = tagged_rng(config.seed, 0x5eed, chunk);
                let end = ((chunk + 1) * CHUNK).min(config.random_samples);
                for i in chunk * CHUNK..end {
                    let size = sizes[(i % sizes.len() as u64) as usize];
                    let support = testfn::random_support(&mut rng, grid, size);
                    if tester.admits_signal(&support) {
                        return Some(support);
                    }
                }
                None
            })
            .collect();
        if let Some(support) = found.into_iter().flatten().next() {
            return Ok(witness(support));
        }
        random = config.random_samples;
    }
    Ok(UncertaintyVerdict::NoWitness {
        exhaustive_supports: exhaustive,
        random_supports: random,
    })
}

/// Advances `comb` (elements from `lo..universe`) to the next combination.
fn next_combination_from(comb: &mut [usize], lo: usize, universe: usize) -> bool {
    for v in comb.iter_mut() {
        *v -= lo;
    }
    let more = next_combination(comb, universe - lo);
    for v in comb.iter_mut() {
        *v += lo;
    }
    more
}

/// Best ratio a probe found, with a description of the witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeBest {
    pub r: f64,
    pub ratio: f64,
    pub witness: String,
}

/// Result of a sharpness probe on one modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub omega: u32,
    pub squarefree: bool,
    /// `2^{omega/4}`; certified only when `squarefree`.
    pub lemma_constant: f64,
    pub four_thirds: ProbeBest,
    pub six_fifths: ProbeBest,
    pub candidates: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeConfig {
    /// Random sparse indicators evaluated besides the progression boxes.
    pub random_indicators: u64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            random_indicators: 200,
            seed: 0,
        }
    }
}

/// Evaluates the (2, 4/3) and (2, 6/5) restriction ratios, without any
/// squarefree gate, over indicators of progression boxes
/// `{d1 i : i < L1} x {d2 j : j < L2}` for all divisors `d1, d2` of `N` and
/// all lengths, plus random sparse indicators. Translating a box only
/// changes the phase of its transform, so boxes are anchored at the origin.
///
/// The family is a search heuristic for large ratios over non-squarefree
/// moduli; its maximizers are not claimed to be extremal.
pub fn sharpness_probe(sigma: &ParabolaSet, config: &ProbeConfig) -> Result<SharpnessReport> {
    let ring = sigma.ring();
    let n = ring.modulus();
    let mut axes = Vec::new();
    for d in divisors(n) {
        for len in 1..=n / d {
            axes.push((d, len));
        }
    }
    let boxes: Vec<((u64, u64), (u64, u64))> = axes
        .iter()
        .flat_map(|&a| axes.iter().map(move |&b| ((a.0, b.0), (a.1, b.1))))
        .collect();
    let total = boxes.len() as u64 + config.random_indicators;
    let grid = ring.n() * ring.n();

    let evaluated: Vec<(f64, f64, String)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (f, label) = if (i as usize) < boxes.len() {
                let (steps, lens) = boxes[i as usize];
                (
                    progression_box(ring, (0, 0), steps, lens),
                    format!("box steps=({},{}) lens=({},{})", steps.0, steps.1, lens.0, lens.1),
                )
            } else {
                let j = i - boxes.len() as u64;
                let mut rng = trial_rng(config.seed, j);
                let size = rng.random_range(1..=grid.min(4 * ring.n()));
                let support = testfn::random_support(&mut rng, grid, size);
                let f = testfn::supported_signal(ring, &support, &mut rng, |_| Complex64::new(1.0, 0.0));
                (f, format!("random indicator #{j} size={size}"))
            };
            let on_sigma = restrict_signal(sigma, &f).expect("same ring");
            let lhs = average_norm(&on_sigma, 2.0);
            (
                lhs / restriction_rhs(&f, 4.0 / 3.0),
                lhs / restriction_rhs(&f, 6.0 / 5.0),
                label,
            )
        })
        .collect();

    let pick = |which: fn(&(f64, f64, String)) -> f64, r: f64| {
        let mut best: Option<&(f64, f64, String)> = None;
        for e in &evaluated {
            if best.is_none_or(|b| which(e) > which(b)) {
                best = Some(e);
            }
        }
        let b = best.expect("nonempty family");
        ProbeBest {
            r,
            ratio: which(b),
            witness: b.2.clone(),
        }
    };
    Ok(SharpnessReport {
        n,
        omega: ring.omega(),
        squarefree: ring.is_squarefree(),
        lemma_constant: lemma_constant(ring),
        four_thirds: pick(|e| e.0, 4.0 / 3.0),
        six_fifths: pick(|e| e.1, 6.0 / 5.0),
        candidates: total,
    })
}

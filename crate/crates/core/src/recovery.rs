//! Recovery of a sparse signal whose spectrum is unobserved on a frequency
//! set `S`.
//!
//! Two solvers are provided. [`logan_recover`] minimizes `||u||_1` over all
//! signals agreeing with the observed spectrum off `S`, by Douglas-Rachford
//! splitting between complex soft-thresholding and the affine projection.
//! [`least_squares_recover`] fits the observed spectrum with a signal on a
//! known support.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{
    dft, idft, l2_distance, lp_norm_slice, sup_distance, synthesize_on, GridJson, Signal2D, Spectrum2D,
};
use crate::parabola::ParabolaSet;
use crate::restriction::lemma_constant;
use crate::rng::tagged_rng;
use crate::testfn;
use crate::zmod::RingContext;

/// A signal observed through its spectrum, with the frequencies in `S`
/// missing.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    ring: RingContext,
    /// Unobserved frequencies, ascending row-major.
    unobserved: Vec<(u64, u64)>,
    /// `true` at unobserved frequencies.
    missing: Vec<bool>,
    /// Observed spectrum, zero on `S`.
    observed: Spectrum2D,
    true_signal: Option<Signal2D>,
    support_hint: Option<Vec<usize>>,
}

impl RecoveryProblem {
    /// Builds a problem from an observed spectrum and the set `S`; entries
    /// of `observed` on `S` are ignored.
    pub fn new(observed: &Spectrum2D, unobserved: &[(u64, u64)]) -> Self {
        let ring = observed.ring().clone();
        let n = ring.modulus();
        let mut missing = vec![false; ring.n() * ring.n()];
        for &(a, b) in unobserved {
            missing[((a % n) * n + b % n) as usize] = true;
        }
        let unobserved = missing
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (i as u64 / n, i as u64 % n))
            .collect();
        let mut observed = observed.clone();
        for (z, &m) in observed.values_mut().iter_mut().zip(&missing) {
            if m {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        Self {
            ring,
            unobserved,
            missing,
            observed,
            true_signal: None,
            support_hint: None,
        }
    }

    pub fn with_support_hint(mut self, support: Vec<usize>) -> Self {
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        self.support_hint = Some(support);
        self
    }

    pub fn ring(&self) -> &RingContext {
        &self.ring
    }

    pub fn unobserved(&self) -> &[(u64, u64)] {
        &self.unobserved
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn observed(&self) -> &Spectrum2D {
        &self.observed
    }

    pub fn true_signal(&self) -> Option<&Signal2D> {
        self.true_signal.as_ref()
    }

    pub fn support_hint(&self) -> Option<&[usize]> {
        self.support_hint.as_deref()
    }

    /// `{ "n", "values", "missing" }`; missing entries serialize as zero.
    pub fn to_json(&self) -> GridJson {
        let mut json = self.observed.to_json();
        json.missing = Some(self.missing.clone());
        json
    }

    pub fn from_json(json: &GridJson) -> Result<Self> {
        let observed = Spectrum2D::from_json(json)?;
        let n = json.n;
        let missing = json.missing.clone().unwrap_or_default();
        if !missing.is_empty() && missing.len() != observed.values().len() {
            return Err(Error::LengthMismatch {
                expected: observed.values().len(),
                found: missing.len(),
            });
        }
        let unobserved: Vec<(u64, u64)> = missing
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (i as u64 / n, i as u64 % n))
            .collect();
        Ok(Self::new(&observed, &unobserved))
    }
}

/// Transmits `f` through its spectrum with `S` unobserved; keeps `f` for
/// scoring.
pub fn erase(f: &Signal2D, unobserved: &[(u64, u64)]) -> RecoveryProblem {
    let mut problem = RecoveryProblem::new(&dft(f), unobserved);
    problem.true_signal = Some(f.clone());
    problem
}

/// Orthogonal projection onto the affine set `{u : u^ = observed off S}`.
#[derive(Clone, Debug)]
pub struct FeasibleProjector {
    ring: RingContext,
    unobserved: Vec<(u64, u64)>,
    missing: Vec<bool>,
    observed: Vec<Complex64>,
    /// Minimal-energy feasible signal: observed spectrum, zero on `S`.
    base: Vec<Complex64>,
    /// `N^{-1} exp(2 pi i x . m_j / N)` laid out `[x][j]` for `m_j` in `S`,
    /// present when projecting through `S` is cheaper than two full
    /// transforms.
    characters: Option<Vec<Complex64>>,
}

impl FeasibleProjector {
    pub fn new(problem: &RecoveryProblem) -> Self {
        let n = problem.ring.n();
        Self {
            ring: problem.ring.clone(),
            unobserved: problem.unobserved.clone(),
            missing: problem.missing.clone(),
            observed: problem.observed.values().to_vec(),
            base: idft(&problem.observed).into_values(),
            // 2 |S| N^2 for the partial route against 4 N^3 for two full
            // transforms
            characters: (problem.unobserved.len() < 2 * n).then(|| character_table(&problem.ring, &problem.unobserved)),
        }
    }

    /// Writes the projection of `v` into `out`.
    pub fn project_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        if let Some(chars) = &self.characters {
            // P(v) = base + (component of v spanned by characters in S)
            let k = self.unobserved.len();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
            for (row, &vx) in chars.chunks_exact(k).zip(v) {
                for (c, w) in coeffs.iter_mut().zip(row) {
                    *c += w.conj() * vx;
                }
            }
            for ((o, b), row) in out.iter_mut().zip(&self.base).zip(chars.chunks_exact(k)) {
                let mut acc = *b;
                for (c, w) in coeffs.iter().zip(row) {
                    acc += w * c;
                }
                *o = acc;
            }
        } else {
            let mut spec = crate::fourier::transform_2d(&self.ring, v, false);
            for ((z, &m), obs) in spec.iter_mut().zip(&self.missing).zip(&self.observed) {
                if !m {
                    *z = *obs;
                }
            }
            out.copy_from_slice(&crate::fourier::transform_2d(&self.ring, &spec, true));
        }
    }

    pub fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.project_into(v, &mut out);
        out
    }

    /// `||v - P(v)||_2`, the constraint violation of `v`.
    pub fn violation(&self, v: &[Complex64]) -> f64 {
        l2_distance(v, &self.project(v))
    }
}

/// Unit characters of `freqs` scaled by `N^{-1}`, row-major in `x`.
fn character_table(ring: &RingContext, freqs: &[(u64, u64)]) -> Vec<Complex64> {
    let n = ring.n();
    let mut table = Vec::with_capacity(n * n * freqs.len());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); freqs.len()];
    for j in 0..freqs.len() {
        coeffs.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        coeffs[j] = Complex64::new(1.0, 0.0);
        let column = synthesize_on(ring, freqs, &coeffs);
        if j == 0 {
            table.resize(n * n * freqs.len(), Complex64::new(0.0, 0.0));
        }
        for (x, z) in column.into_iter().enumerate() {
            table[x * freqs.len() + j] = z;
        }
    }
    table
}

/// Nearest (in l2) signal agreeing with the observed spectrum off `S`.
pub fn project_feasible(u: &Signal2D, problem: &RecoveryProblem) -> Result<Signal2D> {
    problem.ring.check_same(u.ring())?;
    let projector = FeasibleProjector::new(problem);
    Signal2D::new(&problem.ring, projector.project(u.values()))
}

/// Shrinks the modulus of every entry by `threshold`, keeping the phase.
pub fn soft_threshold(values: &[Complex64], threshold: f64, out: &mut [Complex64]) {
    for (o, z) in out.iter_mut().zip(values) {
        let r = z.norm();
        *o = if r > threshold {
            z * ((r - threshold) / r)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoganParams {
    /// Proximal step (soft-threshold level) of the splitting.
    pub step: f64,
    pub max_iterations: usize,
    pub feasibility_tol: f64,
    pub objective_tol: f64,
    /// Sup-norm distance to the true signal below which recovery is exact.
    pub exact_tol: f64,
}

impl Default for LoganParams {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iterations: 20_000,
            feasibility_tol: 1e-9,
            objective_tol: 1e-9,
            exact_tol: 1e-6,
        }
    }
}

/// Iterations over which the relative objective change is measured.
pub const OBJECTIVE_WINDOW: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryStatus {
    /// Matches the true signal within the exactness tolerance.
    Exact,
    /// Feasible with an l1 norm no larger than the truth's, yet different
    /// from it: the minimizer is not unique.
    NonUnique,
    /// Solver finished but the answer differs from the truth.
    Inexact,
    /// Solver finished and no true signal was available to score against.
    Converged,
    /// Iteration budget exhausted before the stopping rule fired.
    NotConverged,
    /// The least-squares system was singular.
    Singular,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub recovered: Signal2D,
    pub iterations: usize,
    /// `||recovered||_1`.
    pub final_objective: f64,
    /// Smallest l1 norm among the exactly feasible iterates visited.
    pub best_feasible_objective: f64,
    /// `||recovered - P(recovered)||_2`.
    pub residual: f64,
    pub status: RecoveryStatus,
    /// Sup-norm distance to the true signal, when known.
    pub error: Option<f64>,
}

impl RecoveryResult {
    pub fn exact(&self) -> bool {
        self.status == RecoveryStatus::Exact
    }
}

fn classify(
    recovered: &[Complex64],
    objective: f64,
    converged: bool,
    truth: Option<&Signal2D>,
    tol: f64,
) -> (RecoveryStatus, Option<f64>) {
    let Some(truth) = truth else {
        let status = if converged {
            RecoveryStatus::Converged
        } else {
            RecoveryStatus::NotConverged
        };
        return (status, None);
    };
    let err = sup_distance(recovered, truth.values());
    let status = if err < tol {
        RecoveryStatus::Exact
    } else if !converged {
        RecoveryStatus::NotConverged
    } else {
        let truth_l1 = lp_norm_slice(truth.values(), 1.0);
        if objective <= truth_l1 + tol * truth_l1.max(1.0) {
            RecoveryStatus::NonUnique
        } else {
            RecoveryStatus::Inexact
        }
    };
    (status, Some(err))
}

/// Douglas-Rachford splitting for `min ||u||_1` subject to `u^ = observed`
/// off `S`:
///
/// ```text
/// x = soft(z, step);  y = P(2x - z);  z += y - x
/// ```
///
/// `x` converges to a minimizer. The loop stops once `||x - y||_2` (an upper
/// bound on the distance from `x` to the feasible set, relative to
/// `max(1, ||y||_2)`) is below `feasibility_tol` and `||x||_1` changed by less
/// than `objective_tol` (relative) over the last [`OBJECTIVE_WINDOW`]
/// iterations, or when `x` is an exact fixed point.
pub fn logan_recover(problem: &RecoveryProblem, params: &LoganParams) -> RecoveryResult {
    let projector = FeasibleProjector::new(problem);
    let len = projector.base.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut z = projector.base.clone();
    let mut x = vec![zero; len];
    let mut v = vec![zero; len];
    let mut y = vec![zero; len];
    let mut history: Vec<f64> = Vec::with_capacity(params.max_iterations.min(1 << 16));
    let mut best_feasible = lp_norm_slice(&z, 1.0);
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=params.max_iterations {
        iterations = k;
        soft_threshold(&z, params.step, &mut x);
        for ((vi, xi), zi) in v.iter_mut().zip(&x).zip(&z) {
            *vi = 2.0 * xi - zi;
        }
        projector.project_into(&v, &mut y);
        let mut gap = 0.0;
        let mut y_sq = 0.0;
        let mut y_l1 = 0.0;
        for ((zi, xi), yi) in z.iter_mut().zip(&x).zip(&y) {
            let d = yi - xi;
            gap += d.norm_sqr();
            y_sq += yi.norm_sqr();
            y_l1 += yi.norm();
            *zi += d;
        }
        best_feasible = best_feasible.min(y_l1);
        let residual = gap.sqrt() / y_sq.sqrt().max(1.0);
        let objective = lp_norm_slice(&x, 1.0);
        history.push(objective);
        if gap == 0.0 {
            converged = true;
            break;
        }
        if residual < params.feasibility_tol && k > OBJECTIVE_WINDOW {
            let before = history[k - 1 - OBJECTIVE_WINDOW];
            if (objective - before).abs() <= params.objective_tol * objective.max(1e-300) {
                converged = true;
                break;
            }
        }
    }

    let final_objective = lp_norm_slice(&x, 1.0);
    let residual = projector.violation(&x);
    let (status, error) = classify(
        &x,
        final_objective,
        converged,
        problem.true_signal.as_ref(),
        params.exact_tol,
    );
    RecoveryResult {
        recovered: Signal2D::new(&problem.ring, x).expect("iterates stay finite"),
        iterations,
        final_objective,
        best_feasible_objective: best_feasible,
        residual,
        status,
        error,
    }
}

/// Smallest Cholesky pivot (squared), relative to the largest diagonal
/// entry of the Gram matrix, accepted as nonsingular.
const GRAM_TOL: f64 = 1e-12;

/// Least-squares fit of the observed spectrum by a signal supported on the
/// problem's support hint, via the normal equations `G u = A^H b` where the
/// columns of `A` are characters restricted to the observed frequencies.
pub fn least_squares_recover(problem: &RecoveryProblem, exact_tol: f64) -> Result<RecoveryResult> {
    let support = problem
        .support_hint
        .as_deref()
        .ok_or_else(|| Error::Invalid("least squares needs a support hint".into()))?;
    let ring = &problem.ring;
    let n = ring.n();
    if support.is_empty() || support.len() > n * n || support.iter().any(|&i| i >= n * n) {
        return Err(Error::Invalid(format!("bad support hint of size {}", support.len())));
    }
    let roots = ring.roots_of_unity();
    let observed_freqs: Vec<usize> = (0..n * n).filter(|&m| !problem.missing[m]).collect();
    let scale = 1.0 / n as f64;
    let a = DMatrix::from_fn(observed_freqs.len(), support.len(), |row, col| {
        let (m1, m2) = (observed_freqs[row] / n, observed_freqs[row] % n);
        let (x1, x2) = (support[col] / n, support[col] % n);
        roots[(x1 * m1 + x2 * m2) % n].conj() * scale
    });
    let b = DVector::from_iterator(
        observed_freqs.len(),
        observed_freqs.iter().map(|&m| problem.observed.values()[m]),
    );
    let gram = a.adjoint() * &a;
    let rhs = a.adjoint() * &b;
    let largest = (0..gram.nrows()).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or(Error::SingularGram)?;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| l[(i, i)].norm_sqr() < GRAM_TOL * largest) {
        return Err(Error::SingularGram);
    }
    let coeffs = chol.solve(&rhs);
    let mut recovered = Signal2D::zeros(ring);
    for (&i, c) in support.iter().zip(coeffs.iter()) {
        recovered.values_mut()[i] = *c;
    }
    let projector = FeasibleProjector::new(problem);
    let residual = projector.violation(recovered.values());
    let final_objective = lp_norm_slice(recovered.values(), 1.0);
    let (status, error) = match problem.true_signal.as_ref() {
        Some(truth) => {
            let err = sup_distance(recovered.values(), truth.values());
            (
                if err < exact_tol {
                    RecoveryStatus::Exact
                } else {
                    RecoveryStatus::Inexact
                },
                Some(err),
            )
        }
        None => (RecoveryStatus::Converged, None),
    };
    Ok(RecoveryResult {
        recovered,
        iterations: 1,
        final_objective,
        best_feasible_objective: if residual < 1e-9 {
            final_objective
        } else {
            f64::INFINITY
        },
        residual,
        status,
        error,
    })
}

/// `N^2 / (2 |S|)`: supports strictly smaller than this are recovered by
/// l1 minimization for any `S` of that size.
pub fn ds_threshold(ring: &RingContext, unobserved: usize) -> f64 {
    (ring.modulus() * ring.modulus()) as f64 / (2.0 * unobserved as f64)
}

/// `N^2 / (4 2^omega(N))`: the support size below which the parabola's
/// L^2/L^1 bound with `K = 2^{omega/4}` forces l1 recovery when `S` is the
/// parabola (bounded number of prime factors).
pub fn improved_threshold(ring: &RingContext) -> f64 {
    // K^4 = 2^omega exactly
    (ring.modulus() * ring.modulus()) as f64 / (4u64 << ring.omega()) as f64
}

/// The inequalities behind l1 recovery for a signal `h = Ext c` whose
/// spectrum lies on the parabola, and a support `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryChain {
    /// `||h||_{L^1(E)}`.
    pub l1_on_support: f64,
    /// `|E|^{1/2} ||h||_{L^2(E)}`.
    pub cauchy_schwarz: f64,
    /// `|E|^{1/2} ||h||_2`.
    pub l2_bound: f64,
    /// `|E|^{1/2} K^2 N^{-1} ||h||_1`, the L^2/L^1 estimate applied.
    pub l1_bound: f64,
    /// `||h||_1`.
    pub l1_total: f64,
}

impl RecoveryChain {
    pub fn holds(&self, tol: f64) -> bool {
        let s = 1.0 + tol;
        self.l1_on_support <= self.cauchy_schwarz * s
            && self.cauchy_schwarz <= self.l2_bound * s
            && self.l2_bound <= self.l1_bound * s
    }

    /// Whether `E` is small enough that `||h||_{L^1(E)} < ||h||_1 / 2` is
    /// forced.
    pub fn forces_recovery(&self) -> bool {
        self.l1_bound < 0.5 * self.l1_total
    }
}

pub fn recovery_chain(sigma: &ParabolaSet, coeffs: &[Complex64], support: &[usize]) -> Result<RecoveryChain> {
    sigma.ring().require_squarefree()?;
    let h = crate::parabola::extend_from(sigma, coeffs)?;
    let on_e: Vec<Complex64> = support.iter().map(|&i| h.values()[i]).collect();
    let root_e = (support.len() as f64).sqrt();
    let k = lemma_constant(sigma.ring());
    let l1_total = lp_norm_slice(h.values(), 1.0);
    Ok(RecoveryChain {
        l1_on_support: lp_norm_slice(&on_e, 1.0),
        cauchy_schwarz: root_e * lp_norm_slice(&on_e, 2.0),
        l2_bound: root_e * lp_norm_slice(h.values(), 2.0),
        l1_bound: root_e * k * k / sigma.ring().modulus() as f64 * l1_total,
        l1_total,
    })
}

/// Amplitude law for random sweep instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitudes {
    Gaussian,
    /// Unit modulus with uniform phase.
    Unimodular,
}

/// Draws instance `trial` of support size `size`: uniform random support,
/// independent amplitudes.
pub fn random_instance(ring: &RingContext, size: usize, trial: u64, seed: u64, amplitudes: Amplitudes) -> Signal2D {
    let mut rng = tagged_rng(seed, size as u64, trial);
    let grid = ring.n() * ring.n();
    let support = testfn::random_support(&mut rng, grid, size);
    match amplitudes {
        Amplitudes::Gaussian => testfn::supported_signal(ring, &support, &mut rng, testfn::complex_gaussian),
        Amplitudes::Unimodular => testfn::supported_signal(ring, &support, &mut rng, testfn::unimodular),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "S_size")]
    pub s_size: usize,
    #[serde(rename = "E_size")]
    pub e_size: usize,
    pub trials: u64,
    pub exact_rate: f64,
    pub mean_iterations: f64,
    pub ds_threshold: f64,
    pub improved_threshold: f64,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub amplitudes: Amplitudes,
    pub params: LoganParams,
}

/// Exact-recovery rate of [`logan_recover`] per support size. Rows follow
/// `config.sizes`; with zero trials the table is empty.
pub fn threshold_sweep(ring: &RingContext, unobserved: &[(u64, u64)], config: &SweepConfig) -> Vec<SweepRow> {
    if config.trials == 0 {
        return Vec::new();
    }
    let cells: Vec<(usize, u64)> = config
        .sizes
        .iter()
        .flat_map(|&size| (0..config.trials).map(move |t| (size, t)))
        .collect();
    let outcomes: Vec<(bool, usize)> = cells
        .par_iter()
        .map(|&(size, trial)| {
            let f = random_instance(ring, size, trial, config.seed, config.amplitudes);
            let result = logan_recover(&erase(&f, unobserved), &config.params);
            (result.exact(), result.iterations)
        })
        .collect();
    let s_size = RecoveryProblem::new(&Spectrum2D::zeros(ring), unobserved)
        .unobserved
        .len();
    config
        .sizes
        .iter()
        .zip(outcomes.chunks(config.trials as usize))
        .map(|(&size, chunk)| {
            let exact = chunk.iter().filter(|o| o.0).count();
            let iters: usize = chunk.iter().map(|o| o.1).sum();
            SweepRow {
                n: ring.modulus(),
                s_size,
                e_size: size,
                trials: config.trials,
                exact_rate: exact as f64 / config.trials as f64,
                mean_iterations: iters as f64 / config.trials as f64,
                ds_threshold: ds_threshold(ring, s_size),
                improved_threshold: improved_threshold(ring),
            }
        })
        .collect()
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use restrictlab_core::parabola::random_subset;
use restrictlab_core::report::{self, ENERGY_HEADER, RESTRICTION_HEADER, SUMMARY_HEADER, SWEEP_HEADER};
use restrictlab_core::restriction::{lemma_constant, SATISFACTION_TOL};
use restrictlab_core::{
    build_parabola, decay_profile, ds_threshold, energy_exact, erase, fuzz_extension, fuzz_main_theorem,
    fuzz_restriction, least_squares_recover, logan_recover, make_ring, random_instance, sharpness_probe,
    support_lower_bound, threshold_sweep, uncertainty_search, universal_certificate, Amplitudes, Error, ExtensionCheck,
    FuzzPlan, GridJson, LoganParams, ParabolaSet, ProbeConfig, RecoveryProblem, RecoveryStatus, RestrictionParams,
    RingContext, SearchConfig, SweepConfig, UncertaintyVerdict,
};
use serde::Serialize;
use thiserror::Error;

use crate::args::{parse_list, Command, Common, Exponent, Format, Method};

/// Anything that stops a command before it can report; always exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Rows that broke a certified inequality or recovery guarantee.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub violations: u64,
}

const DECAY_HEADER: &[&str] = &[
    "N",
    "omega",
    "squarefree",
    "max_nontrivial",
    "max_ratio",
    "witness_m1",
    "witness_m2",
];
const CERTIFICATE_HEADER: &[&str] = &[
    "N",
    "omega",
    "lambda_size",
    "lambda_energy",
    "implied_constant",
    "lemma_constant",
];
const UNCERTAINTY_HEADER: &[&str] = &[
    "N",
    "omega",
    "max_support",
    "bound",
    "exhaustive_size",
    "exhaustive_supports",
    "random_supports",
    "witness_found",
    "witness_support",
];
const SHARPNESS_HEADER: &[&str] = &[
    "N",
    "omega",
    "squarefree",
    "lemma_constant",
    "candidates",
    "ratio_4_3",
    "witness_4_3",
    "ratio_6_5",
    "witness_6_5",
];
const RECOVER_HEADER: &[&str] = &[
    "N",
    "S_size",
    "E_size",
    "method",
    "status",
    "iterations",
    "final_objective",
    "residual",
    "error",
];

#[derive(Serialize)]
struct DecayRow {
    #[serde(rename = "N")]
    n: u64,
    omega: u32,
    squarefree: bool,
    max_nontrivial: f64,
    max_ratio: f64,
    witness_m1: u64,
    witness_m2: u64,
}

#[derive(Serialize)]
struct UncertaintyRow {
    #[serde(rename = "N")]
    n: u64,
    omega: u32,
    max_support: usize,
    bound: f64,
    exhaustive_size: usize,
    exhaustive_supports: u64,
    random_supports: u64,
    witness_found: bool,
    /// Row-major indices joined by `;`.
    witness_support: String,
}

#[derive(Serialize)]
struct SharpnessRow {
    #[serde(rename = "N")]
    n: u64,
    omega: u32,
    squarefree: bool,
    lemma_constant: f64,
    candidates: u64,
    ratio_4_3: f64,
    witness_4_3: String,
    ratio_6_5: f64,
    witness_6_5: String,
}

#[derive(Serialize)]
struct RecoverRow {
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "S_size")]
    s_size: usize,
    #[serde(rename = "E_size")]
    e_size: Option<usize>,
    method: &'static str,
    status: RecoveryStatus,
    iterations: usize,
    final_objective: f64,
    residual: f64,
    error: Option<f64>,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(
    output: &Option<PathBuf>,
    format: Format,
    header: &[&str],
    rows: &[T],
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut out = open_output(output)?;
    let stdout = Path::new("<stdout>");
    let target = output.as_deref().unwrap_or(stdout);
    match format {
        Format::Csv => report::write_csv(&mut out, header, rows, seed)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n").map_err(io_err(target))?;
        }
    }
    out.flush().map_err(io_err(target))
}

/// Grids are written compactly: one `[re, im]` pair per value.
fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer(&mut out, value)?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Resolves `--n` / `--moduli`. With `gated`, a non-squarefree modulus is a
/// usage error unless `--squarefree-only` drops it.
fn rings(common: &Common, gated: bool, allow_filter: bool) -> Result<Vec<RingContext>, CliError> {
    let moduli = match (&common.n, &common.moduli) {
        (Some(n), None) => vec![*n],
        (None, Some(spec)) => parse_list(spec).map_err(CliError::Usage)?,
        _ => return Err(CliError::Usage("one of --n or --moduli is required".into())),
    };
    let mut out = Vec::new();
    for n in moduli {
        let ring = make_ring(n)?;
        if !ring.is_squarefree() {
            if common.squarefree_only && allow_filter {
                continue;
            }
            if gated {
                return Err(CliError::Usage(format!(
                    "modulus {n} is not squarefree; this command is certified only for squarefree moduli \
                     (pass --squarefree-only to skip such moduli)"
                )));
            }
        }
        out.push(ring);
    }
    Ok(out)
}

fn count<T>(rows: &[T], violated: impl Fn(&T) -> bool) -> Outcome {
    Outcome {
        violations: rows.iter().filter(|r| violated(r)).count() as u64,
    }
}

pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Energy { common, trials } => {
            let mut rows = Vec::new();
            for ring in rings(&common, false, true)? {
                let sigma = build_parabola(&ring);
                rows.push(energy_exact(&sigma, None)?);
                let subsets: Vec<_> = (0..trials)
                    .into_par_iter()
                    .map(|t| energy_exact(&sigma, Some(&random_subset(&sigma, common.seed, t))))
                    .collect::<Result<_, _>>()?;
                rows.extend(subsets);
            }
            emit(&common.output, common.format, ENERGY_HEADER, &rows, Some(common.seed))?;
            // the bound is only claimed for squarefree moduli
            let squarefree = |n: u64| make_ring(n).map(|r| r.is_squarefree()).unwrap_or(false);
            Ok(count(&rows, |r| squarefree(r.n) && !r.within_bound()))
        }
        Command::Decay { common } => {
            let rows: Vec<DecayRow> = rings(&common, false, true)?
                .iter()
                .map(|ring| {
                    let p = decay_profile(&build_parabola(ring));
                    DecayRow {
                        n: p.n,
                        omega: ring.omega(),
                        squarefree: ring.is_squarefree(),
                        max_nontrivial: p.max_nontrivial,
                        max_ratio: p.max_ratio,
                        witness_m1: p.witness.0,
                        witness_m2: p.witness.1,
                    }
                })
                .collect();
            emit(&common.output, common.format, DECAY_HEADER, &rows, Some(common.seed))?;
            Ok(Outcome::default())
        }
        Command::RestrictVerify {
            common,
            trials,
            structured,
            r,
        } => {
            let plan = FuzzPlan {
                random: trials,
                structured,
                seed: common.seed,
            };
            let mut rows = Vec::new();
            for ring in rings(&common, true, true)? {
                let sigma = build_parabola(&ring);
                rows.extend(match r {
                    Exponent::FourThirds => fuzz_main_theorem(&sigma, &plan)?,
                    Exponent::SixFifths => {
                        // counting norms decrease in the exponent, so the
                        // 4/3 constant also bounds the 6/5 ratio
                        let params = RestrictionParams::six_fifths(lemma_constant(&ring));
                        debug_assert_eq!(params.r, r.value());
                        fuzz_restriction(&sigma, &plan, &params)?
                    }
                });
            }
            emit(
                &common.output,
                common.format,
                RESTRICTION_HEADER,
                &rows,
                Some(common.seed),
            )?;
            Ok(count(&rows, |r| !r.satisfied))
        }
        Command::DualVerify {
            common,
            trials,
            structured,
            l1_l2,
        } => {
            let plan = FuzzPlan {
                random: trials,
                structured,
                seed: common.seed,
            };
            let check = if l1_l2 {
                ExtensionCheck::L1L2
            } else {
                ExtensionCheck::Dual
            };
            let mut rows = Vec::new();
            for ring in rings(&common, true, true)? {
                rows.extend(fuzz_extension(&build_parabola(&ring), &plan, check)?);
            }
            emit(
                &common.output,
                common.format,
                RESTRICTION_HEADER,
                &rows,
                Some(common.seed),
            )?;
            Ok(count(&rows, |r| !r.satisfied))
        }
        Command::Certificate { common } => {
            let rows = rings(&common, true, true)?
                .iter()
                .map(|ring| universal_certificate(&build_parabola(ring)))
                .collect::<Result<Vec<_>, _>>()?;
            emit(
                &common.output,
                common.format,
                CERTIFICATE_HEADER,
                &rows,
                Some(common.seed),
            )?;
            Ok(count(&rows, |c| {
                c.implied_constant > c.lemma_constant + SATISFACTION_TOL
            }))
        }
        Command::Uncertainty {
            common,
            max_support,
            exhaustive,
            trials,
        } => {
            let exhaustive_size = exhaustive.unwrap_or(max_support).min(max_support);
            let config = SearchConfig {
                exhaustive_size,
                random_samples: trials,
                seed: common.seed,
            };
            let mut rows = Vec::new();
            for ring in rings(&common, true, true)? {
                let verdict = uncertainty_search(&build_parabola(&ring), max_support, &config)?;
                let (exhaustive_supports, random_supports, support) = match verdict {
                    UncertaintyVerdict::NoWitness {
                        exhaustive_supports,
                        random_supports,
                    } => (exhaustive_supports, random_supports, None),
                    UncertaintyVerdict::Witness { support, .. } => (0, 0, Some(support)),
                };
                rows.push(UncertaintyRow {
                    n: ring.modulus(),
                    omega: ring.omega(),
                    max_support,
                    bound: support_lower_bound(&ring),
                    exhaustive_size,
                    exhaustive_supports,
                    random_supports,
                    witness_found: support.is_some(),
                    witness_support: support
                        .unwrap_or_default()
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                });
            }
            emit(
                &common.output,
                common.format,
                UNCERTAINTY_HEADER,
                &rows,
                Some(common.seed),
            )?;
            Ok(count(&rows, |r| r.witness_found))
        }
        Command::Sharpness { common, trials } => {
            if common.squarefree_only {
                eprintln!("restrictlab: --squarefree-only does not apply to sharpness; probing every modulus");
            }
            let config = ProbeConfig {
                random_indicators: trials,
                seed: common.seed,
            };
            let mut rows = Vec::new();
            for ring in rings(&common, false, false)? {
                let rep = sharpness_probe(&build_parabola(&ring), &config)?;
                rows.push(SharpnessRow {
                    n: rep.n,
                    omega: rep.omega,
                    squarefree: rep.squarefree,
                    lemma_constant: rep.lemma_constant,
                    candidates: rep.candidates,
                    ratio_4_3: rep.four_thirds.ratio,
                    witness_4_3: rep.four_thirds.witness,
                    ratio_6_5: rep.six_fifths.ratio,
                    witness_6_5: rep.six_fifths.witness,
                });
            }
            emit(
                &common.output,
                common.format,
                SHARPNESS_HEADER,
                &rows,
                Some(common.seed),
            )?;
            Ok(count(&rows, |r| {
                r.squarefree && r.ratio_4_3 > r.lemma_constant + SATISFACTION_TOL
            }))
        }
        Command::Recover {
            common,
            input,
            support_size,
            method,
            save_problem,
            worst_case,
        } => recover(&common, input, support_size, method, save_problem, worst_case),
        Command::Sweep {
            common,
            sizes,
            trials,
            worst_case,
        } => {
            let sizes: Vec<usize> = parse_list(&sizes)
                .map_err(CliError::Usage)?
                .into_iter()
                .map(|s| s as usize)
                .collect();
            let mut rows = Vec::new();
            for ring in rings(&common, false, true)? {
                let grid = ring.n() * ring.n();
                if let Some(&bad) = sizes.iter().find(|&&s| s > grid) {
                    return Err(CliError::Usage(format!(
                        "support size {bad} exceeds the {grid} grid points for N = {}",
                        ring.modulus()
                    )));
                }
                let config = SweepConfig {
                    sizes: sizes.clone(),
                    trials,
                    seed: common.seed,
                    amplitudes: if worst_case {
                        Amplitudes::Unimodular
                    } else {
                        Amplitudes::Gaussian
                    },
                    params: LoganParams::default(),
                };
                rows.extend(threshold_sweep(&ring, build_parabola(&ring).points(), &config));
            }
            emit(&common.output, common.format, SWEEP_HEADER, &rows, Some(common.seed))?;
            Ok(count(&rows, |r| {
                (r.e_size as f64) < r.ds_threshold && r.exact_rate < 1.0
            }))
        }
        Command::Summarize { files, output, format } => {
            let readers = files
                .iter()
                .map(|p| File::open(p).map(BufReader::new).map_err(io_err(p)))
                .collect::<Result<Vec<_>, _>>()?;
            let summary = report::summarize(readers)?;
            emit(&output, format, SUMMARY_HEADER, &summary.rows, None)?;
            Ok(Outcome {
                violations: summary.violations(),
            })
        }
    }
}

fn single_ring(common: &Common) -> Result<RingContext, CliError> {
    let mut all = rings(common, false, false)?;
    if all.len() != 1 {
        return Err(CliError::Usage("recover takes exactly one modulus".into()));
    }
    Ok(all.remove(0))
}

fn recover(
    common: &Common,
    input: Option<PathBuf>,
    support_size: usize,
    method: Method,
    save_problem: Option<PathBuf>,
    worst_case: bool,
) -> Result<Outcome, CliError> {
    let (problem, sigma_size): (RecoveryProblem, Option<usize>) = match &input {
        Some(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            let json: GridJson = serde_json::from_reader(BufReader::new(file))?;
            (RecoveryProblem::from_json(&json)?, None)
        }
        None => {
            let ring = single_ring(common)?;
            let grid = ring.n() * ring.n();
            if support_size == 0 || support_size > grid {
                return Err(CliError::Usage(format!("--support-size must lie in 1..={grid}")));
            }
            let sigma: ParabolaSet = build_parabola(&ring);
            let amplitudes = if worst_case {
                Amplitudes::Unimodular
            } else {
                Amplitudes::Gaussian
            };
            let f = random_instance(&ring, support_size, 0, common.seed, amplitudes);
            let support: Vec<usize> = (0..grid).filter(|&i| f.values()[i].norm() > 0.0).collect();
            (erase(&f, sigma.points()).with_support_hint(support), Some(sigma.len()))
        }
    };
    if let Some(path) = &save_problem {
        write_json(path, &problem.to_json())?;
    }
    let ring = problem.ring().clone();
    let s_size = problem.unobserved().len();
    let e_size = problem.true_signal().map(|_| support_size);
    let guaranteed = sigma_size.is_some() && (support_size as f64) < ds_threshold(&ring, s_size);

    let result = match method {
        Method::Logan => Some(logan_recover(&problem, &LoganParams::default())),
        Method::LeastSquares => {
            if problem.support_hint().is_none() {
                return Err(CliError::Usage(
                    "least-squares recovery needs a generated instance (no --input)".into(),
                ));
            }
            match least_squares_recover(&problem, LoganParams::default().exact_tol) {
                Ok(r) => Some(r),
                Err(Error::SingularGram) => None,
                Err(e) => return Err(e.into()),
            }
        }
    };
    let method_name = match method {
        Method::Logan => "logan",
        Method::LeastSquares => "least_squares",
    };
    let row = match &result {
        Some(r) => RecoverRow {
            n: ring.modulus(),
            s_size,
            e_size,
            method: method_name,
            status: r.status,
            iterations: r.iterations,
            final_objective: r.final_objective,
            residual: r.residual,
            error: r.error,
        },
        None => RecoverRow {
            n: ring.modulus(),
            s_size,
            e_size,
            method: method_name,
            status: RecoveryStatus::Singular,
            iterations: 0,
            final_objective: f64::NAN,
            residual: f64::NAN,
            error: None,
        },
    };
    let violated = guaranteed && !result.as_ref().is_some_and(|r| r.exact());
    eprintln!(
        "restrictlab: recovery status {:?} after {} iterations",
        row.status, row.iterations
    );
    match (common.format, &result) {
        (Format::Csv, _) => emit(&common.output, Format::Csv, RECOVER_HEADER, &[row], Some(common.seed))?,
        (Format::Json, Some(r)) => {
            let mut json = r.recovered.to_json();
            json.missing = Some(problem.missing_mask().to_vec());
            let mut out = open_output(&common.output)?;
            serde_json::to_writer(&mut out, &json)?;
            let target = common.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
            out.write_all(b"\n")
                .and_then(|_| out.flush())
                .map_err(io_err(&target))?;
        }
        (Format::Json, None) => {
            eprintln!("restrictlab: least-squares system is singular; no signal to write");
        }
    }
    Ok(Outcome {
        violations: violated as u64,
    })
}

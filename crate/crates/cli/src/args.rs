use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "restrictlab",
    version,
    about = "Restriction, energy and recovery experiments on the parabola over (Z/NZ)^2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Space-side exponent of the restriction check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    FourThirds,
    SixFifths,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::FourThirds => 4.0 / 3.0,
            Exponent::SixFifths => 6.0 / 5.0,
        }
    }
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    match s {
        "4/3" => Ok(Exponent::FourThirds),
        "6/5" => Ok(Exponent::SixFifths),
        _ => Err(format!("expected 4/3 or 6/5, got {s:?}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Logan,
    LeastSquares,
}

/// Flags shared by the per-modulus commands.
#[derive(Clone, Debug, Args)]
pub struct Common {
    /// A single modulus.
    #[arg(long, conflicts_with = "moduli")]
    pub n: Option<u64>,
    /// Moduli as a list of values and inclusive ranges, e.g. `3,5,10..20`.
    #[arg(long)]
    pub moduli: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Skip non-squarefree moduli instead of rejecting them.
    #[arg(long)]
    pub squarefree_only: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Additive energy of the parabola, plus random subsets.
    Energy {
        #[command(flatten)]
        common: Common,
        /// Random subsets per modulus besides the full parabola.
        #[arg(long, default_value_t = 0)]
        trials: u64,
    },
    /// Largest nontrivial exponential sum over the parabola.
    Decay {
        #[command(flatten)]
        common: Common,
    },
    /// Fuzzes the (2, r) restriction estimate.
    RestrictVerify {
        #[command(flatten)]
        common: Common,
        /// Random Gaussian test functions per modulus.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Structured test functions per modulus.
        #[arg(long, default_value_t = 0)]
        structured: u64,
        #[arg(long, value_parser = parse_exponent, default_value = "4/3")]
        r: Exponent,
    },
    /// Fuzzes the L^4 extension estimate, or its L^2 / L^1 consequence.
    DualVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        structured: u64,
        #[arg(long)]
        l1_l2: bool,
    },
    /// Size and energy certificates of the restriction estimate.
    Certificate {
        #[command(flatten)]
        common: Common,
    },
    /// Searches small supports for a signal with spectrum on the parabola.
    Uncertainty {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_support: usize,
        /// Support size enumerated exhaustively; defaults to `--max-support`.
        #[arg(long)]
        exhaustive: Option<usize>,
        /// Random supports drawn at the sizes above the exhaustive one.
        #[arg(long, default_value_t = 0)]
        trials: u64,
    },
    /// Restriction ratios of progression boxes and sparse indicators.
    Sharpness {
        #[command(flatten)]
        common: Common,
        /// Random sparse indicators per modulus.
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Recovers one signal whose spectrum is missing on the parabola.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Problem JSON with a `missing` mask; a random instance is drawn
        /// when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Support size of the random instance.
        #[arg(long, default_value_t = 5)]
        support_size: usize,
        #[arg(long, value_enum, default_value_t = Method::Logan)]
        method: Method,
        /// Writes the problem as JSON.
        #[arg(long)]
        save_problem: Option<PathBuf>,
        /// Unimodular amplitudes for the random instance.
        #[arg(long)]
        worst_case: bool,
    },
    /// Exact-recovery rate against support size.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Support sizes as values and inclusive ranges, e.g. `5..40`.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Unimodular instead of Gaussian amplitudes.
        #[arg(long)]
        worst_case: bool,
    },
    /// Aggregates report CSVs sharing one schema.
    Summarize {
        files: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Parses `3,5,10..20` (ranges inclusive, `..=` also accepted) into a
/// sorted, deduplicated list.
pub fn parse_list(list: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let lo: u64 = a.trim().parse().map_err(|_| format!("bad range start in {item:?}"))?;
            let hi: u64 = b.trim().parse().map_err(|_| format!("bad range end in {item:?}"))?;
            if lo > hi {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(item.parse().map_err(|_| format!("bad value {item:?}"))?);
        }
    }
    if out.is_empty() {
        return Err(format!("no values in {list:?}"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

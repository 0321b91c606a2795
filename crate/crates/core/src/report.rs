//! CSV emission for reports and the aggregate `summarize` table.
//!
//! Every CSV starts with a header row (written even when there are no rows)
//! and ends with one metadata comment line, `# seed=<s> version=<v>`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parabola::EnergyReport;
use crate::recovery::SweepRow;
use crate::restriction::RestrictionReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RESTRICTION_HEADER: &[&str] = &[
    "N",
    "omega",
    "squarefree",
    "r",
    "lhs",
    "rhs",
    "ratio",
    "constant",
    "satisfied",
    "witness_kind",
];
pub const ENERGY_HEADER: &[&str] = &["N", "omega", "subset_size", "energy", "bound", "max_rep"];
pub const SWEEP_HEADER: &[&str] = &[
    "N",
    "S_size",
    "E_size",
    "trials",
    "exact_rate",
    "mean_iterations",
    "ds_threshold",
    "improved_threshold",
];
pub const SUMMARY_HEADER: &[&str] = &[
    "N",
    "schema",
    "r",
    "rows",
    "max_ratio",
    "limit",
    "ds_threshold",
    "improved_threshold",
    "violations",
    "verdict",
];

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
            _ => Error::Schema(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// The metadata comment closing every CSV. Wall time is deliberately absent
/// so that reruns are byte-identical.
pub fn trailer(seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# seed={s} version={VERSION}\n"),
        None => format!("# seed=none version={VERSION}\n"),
    }
}

/// Writes `rows` under `header`, then the trailer.
pub fn write_csv<T: Serialize, W: Write>(out: W, header: &[&str], rows: &[T], seed: Option<u64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut out = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(trailer(seed).as_bytes())?;
    Ok(())
}

pub fn csv_string<T: Serialize>(header: &[&str], rows: &[T], seed: Option<u64>) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows, seed)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Report families `summarize` understands, identified by their header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportSchema {
    Restriction,
    Energy,
    Sweep,
}

impl ReportSchema {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            ReportSchema::Restriction => RESTRICTION_HEADER,
            ReportSchema::Energy => ENERGY_HEADER,
            ReportSchema::Sweep => SWEEP_HEADER,
        }
    }

    pub fn detect(header: &csv::StringRecord) -> Option<Self> {
        [ReportSchema::Restriction, ReportSchema::Energy, ReportSchema::Sweep]
            .into_iter()
            .find(|s| header.iter().eq(s.header().iter().copied()))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReportSchema::Restriction => "restriction",
            ReportSchema::Energy => "energy",
            ReportSchema::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One aggregate line: a modulus (and exponent, for restriction reports).
///
/// * restriction: `max_ratio` is the largest ratio, `limit` the constant,
///   violations count `satisfied = false` rows;
/// * energy: `max_ratio` is the largest `energy / bound`, `limit` is 1;
/// * sweep: violations count sizes below the DS threshold recovered at a
///   rate below 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub schema: ReportSchema,
    pub r: Option<f64>,
    pub rows: u64,
    pub max_ratio: Option<f64>,
    pub limit: Option<f64>,
    pub ds_threshold: Option<f64>,
    pub improved_threshold: Option<f64>,
    pub violations: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    /// `None` when every input was empty.
    pub schema: Option<ReportSchema>,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn violations(&self) -> u64 {
        self.rows.iter().map(|r| r.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_string(SUMMARY_HEADER, &self.rows, None)
    }
}

fn read_rows<T: DeserializeOwned, R: Read>(reader: &mut csv::Reader<R>) -> Result<Vec<T>> {
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Aggregates report CSVs sharing one schema. Comment lines are skipped;
/// inputs with no header at all count as empty.
pub fn summarize<R: Read>(inputs: Vec<R>) -> Result<Summary> {
    let mut schema: Option<ReportSchema> = None;
    let mut restriction = Vec::new();
    let mut energy = Vec::new();
    let mut sweep = Vec::new();
    for (i, input) in inputs.into_iter().enumerate() {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let header = reader.headers()?.clone();
        if header.is_empty() {
            continue;
        }
        let found = ReportSchema::detect(&header).ok_or_else(|| {
            Error::Schema(format!(
                "input {i}: unknown header {:?}",
                header.iter().collect::<Vec<_>>()
            ))
        })?;
        match schema {
            Some(s) if s != found => {
                return Err(Error::Schema(format!(
                    "input {i} is a {} report, earlier inputs are {} reports",
                    found.as_str(),
                    s.as_str()
                )))
            }
            _ => schema = Some(found),
        }
        match found {
            ReportSchema::Restriction => restriction.extend(read_rows::<RestrictionReport, _>(&mut reader)?),
            ReportSchema::Energy => energy.extend(read_rows::<EnergyReport, _>(&mut reader)?),
            ReportSchema::Sweep => sweep.extend(read_rows::<SweepRow, _>(&mut reader)?),
        }
    }
    let rows = match schema {
        None => Vec::new(),
        Some(ReportSchema::Restriction) => summarize_restriction(&restriction),
        Some(ReportSchema::Energy) => summarize_energy(&energy),
        Some(ReportSchema::Sweep) => summarize_sweep(&sweep),
    };
    Ok(Summary { schema, rows })
}

fn verdict(violations: u64) -> Verdict {
    if violations == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn summarize_restriction(reports: &[RestrictionReport]) -> Vec<SummaryRow> {
    // r > 0, so its bit pattern orders like the value
    let mut groups: BTreeMap<(u64, u64), Vec<&RestrictionReport>> = BTreeMap::new();
    for rep in reports {
        groups.entry((rep.n, rep.r.to_bits())).or_default().push(rep);
    }
    groups
        .into_iter()
        .map(|((n, r), reps)| {
            let violations = reps.iter().filter(|x| !x.satisfied).count() as u64;
            SummaryRow {
                n,
                schema: ReportSchema::Restriction,
                r: Some(f64::from_bits(r)),
                rows: reps.len() as u64,
                max_ratio: Some(reps.iter().map(|x| x.ratio).fold(f64::NEG_INFINITY, f64::max)),
                limit: Some(reps.iter().map(|x| x.constant).fold(f64::INFINITY, f64::min)),
                ds_threshold: None,
                improved_threshold: None,
                violations,
                verdict: verdict(violations),
            }
        })
        .collect()
}

fn summarize_energy(reports: &[EnergyReport]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<u64, Vec<&EnergyReport>> = BTreeMap::new();
    for rep in reports {
        groups.entry(rep.n).or_default().push(rep);
    }
    groups
        .into_iter()
        .map(|(n, reps)| {
            let violations = reps.iter().filter(|x| !x.within_bound()).count() as u64;
            let max_ratio = reps
                .iter()
                .filter(|x| x.bound > 0)
                .map(|x| x.energy as f64 / x.bound as f64)
                .fold(0.0, f64::max);
            SummaryRow {
                n,
                schema: ReportSchema::Energy,
                r: None,
                rows: reps.len() as u64,
                max_ratio: Some(max_ratio),
                limit: Some(1.0),
                ds_threshold: None,
                improved_threshold: None,
                violations,
                verdict: verdict(violations),
            }
        })
        .collect()
}

fn summarize_sweep(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(u64, usize), Vec<&SweepRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.n, row.s_size)).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|((n, _), rows)| {
            let violations = rows
                .iter()
                .filter(|x| (x.e_size as f64) < x.ds_threshold && x.exact_rate < 1.0)
                .count() as u64;
            SummaryRow {
                n,
                schema: ReportSchema::Sweep,
                r: None,
                rows: rows.len() as u64,
                max_ratio: None,
                limit: None,
                ds_threshold: Some(rows[0].ds_threshold),
                improved_threshold: Some(rows[0].improved_threshold),
                violations,
                verdict: verdict(violations),
            }
        })
        .collect()
}

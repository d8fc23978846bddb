use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use a2ilu::{ConvergenceClass, Variant};
use serde::{Deserialize, Serialize};

use crate::collection::CollectionReport;
use crate::config::OutputFormat;
use crate::error::{BenchError, Result};
use crate::sweep::RunRecord;

pub const SCHEMA_VERSION: u32 = 1;

/// The JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Deterministic result columns, in output order.
pub const RESULT_COLUMNS: [&str; 21] = [
    "matrix",
    "n",
    "nnz",
    "variant",
    "alpha",
    "omega",
    "level_p",
    "tol",
    "fill_ratio_m",
    "accelerated",
    "phi",
    "gamma",
    "iterations",
    "convergence_class",
    "f_baseline",
    "f_final",
    "no_improvement",
    "projected",
    "true_residual_sq",
    "increase_ratio",
    "error",
];

/// Key columns followed by wall-clock timings.
pub const TIMING_COLUMNS: [&str; 11] = [
    "matrix",
    "variant",
    "alpha",
    "omega",
    "level_p",
    "tol",
    "fill_ratio_m",
    "accelerated",
    "factor_time",
    "accel_time",
    "solve_time",
];

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn result_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.matrix.clone(),
        r.n.to_string(),
        r.nnz.to_string(),
        r.variant.to_string(),
        opt(r.alpha, fmt_f64),
        opt(r.omega, fmt_f64),
        opt(r.level_p, |p| p.to_string()),
        opt(r.tol, fmt_f64),
        opt(r.fill_ratio_m, fmt_f64),
        r.accelerated.to_string(),
        opt(r.phi, fmt_f64),
        opt(r.gamma, fmt_f64),
        r.iterations.to_string(),
        r.convergence_class.as_str().to_string(),
        opt(r.f_baseline, fmt_f64),
        opt(r.f_final, fmt_f64),
        opt(r.no_improvement, |b| b.to_string()),
        opt(r.projected, |b| b.to_string()),
        opt(r.true_residual_sq, fmt_f64),
        opt(r.increase_ratio, fmt_f64),
        r.error.clone().unwrap_or_default(),
    ]
}

fn timing_row(r: &RunRecord) -> Vec<String> {
    let row = result_row(r);
    let mut out: Vec<String> = [0, 3, 4, 5, 6, 7, 8, 9]
        .iter()
        .map(|&i| row[i].clone())
        .collect();
    out.extend([r.factor_time, r.accel_time, r.solve_time].map(fmt_f64));
    out
}

/// Writes the deterministic result columns.
pub fn write_results_csv(records: &[RunRecord], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RESULT_COLUMNS)?;
    for r in records {
        wr.write_record(result_row(r))?;
    }
    wr.flush()
        .map_err(|e| BenchError::io(Path::new("<csv>"), e))?;
    Ok(())
}

/// Writes the timing columns.
pub fn write_timings_csv(records: &[RunRecord], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TIMING_COLUMNS)?;
    for r in records {
        wr.write_record(timing_row(r))?;
    }
    wr.flush()
        .map_err(|e| BenchError::io(Path::new("<csv>"), e))?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> BenchError {
    BenchError::Config(format!("csv record {line}: {}", msg.into()))
}

/// Reads a results CSV back. Timing fields come back as zero.
pub fn read_results_csv(r: impl Read) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_COLUMNS {
        return Err(BenchError::Config(format!(
            "unexpected csv header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for (k, row) in rd.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let get = |i: usize| row.get(i).unwrap_or("");
        let f = |i: usize| -> Result<Option<f64>> {
            let s = get(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| parse_err(line, format!("bad number {s:?}")))
        };
        let u = |i: usize| -> Result<Option<usize>> {
            let s = get(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| parse_err(line, format!("bad integer {s:?}")))
        };
        let b = |i: usize| -> Result<Option<bool>> {
            match get(i) {
                "" => Ok(None),
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                s => Err(parse_err(line, format!("bad flag {s:?}"))),
            }
        };
        let required = |x: Option<usize>, what: &str| {
            x.ok_or_else(|| parse_err(line, format!("missing {what}")))
        };
        let variant: Variant = get(3)
            .parse()
            .map_err(|e: a2ilu::Error| parse_err(line, e.to_string()))?;
        let class = match get(13) {
            "convergent" => ConvergenceClass::Convergent,
            "pseudo_convergent" => ConvergenceClass::PseudoConvergent,
            "not_convergent" => ConvergenceClass::NotConvergent,
            s => return Err(parse_err(line, format!("bad class {s:?}"))),
        };
        out.push(RunRecord {
            matrix: get(0).to_string(),
            n: required(u(1)?, "n")?,
            nnz: required(u(2)?, "nnz")?,
            variant,
            alpha: f(4)?,
            omega: f(5)?,
            level_p: u(6)?,
            tol: f(7)?,
            fill_ratio_m: f(8)?,
            accelerated: b(9)?.ok_or_else(|| parse_err(line, "missing accelerated"))?,
            phi: f(10)?,
            gamma: f(11)?,
            iterations: required(u(12)?, "iterations")?,
            convergence_class: class,
            f_baseline: f(14)?,
            f_final: f(15)?,
            no_improvement: b(16)?,
            projected: b(17)?,
            true_residual_sq: f(18)?,
            increase_ratio: f(19)?,
            error: Some(get(20).to_string()).filter(|s| !s.is_empty()),
            factor_time: 0.0,
            accel_time: 0.0,
            solve_time: 0.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Sweep {
        schema_version: u32,
        records: Vec<RunRecord>,
    },
    Collection {
        schema_version: u32,
        #[serde(flatten)]
        report: CollectionReport,
    },
}

impl Report {
    pub fn sweep(records: Vec<RunRecord>) -> Self {
        Report::Sweep {
            schema_version: SCHEMA_VERSION,
            records,
        }
    }

    pub fn collection(report: CollectionReport) -> Self {
        Report::Collection {
            schema_version: SCHEMA_VERSION,
            report,
        }
    }

    pub fn records(&self) -> &[RunRecord] {
        match self {
            Report::Sweep { records, .. } => records,
            Report::Collection { report, .. } => &report.records,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.csv` and `<prefix>.timings.csv` and/or `<prefix>.json`.
/// Returns the paths written.
pub fn emit_report(report: &Report, prefix: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let create = |p: &Path| std::fs::File::create(p).map_err(|e| BenchError::io(p, e));
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let p = with_suffix(prefix, ".csv");
        write_results_csv(report.records(), create(&p)?)?;
        written.push(p);
        let p = with_suffix(prefix, ".timings.csv");
        write_timings_csv(report.records(), create(&p)?)?;
        written.push(p);
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let p = with_suffix(prefix, ".json");
        let mut f = create(&p)?;
        f.write_all(report.to_json()?.as_bytes())
            .and_then(|()| f.write_all(b"\n"))
            .map_err(|e| BenchError::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}

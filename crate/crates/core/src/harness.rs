//! Batch evaluation of reference/test pairs from a CSV manifest.
//!
//! Entries are scored independently (optionally in parallel); one failing
//! entry becomes a failure record instead of aborting the batch. The report
//! carries per-group means with normal-approximation 95% confidence
//! intervals, and Pearson/Spearman correlations against subjective scores
//! when the manifest provides them. Reports serialize to CSV and JSON with
//! all floating-point values at nine digits, so reruns are byte-comparable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::metric::{binaqual, MetricConfig};
use crate::stats::{box_cox, pearson, spearman};
use crate::wav::read_wav;

/// Report schema version, bumped on any breaking field change.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One manifest row: a pair of files plus labels and an optional subjective
/// score (for example a MUSHRA mean) to correlate against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub ref_path: String,
    pub test_path: String,
    pub label: String,
    pub group: String,
    #[serde(default)]
    pub subjective_score: Option<f64>,
}

/// Reads a manifest CSV with header
/// `ref_path,test_path,label,group,subjective_score` (last column optional).
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(|e| Error::ManifestParse(e.to_string()))?;
    let mut entries = Vec::new();
    for record in reader.deserialize::<ManifestEntry>() {
        let entry = record.map_err(|e| Error::ManifestParse(e.to_string()))?;
        if entry.ref_path.is_empty() || entry.test_path.is_empty() {
            return Err(Error::ManifestParse(format!(
                "entry {}: empty path",
                entries.len()
            )));
        }
        if let Some(score) = entry.subjective_score {
            if !score.is_finite() {
                return Err(Error::ManifestParse(format!(
                    "entry {}: non-finite subjective_score",
                    entries.len()
                )));
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Box-Cox options for the report's transformed LS column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxOptions {
    pub lambda: f64,
    /// Added to every LS before the transform when some LS is not strictly
    /// positive; recorded in the report metadata.
    pub shift_epsilon: Option<f64>,
}

/// Batch execution options.
#[derive(Debug, Clone)]
pub struct BatchOptions {
    /// Worker count; 1 runs entries sequentially. The report is identical
    /// either way.
    pub jobs: usize,
    /// When set, adds a Box-Cox-transformed LS column.
    pub box_cox: Option<BoxCoxOptions>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            jobs: 1,
            box_cox: None,
        }
    }
}

/// A successfully scored entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub index: usize,
    pub label: String,
    pub group: String,
    pub nsim_left: f64,
    pub nsim_right: f64,
    pub ls: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ls_box_cox: Option<f64>,
    pub n_patches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subjective_score: Option<f64>,
    pub warnings: Vec<String>,
}

/// An entry that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub index: usize,
    pub label: String,
    pub error: String,
}

/// Mean LS per group with a normal-approximation 95% confidence interval
/// (mean +/- 1.96 * sd / sqrt(n); approximate below ~30 entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub group: String,
    pub n: usize,
    pub mean_ls: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// Correlations between LS and the manifest's subjective scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
}

/// Everything a batch run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub schema_version: u32,
    pub config_fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_cox_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_cox_shift: Option<f64>,
    pub rows: Vec<BatchRow>,
    pub failures: Vec<BatchFailure>,
    pub aggregates: Vec<GroupAggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Correlations>,
}

fn evaluate_entry(
    index: usize,
    entry: &ManifestEntry,
    config: &MetricConfig,
) -> std::result::Result<BatchRow, BatchFailure> {
    let fail = |e: Error| BatchFailure {
        index,
        label: entry.label.clone(),
        error: format!("{}: {}", e.category(), e),
    };
    let reference = read_wav(&entry.ref_path).map_err(fail)?;
    let test = read_wav(&entry.test_path).map_err(fail)?;
    let result = binaqual(&reference, &test, config).map_err(fail)?;
    Ok(BatchRow {
        index,
        label: entry.label.clone(),
        group: entry.group.clone(),
        nsim_left: result.left.nsim,
        nsim_right: result.right.nsim,
        ls: result.ls,
        ls_box_cox: None,
        n_patches: result.left.patch_scores.len(),
        subjective_score: entry.subjective_score,
        warnings: result.warnings.iter().map(Warning::to_string).collect(),
    })
}

/// Runs the metric over every manifest entry.
///
/// Output is keyed by manifest index and therefore independent of worker
/// count and scheduling.
pub fn run_batch(
    entries: &[ManifestEntry],
    config: &MetricConfig,
    options: &BatchOptions,
) -> Result<BatchReport> {
    if entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let jobs = options.jobs.max(1);

    let outcomes: Vec<std::result::Result<BatchRow, BatchFailure>> = if jobs == 1 {
        entries
            .iter()
            .enumerate()
            .map(|(index, entry)| evaluate_entry(index, entry, config))
            .collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| {
            entries
                .par_iter()
                .enumerate()
                .map(|(index, entry)| evaluate_entry(index, entry, config))
                .collect()
        })
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(failure) => failures.push(failure),
        }
    }

    // optional transformed column
    let mut applied_shift = None;
    if let Some(bc) = &options.box_cox {
        let ls_values: Vec<f64> = rows.iter().map(|r| r.ls).collect();
        let needs_shift = ls_values.iter().any(|&v| v <= 0.0);
        let transformed = if needs_shift {
            let epsilon = bc.shift_epsilon.ok_or(Error::NonPositiveValue {
                index: ls_values.iter().position(|&v| v <= 0.0).unwrap_or(0),
                value: ls_values.iter().cloned().fold(f64::INFINITY, f64::min),
            })?;
            applied_shift = Some(epsilon);
            let shifted: Vec<f64> = ls_values.iter().map(|&v| v + epsilon).collect();
            box_cox(&shifted, bc.lambda)?
        } else {
            box_cox(&ls_values, bc.lambda)?
        };
        for (row, value) in rows.iter_mut().zip(transformed) {
            row.ls_box_cox = Some(value);
        }
    }

    // group aggregates in first-appearance order
    let mut group_order: Vec<String> = Vec::new();
    for row in &rows {
        if !group_order.contains(&row.group) {
            group_order.push(row.group.clone());
        }
    }
    let aggregates = group_order
        .iter()
        .map(|group| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| &r.group == group)
                .map(|r| r.ls)
                .collect();
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = if n < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0))
                    .sqrt()
            };
            let half_width = 1.96 * sd / (n as f64).sqrt();
            GroupAggregate {
                group: group.clone(),
                n,
                mean_ls: mean,
                ci95_low: mean - half_width,
                ci95_high: mean + half_width,
            }
        })
        .collect();

    // correlations against subjective scores, when present and non-degenerate
    let scored: Vec<(&f64, f64)> = rows
        .iter()
        .filter_map(|r| r.subjective_score.as_ref().map(|s| (s, r.ls)))
        .collect();
    let correlations = if scored.len() >= 2 {
        let subjective: Vec<f64> = scored.iter().map(|(s, _)| **s).collect();
        let ls: Vec<f64> = scored.iter().map(|(_, l)| *l).collect();
        match (pearson(&ls, &subjective), spearman(&ls, &subjective)) {
            (Ok(p), Ok(s)) => Some(Correlations {
                n: scored.len(),
                pearson: p,
                spearman: s,
            }),
            _ => None,
        }
    } else {
        None
    };

    Ok(BatchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config_fingerprint: config.fingerprint(),
        box_cox_lambda: options.box_cox.map(|bc| bc.lambda),
        box_cox_shift: applied_shift,
        rows,
        failures,
        aggregates,
        correlations,
    })
}

/// Fixed-point float formatting used in all text output: nine digits after
/// the decimal point, which keeps golden files stable across platforms.
pub fn format_score(value: f64) -> String {
    format!("{value:.9}")
}

/// Rounds to nine significant digits; applied before JSON serialization so
/// emitted numbers are identical across reruns and platforms.
pub fn round_sig9(value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(8 - magnitude);
    (value * factor).round() / factor
}

impl BatchReport {
    /// Per-entry rows (and failures) as CSV.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(
            "index,label,group,nsim_left,nsim_right,ls,ls_box_cox,n_patches,subjective_score,warnings,error\n",
        );
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        for row in &self.rows {
            writer
                .write_record([
                    row.index.to_string(),
                    row.label.clone(),
                    row.group.clone(),
                    format_score(row.nsim_left),
                    format_score(row.nsim_right),
                    format_score(row.ls),
                    row.ls_box_cox.map(format_score).unwrap_or_default(),
                    row.n_patches.to_string(),
                    row.subjective_score.map(format_score).unwrap_or_default(),
                    row.warnings.join("; "),
                    String::new(),
                ])
                .expect("csv write to memory");
        }
        for failure in &self.failures {
            writer
                .write_record([
                    failure.index.to_string(),
                    failure.label.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    failure.error.clone(),
                ])
                .expect("csv write to memory");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("csv flush")).unwrap());
        out
    }

    /// Group aggregates and correlations as CSV.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("group,n,mean_ls,ci95_low,ci95_high\n");
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        for agg in &self.aggregates {
            writer
                .write_record([
                    agg.group.clone(),
                    agg.n.to_string(),
                    format_score(agg.mean_ls),
                    format_score(agg.ci95_low),
                    format_score(agg.ci95_high),
                ])
                .expect("csv write to memory");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("csv flush")).unwrap());
        if let Some(c) = &self.correlations {
            out.push_str(&format!(
                "correlations,n={},pearson={},spearman={}\n",
                c.n,
                format_score(c.pearson),
                format_score(c.spearman)
            ));
        }
        out
    }

    /// The whole report as pretty JSON with nine-significant-digit floats.
    pub fn to_json_string(&self) -> String {
        let mut rounded = self.clone();
        for row in &mut rounded.rows {
            row.nsim_left = round_sig9(row.nsim_left);
            row.nsim_right = round_sig9(row.nsim_right);
            row.ls = round_sig9(row.ls);
            row.ls_box_cox = row.ls_box_cox.map(round_sig9);
            row.subjective_score = row.subjective_score.map(round_sig9);
        }
        for agg in &mut rounded.aggregates {
            agg.mean_ls = round_sig9(agg.mean_ls);
            agg.ci95_low = round_sig9(agg.ci95_low);
            agg.ci95_high = round_sig9(agg.ci95_high);
        }
        if let Some(c) = &mut rounded.correlations {
            c.pearson = round_sig9(c.pearson);
            c.spearman = round_sig9(c.spearman);
        }
        serde_json::to_string_pretty(&rounded).expect("report serializes") + "\n"
    }
}

//! `binaqual` command line: compare pairs, run batches, synthesize fixtures,
//! and compute statistics on CSV columns.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 partial batch
//! failure. Every error path prints exactly one machine-parseable stderr
//! line of the form `error: <category>: <detail>`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use binaqual::harness::{format_score, round_sig9, BatchOptions, BoxCoxOptions};
use binaqual::nsim::AlignmentPolicy;
use binaqual::synth::manifest::{parse_manifest, render_manifest};
use binaqual::{
    binaqual as score_pair, box_cox, pearson, read_manifest, read_wav, spearman,
    LocalizationResult, MetricConfig,
};

#[derive(Parser)]
#[command(
    name = "binaqual",
    version,
    about = "Localization-similarity scoring for binaural audio",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Score a single reference/test pair of WAV files.
    Compare {
        reference: PathBuf,
        test: PathBuf,
        /// Emit the full result as JSON instead of the one-line summary.
        #[arg(long)]
        json: bool,
        /// Include per-patch and per-band pre-clamp scores.
        #[arg(long)]
        diagnostics: bool,
        /// Search +/-K frames for the best-aligned test patch (default:
        /// fixed same-index pairing).
        #[arg(long, value_name = "K")]
        align_search: Option<usize>,
    },
    /// Evaluate every pair in a CSV manifest and write a report.
    Batch {
        manifest: PathBuf,
        /// Report path; CSV format also writes `<out stem>_summary.csv`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Parallel workers; the report is byte-identical for any value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Box-Cox lambda for the transformed LS column. No default: omit
        /// the flag to omit the column.
        #[arg(long)]
        lambda: Option<f64>,
        /// Shift added to LS before Box-Cox when some LS <= 0; recorded in
        /// the report.
        #[arg(long, value_name = "EPSILON")]
        shift_epsilon: Option<f64>,
    },
    /// Render a JSON fixture manifest to WAV files plus a lockfile.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Statistics over columns of a CSV file.
    Stats {
        #[command(subcommand)]
        command: StatsCommand,
    },
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Pearson product-moment correlation between two columns.
    Pearson {
        csv: PathBuf,
        #[arg(long, value_name = "COLUMN")]
        x: String,
        #[arg(long, value_name = "COLUMN")]
        y: String,
    },
    /// Spearman rank correlation between two columns.
    Spearman {
        csv: PathBuf,
        #[arg(long, value_name = "COLUMN")]
        x: String,
        #[arg(long, value_name = "COLUMN")]
        y: String,
    },
    /// Box-Cox-transform a column; prints the CSV with an appended column.
    BoxCox {
        csv: PathBuf,
        #[arg(long, value_name = "COLUMN")]
        column: String,
        #[arg(long)]
        lambda: f64,
        /// Shift added to every value first, for columns containing zeros.
        #[arg(long, value_name = "EPSILON")]
        shift_epsilon: Option<f64>,
    },
}

struct Failure {
    code: u8,
    category: String,
    detail: String,
}

impl Failure {
    fn input(category: impl Into<String>, detail: impl Into<String>) -> Self {
        Failure {
            code: 2,
            category: category.into(),
            detail: detail.into(),
        }
    }
}

impl From<binaqual::Error> for Failure {
    fn from(e: binaqual::Error) -> Self {
        Failure {
            code: 2,
            category: e.category().to_string(),
            detail: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}: {}", f.category, f.detail);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Compare {
            reference,
            test,
            json,
            diagnostics,
            align_search,
        } => cmd_compare(&reference, &test, json, diagnostics, align_search),
        Command::Batch {
            manifest,
            out,
            format,
            jobs,
            lambda,
            shift_epsilon,
        } => cmd_batch(&manifest, &out, format, jobs, lambda, shift_epsilon),
        Command::Synth { spec, out_dir } => cmd_synth(&spec, &out_dir),
        Command::Stats { command } => cmd_stats(command),
    }
}

fn metric_config(align_search: Option<usize>) -> MetricConfig {
    let mut config = MetricConfig::default();
    if let Some(k) = align_search {
        config.alignment = AlignmentPolicy::Search {
            max_offset_frames: k,
        };
    }
    config
}

fn cmd_compare(
    reference: &Path,
    test: &Path,
    json: bool,
    diagnostics: bool,
    align_search: Option<usize>,
) -> Result<u8, Failure> {
    let ref_buf = read_wav(reference)?;
    let test_buf = read_wav(test)?;
    let config = metric_config(align_search);
    let result = score_pair(&ref_buf, &test_buf, &config)?;

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&compare_json(&result, diagnostics))
                .expect("result serializes")
        );
    } else {
        println!(
            "LS={} NSIM_L={} NSIM_R={}",
            format_score(result.ls),
            format_score(result.left.nsim),
            format_score(result.right.nsim)
        );
        for warning in &result.warnings {
            println!("warning: {warning}");
        }
        if diagnostics {
            for (i, (l, r)) in result
                .left
                .patch_scores
                .iter()
                .zip(&result.right.patch_scores)
                .enumerate()
            {
                println!("patch {i} L={} R={}", format_score(*l), format_score(*r));
            }
            for (channel, score) in [("L", &result.left), ("R", &result.right)] {
                for (i, bands) in score.band_scores.iter().enumerate() {
                    let joined: Vec<String> = bands.iter().map(|v| format_score(*v)).collect();
                    println!("bands {channel} patch {i}: {}", joined.join(" "));
                }
            }
        }
    }
    Ok(0)
}

fn compare_json(result: &LocalizationResult, diagnostics: bool) -> serde_json::Value {
    let warnings: Vec<serde_json::Value> = result
        .warnings
        .iter()
        .map(|w| {
            serde_json::json!({
                "kind": w.kind.as_str(),
                "message": w.message,
            })
        })
        .collect();
    let mut value = serde_json::json!({
        "schema_version": 1,
        "ls": round_sig9(result.ls),
        "nsim_left": round_sig9(result.left.nsim),
        "nsim_right": round_sig9(result.right.nsim),
        "n_patches": result.left.patch_scores.len(),
        "config_fingerprint": result.config_fingerprint,
        "warnings": warnings,
    });
    if diagnostics {
        let channel = |score: &binaqual::ChannelScore| {
            serde_json::json!({
                "pre_clamp": round_sig9(score.nsim_pre_clamp),
                "patch_scores": score.patch_scores.iter().map(|v| round_sig9(*v)).collect::<Vec<_>>(),
                "band_scores": score
                    .band_scores
                    .iter()
                    .map(|bands| bands.iter().map(|v| round_sig9(*v)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })
        };
        value["diagnostics"] = serde_json::json!({
            "left": channel(&result.left),
            "right": channel(&result.right),
        });
    }
    value
}

fn cmd_batch(
    manifest_path: &Path,
    out: &Path,
    format: OutputFormat,
    jobs: usize,
    lambda: Option<f64>,
    shift_epsilon: Option<f64>,
) -> Result<u8, Failure> {
    let entries = read_manifest(manifest_path)?;
    let options = BatchOptions {
        jobs,
        box_cox: lambda.map(|lambda| BoxCoxOptions {
            lambda,
            shift_epsilon,
        }),
    };
    let report = binaqual::run_batch(&entries, &MetricConfig::default(), &options)?;

    match format {
        OutputFormat::Json => {
            std::fs::write(out, report.to_json_string()).map_err(binaqual::Error::from)?;
            println!("wrote {}", out.display());
        }
        OutputFormat::Csv => {
            std::fs::write(out, report.rows_csv()).map_err(binaqual::Error::from)?;
            let summary = summary_path(out);
            std::fs::write(&summary, report.summary_csv()).map_err(binaqual::Error::from)?;
            println!("wrote {} and {}", out.display(), summary.display());
        }
    }
    println!(
        "{} row(s), {} failure(s)",
        report.rows.len(),
        report.failures.len()
    );

    if report.rows.is_empty() {
        return Err(Failure::input(
            "batch-failed",
            format!("all {} entries failed", report.failures.len()),
        ));
    }
    if report.failures.is_empty() {
        Ok(0)
    } else {
        eprintln!(
            "error: partial-batch-failure: {} of {} entries failed",
            report.failures.len(),
            entries.len()
        );
        Ok(3)
    }
}

fn summary_path(rows_path: &Path) -> PathBuf {
    let stem = rows_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    rows_path.with_file_name(format!("{stem}_summary.csv"))
}

fn cmd_synth(spec: &Path, out_dir: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(spec).map_err(binaqual::Error::from)?;
    let manifest = parse_manifest(&text)?;
    let lock = render_manifest(&manifest, out_dir)?;
    let lock_path = out_dir.join("synth.lock.json");
    let lock_json = serde_json::to_string_pretty(&lock).expect("lock serializes") + "\n";
    std::fs::write(&lock_path, lock_json).map_err(binaqual::Error::from)?;
    for file in &lock.files {
        println!("{}  {}", file.sha256, file.file);
    }
    println!("wrote {} file(s) and {}", lock.files.len(), lock_path.display());
    Ok(0)
}

fn cmd_stats(command: StatsCommand) -> Result<u8, Failure> {
    match command {
        StatsCommand::Pearson { csv, x, y } => {
            let (xs, ys) = read_two_columns(&csv, &x, &y)?;
            let r = pearson(&xs, &ys)?;
            println!("pearson={} n={}", format_score(r), xs.len());
        }
        StatsCommand::Spearman { csv, x, y } => {
            let (xs, ys) = read_two_columns(&csv, &x, &y)?;
            let r = spearman(&xs, &ys)?;
            println!("spearman={} n={}", format_score(r), xs.len());
        }
        StatsCommand::BoxCox {
            csv,
            column,
            lambda,
            shift_epsilon,
        } => {
            let (header, records, values) = read_column(&csv, &column)?;
            let shifted: Vec<f64> = match shift_epsilon {
                Some(eps) => values.iter().map(|v| v + eps).collect(),
                None => values,
            };
            let transformed = box_cox(&shifted, lambda)?;
            let mut writer = csv::Writer::from_writer(std::io::stdout());
            let mut out_header = header;
            out_header.push(format!("{column}_boxcox"));
            writer
                .write_record(&out_header)
                .map_err(|e| Failure::input("io-failure", e.to_string()))?;
            for (record, value) in records.iter().zip(transformed) {
                let mut row: Vec<String> = record.iter().map(str::to_string).collect();
                row.push(format_score(value));
                writer
                    .write_record(&row)
                    .map_err(|e| Failure::input("io-failure", e.to_string()))?;
            }
            writer
                .flush()
                .map_err(|e| Failure::input("io-failure", e.to_string()))?;
        }
    }
    Ok(0)
}

fn open_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::input("manifest-parse", e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Failure::input("manifest-parse", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::input("manifest-parse", e.to_string()))?;
    Ok((header, records))
}

fn column_index(header: &[String], name: &str) -> Result<usize, Failure> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        Failure::input(
            "manifest-parse",
            format!("column {name:?} not found; header is {header:?}"),
        )
    })
}

fn parse_cell(record: &csv::StringRecord, index: usize, row: usize) -> Result<f64, Failure> {
    let cell = record.get(index).unwrap_or("");
    cell.parse::<f64>().map_err(|_| {
        Failure::input(
            "manifest-parse",
            format!("row {row}: {cell:?} is not a number"),
        )
    })
}

fn read_two_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let (header, records) = open_csv(path)?;
    let xi = column_index(&header, x)?;
    let yi = column_index(&header, y)?;
    let mut xs = Vec::with_capacity(records.len());
    let mut ys = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        xs.push(parse_cell(record, xi, row)?);
        ys.push(parse_cell(record, yi, row)?);
    }
    Ok((xs, ys))
}

type ColumnData = (Vec<String>, Vec<csv::StringRecord>, Vec<f64>);

fn read_column(path: &Path, column: &str) -> Result<ColumnData, Failure> {
    let (header, records) = open_csv(path)?;
    let index = column_index(&header, column)?;
    let mut values = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        values.push(parse_cell(record, index, row)?);
    }
    Ok((header, records, values))
}

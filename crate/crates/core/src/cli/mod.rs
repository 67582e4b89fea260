//! Command-line front end. Each subcommand loads a dataset, runs one analysis
//! section and writes plot-ready CSV; `report` runs every section.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

mod pipeline;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{parse_dataset, read_job_order, write_jsonl, Dataset};
use crate::driftwatch::{
    read_checksums, write_checksums, ChecksumLedger, DEFAULT_DRIFT_ALPHA, DEFAULT_PRACTICAL_DELTA,
};
use crate::error::{Error, Result};
use crate::resample::{
    Metric, DEFAULT_ALPHA, DEFAULT_REPLICATES, DEFAULT_SEED, TARGET_WIDTH_PREVALENCE,
    TARGET_WIDTH_SHARE,
};
use crate::stability::{DEFAULT_STABILITY, DEFAULT_SUFFICIENCY};
use crate::synth::{self, ChecksumPlan, SynthConfig};

pub use pipeline::REPORT_FILES;

/// Schema tag written into `report.json`.
pub const REPORT_SCHEMA: &str = "citevis.report/v1";

#[derive(Parser, Debug)]
#[command(
    name = "citevis",
    version,
    about = "Citation-visibility metrics with bootstrap uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Dataset JSONL file, or a directory containing dataset.jsonl
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Job-order file (one job_id per line, earliest first); defaults to job_order.txt next to the dataset
    #[arg(long, value_name = "FILE")]
    job_order: Option<PathBuf>,
    /// Fraction of a panel's samples a domain must appear in to count as frequently cited
    #[arg(long, default_value_t = 1.0)]
    min_fraction: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct BootArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Bootstrap replicates
    #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct WidthArgs {
    #[arg(long, default_value_t = TARGET_WIDTH_SHARE)]
    target_width_share: f64,
    #[arg(long, default_value_t = TARGET_WIDTH_PREVALENCE)]
    target_width_prevalence: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct StabilityArgs {
    /// Maximum rank-correlation CI width for a pair to count as sufficient
    #[arg(long, default_value_t = DEFAULT_SUFFICIENCY)]
    sufficiency: f64,
    /// Minimum rho for a sufficient pair to count as stable
    #[arg(long, default_value_t = DEFAULT_STABILITY)]
    stability: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct DriftArgs {
    #[arg(long, default_value_t = DEFAULT_DRIFT_ALPHA)]
    drift_alpha: f64,
    /// Minimum absolute share change for a significant difference to be flagged
    #[arg(long, default_value_t = DEFAULT_PRACTICAL_DELTA)]
    practical_delta: f64,
}

#[derive(Args, Debug, Clone)]
struct ContentArgs {
    /// Checksum JSONL; defaults to checksums.jsonl next to the dataset
    #[arg(long, value_name = "FILE")]
    checksums: Option<PathBuf>,
    /// Domains to classify (repeatable); defaults to the top frequently-cited domains
    #[arg(long = "domain")]
    domains: Vec<String>,
    /// Number of top domains per panel when --domain is not given
    #[arg(long, default_value_t = 5)]
    top: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate and normalize a dataset; writes dataset.jsonl and an ingest report
    Ingest {
        #[command(flatten)]
        io: InputArgs,
    },
    /// Per-sample count/share/prevalence, citation summaries and appearance histograms
    Metrics {
        #[command(flatten)]
        io: InputArgs,
    },
    /// Pairwise Jaccard similarity across repeated runs of the same query
    Overlap {
        #[command(flatten)]
        io: InputArgs,
    },
    /// Percentile-bootstrap CIs for the baseline sample of each panel
    Ci {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        /// share or prevalence; both when omitted
        #[arg(long)]
        metric: Option<Metric>,
    },
    /// Max CI width as a function of sample size
    Converge {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        widths: WidthArgs,
        #[arg(long)]
        metric: Option<Metric>,
    },
    /// Log-space dispersion and ranked share tables
    Dispersion {
        #[command(flatten)]
        io: InputArgs,
    },
    /// Weighted Spearman rank stability across consecutive jobs
    Stability {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        thresholds: StabilityArgs,
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Chi-squared share drift of every job against the baseline
    Drift {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Content-change status of top domains from page checksums
    ContentStatus {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        content: ContentArgs,
    },
    /// Generate a synthetic dataset with known ground truth
    Simulate(SimulateArgs),
    /// Run every analysis and write report.json plus all figure and table CSVs
    Report {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        widths: WidthArgs,
        #[command(flatten)]
        thresholds: StabilityArgs,
        #[command(flatten)]
        drift: DriftArgs,
        #[command(flatten)]
        content: ContentArgs,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// gemini-like, searchgpt-like or perplexity-like
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    preset: Option<String>,
    /// SynthConfig JSON file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_queries: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::UnknownPreset(_) => 2,
        _ => 1,
    }
}

/// SHA-256 of an input file, recorded for provenance.
#[derive(Debug, Clone, Serialize)]
pub(crate) struct InputDigest {
    file: String,
    sha256: String,
}

fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path)?;
    let digest = InputDigest {
        file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok((bytes, digest))
}

pub(crate) struct Loaded {
    dataset: Dataset,
    inputs: Vec<InputDigest>,
    dir: Option<PathBuf>,
    accepted: usize,
    repaired: usize,
    rejected: Vec<String>,
}

fn load(io: &InputArgs) -> Result<Loaded> {
    let (path, dir) = if io.input.is_dir() {
        (io.input.join("dataset.jsonl"), Some(io.input.clone()))
    } else {
        (io.input.clone(), None)
    };
    let (bytes, digest) = read_input(&path)?;
    let report = parse_dataset(&bytes[..], &path.display().to_string())?;
    let rejected: Vec<String> = report
        .rejected
        .iter()
        .map(|e| format!("{}:{e}", path.display()))
        .collect();
    for r in &rejected {
        eprintln!("warning: rejected {r}");
    }
    let mut inputs = vec![digest];
    let order_path = io.job_order.clone().or_else(|| {
        dir.as_ref()
            .map(|d| d.join("job_order.txt"))
            .filter(|p| p.is_file())
    });
    let mut dataset = report.dataset;
    if let Some(p) = order_path {
        let (bytes, digest) = read_input(&p)?;
        dataset = dataset.with_job_order(read_job_order(&bytes[..])?);
        inputs.push(digest);
    }
    Ok(Loaded {
        dataset,
        inputs,
        dir,
        accepted: report.accepted,
        repaired: report.repaired,
        rejected,
    })
}

fn load_checksums(
    explicit: Option<&Path>,
    dir: Option<&Path>,
) -> Result<Option<(ChecksumLedger, InputDigest)>> {
    let path = explicit.map(Path::to_path_buf).or_else(|| {
        dir.map(|d| d.join("checksums.jsonl"))
            .filter(|p| p.is_file())
    });
    match path {
        None => Ok(None),
        Some(p) => {
            let (bytes, digest) = read_input(&p)?;
            Ok(Some((read_checksums(&bytes[..])?, digest)))
        }
    }
}

/// Output directory that refuses to overwrite any input file.
pub(crate) struct OutDir {
    root: PathBuf,
    protected: Vec<PathBuf>,
    written: Vec<String>,
}

impl OutDir {
    fn create(root: &Path, inputs: &[&Path]) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            protected: inputs
                .iter()
                .filter_map(|p| fs::canonicalize(p).ok())
                .collect(),
            written: Vec::new(),
        })
    }

    pub(crate) fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if fs::canonicalize(&path).is_ok_and(|p| self.protected.contains(&p)) {
            return Err(Error::InvalidParameter {
                name: "out",
                reason: format!("{} is an input file", path.display()),
            });
        }
        fs::write(&path, bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub(crate) fn with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub(crate) fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

#[derive(Serialize)]
struct Provenance<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: &'a [InputDigest],
    parameters: P,
}

fn provenance<P: Serialize>(
    out: &mut OutDir,
    command: &'static str,
    inputs: &[InputDigest],
    parameters: P,
) -> Result<()> {
    out.json(
        "provenance.json",
        &Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs,
            parameters,
        },
    )
}

fn open(io: &InputArgs, extra: &[&Path]) -> Result<(Loaded, OutDir)> {
    let loaded = load(io)?;
    let mut inputs: Vec<&Path> = vec![&io.input];
    if io.input.is_dir() {
        inputs.clear();
    }
    inputs.extend(extra);
    let dataset_file = loaded.dir.as_ref().map(|d| d.join("dataset.jsonl"));
    let order_file = loaded.dir.as_ref().map(|d| d.join("job_order.txt"));
    let checks_file = loaded.dir.as_ref().map(|d| d.join("checksums.jsonl"));
    inputs.extend(
        dataset_file
            .iter()
            .chain(&order_file)
            .chain(&checks_file)
            .map(PathBuf::as_path),
    );
    if let Some(p) = &io.job_order {
        inputs.push(p);
    }
    let out = OutDir::create(&io.out, &inputs)?;
    Ok((loaded, out))
}

fn execute(command: Command) -> Result<()> {
    use pipeline::Ctx;
    match command {
        Command::Ingest { io } => {
            let (loaded, mut out) = open(&io, &[])?;
            out.with("dataset.jsonl", |w| write_jsonl(&loaded.dataset, w))?;
            let order: String = loaded
                .dataset
                .job_order()
                .iter()
                .map(|j| format!("{j}\n"))
                .collect();
            if !order.is_empty() {
                out.write("job_order.txt", order.as_bytes())?;
            }
            out.json(
                "ingest_report.json",
                &serde_json::json!({
                    "accepted": loaded.accepted,
                    "repaired": loaded.repaired,
                    "rejected": loaded.rejected,
                    "samples": loaded.dataset.n_samples(),
                    "responses": loaded.dataset.n_responses(),
                    "inputs": loaded.inputs,
                }),
            )
        }
        Command::Metrics { io } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.metrics_section(&mut out)?;
            provenance(
                &mut out,
                "metrics",
                &loaded.inputs,
                serde_json::json!({ "min_fraction": io.min_fraction }),
            )
        }
        Command::Overlap { io } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.overlap_section(&mut out)?;
            provenance(&mut out, "overlap", &loaded.inputs, serde_json::json!({}))
        }
        Command::Ci { io, boot, metric } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.ci_section(&mut out, boot.into(), &metrics_or_both(metric))?;
            provenance(&mut out, "ci", &loaded.inputs, boot)
        }
        Command::Converge {
            io,
            boot,
            widths,
            metric,
        } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.convergence_section(
                &mut out,
                boot.into(),
                widths.into(),
                &metrics_or_both(metric),
            )?;
            provenance(&mut out, "converge", &loaded.inputs, (boot, widths))
        }
        Command::Dispersion { io } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.dispersion_section(&mut out)?;
            provenance(
                &mut out,
                "dispersion",
                &loaded.inputs,
                serde_json::json!({ "min_fraction": io.min_fraction }),
            )
        }
        Command::Stability {
            io,
            boot,
            thresholds,
            drift,
        } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.stability_section(&mut out, boot.into(), thresholds.into(), drift.into())?;
            provenance(
                &mut out,
                "stability",
                &loaded.inputs,
                (boot, thresholds, drift),
            )
        }
        Command::Drift { io, drift } => {
            let (loaded, mut out) = open(&io, &[])?;
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.drift_section(&mut out, drift.into())?;
            provenance(&mut out, "drift", &loaded.inputs, drift)
        }
        Command::ContentStatus { io, content } => {
            let extra: Vec<&Path> = content.checksums.iter().map(PathBuf::as_path).collect();
            let (mut loaded, mut out) = open(&io, &extra)?;
            let (ledger, digest) =
                load_checksums(content.checksums.as_deref(), loaded.dir.as_deref())?.ok_or_else(
                    || Error::InvalidParameter {
                        name: "checksums",
                        reason: "no checksum file given and none found next to the dataset".into(),
                    },
                )?;
            loaded.inputs.push(digest);
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, true)?;
            ctx.content_section(&mut out, &ledger, &content.domains, content.top)?;
            provenance(
                &mut out,
                "content-status",
                &loaded.inputs,
                serde_json::json!({ "top": content.top }),
            )
        }
        Command::Simulate(args) => simulate(args),
        Command::Report {
            io,
            boot,
            widths,
            thresholds,
            drift,
            content,
        } => {
            let extra: Vec<&Path> = content.checksums.iter().map(PathBuf::as_path).collect();
            let (mut loaded, mut out) = open(&io, &extra)?;
            let checksums = load_checksums(content.checksums.as_deref(), loaded.dir.as_deref())?;
            let ledger = match checksums {
                Some((ledger, digest)) => {
                    loaded.inputs.push(digest);
                    Some(ledger)
                }
                None => None,
            };
            let ctx = Ctx::new(&loaded.dataset, io.min_fraction, false)?;
            let params = pipeline::ReportParams {
                boot: boot.into(),
                widths: widths.into(),
                thresholds: thresholds.into(),
                drift: drift.into(),
                min_fraction: io.min_fraction,
                content_domains: content.domains,
                content_top: content.top,
            };
            ctx.report(&mut out, &params, ledger.as_ref(), &loaded.inputs)
        }
    }
}

fn metrics_or_both(metric: Option<Metric>) -> Vec<Metric> {
    metric.map_or_else(|| vec![Metric::Share, Metric::Prevalence], |m| vec![m])
}

impl From<BootArgs> for crate::resample::BootstrapConfig {
    fn from(b: BootArgs) -> Self {
        Self::new(b.replicates, b.alpha, b.seed)
    }
}

impl From<WidthArgs> for pipeline::Widths {
    fn from(w: WidthArgs) -> Self {
        Self {
            share: w.target_width_share,
            prevalence: w.target_width_prevalence,
        }
    }
}

impl From<StabilityArgs> for crate::stability::StabilityThresholds {
    fn from(s: StabilityArgs) -> Self {
        Self {
            sufficiency: s.sufficiency,
            stability: s.stability,
        }
    }
}

impl From<DriftArgs> for pipeline::DriftParams {
    fn from(d: DriftArgs) -> Self {
        Self {
            alpha: d.drift_alpha,
            practical_delta: d.practical_delta,
        }
    }
}

/// Checksum plan for simulated datasets: rank 2 changes halfway through the
/// jobs, rank 5 changes every job.
fn default_checksum_plan(n_samples: usize) -> ChecksumPlan {
    ChecksumPlan {
        changes: vec![(2, n_samples / 2)],
        volatile_ranks: vec![5],
    }
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    config: &'a SynthConfig,
    regimes: &'a [synth::Regime],
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), _) => synth::preset(name)?,
        (None, Some(path)) => {
            let bytes = fs::read(path)?;
            serde_json::from_slice(&bytes)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n_queries {
        config.n_queries = n;
    }
    if let Some(n) = args.n_samples {
        config.n_samples = n;
    }
    let (dataset, truth) = synth::generate(&config)?;
    let inputs: Vec<&Path> = args.config.iter().map(PathBuf::as_path).collect();
    let mut out = OutDir::create(&args.out, &inputs)?;
    out.with("dataset.jsonl", |w| write_jsonl(&dataset, w))?;
    let order: String = dataset
        .job_order()
        .iter()
        .map(|j| format!("{j}\n"))
        .collect();
    out.write("job_order.txt", order.as_bytes())?;
    out.json("ground_truth.json", &truth.true_share)?;
    out.json(
        "config.json",
        &ConfigEcho {
            config: &truth.config,
            regimes: &truth.regimes,
        },
    )?;
    let ledger = synth::synth_checksums(&dataset, &default_checksum_plan(config.n_samples))?;
    out.with("checksums.jsonl", |w| write_checksums(&ledger, w))
}

//! `coincount`: coincidence-count Z-scores from the command line.
//!
//! Output tables (all CSV with a header row; `#` lines before the header
//! carry the tool version and run parameters):
//!
//! * `analyze`: `lag,observed,expected,sigma_sqrtT,z,dz`. `dz` on row `k` is
//!   `z[k+1] - z[k]`; the last row has `null`.
//! * `screen`: `label_a,label_b,lag,z,observed,expected`, sorted by labels
//!   then lag, plus an optional `label_a,label_b` table of pairs whose Z is
//!   undefined.
//! * `simulate`: event data in the timestamps (or dense) format and a JSON
//!   metadata record.
//! * `validate`: one CSV per suite table and `summary.json`.
//!
//! Undefined values are written as `null`. Exit status: 0 success, 2 usage
//! error, 3 data error, 4 validation failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod lags;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coincount::generators::{GeneratorSpec, SampleMetadata};
use coincount::io::{self, Format, Ingested};
use coincount::montecarlo::z_profile;
use coincount::screening::{screen, Recording, ScreenConfig};
use coincount::validation::{self, Outcome, SuiteOptions, CRITERIA};
use coincount::{Error, EventSequence, VERSION};
use serde::Serialize;

use output::Staged;

#[derive(Parser)]
#[command(name = "coincount", version, about = "Coincidence-count statistics for binary event sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputOpts {
    /// Input format.
    #[arg(long, value_enum, default_value = "timestamps")]
    format: FormatArg,
    /// Treat timestamps as real times and bin them with this width.
    #[arg(long)]
    bin_size: Option<f64>,
}

#[derive(Args)]
struct LagOpts {
    /// Lags as a list with inclusive ranges, e.g. `0,5,10..20`.
    #[arg(long)]
    lags: Option<String>,
    /// Shorthand for `--lags 0..N`.
    #[arg(long)]
    max_lag: Option<u64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Timestamps,
    Dense,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Timestamps => Format::Timestamps,
            FormatArg::Dense => Format::Dense,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Per-lag Z profile of one pair of channels.
    Analyze {
        /// One file holding both channels, or two single-channel files.
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
        /// Labels of the two channels to compare when one file holds several.
        #[arg(long, value_delimiter = ',')]
        pair: Option<Vec<String>>,
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        lags: LagOpts,
        /// Output CSV; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Z-score screening of every channel pair of a recording.
    Screen {
        input: PathBuf,
        #[command(flatten)]
        input_opts: InputOpts,
        #[command(flatten)]
        lags: LagOpts,
        #[arg(long, default_value_t = 1.96)]
        threshold: f64,
        /// Also report z <= -threshold.
        #[arg(long)]
        two_sided: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Edge CSV; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the pairs whose Z is undefined.
        #[arg(long)]
        undefined_output: Option<PathBuf>,
    },
    /// Generate event data from a TOML model description.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Metadata JSON path; defaults to `<output>.meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "timestamps")]
        format: FormatArg,
    },
    /// Run the acceptance suites.
    Validate {
        /// Directory for report tables.
        #[arg(short, long)]
        output: PathBuf,
        /// Criteria to run, e.g. `2,3`; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Also rerun the selected criteria on 1 and 8 workers and compare digests.
        #[arg(long)]
        reproducibility: bool,
    },
}

/// Terminal failure with its exit status.
enum Failure {
    Error(Error),
    SuiteFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::SuiteFailed(n)) => {
            let record = ErrorRecord { error: "validation", message: format!("{n} criteria failed"), line: None };
            eprintln!("{}", serde_json::to_string(&record).unwrap());
            ExitCode::from(4)
        }
        Err(Failure::Error(e)) => {
            let (kind, code, line) = match &e {
                Error::Config(_) => ("usage", 2, None),
                Error::Parse { line, .. } => ("parse", 3, Some(*line)),
                Error::Domain(_) => ("domain", 3, None),
                Error::Io(_) => ("io", 3, None),
                Error::Json(_) => ("json", 3, None),
            };
            let record = ErrorRecord { error: kind, message: e.to_string(), line };
            eprintln!("{}", serde_json::to_string(&record).unwrap());
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze { inputs, pair, input, lags, output } => {
            let lags = lags::resolve(lags.lags.as_deref(), lags.max_lag)?;
            let (x, y) = load_pair(&inputs, pair.as_deref(), &input)?;
            let profile = z_profile(&x, &y, &lags)?;
            let mut csv =
                format!("# coincount {VERSION} horizon={} n_x={} n_y={}\n", profile.horizon, profile.n_x, profile.n_y);
            csv.push_str(&io::profile_csv(&profile));
            emit(output.as_deref(), csv, Staged::default())
        }
        Command::Screen { input, input_opts, lags, threshold, two_sided, workers, output, undefined_output } => {
            let lags = lags::resolve(lags.lags.as_deref(), lags.max_lag)?;
            if !(threshold > 0.0) {
                return Err(Error::Config(format!("--threshold must be positive, got {threshold}")).into());
            }
            let recording = ingest(&input, &input_opts)?.recording;
            let edges = screen(&recording, &ScreenConfig { lags, threshold, two_sided, workers })?;
            let mut csv = format!(
                "# coincount {VERSION} pairs={} tests_per_pair={} tests={} threshold={} two_sided={} undefined_pairs={}\n",
                edges.pair_count,
                edges.lags.len(),
                edges.test_count,
                edges.threshold,
                edges.two_sided,
                edges.undefined.len()
            );
            csv.push_str(&io::edges_csv(&edges));
            let mut staged = Staged::default();
            if let Some(path) = &undefined_output {
                staged.add(path, io::undefined_pairs_csv(&edges).as_bytes())?;
            }
            emit(output.as_deref(), csv, staged)
        }
        Command::Simulate { config, output, meta, seed, format } => {
            let text = fs::read_to_string(&config).map_err(Error::Io)?;
            let mut spec: GeneratorSpec =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", config.display(), e.message())))?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (channels, metadata) = spec.generate()?;
            let data = render(channels.clone(), Format::from(format))?;
            let meta_path = meta.unwrap_or_else(|| {
                let mut p = output.clone().into_os_string();
                p.push(".meta.json");
                PathBuf::from(p)
            });
            let record = SimulationRecord {
                version: VERSION,
                spec,
                bins: spec.model.horizon(),
                labels: labels(channels.len()),
                events: channels.iter().map(|c| c.len()).collect(),
                metadata,
            };
            let mut json = serde_json::to_string_pretty(&record).map_err(Error::Json)?;
            json.push('\n');
            let mut staged = Staged::default();
            staged.add(&output, data.as_bytes())?;
            staged.add(&meta_path, json.as_bytes())?;
            staged.commit()?;
            Ok(())
        }
        Command::Validate { output, criteria, seed, workers, reproducibility } => {
            let ids: Vec<u8> = criteria.unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
            if let Some(bad) = ids.iter().find(|&&c| !CRITERIA.iter().any(|k| k.0 == c)) {
                return Err(Error::Config(format!("no criterion {bad}; expected 1 to 10")).into());
            }
            fs::create_dir_all(&output).map_err(Error::Io)?;
            let opts = SuiteOptions { seed, workers };
            let mut outcomes: Vec<Outcome> = Vec::new();
            let mut staged = Staged::default();
            for &id in &ids {
                let outcome = validation::run_criterion(id, &opts)?;
                println!("{}", outcome.summary());
                for c in &outcome.checks {
                    println!("    {c}");
                }
                for a in &outcome.artifacts {
                    staged.add(&output.join(format!("c{id:02}_{}", a.name)), a.csv.as_bytes())?;
                }
                outcomes.push(outcome);
            }
            if reproducibility {
                let outcome = validation::reproducibility(&ids, seed, (1, 8))?;
                println!("{}", outcome.summary());
                outcomes.push(outcome);
            }
            let summary = ValidationSummary {
                version: VERSION,
                seed,
                outcomes: outcomes.iter().map(OutcomeSummary::from).collect(),
            };
            let mut json = serde_json::to_string_pretty(&summary).map_err(Error::Json)?;
            json.push('\n');
            staged.add(&output.join("summary.json"), json.as_bytes())?;
            staged.commit()?;
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            if failed > 0 {
                return Err(Failure::SuiteFailed(failed));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SimulationRecord {
    version: &'static str,
    #[serde(flatten)]
    spec: GeneratorSpec,
    bins: u64,
    labels: Vec<String>,
    events: Vec<usize>,
    metadata: SampleMetadata,
}

#[derive(Serialize)]
struct ValidationSummary<'a> {
    version: &'static str,
    seed: u64,
    outcomes: Vec<OutcomeSummary<'a>>,
}

#[derive(Serialize)]
struct OutcomeSummary<'a> {
    criterion: u8,
    name: &'a str,
    passed: bool,
    digest: &'a str,
    checks: &'a [validation::Check],
    notes: &'a [String],
}

impl<'a> From<&'a Outcome> for OutcomeSummary<'a> {
    fn from(o: &'a Outcome) -> Self {
        OutcomeSummary {
            criterion: o.criterion,
            name: &o.name,
            passed: o.passed(),
            digest: &o.digest,
            checks: &o.checks,
            notes: &o.notes,
        }
    }
}

fn labels(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["x".into()]
    } else {
        (1..=n).map(|k| format!("x{k}")).collect()
    }
}

fn render(channels: Vec<EventSequence>, format: Format) -> Result<String, Error> {
    if channels.len() == 1 {
        return Ok(match format {
            Format::Timestamps => io::format_timestamps(&channels[0]),
            Format::Dense => io::format_dense(&channels[0]),
        });
    }
    let n = channels.len();
    let recording = Recording::new(channels, labels(n))?;
    Ok(match format {
        Format::Timestamps => io::format_timestamps_recording(&recording),
        Format::Dense => io::format_dense_recording(&recording),
    })
}

fn ingest(path: &Path, opts: &InputOpts) -> Result<Ingested, Error> {
    let ingested = io::read_events(path, opts.format.into(), opts.bin_size)?;
    if ingested.duplicates > 0 {
        eprintln!("warning: {}: {} duplicate events collapsed", path.display(), ingested.duplicates);
    }
    if ingested.truncated > 0 {
        eprintln!("warning: {}: {} events in the trailing partial bin dropped", path.display(), ingested.truncated);
    }
    Ok(ingested)
}

fn load_pair(
    inputs: &[PathBuf],
    pair: Option<&[String]>,
    opts: &InputOpts,
) -> Result<(EventSequence, EventSequence), Error> {
    if let [a, b] = inputs {
        if pair.is_some() {
            return Err(Error::Config("--pair applies to a single multi-channel input".into()));
        }
        let x = ingest(a, opts)?.into_single()?;
        let y = ingest(b, opts)?.into_single()?;
        return Ok((x, y));
    }
    let recording = ingest(&inputs[0], opts)?.recording;
    match pair {
        Some([a, b]) => {
            let get = |l: &str| {
                recording.channel(l).cloned().ok_or_else(|| Error::Config(format!("no channel labelled {l:?}")))
            };
            Ok((get(a)?, get(b)?))
        }
        Some(_) => Err(Error::Config("--pair takes two labels".into())),
        None => {
            let (mut channels, _) = recording.into_parts();
            if channels.len() != 2 {
                return Err(Error::Config(format!("input has {} channels; pick two with --pair", channels.len())));
            }
            let y = channels.pop().unwrap();
            Ok((channels.pop().unwrap(), y))
        }
    }
}

fn emit(path: Option<&Path>, content: String, mut staged: Staged) -> Result<(), Failure> {
    match path {
        Some(p) => {
            staged.add(p, content.as_bytes())?;
            staged.commit()?;
        }
        None => {
            staged.commit()?;
            print!("{content}");
        }
    }
    Ok(())
}

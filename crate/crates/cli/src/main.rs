//! `nicer`: command-line front end for the fatigue engine.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on malformed input or
//! configuration, 3 when the input violates a model invariant.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nicer_core::analysis::{
    borg_slope, emg_fatigue_index, pearson_correlation, BandpassConfig, EmgTrace, EnvelopeConfig,
};
use nicer_core::session::config::{InputFormat, PhaseSource, ReportFormat};
use nicer_core::session::ingest::{read_frames, write_frames_csv, write_frames_jsonl};
use nicer_core::session::synth::{reach_sequence, static_hold, ReachSequenceParams, StaticHoldParams};
use nicer_core::session::{emit_report, run_session, SessionError};
use nicer_core::{SessionConfig, Sex};

#[derive(Parser)]
#[command(name = "nicer", version, about = "Shoulder fatigue estimation for mid-air interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tracked-arm recording through the fatigue models.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic arm trajectory.
    Synth(SynthArgs),
    /// EMG fatigue index (slope of the RMS envelope) of a raw EMG column.
    Emg(EmgArgs),
    /// Pearson correlation of two numeric columns.
    Correlate(ColumnArgs),
    /// Least-squares slope of `time,rating` rows.
    Borg(ColumnArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SexArg {
    Female,
    Male,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Flag,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Json,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frame file; `-` or omitted reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    input_format: Option<FrameFormat>,
    /// Report encoding.
    #[arg(long, value_enum)]
    format: Option<ReportArg>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include the per-frame table.
    #[arg(long, conflicts_with = "summary_only")]
    per_frame: bool,
    /// Omit the per-frame table.
    #[arg(long)]
    summary_only: bool,
    #[arg(long, value_enum)]
    sex: Option<SexArg>,
    #[arg(long)]
    mass_kg: Option<f64>,
    #[arg(long, value_enum)]
    phase_source: Option<PhaseArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Trajectory {
    Static,
    Reach,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: Trajectory,
    /// Shoulder abduction of a static hold, degrees.
    #[arg(long, default_value_t = 90.0)]
    abduction: f64,
    /// Elbow flexion of a static hold, degrees.
    #[arg(long, default_value_t = 0.0)]
    elbow_flexion: f64,
    /// Static hold duration, seconds.
    #[arg(long, default_value_t = 600.0)]
    duration: f64,
    /// Number of reach targets.
    #[arg(long, default_value_t = 30)]
    targets: usize,
    #[arg(long, default_value_t = 50.0)]
    rate: f64,
    /// Positional jitter amplitude, metres.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FrameFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmgArgs {
    /// One raw sample per row (first column); `-` or omitted reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Sampling rate, Hz.
    #[arg(long)]
    rate: f64,
    /// Raw amplitude equal to 100 %MVC.
    #[arg(long, default_value_t = 1.0)]
    mvc: f64,
    #[arg(long, default_value_t = 50.0)]
    low: f64,
    #[arg(long, default_value_t = 250.0)]
    high: f64,
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// RMS window, seconds.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    /// Envelope sampling rate, Hz.
    #[arg(long, default_value_t = 50.0)]
    envelope_rate: f64,
    #[arg(long, default_value = "")]
    label: String,
}

#[derive(Args)]
struct ColumnArgs {
    /// Two-column numeric CSV; `-` or omitted reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        Self { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

fn invalid(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>, Failure> {
    match path {
        None => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => Ok(Box::new(BufReader::new(File::open(p).map_err(|e| io_failure(p, e))?))),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?))),
    }
}

/// Numeric rows of a CSV stream. A non-numeric first row is taken as a
/// header and skipped.
fn read_columns(input: Box<dyn BufRead>, width: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(e.to_string()))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().take(width).map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == width && v.iter().all(|x| x.is_finite()) => rows.push(v),
            Err(_) if rows.is_empty() && i == 0 => continue,
            _ => return Err(invalid(format!("line {line}: expected {width} numeric column(s)"))),
        }
    }
    Ok(rows)
}

fn print_json(value: serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json value serializes"))
        .map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(p) => SessionConfig::parse(&std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?)?,
        None => SessionConfig::default(),
    };
    match args.sex {
        Some(SexArg::Female) => config.subject.sex = Sex::Female,
        Some(SexArg::Male) => config.subject.sex = Sex::Male,
        None => {}
    }
    if let Some(m) = args.mass_kg {
        config.subject.body_mass_kg = m;
    }
    if let Some(p) = args.phase_source {
        config.phase_source = match p {
            PhaseArg::Flag => PhaseSource::Flag,
            PhaseArg::Heuristic => PhaseSource::Heuristic,
        };
    }
    if let Some(f) = args.input_format {
        config.input_format = match f {
            FrameFormat::Csv => InputFormat::Csv,
            FrameFormat::Jsonl => InputFormat::Jsonl,
        };
    }
    if let Some(f) = args.format {
        config.report_format = match f {
            ReportArg::Json => ReportFormat::Json,
            ReportArg::Csv => ReportFormat::Csv,
        };
    }
    if args.per_frame {
        config.emit_per_frame = true;
    }
    if args.summary_only {
        config.emit_per_frame = false;
    }
    if let Some(p) = args.output {
        config.output_path = Some(p);
    }
    config.validate()?;

    let input = open_input(args.input.as_deref())?;
    let format = config.report_format;
    let input_format = config.input_format;
    let output_path = config.output_path.clone();
    let report = run_session(config, read_frames(input, input_format))?;
    let out = open_output(output_path.as_deref())?;
    emit_report(&report, format, out)?;
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let frames = match args.kind {
        Trajectory::Static => static_hold(&StaticHoldParams {
            abduction_deg: args.abduction,
            elbow_flexion_deg: args.elbow_flexion,
            duration_s: args.duration,
            rate_hz: args.rate,
            jitter_m: args.jitter,
            seed: args.seed,
            ..Default::default()
        }),
        Trajectory::Reach => reach_sequence(&ReachSequenceParams {
            targets: args.targets,
            rate_hz: args.rate,
            jitter_m: args.jitter,
            seed: args.seed,
            ..Default::default()
        }),
    }
    .map_err(SessionError::from)?;
    let out = open_output(args.output.as_deref())?;
    match args.format {
        FrameFormat::Csv => write_frames_csv(out, &frames)?,
        FrameFormat::Jsonl => {
            let mut out = out;
            write_frames_jsonl(&mut out, &frames)?;
            out.flush().map_err(|e| Failure { code: 1, message: e.to_string() })?;
        }
    }
    Ok(())
}

fn emg(args: EmgArgs) -> Result<(), Failure> {
    let rows = read_columns(open_input(args.input.as_deref())?, 1)?;
    let samples = rows.into_iter().map(|r| r[0]).collect();
    let trace = EmgTrace::new(args.rate, samples, args.mvc, args.label).map_err(invalid)?;
    let bandpass = BandpassConfig { low: args.low, high: args.high, order: args.order };
    let envelope = EnvelopeConfig { window: args.window, output_rate: args.envelope_rate };
    let r = emg_fatigue_index(&trace, &bandpass, &envelope).map_err(invalid)?;
    print_json(json!({
        "slope_pct_per_s": r.slope,
        "intercept_pct": r.intercept,
        "r_squared": r.r_squared,
        "window_s": r.window_seconds,
    }))
}

fn correlate(args: ColumnArgs) -> Result<(), Failure> {
    let rows = read_columns(open_input(args.input.as_deref())?, 2)?;
    let (a, b): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
    let c = pearson_correlation(&a, &b).map_err(invalid)?;
    print_json(json!({
        "rho": c.rho,
        "n": c.n,
        "ci95": c.ci95.map(|(lo, hi)| vec![lo, hi]),
    }))
}

fn borg(args: ColumnArgs) -> Result<(), Failure> {
    let rows = read_columns(open_input(args.input.as_deref())?, 2)?;
    let ratings: Vec<(f64, f64)> = rows.into_iter().map(|r| (r[0], r[1])).collect();
    let slope = borg_slope(&ratings).map_err(invalid)?;
    print_json(json!({ "slope_per_s": slope, "n": ratings.len() }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Emg(a) => emg(a),
        Command::Correlate(a) => correlate(a),
        Command::Borg(a) => borg(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nicer: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

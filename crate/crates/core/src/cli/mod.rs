//! Command-line front end. Every subcommand is a pure function of its inputs and its
//! [`RunConfig`]; outputs are written atomically and carry the config hash.

mod bench;
mod synth;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{
    estimate_closed_index, load_manifest, polish_clip, read_clip_dir, synth_stream, write_clip_dir, write_manifest,
    Eye, Label, Split, DEFAULT_POLISH_LEN,
};
use crate::eval::{
    average_precision_grouped, emit_report, pr_curve, write_pr_curve, ApResult, EvalReport, RunMeta, ScoredInterval,
};
use crate::features::STEP_DIM;
use crate::mslstm::{load_model, save_model, train, Hyper, LossKind, MsLstmModel, TrainConfig};
use crate::pipeline::{
    annotation_locator, detect_stream, metrics_by_eye, split_sequences, verify_split, BlinkEvent, DetectParams,
    PredictionRow, TrackParams, DEFAULT_TRACK_THRESH, PREDICTION_HEADER,
};
use crate::{Error, Result};

pub use bench::{bench_stream, BenchReport, StageStats};
pub use synth::{synth_dataset, SynthCounts};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "BLINKWILD_THREADS";
pub const EVENTS_HEADER: &str = "eye,start,end,confidence";
pub const GT_HEADER: &str = "eye,start,end";
pub const LOSS_HEADER: &str = "step,loss";

#[derive(Debug, Parser)]
#[command(name = "blinkwild", version, about = "Eyeblink detection in unconstrained video")]
#[command(after_help = "Set BLINKWILD_THREADS to cap the number of worker threads.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resample every clip of a manifest to a fixed length
    Polish(PolishArgs),
    /// Render a synthetic blink/non-blink dataset
    Synth(SynthArgs),
    /// Train a verification model on the train split
    Train(TrainArgs),
    /// Verify every clip of a split and score the predictions
    Verify(VerifyArgs),
    /// Detect blinks in an untrimmed frame sequence
    Detect(DetectArgs),
    /// Score saved predictions or detected events
    Eval(EvalArgs),
    /// Time tracking, feature extraction and inference per frame
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Stacked LSTM layers
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Last top-layer outputs fed to the classifier
    #[arg(long, default_value_t = 2)]
    pub scales: usize,
    /// Angular margin of the A-softmax loss
    #[arg(long, default_value_t = 4)]
    pub margin: u32,
    /// Hidden units per layer
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
}

impl ModelArgs {
    pub fn hyper(&self) -> Hyper {
        Hyper {
            layers: self.layers,
            scales: self.scales,
            hidden: self.hidden,
            margin: self.margin,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrackArgs {
    /// Tracker score below which the eye locator is consulted again
    #[arg(long, default_value_t = DEFAULT_TRACK_THRESH)]
    pub track_thresh: f64,
}

impl TrackArgs {
    pub fn params(&self) -> Result<TrackParams> {
        if !self.track_thresh.is_finite() {
            return Err(Error::invalid("track threshold must be finite"));
        }
        Ok(TrackParams {
            track_thresh: self.track_thresh,
            ..TrackParams::default()
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindowArgs {
    /// Sliding window length in frames
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Frames between window starts
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Minimum blink confidence of a proposal
    #[arg(long, default_value_t = 0.5)]
    pub conf_thresh: f64,
    /// Temporal IoU above which a weaker proposal is suppressed
    #[arg(long, default_value_t = 0.33)]
    pub iou_thresh: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PolishArgs {
    /// Input manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the polished clips and manifest
    #[arg(long)]
    pub out: PathBuf,
    /// Frames per polished clip
    #[arg(long, default_value_t = DEFAULT_POLISH_LEN)]
    pub target_len: usize,
    /// Recorded in the run config; polishing draws no random numbers
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Master seed; every clip seed is derived from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives clips/ and manifest.tsv
    #[arg(long)]
    pub out: PathBuf,
    /// Blink clips in the train split
    #[arg(long, default_value_t = 100)]
    pub train_blink: usize,
    /// Non-blink clips in the train split
    #[arg(long, default_value_t = 100)]
    pub train_nonblink: usize,
    /// Blink clips in the test split
    #[arg(long, default_value_t = 40)]
    pub test_blink: usize,
    /// Non-blink clips in the test split
    #[arg(long, default_value_t = 40)]
    pub test_nonblink: usize,
    /// Frames per clip
    #[arg(long, default_value_t = 10)]
    pub length: usize,
}

impl SynthArgs {
    pub fn counts(&self) -> SynthCounts {
        SynthCounts {
            train_blink: self.train_blink,
            train_nonblink: self.train_nonblink,
            test_blink: self.test_blink,
            test_nonblink: self.test_nonblink,
            length: self.length,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset manifest; the train split is used
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for model.msl, loss.csv and config.json
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for initialization and batch order
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Training loss: softmax or asoftmax
    #[arg(long, default_value = "asoftmax")]
    pub loss: LossKind,
    /// Optimizer steps
    #[arg(long, default_value_t = 50_000)]
    pub max_steps: u64,
    /// Samples per step
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[command(flatten)]
    pub track: TrackArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Dataset manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory for predictions.csv, report.json, report.csv and pr_curve.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Split to verify: train or test
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Recorded in the run config; verification draws no random numbers
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub track: TrackArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    /// Clip directory with numbered frames and annotations.csv
    #[arg(long)]
    pub frames: PathBuf,
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Events CSV to write
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the run config; detection draws no random numbers
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub track: TrackArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Predictions CSV written by verify
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Events CSV written by detect
    #[arg(long, requires = "gt")]
    pub events: Option<PathBuf>,
    /// Ground-truth blink intervals (eye,start,end) for the events
    #[arg(long, requires = "events")]
    pub gt: Option<PathBuf>,
    /// Minimum temporal IoU of a correct detection
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    /// Output directory for report.json, report.csv and pr_curve.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the run config; evaluation draws no random numbers
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Clip directory to time; a synthetic stream is rendered when absent
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Trained model file; an untrained model of the given shape is used when absent
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Report JSON to write in addition to the table on stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the synthetic stream and the untrained model
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length of the synthetic stream
    #[arg(long, default_value_t = 550)]
    pub length: usize,
    /// Leading frames processed but not timed
    #[arg(long, default_value_t = 50)]
    pub warmup: usize,
    /// Classification window in frames
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[command(flatten)]
    pub model_shape: ModelArgs,
    #[command(flatten)]
    pub track: TrackArgs,
}

/// Full description of one invocation, serialized next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub args: serde_json::Value,
}

impl RunConfig {
    pub fn new<A: Serialize>(command: &str, seed: u64, args: &A) -> Self {
        Self {
            command: command.to_string(),
            seed,
            args: serde_json::to_value(args).expect("arguments serialize"),
        }
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            #[serde(flatten)]
            config: &'a RunConfig,
            config_hash: String,
        }
        let mut s = serde_json::to_string_pretty(&Hashed {
            config: self,
            config_hash: self.hash(),
        })
        .expect("config serializes");
        s.push('\n');
        s
    }

    fn meta(&self, started: Instant) -> RunMeta {
        RunMeta {
            command: self.command.clone(),
            seed: self.seed,
            config_hash: self.hash(),
            elapsed_ms: Some(started.elapsed().as_secs_f64() * 1e3),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Sidecar config path of a single-file output: `events.csv` gets `events.config.json`.
fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("config.json")
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    let mut out = String::from(PREDICTION_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    write_text(path, &out)
}

fn csv_body<'a>(path: &Path, text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: format!("expected header `{header}`"),
            })
        }
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect())))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad {name} `{v}`"),
    })
}

fn read_csv(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn expect_fields(path: &Path, line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("expected {n} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>> {
    let text = read_csv(path)?;
    let parsed = csv_body(path, &text, PREDICTION_HEADER)?
        .map(|(line, f)| {
            expect_fields(path, line, &f, 8)?;
            let label = |v: &str| -> Result<Label> { parse_field(path, line, "label", v) };
            Ok(PredictionRow {
                clip: f[0].to_string(),
                source_id: f[1].to_string(),
                truth: label(f[2])?,
                eye: parse_field(path, line, "eye", f[3])?,
                predicted: label(f[4])?,
                confidence: parse_field(path, line, "confidence", f[5])?,
                lost: parse_field(path, line, "lost flag", f[6])?,
                localized: parse_field(path, line, "localized flag", f[7])?,
            })
        })
        .collect();
    parsed
}

pub fn write_events(path: &Path, events: &[BlinkEvent]) -> Result<()> {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.eye.as_str(), e.start, e.end, e.confidence);
    }
    write_text(path, &out)
}

pub fn read_events(path: &Path) -> Result<Vec<BlinkEvent>> {
    let text = read_csv(path)?;
    let parsed = csv_body(path, &text, EVENTS_HEADER)?
        .map(|(line, f)| {
            expect_fields(path, line, &f, 4)?;
            Ok(BlinkEvent {
                eye: parse_field(path, line, "eye", f[0])?,
                start: parse_field(path, line, "start", f[1])?,
                end: parse_field(path, line, "end", f[2])?,
                confidence: parse_field(path, line, "confidence", f[3])?,
            })
        })
        .collect();
    parsed
}

/// Ground-truth blink intervals per eye.
pub fn read_gt_intervals(path: &Path) -> Result<Vec<(Eye, usize, usize)>> {
    let text = read_csv(path)?;
    let parsed = csv_body(path, &text, GT_HEADER)?
        .map(|(line, f)| {
            expect_fields(path, line, &f, 3)?;
            Ok((
                parse_field(path, line, "eye", f[0])?,
                parse_field(path, line, "start", f[1])?,
                parse_field(path, line, "end", f[2])?,
            ))
        })
        .collect();
    parsed
}

/// AP of one video's events pooled over both eyes; each eye matches only its own intervals.
pub fn events_ap(events: &[BlinkEvent], gt: &[(Eye, usize, usize)], overlap: f64) -> Result<ApResult> {
    let groups: Vec<_> = Eye::BOTH
        .into_iter()
        .map(|eye| {
            let ev = events
                .iter()
                .filter(|e| e.eye == eye)
                .map(|e| ScoredInterval {
                    start: e.start,
                    end: e.end,
                    confidence: e.confidence,
                })
                .collect();
            let g = gt.iter().filter(|g| g.0 == eye).map(|g| (g.1, g.2)).collect();
            (ev, g)
        })
        .collect();
    average_precision_grouped(&groups, overlap)
}

fn cmd_polish(a: &PolishArgs) -> Result<()> {
    let cfg = RunConfig::new("polish", a.seed, a);
    let manifest = load_manifest(&a.manifest)?;
    create_dir(&a.out)?;
    manifest.entries.par_iter().try_for_each(|e| {
        let context = |err: Error| Error::InvalidDataset(format!("clip {}: {err}", e.clip_dir.display()));
        let clip = manifest.load_clip(e).map_err(context)?;
        let polished = polish_clip(&clip, a.target_len, estimate_closed_index(&clip)).map_err(context)?;
        write_clip_dir(&a.out.join(&e.clip_dir), &polished).map_err(context)
    })?;
    write_manifest(&a.out.join("manifest.tsv"), &manifest.entries)?;
    cfg.write(&a.out.join("config.json"))?;
    println!("polished {} clips to {} frames", manifest.entries.len(), a.target_len);
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let cfg = RunConfig::new("synth", a.seed, a);
    create_dir(&a.out)?;
    let path = synth_dataset(a.seed, &a.counts(), &a.out)?;
    cfg.write(&a.out.join("config.json"))?;
    println!("wrote {} clips, manifest {}", a.counts().total(), path.display());
    Ok(())
}

/// Model and per-step loss of the `train` subcommand, without touching the file system.
pub fn train_from_manifest(a: &TrainArgs) -> Result<(MsLstmModel, Vec<f64>)> {
    let manifest = load_manifest(&a.manifest)?;
    let set = split_sequences(&manifest, Split::Train, &a.track.params()?)?;
    let model = MsLstmModel::new(a.model.hyper(), STEP_DIM, a.seed)?;
    let config = TrainConfig {
        max_steps: a.max_steps,
        batch_size: a.batch_size,
        seed: a.seed,
        loss: a.loss,
        ..TrainConfig::default()
    };
    let (model, report) = train(model, &set, &config)?;
    Ok((model, report.loss_history))
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = RunConfig::new("train", a.seed, a);
    let (model, history) = train_from_manifest(a)?;
    create_dir(&a.out)?;
    save_model(&model, &a.out.join("model.msl"))?;
    let mut csv = String::from(LOSS_HEADER);
    csv.push('\n');
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(csv, "{},{l}", i + 1);
    }
    write_text(&a.out.join("loss.csv"), &csv)?;
    cfg.write(&a.out.join("config.json"))?;
    println!(
        "trained {} steps, final loss {}",
        history.len(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::new("verify", a.seed, a);
    let split: Split = a.split.parse()?;
    let manifest = load_manifest(&a.manifest)?;
    let model = load_model(&a.model)?;
    let rows = verify_split(&manifest, split, &model, &a.track.params()?)?;
    create_dir(&a.out)?;
    write_predictions(&a.out.join("predictions.csv"), &rows)?;
    let scores: Vec<(f64, bool)> = rows.iter().map(|r| (r.confidence, r.truth == Label::Blink)).collect();
    write_pr_curve(&a.out.join("pr_curve.csv"), &pr_curve(&scores))?;
    let report = EvalReport::new(metrics_by_eye(&rows)?, None, cfg.meta(started));
    emit_report(&report, &a.out.join("report"))?;
    cfg.write(&a.out.join("config.json"))?;
    print!("{}", report.to_csv());
    Ok(())
}

fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let cfg = RunConfig::new("detect", a.seed, a);
    let clip = read_clip_dir(&a.frames, Label::NonBlink, "stream")?;
    let model = load_model(&a.model)?;
    let params = DetectParams {
        window: a.window.window,
        stride: a.window.stride,
        conf_thresh: a.window.conf_thresh,
        iou_thresh: a.window.iou_thresh,
        track: a.track.params()?,
    };
    let det = detect_stream(clip.frames(), &annotation_locator(&clip), &model, &params)?;
    write_events(&a.out, &det.events)?;
    cfg.write(&sidecar(&a.out))?;
    println!("{} events from {} proposals", det.events.len(), det.proposals.len());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::new("eval", a.seed, a);
    if a.predictions.is_none() && a.events.is_none() {
        return Err(Error::invalid("eval needs --predictions or --events with --gt"));
    }
    create_dir(&a.out)?;
    let mut per_eye = Vec::new();
    if let Some(p) = &a.predictions {
        let rows = read_predictions(p)?;
        per_eye = metrics_by_eye(&rows)?;
        let scores: Vec<(f64, bool)> = rows.iter().map(|r| (r.confidence, r.truth == Label::Blink)).collect();
        write_pr_curve(&a.out.join("pr_curve.csv"), &pr_curve(&scores))?;
    }
    let ap = match (&a.events, &a.gt) {
        (Some(ev), Some(gt)) => Some(events_ap(&read_events(ev)?, &read_gt_intervals(gt)?, a.overlap)?),
        _ => None,
    };
    let report = EvalReport::new(per_eye, ap, cfg.meta(started));
    emit_report(&report, &a.out.join("report"))?;
    cfg.write(&a.out.join("config.json"))?;
    print!("{}", report.to_csv());
    if let Some(ap) = ap {
        println!("ap {} ({} true positives)", ap.ap, ap.true_positives);
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let cfg = RunConfig::new("bench", a.seed, a);
    let clip = match &a.frames {
        Some(dir) => read_clip_dir(dir, Label::NonBlink, "bench")?,
        None => synth_stream(a.seed, a.length, &[])?.clip,
    };
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => MsLstmModel::new(a.model_shape.hyper(), STEP_DIM, a.seed)?,
    };
    let report = bench_stream(
        clip.frames(),
        &annotation_locator(&clip),
        &model,
        &a.track.params()?,
        a.window,
        a.warmup,
    )?;
    print!("{}", report.table());
    if let Some(out) = &a.out {
        let mut json = serde_json::to_string_pretty(&report).expect("bench report serializes");
        json.push('\n');
        write_text(out, &json)?;
        cfg.write(&sidecar(out))?;
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::invalid(format!("cannot size the thread pool: {e}")))
}

pub fn execute(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Polish(a) => cmd_polish(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Parses the process arguments and runs the chosen subcommand.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

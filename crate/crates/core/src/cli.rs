//! Command-line front end.
//!
//! Exit codes: `0` yes (and success for non-deciding commands), `1` no,
//! `2` any error. Human-readable text goes to stdout, diagnostics to stderr.
//! `--records` switches stdout to one JSON object per line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classifier::{
    analyze, classify_with, train, ClassifierModel, ClassifyOptions, TrainOptions,
};
use crate::error::{Error, Result};
use crate::model_io::{
    load_image, load_model_file, save_model_file, to_feature_vector, FeatureVector,
    ImageReadOptions, DEFAULT_CSV_MAX_VALUE,
};
use crate::pca::{ComponentSelection, DEFAULT_VARIANCE_THRESHOLD};
use crate::quantum::Outcome;

/// Seed used when neither `--seed` nor `QPCA_SEED` is given.
pub const DEFAULT_SEED: u64 = 2016;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qpca",
    version,
    about = "Quantum image classification simulator (PCA + projective measurement)"
)]
pub struct Cli {
    /// Emit line-delimited JSON records instead of text.
    #[arg(long, global = true)]
    pub records: bool,

    /// Master RNG seed.
    #[arg(long, global = true, env = "QPCA_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit principal components to training images and write a model file.
    Train(TrainArgs),
    /// Run the repeated-measurement protocol on one image.
    Classify(ClassifyArgs),
    /// Print the analytic likelihood and probabilities for one image.
    Prob(ClassifyArgs),
    /// Classify labeled positive/negative images and report confusion counts.
    Eval(EvalArgs),
    /// Describe a model file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Output model path.
    #[arg(long)]
    pub model: PathBuf,

    /// Number of principal components to keep.
    #[arg(long, conflicts_with = "variance_threshold")]
    pub components: Option<usize>,

    /// Keep the fewest components whose squared singular values reach this fraction.
    #[arg(long)]
    pub variance_threshold: Option<f64>,

    /// Subtract the mean sample before the SVD.
    #[arg(long)]
    pub center: bool,

    /// Max value for CSV inputs.
    #[arg(long, default_value_t = DEFAULT_CSV_MAX_VALUE)]
    pub max_value: u32,

    /// Training images (PGM or CSV) or directories of them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Override the n^2 trial count.
    #[arg(long)]
    pub trials: Option<u64>,

    #[arg(long, default_value_t = DEFAULT_CSV_MAX_VALUE)]
    pub max_value: u32,

    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub trials: Option<u64>,

    #[arg(long, default_value_t = DEFAULT_CSV_MAX_VALUE)]
    pub max_value: u32,

    /// Images (or directories) expected to be classified yes.
    #[arg(long)]
    pub positive: Vec<PathBuf>,

    /// Images (or directories) expected to be classified no.
    #[arg(long)]
    pub negative: Vec<PathBuf>,

    /// Directory holding `positive/` and `negative/` subdirectories.
    pub root: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.kind());
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Train(args) => cmd_train(cli, args, out, err),
        Command::Classify(args) => cmd_classify(cli, args, out),
        Command::Prob(args) => cmd_prob(cli, args, out),
        Command::Eval(args) => cmd_eval(cli, args, out),
        Command::Inspect(args) => cmd_inspect(cli, args, out),
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text).map_err(|e| Error::io("<stdout>", e))
}

fn emit_record(out: &mut dyn Write, record: &impl Serialize) -> Result<()> {
    let line = serde_json::to_string(record).expect("records serialize");
    emit(out, format_args!("{line}\n"))
}

/// Expands directories into their regular, non-hidden files, sorted by name.
fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        let meta = std::fs::metadata(p).map_err(|e| Error::io(p, e))?;
        if meta.is_dir() {
            let mut entries = Vec::new();
            for entry in std::fs::read_dir(p).map_err(|e| Error::io(p, e))? {
                let entry = entry.map_err(|e| Error::io(p, e))?;
                let path = entry.path();
                let hidden = entry.file_name().to_string_lossy().starts_with('.');
                if !hidden && path.is_file() {
                    entries.push(path);
                }
            }
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn read_features(path: &Path, max_value: u32) -> Result<FeatureVector> {
    let img = load_image(
        path,
        &ImageReadOptions {
            csv_max_value: max_value,
        },
    )?;
    Ok(to_feature_vector(&img, path.display().to_string()))
}

fn creation_time() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Serialize)]
struct TrainRecord<'a> {
    record: &'static str,
    model: String,
    samples: usize,
    n: usize,
    s: usize,
    k: usize,
    rank: usize,
    singular_values: &'a [f64],
}

fn cmd_train(cli: &Cli, args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let selection = match (args.components, args.variance_threshold) {
        (Some(s), _) => ComponentSelection::Count(s),
        (None, Some(t)) => ComponentSelection::VarianceThreshold(t),
        (None, None) => ComponentSelection::VarianceThreshold(DEFAULT_VARIANCE_THRESHOLD),
    };
    let files = expand_inputs(&args.inputs)?;
    if files.is_empty() {
        return Err(Error::Usage("no training images found".into()));
    }
    let samples = files
        .iter()
        .map(|f| read_features(f, args.max_value).map(|fv| fv.values))
        .collect::<Result<Vec<_>>>()?;
    let report = train(
        &samples,
        &TrainOptions {
            selection,
            center: args.center,
            created_unix: creation_time(),
        },
    )?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    save_model_file(&report.model, &args.model)?;
    let m = &report.model;
    if cli.records {
        emit_record(
            out,
            &TrainRecord {
                record: "train",
                model: args.model.display().to_string(),
                samples: samples.len(),
                n: m.pixel_count(),
                s: m.component_count(),
                k: m.block_dim(),
                rank: report.rank,
                singular_values: &report.singular_values,
            },
        )?;
    } else {
        emit(
            out,
            format_args!(
                "trained on {} images: n={} s={} k={} rank={}\nsingular values: {}\nwrote {}\n",
                samples.len(),
                m.pixel_count(),
                m.component_count(),
                m.block_dim(),
                report.rank,
                join(&report.singular_values),
                args.model.display()
            ),
        )?;
    }
    Ok(EXIT_YES)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn load_input(model: &ClassifierModel, path: &Path, max_value: u32) -> Result<FeatureVector> {
    let fv = read_features(path, max_value)?;
    if fv.values.len() != model.pixel_count() {
        return Err(Error::dim(format!(
            "{} has {} pixels, model expects {}",
            path.display(),
            fv.values.len(),
            model.pixel_count()
        )));
    }
    Ok(fv)
}

#[derive(Serialize)]
struct ClassifyRecord {
    record: &'static str,
    source: String,
    decision: Outcome,
    trials: u64,
    trials_run: u64,
    positive_trial_index: Option<u64>,
    per_trial_probability: f64,
    analytic_overall_no_probability: f64,
    seed: u64,
    input_norm: f64,
}

fn cmd_classify(cli: &Cli, args: &ClassifyArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model_file(&args.model)?;
    let fv = load_input(&model, &args.image, args.max_value)?;
    let opts = ClassifyOptions {
        seed: cli.seed,
        trials: args.trials,
    };
    let result = classify_with(&model, &fv.values, opts)?;
    let trials = args.trials.unwrap_or_else(|| model.default_trials());
    if cli.records {
        emit_record(
            out,
            &ClassifyRecord {
                record: "classify",
                source: fv.source,
                decision: result.decision,
                trials,
                trials_run: result.trials_run,
                positive_trial_index: result.positive_trial_index,
                per_trial_probability: result.per_trial_probability,
                analytic_overall_no_probability: result.analytic_overall_no_probability,
                seed: result.seed,
                input_norm: result.input_norm,
            },
        )?;
    } else {
        emit(
            out,
            format_args!(
                "{}: {}\ntrials run: {} of {}\nper-trial yes probability: {}\nanalytic overall no probability: {}\nseed: {}\n",
                fv.source,
                result.decision,
                result.trials_run,
                trials,
                result.per_trial_probability,
                result.analytic_overall_no_probability,
                result.seed
            ),
        )?;
    }
    Ok(match result.decision {
        Outcome::Yes => EXIT_YES,
        Outcome::No => EXIT_NO,
    })
}

#[derive(Serialize)]
struct ProbRecord {
    record: &'static str,
    source: String,
    likelihood: f64,
    per_trial_probability: f64,
    trials: u64,
    overall_yes_probability: f64,
    overall_no_probability: f64,
}

fn cmd_prob(cli: &Cli, args: &ClassifyArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model_file(&args.model)?;
    let fv = load_input(&model, &args.image, args.max_value)?;
    let r = analyze(&model, &fv.values, args.trials)?;
    if cli.records {
        emit_record(
            out,
            &ProbRecord {
                record: "prob",
                source: fv.source,
                likelihood: r.likelihood,
                per_trial_probability: r.per_trial_probability,
                trials: r.trials,
                overall_yes_probability: r.overall_yes_probability,
                overall_no_probability: r.overall_no_probability,
            },
        )?;
    } else {
        emit(
            out,
            format_args!(
                "{}\nM = {}\nP(yes) per trial = {}\nP(yes) after {} trials = {}\n",
                fv.source,
                r.likelihood,
                r.per_trial_probability,
                r.trials,
                r.overall_yes_probability
            ),
        )?;
    }
    Ok(EXIT_YES)
}

/// Per-file seed from the master seed and a hash of the file's path, so
/// adding files to a batch leaves the others' outcomes unchanged.
pub fn derive_file_seed(master: u64, path: &str) -> u64 {
    let digest = Sha256::digest(path.as_bytes());
    let mut h = [0u8; 8];
    h.copy_from_slice(&digest[..8]);
    splitmix64(master ^ u64::from_le_bytes(h))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Label {
    Positive,
    Negative,
}

#[derive(Serialize)]
struct EvalItemRecord {
    record: &'static str,
    label: Label,
    source: String,
    decision: Outcome,
    trials_run: u64,
    per_trial_probability: f64,
    overall_yes_probability: f64,
    seed: u64,
}

#[derive(Serialize)]
struct EvalSummaryRecord {
    record: &'static str,
    true_positive: usize,
    false_negative: usize,
    false_positive: usize,
    true_negative: usize,
    mean_yes_probability_positive: Option<f64>,
    mean_yes_probability_negative: Option<f64>,
}

fn labeled_files(args: &EvalArgs) -> Result<Vec<(Label, PathBuf, String)>> {
    let mut items = Vec::new();
    if let Some(root) = &args.root {
        for (label, sub) in [(Label::Positive, "positive"), (Label::Negative, "negative")] {
            let dir = root.join(sub);
            if dir.is_dir() {
                for f in expand_inputs(std::slice::from_ref(&dir))? {
                    let key = f
                        .strip_prefix(root)
                        .unwrap_or(&f)
                        .to_string_lossy()
                        .replace('\\', "/");
                    items.push((label, f, key));
                }
            }
        }
    }
    for (label, paths) in [
        (Label::Positive, &args.positive),
        (Label::Negative, &args.negative),
    ] {
        for f in expand_inputs(paths)? {
            let key = f.to_string_lossy().replace('\\', "/");
            items.push((label, f, key));
        }
    }
    Ok(items)
}

fn cmd_eval(cli: &Cli, args: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model_file(&args.model)?;
    let items = labeled_files(args)?;
    if items.is_empty() {
        return Err(Error::Usage("evaluation batch is empty".into()));
    }
    let results: Vec<Result<EvalItemRecord>> = items
        .par_iter()
        .map(|(label, path, key)| {
            let fv = load_input(&model, path, args.max_value)?;
            let seed = derive_file_seed(cli.seed, key);
            let r = classify_with(
                &model,
                &fv.values,
                ClassifyOptions {
                    seed,
                    trials: args.trials,
                },
            )?;
            Ok(EvalItemRecord {
                record: "eval_item",
                label: *label,
                source: key.clone(),
                decision: r.decision,
                trials_run: r.trials_run,
                per_trial_probability: r.per_trial_probability,
                overall_yes_probability: 1.0 - r.analytic_overall_no_probability,
                seed,
            })
        })
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summary = EvalSummaryRecord {
        record: "eval_summary",
        true_positive: 0,
        false_negative: 0,
        false_positive: 0,
        true_negative: 0,
        mean_yes_probability_positive: None,
        mean_yes_probability_negative: None,
    };
    let mut sums = [(0.0, 0usize); 2];
    for r in &records {
        let slot = match r.label {
            Label::Positive => 0,
            Label::Negative => 1,
        };
        sums[slot].0 += r.overall_yes_probability;
        sums[slot].1 += 1;
        match (r.label, r.decision) {
            (Label::Positive, Outcome::Yes) => summary.true_positive += 1,
            (Label::Positive, Outcome::No) => summary.false_negative += 1,
            (Label::Negative, Outcome::Yes) => summary.false_positive += 1,
            (Label::Negative, Outcome::No) => summary.true_negative += 1,
        }
    }
    let mean = |(s, c): (f64, usize)| (c > 0).then(|| s / c as f64);
    summary.mean_yes_probability_positive = mean(sums[0]);
    summary.mean_yes_probability_negative = mean(sums[1]);

    if cli.records {
        for r in &records {
            emit_record(out, r)?;
        }
        emit_record(out, &summary)?;
    } else {
        for r in &records {
            emit(
                out,
                format_args!(
                    "{:<8} {:<3} P(yes)={:.6} {}\n",
                    match r.label {
                        Label::Positive => "positive",
                        Label::Negative => "negative",
                    },
                    r.decision,
                    r.overall_yes_probability,
                    r.source
                ),
            )?;
        }
        let fmt_mean = |m: Option<f64>| m.map_or("-".to_owned(), |v| format!("{v:.6}"));
        emit(
            out,
            format_args!(
                "confusion: TP={} FN={} FP={} TN={}\nmean P(yes): positive={} negative={}\n",
                summary.true_positive,
                summary.false_negative,
                summary.false_positive,
                summary.true_negative,
                fmt_mean(summary.mean_yes_probability_positive),
                fmt_mean(summary.mean_yes_probability_negative)
            ),
        )?;
    }
    Ok(EXIT_YES)
}

#[derive(Serialize)]
struct InspectRecord<'a> {
    record: &'static str,
    model: String,
    n: usize,
    s: usize,
    k: usize,
    state_dim: usize,
    default_trials: u64,
    singular_values: &'a [f64],
    component_orthonormality_error: f64,
    metadata: &'a crate::classifier::ModelMetadata,
}

fn cmd_inspect(cli: &Cli, args: &InspectArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model_file(&args.model)?;
    let pcs = model.components();
    let record = InspectRecord {
        record: "inspect",
        model: args.model.display().to_string(),
        n: model.pixel_count(),
        s: model.component_count(),
        k: model.block_dim(),
        state_dim: model.state_dim(),
        default_trials: model.default_trials(),
        singular_values: pcs.singular_values(),
        component_orthonormality_error: pcs.orthonormality_error(),
        metadata: model.metadata(),
    };
    if cli.records {
        emit_record(out, &record)?;
    } else {
        emit(
            out,
            format_args!(
                "model: {}\nn={} s={} k={} state dimension={}\ntrials per classification: {}\nsingular values: {}\ncomponent orthonormality error: {:e}\ntraining samples: {}\n",
                record.model,
                record.n,
                record.s,
                record.k,
                record.state_dim,
                record.default_trials,
                join(record.singular_values),
                record.component_orthonormality_error,
                model.metadata().sample_count
            ),
        )?;
    }
    Ok(EXIT_YES)
}

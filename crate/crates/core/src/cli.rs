//! The `disentangle` command line: `embed`, `train-classifier`,
//! `train-autoencoder` and `cluster-eval`.
//!
//! Every flag can also come from a TOML file passed with `--config`, in a
//! table named after the command (`[train-autoencoder]` etc.) with
//! snake_case keys. Flags given on the command line win over the file, and the
//! file wins over built-in defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clustering::{kmeans, pca_project, write_assignments_to};
use crate::data::{
    build_embedding_cache, load_word_vectors, minmax_scale, read_cache, read_corpus, write_cache, EmbeddedDataset,
};
use crate::error::{Error, Result};
use crate::metrics::{classification_metrics, ClusteringScores, EvaluationReport};
use crate::models::{
    build_autoencoder, build_cnn_classifier, build_ffn_classifier, encode, predict, train_autoencoder,
    train_classifier, DisentangleMode, TrainConfig, TrainHistory, LATENT_DIM, LATENT_TAP_WIDTH,
};
use crate::nn::{write_checkpoint, Network, Scalar};
use crate::snnl::TemperatureSchedule;
use crate::DEFAULT_SEEDS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const DEFAULT_PCA_DIMS: usize = 128;

#[derive(Debug, Parser)]
#[command(
    name = "disentangle",
    version,
    about = "Soft nearest neighbor loss experiments on averaged word embeddings"
)]
pub struct Cli {
    /// TOML file with per-command tables of flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a labeled CSV corpus by averaging word vectors.
    Embed(EmbedArgs),
    /// Train feed-forward or convolutional classifiers, one per seed.
    TrainClassifier(ClassifierArgs),
    /// Train autoencoders, one per seed, and dump their latent codes.
    TrainAutoencoder(AutoencoderArgs),
    /// Cluster features with k-means per seed and score the clusterings.
    ClusterEval(ClusterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Ffn,
    Cnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Features straight from an embedding cache.
    Cache,
    /// `<input>/<seed>/latent.emb` from a `train-autoencoder` run.
    Latent,
    /// An embedding cache projected with PCA first.
    Pca,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// CSV with a `label,text` header.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Whitespace-separated word vector file (GloVe text format).
    #[arg(long)]
    pub glove: Option<PathBuf>,
    /// One class name per line; line order fixes the label indices.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Output cache path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Min-max scale features into [0, 1] (needed for autoencoders).
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub scale: Option<bool>,
}

/// Training flags shared by both training commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Weight of the soft nearest neighbor term (negative entangles).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Comma-separated seeds, one run each.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Temperature schedule offset.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Temperature schedule decay exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Floating-point width of the network.
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ClassifierArgs {
    /// Training embedding cache.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test embedding cache.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub arch: Option<Architecture>,
    /// Number of classes; defaults to the largest label seen plus one.
    #[arg(long)]
    pub classes: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub train_args: TrainArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct AutoencoderArgs {
    /// Min-max scaled embedding cache.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// baseline, all_hidden or latent_partial.
    #[arg(long)]
    pub mode: Option<DisentangleMode>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Latent units tapped in latent_partial mode.
    #[arg(long)]
    pub tap_width: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub train_args: TrainArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ClusterArgs {
    #[arg(long, value_enum)]
    pub source: Option<FeatureSource>,
    /// Cache file, or the output directory of a `train-autoencoder` run.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of clusters; defaults to the number of distinct labels.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Components kept by the `pca` source.
    #[arg(long)]
    pub pca_dims: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Overlays the command-line values onto the config-file table.
fn merge<T: Serialize + DeserializeOwned + Default>(cli: &T, file: Option<&Value>) -> Result<T> {
    let mut merged = match file {
        Some(Value::Object(map)) => map.clone(),
        Some(_) => return Err(Error::InvalidArgument("config section must be a table".into())),
        None => serde_json::Map::new(),
    };
    // Unset options serialize as null, so the default lists every key.
    let Value::Object(known) = serde_json::to_value(T::default()).expect("flags serialize") else {
        unreachable!("flag structs serialize to objects")
    };
    if let Some(key) = merged.keys().find(|k| !known.contains_key(*k)) {
        return Err(Error::InvalidArgument(format!("config: unknown key {key:?}")));
    }
    if let Value::Object(flags) = serde_json::to_value(cli).expect("flags serialize") {
        for (k, v) in flags {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
}

fn load_config(path: &Path) -> Result<BTreeMap<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let known = ["embed", "train-classifier", "train-autoencoder", "cluster-eval"];
    let mut out = BTreeMap::new();
    for (k, v) in table {
        if !known.contains(&k.as_str()) {
            return Err(Error::InvalidArgument(format!("config: unknown section [{k}]")));
        }
        out.insert(k, serde_json::to_value(v).expect("toml converts to json"));
    }
    Ok(out)
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidArgument(format!("missing --{flag}")))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn warn(message: impl AsRef<str>) {
    eprintln!("warning: {}", message.as_ref());
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    match cli.command {
        Command::Embed(a) => cmd_embed(&merge(&a, config.get("embed"))?),
        Command::TrainClassifier(a) => cmd_train_classifier(&merge(&a, config.get("train-classifier"))?),
        Command::TrainAutoencoder(a) => cmd_train_autoencoder(&merge(&a, config.get("train-autoencoder"))?),
        Command::ClusterEval(a) => cmd_cluster_eval(&merge(&a, config.get("cluster-eval"))?),
    }
}

pub fn cmd_embed(args: &EmbedArgs) -> Result<()> {
    let corpus_path = required(args.corpus.as_ref(), "corpus")?;
    let glove = required(args.glove.as_ref(), "glove")?;
    let out = required(args.out.as_ref(), "out")?;
    if !glove.is_file() {
        return Err(Error::InvalidArgument(format!(
            "word vector file not found: {}",
            glove.display()
        )));
    }
    let corpus = read_corpus(corpus_path, args.classes.as_deref())?;
    let table = load_word_vectors(glove)?;
    let outcome = if args.scale.unwrap_or(false) {
        let outcome = crate::data::embed_corpus(&corpus, &table)?;
        let scaled = minmax_scale(&outcome.dataset)?;
        write_cache(&scaled, out)?;
        crate::data::EmbeddingOutcome {
            dataset: scaled,
            fallback_rows: outcome.fallback_rows,
        }
    } else {
        build_embedding_cache(&corpus, &table, out)?
    };
    println!(
        "n={} d={} zero_vectors={} scaled={}",
        outcome.dataset.len(),
        outcome.dataset.dim(),
        outcome.fallback_rows.len(),
        outcome.dataset.is_scaled()
    );
    Ok(())
}

struct ResolvedTraining {
    seeds: Vec<u64>,
    precision: Precision,
    out: PathBuf,
    template: TrainConfig,
}

fn resolve_training(args: &TrainArgs, mut template: TrainConfig) -> Result<ResolvedTraining> {
    if let Some(a) = args.alpha {
        template.alpha = a;
    }
    if let Some(e) = args.epochs {
        template.epochs = e;
    }
    if let Some(b) = args.batch_size {
        template.batch_size = b;
    }
    if let Some(lr) = args.lr {
        template.lr = lr;
    }
    template.schedule = TemperatureSchedule::new(
        args.eta.unwrap_or(template.schedule.eta),
        args.gamma.unwrap_or(template.schedule.gamma),
    )?;
    template.validate()?;
    let seeds = args.seeds.clone().unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("empty seed list".into()));
    }
    Ok(ResolvedTraining {
        seeds,
        precision: args.precision.unwrap_or(Precision::F32),
        out: required(args.out.clone(), "out")?,
        template,
    })
}

fn training_settings(r: &ResolvedTraining) -> BTreeMap<String, Value> {
    let t = &r.template;
    BTreeMap::from([
        ("alpha".to_string(), Value::from(t.alpha)),
        ("batch_size".to_string(), Value::from(t.batch_size)),
        ("epochs".to_string(), Value::from(t.epochs)),
        ("eta".to_string(), Value::from(t.schedule.eta)),
        ("gamma".to_string(), Value::from(t.schedule.gamma)),
        ("lr".to_string(), Value::from(t.lr)),
        (
            "precision".to_string(),
            serde_json::to_value(r.precision).expect("enum serializes"),
        ),
    ])
}

fn finish_report(
    out: &Path,
    command: &str,
    seeds: Vec<u64>,
    per_seed: BTreeMap<String, Vec<Option<f64>>>,
    settings: BTreeMap<String, Value>,
) -> Result<EvaluationReport> {
    let report = EvaluationReport::new(command, seeds, per_seed, settings)?;
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    Ok(report)
}

fn push_metric(map: &mut BTreeMap<String, Vec<Option<f64>>>, name: &str, value: Option<f64>) {
    map.entry(name.to_string()).or_default().push(value);
}

fn save_run<F: Scalar>(dir: &Path, net: &Network<F>, history: &TrainHistory) -> Result<()> {
    create_dir(dir)?;
    write_atomic(&dir.join("history.jsonl"), history.to_jsonl().as_bytes())?;
    write_checkpoint(net, dir.join("model.nnw"))
}

fn classifier_seed<F: Scalar>(
    arch: Architecture,
    train: &EmbeddedDataset,
    test: &EmbeddedDataset,
    k: usize,
    config: &TrainConfig,
    dir: &Path,
) -> Result<(crate::metrics::ClassificationScores, TrainHistory)> {
    let mut net: Network<F> = match arch {
        Architecture::Ffn => build_ffn_classifier(train.dim(), k, config.seed)?,
        Architecture::Cnn => build_cnn_classifier(train.dim(), k, config.seed)?,
    };
    let history = train_classifier(&mut net, train, config)?;
    let predicted = predict(&net, test.features())?;
    let scores = classification_metrics(test.labels(), &predicted, k)?;
    save_run(dir, &net, &history)?;
    let json = serde_json::to_string_pretty(&scores).expect("scores serialize") + "\n";
    write_atomic(&dir.join("scores.json"), json.as_bytes())?;
    Ok((scores, history))
}

pub fn cmd_train_classifier(args: &ClassifierArgs) -> Result<()> {
    let arch = args.arch.unwrap_or(Architecture::Ffn);
    let template = match arch {
        Architecture::Ffn => TrainConfig::classifier(0.0, 0),
        Architecture::Cnn => TrainConfig::cnn(0.0, 0),
    };
    let run = resolve_training(&args.train_args, template)?;
    let train = read_cache(required(args.train.as_ref(), "train")?)?;
    let test = read_cache(required(args.test.as_ref(), "test")?)?;
    if train.dim() != test.dim() {
        return Err(Error::InvalidArgument(format!(
            "train features have width {}, test features {}",
            train.dim(),
            test.dim()
        )));
    }
    let seen = train.labels().iter().chain(test.labels()).max().map_or(0, |m| m + 1);
    let k = args.classes.unwrap_or(seen);
    if k < seen {
        return Err(Error::InvalidArgument(format!(
            "--classes {k} but label {} present",
            seen - 1
        )));
    }
    create_dir(&run.out)?;
    let mut per_seed = BTreeMap::new();
    for &seed in &run.seeds {
        let config = TrainConfig { seed, ..run.template };
        let dir = run.out.join(seed.to_string());
        let (scores, history) = match run.precision {
            Precision::F32 => classifier_seed::<f32>(arch, &train, &test, k, &config, &dir)?,
            Precision::F64 => classifier_seed::<f64>(arch, &train, &test, k, &config, &dir)?,
        };
        let last = history.epochs.last();
        println!(
            "seed {seed}: test accuracy {:.4} f1 {:.4}",
            scores.accuracy, scores.f1_weighted
        );
        push_metric(&mut per_seed, "accuracy", Some(scores.accuracy));
        push_metric(&mut per_seed, "f1_weighted", Some(scores.f1_weighted));
        push_metric(&mut per_seed, "f1_macro", Some(scores.f1_macro));
        push_metric(&mut per_seed, "final_train_loss", last.map(|r| r.primary_loss));
        push_metric(
            &mut per_seed,
            "final_train_accuracy",
            last.and_then(|r| r.train_accuracy),
        );
    }
    let mut settings = training_settings(&run);
    settings.insert("arch".into(), serde_json::to_value(arch).expect("enum serializes"));
    settings.insert("classes".into(), Value::from(k));
    finish_report(&run.out, "train-classifier", run.seeds.clone(), per_seed, settings)?;
    Ok(())
}

fn autoencoder_seed<F: Scalar>(
    train: &EmbeddedDataset,
    z: usize,
    config: &TrainConfig,
    dir: &Path,
) -> Result<TrainHistory> {
    let mut net: Network<F> = build_autoencoder(train.dim(), z, config.seed)?;
    let history = train_autoencoder(&mut net, train, config)?;
    let latent = encode(&net, train.features())?;
    save_run(dir, &net, &history)?;
    let dataset = EmbeddedDataset::new(latent, train.labels().to_vec())?;
    write_cache(&dataset, dir.join("latent.emb"))?;
    write_pca_dump(&dataset, &dir.join("latent_pca2.csv"))?;
    Ok(history)
}

/// Two-component PCA of `dataset` as `x,y,label` rows, for external plotting.
fn write_pca_dump(dataset: &EmbeddedDataset, path: &Path) -> Result<()> {
    if dataset.len() < 2 || dataset.dim() < 2 {
        return Ok(());
    }
    let p = pca_project(dataset.features(), 2)?;
    let mut text = String::from("x,y,label\n");
    for (row, label) in p.projected.rows().into_iter().zip(dataset.labels()) {
        text.push_str(&format!("{},{},{}\n", row[0], row[1], label));
    }
    write_atomic(path, text.as_bytes())
}

pub fn cmd_train_autoencoder(args: &AutoencoderArgs) -> Result<()> {
    let mode = args.mode.unwrap_or(DisentangleMode::Baseline);
    let mut template = TrainConfig::autoencoder(mode, 0.0, 0);
    template.latent_tap_width = args.tap_width.unwrap_or(LATENT_TAP_WIDTH);
    let run = resolve_training(&args.train_args, template)?;
    let z = args.latent_dim.unwrap_or(LATENT_DIM);
    if mode == DisentangleMode::LatentPartial && !(1..=z).contains(&run.template.latent_tap_width) {
        return Err(Error::InvalidArgument(format!(
            "--tap-width {} must be in [1, {z}]",
            run.template.latent_tap_width
        )));
    }
    match (mode, run.template.alpha == 0.0) {
        (DisentangleMode::Baseline, false) => warn("alpha is ignored in baseline mode"),
        (DisentangleMode::AllHidden | DisentangleMode::LatentPartial, true) => {
            warn("alpha is 0, so no soft nearest neighbor term is trained")
        }
        _ => {}
    }
    let train_path = required(args.train.as_ref(), "train")?;
    let train = read_cache(train_path)?;
    if !train.is_scaled() {
        return Err(Error::InvalidArgument(format!(
            "{} is not min-max scaled; rerun `embed --scale`",
            train_path.display()
        )));
    }
    create_dir(&run.out)?;
    let mut per_seed = BTreeMap::new();
    for &seed in &run.seeds {
        let mut config = TrainConfig { seed, ..run.template };
        if mode == DisentangleMode::Baseline {
            config.alpha = 0.0;
        }
        let dir = run.out.join(seed.to_string());
        let history = match run.precision {
            Precision::F32 => autoencoder_seed::<f32>(&train, z, &config, &dir)?,
            Precision::F64 => autoencoder_seed::<f64>(&train, z, &config, &dir)?,
        };
        let last = history.epochs.last();
        let snnl = last.filter(|r| !r.snnl.is_empty()).map(|r| r.total_snnl());
        println!(
            "seed {seed}: reconstruction {:.5}{}",
            last.map_or(f64::NAN, |r| r.primary_loss),
            snnl.map_or(String::new(), |s| format!(" snnl {s:.5}"))
        );
        push_metric(&mut per_seed, "final_reconstruction_loss", last.map(|r| r.primary_loss));
        push_metric(&mut per_seed, "final_snnl", snnl);
    }
    let mut settings = training_settings(&run);
    settings.insert("mode".into(), serde_json::to_value(mode).expect("enum serializes"));
    settings.insert("latent_dim".into(), Value::from(z));
    settings.insert("tap_width".into(), Value::from(run.template.latent_tap_width));
    finish_report(&run.out, "train-autoencoder", run.seeds.clone(), per_seed, settings)?;
    Ok(())
}

fn distinct(labels: &[usize]) -> usize {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

pub fn cmd_cluster_eval(args: &ClusterArgs) -> Result<()> {
    let source = args.source.unwrap_or(FeatureSource::Cache);
    let input = required(args.input.clone(), "input")?;
    let out = required(args.out.clone(), "out")?;
    let seeds = args.seeds.clone().unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("empty seed list".into()));
    }
    let pca_dims = args.pca_dims.unwrap_or(DEFAULT_PCA_DIMS);

    let shared: Option<(Array2<f64>, Vec<usize>)> = match source {
        FeatureSource::Latent => None,
        FeatureSource::Cache => {
            let (x, y, _) = read_cache(&input)?.into_parts();
            Some((x, y))
        }
        FeatureSource::Pca => {
            let ds = read_cache(&input)?;
            if pca_dims > ds.dim() {
                return Err(Error::InvalidArgument(format!(
                    "--pca-dims {pca_dims} exceeds the feature width {}",
                    ds.dim()
                )));
            }
            let p = pca_project(ds.features(), pca_dims)?;
            Some((p.projected, ds.labels().to_vec()))
        }
    };

    create_dir(&out)?;
    let mut per_seed = BTreeMap::new();
    let mut k_used = None;
    for &seed in &seeds {
        let owned;
        let (x, y) = match &shared {
            Some((x, y)) => (x, y),
            None => {
                let (x, y, _) = read_cache(input.join(seed.to_string()).join("latent.emb"))?.into_parts();
                owned = (x, y);
                (&owned.0, &owned.1)
            }
        };
        let classes = distinct(y);
        let k = args.k.unwrap_or(classes);
        if k > classes && k_used.is_none() {
            warn(format!("k={k} exceeds the {classes} distinct labels"));
        }
        k_used = Some(k);
        let result = kmeans(x.view(), k, seed)?;
        let scores = ClusteringScores::evaluate(x.view(), y, &result.assignments)?;
        let dir = out.join(seed.to_string());
        create_dir(&dir)?;
        let mut csv = Vec::new();
        write_assignments_to(&result.assignments, &mut csv)?;
        write_atomic(&dir.join("assignments.csv"), &csv)?;
        println!(
            "seed {seed}: acc {} nmi {} ari {} dbi {}",
            fmt_opt(scores.acc),
            fmt_opt(scores.nmi),
            fmt_opt(scores.ari),
            fmt_opt(scores.dbi)
        );
        for (name, value) in scores.named() {
            push_metric(&mut per_seed, name, value);
        }
        push_metric(&mut per_seed, "inertia", Some(result.inertia));
    }
    let mut settings = BTreeMap::from([
        (
            "source".to_string(),
            serde_json::to_value(source).expect("enum serializes"),
        ),
        ("k".to_string(), k_used.map_or(Value::Null, Value::from)),
    ]);
    if source == FeatureSource::Pca {
        settings.insert("pca_dims".into(), Value::from(pca_dims));
    }
    finish_report(&out, "cluster-eval", seeds, per_seed, settings)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

//! Command-line front end.
//!
//! Every command that writes a file also writes `<file>.manifest.json`
//! holding the tool version, seed, a SHA-256 of the effective
//! configuration and digests of the inputs and outputs. Manifests carry
//! file names, not directories, so runs in different directories match.
//!
//! Exit codes: 0 on success, 2 on invalid arguments, 1 on runtime errors.
//! Errors are printed to stderr as one line:
//! `error kind=<kind> message=<json string>`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{EmbeddingTable, ModelConfig, SeanNet};
use crate::navigation::{
    build_topo_map, default_places, run_benchmark, run_trial, sample_trials, BenchmarkMode, BenchmarkReport,
    GroundTruthLocalizer, Localizer, RotationModel, SimilarityLocalizer, SubNodeId, TopoMap, TrialConfig,
};
use crate::training::{
    encode_dataset, evaluate_encoded, metrics_jsonl, select_threshold, similarity_stats, train, HyperParams,
    SimilarityStats, ThresholdMethod,
};
use crate::triplets::{gen_dataset, TripletDataset, TripletOptions};
use crate::world::{gen_world, CameraConfig, WorldConfig, WorldState};

pub const TOOL: &str = "seannet";

#[derive(Debug, Parser)]
#[command(name = "seannet", version, about = "Scene-embedding localization and topological navigation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic room.
    GenWorld(GenWorldArgs),
    /// Sample a cascaded triplet dataset from one or more rooms.
    GenTriplets(GenTripletsArgs),
    /// Train the scene embedder with the triplet loss.
    Train(TrainArgs),
    /// Triplet accuracy of a model on a dataset.
    Eval(EvalArgs),
    /// Similarity as a function of grid offset.
    Stats(StatsArgs),
    /// Pick the localization threshold from similarity statistics.
    SelectThreshold(SelectThresholdArgs),
    /// Build a topological map of a room.
    BuildMap(BuildMapArgs),
    /// Run one navigation trial on a map.
    Navigate(NavigateArgs),
    /// Success and failure rates over many navigation trials.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct GenWorldArgs {
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON world configuration; defaults are used for missing files.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_objects: Option<usize>,
    #[arg(long)]
    pub max_instances: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenTripletsArgs {
    /// World file; repeat for several rooms.
    #[arg(long = "world", required = true)]
    pub worlds: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Apply object dynamics to every positive, not only tier 1.
    #[arg(long)]
    pub positive_dynamics: bool,
    /// Visual feature width of rendered detections.
    #[arg(long, env = "SEANNET_FEATURE_DIM")]
    pub feature_dim: Option<usize>,
    /// Use the full-size layout (2048-dim visual features).
    #[arg(long, env = "SEANNET_PAPER_DIMS")]
    pub paper_dims: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub triplets: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "SEANNET_EPOCHS", default_value_t = 60)]
    pub epochs: usize,
    #[arg(long, env = "SEANNET_LR", default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 0.7)]
    pub lr_decay: f64,
    #[arg(long, default_value_t = 10)]
    pub lr_decay_every: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, env = "SEANNET_BATCH_SIZE", default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Seed for the initial weights; defaults to `--seed`.
    #[arg(long)]
    pub init_seed: Option<u64>,
    /// Word vectors, one `label v1 v2 ...` line per class.
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// Use the full-size layout instead of the desk-scale one.
    #[arg(long, env = "SEANNET_PAPER_DIMS")]
    pub paper_dims: bool,
    /// Per-epoch metrics; defaults to `<out>.metrics.jsonl`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model checkpoint; omit with `--random-init` to score untrained weights.
    #[arg(long, required_unless_present = "random_init")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub triplets: PathBuf,
    /// Evaluate a freshly initialized desk-scale model with this seed.
    #[arg(long)]
    pub random_init: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub n_pairs: usize,
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    MeanMinusStd,
    Midpoint,
}

#[derive(Debug, Args)]
pub struct SelectThresholdArgs {
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::MeanMinusStd)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildMapArgs {
    #[arg(long)]
    pub world: PathBuf,
    /// Place spacing in cells.
    #[arg(long, default_value_t = 4)]
    pub stride: i32,
    /// Connect only neighbouring headings (a half turn costs two).
    #[arg(long)]
    pub quarter_turns_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LocalizerArgs {
    /// Localize with this model; ground truth is used when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, env = "SEANNET_THRESHOLD", default_value_t = 0.9)]
    pub threshold: f64,
    /// Evaluate a freshly initialized desk-scale model with this seed.
    #[arg(long, conflicts_with = "model")]
    pub random_init: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    #[arg(long, default_value_t = 12)]
    pub k_max: usize,
    #[arg(long)]
    pub trial_cap: Option<usize>,
    #[arg(long, env = "SEANNET_P_ERR", default_value_t = 0.05)]
    pub p_err: f64,
}

#[derive(Debug, Args)]
pub struct NavigateArgs {
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long)]
    pub map: PathBuf,
    /// Start sub-node as `node@degrees`.
    #[arg(long)]
    pub start: String,
    #[arg(long)]
    pub goal: String,
    #[command(flatten)]
    pub localizer: LocalizerArgs,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Neighbor,
    Arbitrary,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// World file; repeat for several rooms.
    #[arg(long = "world", required = true)]
    pub worlds: Vec<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub stride: i32,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[command(flatten)]
    pub localizer: LocalizerArgs,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[arg(long, env = "SEANNET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// CSV report; a JSON report with per-trial outcomes is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse arguments, run, print errors, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error kind=usage message={}", json!(first));
            return 2;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error kind={} message={}", e.kind(), json!(e.to_string()));
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenWorld(a) => cmd_gen_world(a),
        Command::GenTriplets(a) => cmd_gen_triplets(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
        Command::SelectThreshold(a) => cmd_select_threshold(a),
        Command::BuildMap(a) => cmd_build_map(a),
        Command::Navigate(a) => cmd_navigate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    }
}

fn io_context(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_context(path))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_context(path))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_context(path))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

#[derive(Debug, Serialize)]
struct FileDigest {
    name: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config_sha256: String,
    config: Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn digest_files(paths: &[&Path]) -> Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                name: file_name(p),
                sha256: sha256_hex(&read_bytes(p)?),
            })
        })
        .collect()
}

/// Write `<primary>.manifest.json` describing one command run.
fn write_manifest(
    command: &'static str,
    seed: Option<u64>,
    config: &impl Serialize,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<()> {
    let config = serde_json::to_value(config)?;
    let manifest = Manifest {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config_sha256: sha256_hex(serde_json::to_string(&config)?.as_bytes()),
        config,
        inputs: digest_files(inputs)?,
        outputs: digest_files(outputs)?,
    };
    let primary = outputs.first().ok_or_else(|| Error::Usage("manifest without outputs".into()))?;
    let mut path = primary.as_os_str().to_owned();
    path.push(".manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_bytes(Path::new(&path), text.as_bytes())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_world(path: &Path) -> Result<WorldState> {
    WorldState::from_json(&read_text(path)?)
}

fn load_model(path: &Path) -> Result<SeanNet> {
    SeanNet::from_archive(crate::tensor::Archive::from_bytes(&read_bytes(path)?)?)
}

fn load_dataset(path: &Path) -> Result<TripletDataset> {
    TripletDataset::read_from(read_bytes(path)?.as_slice())
}

fn cmd_gen_world(a: GenWorldArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => serde_json::from_str(&read_text(p)?)?,
        None => WorldConfig::default(),
    };
    if let Some(n) = a.n_objects {
        config.n_objects = n;
    }
    if let Some(m) = a.max_instances {
        config.max_instances = m;
    }
    let world = gen_world(a.seed, &config)?;
    let mut text = world.to_json()?;
    text.push('\n');
    write_bytes(&a.out, text.as_bytes())?;
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    write_manifest("gen-world", Some(a.seed), &config, &inputs, &[&a.out])?;
    println!(
        "world objects={} reachable_cells={} out={}",
        world.objects.len(),
        world.reachable.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_gen_triplets(a: GenTripletsArgs) -> Result<()> {
    let worlds: Vec<WorldState> = a.worlds.iter().map(|p| load_world(p)).collect::<Result<_>>()?;
    let mut camera = CameraConfig::default();
    if a.paper_dims {
        camera.feature_dim = ModelConfig::paper().visual_dim;
    }
    if let Some(d) = a.feature_dim {
        camera.feature_dim = d;
    }
    let options = TripletOptions {
        camera,
        positive_dynamics: a.positive_dynamics,
    };
    let dataset = gen_dataset(&worlds, a.n, a.seed, &options)?;
    let mut bytes = Vec::new();
    dataset.write_to(&mut bytes)?;
    write_bytes(&a.out, &bytes)?;
    let inputs: Vec<&Path> = a.worlds.iter().map(PathBuf::as_path).collect();
    let config = json!({ "n": a.n, "options": options });
    write_manifest("gen-triplets", Some(a.seed), &config, &inputs, &[&a.out])?;
    let h = dataset.histogram();
    println!(
        "triplets n={} tiers={},{},{},{},{} out={}",
        dataset.len(),
        h[0],
        h[1],
        h[2],
        h[3],
        h[4],
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let hp = HyperParams {
        lr: a.lr,
        momentum: a.momentum,
        decay: a.lr_decay,
        decay_every: a.lr_decay_every,
        epochs: a.epochs,
        margin: a.margin,
        dropout: a.dropout,
        batch_size: a.batch_size,
        seed: a.seed,
    };
    hp.validate()?;
    let mut config = if a.paper_dims { ModelConfig::paper() } else { ModelConfig::desk() };
    config.dropout = a.dropout;
    let words = match &a.words {
        Some(p) => EmbeddingTable::parse(&read_text(p)?, false)?,
        None => EmbeddingTable::fallback(config.word_dim),
    };
    config.word_dim = words.dim;
    let init_seed = a.init_seed.unwrap_or(a.seed);
    let model = SeanNet::with_words(config.clone(), words, init_seed)?;

    let train_set = encode_dataset(&model, &load_dataset(&a.triplets)?)?;
    let val_set = match &a.val {
        Some(p) => encode_dataset(&model, &load_dataset(p)?)?,
        None => Vec::new(),
    };
    let outcome = train(model, &train_set, &val_set, &hp, |m| {
        let val = m.val_accuracy.map_or_else(|| "none".to_string(), |v| format!("{v:.4}"));
        eprintln!("epoch={} lr={} loss={:.6} val_accuracy={val}", m.epoch, m.lr, m.train_loss);
    })?;

    let metrics_path = a.metrics.clone().unwrap_or_else(|| sibling(&a.out, ".metrics.jsonl"));
    write_bytes(&a.out, &outcome.model.to_archive()?.to_bytes()?)?;
    write_bytes(&metrics_path, metrics_jsonl(&outcome.metrics)?.as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&a.triplets];
    inputs.extend(a.val.as_deref());
    inputs.extend(a.words.as_deref());
    let run_config = json!({ "hyper_params": hp, "model": config, "init_seed": init_seed });
    write_manifest("train", Some(a.seed), &run_config, &inputs, &[&a.out, &metrics_path])?;
    let best = outcome.best_epoch.map_or_else(|| "none".to_string(), |e| e.to_string());
    println!("trained epochs={} best_epoch={best} out={}", hp.epochs, a.out.display());
    Ok(())
}

fn model_or_random(path: Option<&Path>, random_init: Option<u64>) -> Result<SeanNet> {
    match (path, random_init) {
        (Some(p), _) => load_model(p),
        (None, Some(seed)) => SeanNet::new(ModelConfig::desk(), seed),
        (None, None) => Err(Error::Usage("a model or --random-init is required".into())),
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let model = model_or_random(a.model.as_deref(), a.random_init)?;
    let dataset = load_dataset(&a.triplets)?;
    let set = encode_dataset(&model, &dataset)?;
    let overall = evaluate_encoded(&model, &set)?;
    let mut tiers = Vec::new();
    for tier in 1..=5u8 {
        let sub: Vec<_> = set.iter().filter(|t| t.tier == tier).cloned().collect();
        if !sub.is_empty() {
            tiers.push(json!({ "tier": tier, "eval": evaluate_encoded(&model, &sub)? }));
        }
    }
    let report = json!({ "overall": overall, "tiers": tiers });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(out) = &a.out {
        write_bytes(out, text.as_bytes())?;
        let mut inputs: Vec<&Path> = vec![&a.triplets];
        inputs.extend(a.model.as_deref());
        write_manifest("eval", a.random_init, &json!({ "random_init": a.random_init }), &inputs, &[out])?;
    }
    print!("{text}");
    Ok(())
}

fn camera_for(model: &SeanNet) -> CameraConfig {
    CameraConfig {
        feature_dim: model.config.visual_dim,
        ..CameraConfig::default()
    }
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let world = load_world(&a.world)?;
    let camera = camera_for(&model);
    let stats = similarity_stats(&model, &world, &camera, a.n_pairs, a.seed)?;
    write_bytes(&a.out, stats.to_csv().as_bytes())?;
    let config = json!({ "n_pairs": a.n_pairs, "camera": camera });
    write_manifest("stats", Some(a.seed), &config, &[&a.model, &a.world], &[&a.out])?;
    let at = |k| stats.mean_at_distance(k).map_or_else(|| "none".into(), |v| format!("{v:.6}"));
    println!("stats mean_d0={} mean_d1={} mean_d2={} out={}", at(0), at(1), at(2), a.out.display());
    Ok(())
}

fn cmd_select_threshold(a: SelectThresholdArgs) -> Result<()> {
    let stats = SimilarityStats::from_csv(&read_text(&a.stats)?)?;
    let method = match a.method {
        MethodArg::MeanMinusStd => ThresholdMethod::MeanMinusStd { k: a.k },
        MethodArg::Midpoint => ThresholdMethod::Midpoint,
    };
    let eps = select_threshold(&stats, method)?;
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&json!({ "threshold": eps, "method": method }))? + "\n";
        write_bytes(out, text.as_bytes())?;
        write_manifest("select-threshold", None, &method, &[&a.stats], &[out])?;
    }
    println!("{eps}");
    Ok(())
}

fn cmd_build_map(a: BuildMapArgs) -> Result<()> {
    let world = load_world(&a.world)?;
    let rotation = RotationModel {
        full: !a.quarter_turns_only,
        ..RotationModel::default()
    };
    let camera = CameraConfig::default();
    let map = build_topo_map(&world, &default_places(&world, a.stride), &camera, rotation)?;
    let text = serde_json::to_string(&map)? + "\n";
    write_bytes(&a.out, text.as_bytes())?;
    let config = json!({ "stride": a.stride, "rotation": rotation, "camera": camera });
    write_manifest("build-map", None, &config, &[&a.world], &[&a.out])?;
    println!("map nodes={} edges={} out={}", map.nodes.len(), map.edges.len(), a.out.display());
    Ok(())
}

fn load_map(path: &Path) -> Result<TopoMap> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn trial_config(t: &TrialArgs, camera: CameraConfig) -> Result<TrialConfig> {
    if !(0.0..=1.0).contains(&t.p_err) {
        return Err(Error::Usage(format!("--p-err must lie in [0, 1], got {}", t.p_err)));
    }
    Ok(TrialConfig {
        k_max: t.k_max,
        trial_cap: t.trial_cap,
        p_err: t.p_err,
        camera,
    })
}

enum AnyLocalizer {
    Truth(GroundTruthLocalizer),
    Model(SeanNet, f64),
}

impl AnyLocalizer {
    fn new(a: &LocalizerArgs) -> Result<Self> {
        if a.model.is_none() && a.random_init.is_none() {
            return Ok(AnyLocalizer::Truth(GroundTruthLocalizer));
        }
        Ok(AnyLocalizer::Model(model_or_random(a.model.as_deref(), a.random_init)?, a.threshold))
    }

    fn camera(&self) -> CameraConfig {
        match self {
            AnyLocalizer::Truth(_) => CameraConfig::default(),
            AnyLocalizer::Model(m, _) => camera_for(m),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            AnyLocalizer::Truth(_) => "ground_truth",
            AnyLocalizer::Model(..) => "model",
        }
    }

    fn with<T>(&self, f: impl FnOnce(&mut dyn LocalizerDyn) -> Result<T>) -> Result<T> {
        match self {
            AnyLocalizer::Truth(g) => f(&mut Wrap(*g)),
            AnyLocalizer::Model(m, eps) => f(&mut Wrap(SimilarityLocalizer::new(m, *eps))),
        }
    }
}

/// Object-safe adapter so one code path serves every localizer.
trait LocalizerDyn {
    fn benchmark(
        &mut self,
        worlds: &[WorldState],
        maps: &[TopoMap],
        trials: &[crate::navigation::TrialSpec],
        mode: BenchmarkMode,
        config: &TrialConfig,
    ) -> Result<BenchmarkReport>;

    fn trial(
        &mut self,
        world: &WorldState,
        map: &TopoMap,
        start: SubNodeId,
        goal: SubNodeId,
        config: &TrialConfig,
        seed: u64,
    ) -> Result<crate::navigation::TrialResult>;
}

struct Wrap<L>(L);

impl<L: Localizer> LocalizerDyn for Wrap<L> {
    fn benchmark(
        &mut self,
        worlds: &[WorldState],
        maps: &[TopoMap],
        trials: &[crate::navigation::TrialSpec],
        mode: BenchmarkMode,
        config: &TrialConfig,
    ) -> Result<BenchmarkReport> {
        run_benchmark(worlds, maps, &mut self.0, trials, mode, config)
    }

    fn trial(
        &mut self,
        world: &WorldState,
        map: &TopoMap,
        start: SubNodeId,
        goal: SubNodeId,
        config: &TrialConfig,
        seed: u64,
    ) -> Result<crate::navigation::TrialResult> {
        self.0.prepare(map)?;
        run_trial(world, map, &self.0, start, goal, config, seed)
    }
}

fn model_inputs<'a>(a: &'a LocalizerArgs, rest: &[&'a Path]) -> Vec<&'a Path> {
    let mut v: Vec<&Path> = rest.to_vec();
    v.extend(a.model.as_deref());
    v
}

fn cmd_navigate(a: NavigateArgs) -> Result<()> {
    let world = load_world(&a.world)?;
    let map = load_map(&a.map)?;
    let start: SubNodeId = a.start.parse()?;
    let goal: SubNodeId = a.goal.parse()?;
    let localizer = AnyLocalizer::new(&a.localizer)?;
    let config = trial_config(&a.trial, localizer.camera())?;
    let result = localizer.with(|l| l.trial(&world, &map, start, goal, &config, a.seed))?;
    let text = serde_json::to_string_pretty(&result)? + "\n";
    if let Some(out) = &a.out {
        write_bytes(out, text.as_bytes())?;
        let run_config = json!({
            "start": start, "goal": goal, "localizer": localizer.label(),
            "threshold": a.localizer.threshold, "random_init": a.localizer.random_init, "trial": config,
        });
        let inputs = model_inputs(&a.localizer, &[&a.world, &a.map]);
        write_manifest("navigate", Some(a.seed), &run_config, &inputs, &[out])?;
    }
    println!(
        "outcome={} steps={} final_pose={}",
        serde_json::to_value(result.outcome)?.as_str().unwrap_or("?"),
        result.steps,
        result.final_pose
    );
    Ok(())
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::Usage("--trials must be positive".into()));
    }
    let worlds: Vec<WorldState> = a.worlds.iter().map(|p| load_world(p)).collect::<Result<_>>()?;
    let localizer = AnyLocalizer::new(&a.localizer)?;
    let config = trial_config(&a.trial, localizer.camera())?;
    let maps: Vec<TopoMap> = worlds
        .iter()
        .map(|w| build_topo_map(w, &default_places(w, a.stride), &config.camera, RotationModel::default()))
        .collect::<Result<_>>()?;
    let modes: &[BenchmarkMode] = match a.mode {
        ModeArg::Neighbor => &[BenchmarkMode::Neighbor],
        ModeArg::Arbitrary => &[BenchmarkMode::Arbitrary],
        ModeArg::Both => &[BenchmarkMode::Neighbor, BenchmarkMode::Arbitrary],
    };
    let mut reports = Vec::new();
    for &mode in modes {
        let trials = sample_trials(&maps, a.trials, mode, a.seed)?;
        reports.push(localizer.with(|l| l.benchmark(&worlds, &maps, &trials, mode, &config))?);
    }
    let mut csv = format!("{}\n", BenchmarkReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_bytes(&a.out, csv.as_bytes())?;
    let json_path = sibling(&a.out, ".json");
    write_bytes(&json_path, (serde_json::to_string_pretty(&reports)? + "\n").as_bytes())?;
    let run_config = json!({
        "stride": a.stride, "trials": a.trials, "localizer": localizer.label(),
        "threshold": a.localizer.threshold, "random_init": a.localizer.random_init, "trial": config,
    });
    let world_paths: Vec<&Path> = a.worlds.iter().map(PathBuf::as_path).collect();
    let inputs = model_inputs(&a.localizer, &world_paths);
    write_manifest("benchmark", Some(a.seed), &run_config, &inputs, &[&a.out, &json_path])?;
    print!("{csv}");
    Ok(())
}

//! Command-line front end.
//!
//! Exit status is 0 on success, 2 for usage errors (bad flags, invalid
//! parameter values, bad config files) and 1 for data errors.

pub mod config;
pub mod tune;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clearmot::evaluate_with_threshold;
use crate::error::Error;
use crate::features::{attach_external, generate_pairs, PairGenConfig, PairSample, CONTEXT_DIM};
use crate::flow::{track_sequence, CostConfig, ExternalScorer, GbmScorer, Lp2dScorer, PairScorer};
use crate::gbm::{cross_val_predict, evaluate_auc, train, GbmConfig, GbmModel, Samples};
use crate::model::{Detection, Sequence, Trajectory};
use crate::mot_io::{self, MotKind, ScoreTable};
use config::{parse_grid, Settings};
use tune::{grid_points, render_table, sweep, TuneSequence};

/// Environment variable capping worker threads (0 = automatic).
pub const THREADS_ENV: &str = "FLOWTRACK_THREADS";
/// Default distance scale of the 2D baseline, in pixels.
pub const DEFAULT_TAU: f64 = 100.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(Error::Config(_)) => 2,
            CliError::Data(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flowtrack", version, about = "Min-cost-flow multi-person tracking")]
pub struct Cli {
    /// Settings file with key=value lines; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labeled detection pairs from detections and ground truth.
    Pairs(PairsArgs),
    /// Train the pairwise association classifier.
    Train(TrainArgs),
    /// Track a sequence and write a MOT results file.
    Track(TrackArgs),
    /// Evaluate a results file against ground truth.
    Eval(EvalArgs),
    /// Sweep tracker costs over training sequences.
    Tune(TuneArgs),
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long)]
    pub det: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Optional external features per pair.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum frame gap of a pair.
    #[arg(long)]
    pub rewind: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// IoU for a detection to match ground truth.
    #[arg(long = "gt-iou")]
    pub gt_iou: Option<f64>,
    /// Negatives per positive: one value, or three for the
    /// cross-identity, true/false and false/false classes.
    #[arg(long = "neg-ratio")]
    pub neg_ratio: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub pairs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long = "min-leaf")]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also report leave-one-file-out AUC.
    #[arg(long)]
    pub stacked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Lp2d,
}

#[derive(Debug, Args)]
#[group(id = "scorer", required = true, multiple = false, args = ["model", "scores", "baseline"])]
pub struct TrackScorer {
    /// Trained association model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Pair probabilities, one value per line.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long)]
    pub vdet: Option<f64>,
    #[arg(long)]
    pub vlink: Option<f64>,
    #[arg(long)]
    pub cinout: Option<f64>,
    #[arg(long)]
    pub maxgap: Option<u32>,
    /// Distance scale of the 2D baseline, in pixels.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub det: PathBuf,
    #[command(flatten)]
    pub scorer: TrackScorer,
    /// External features fed to the model alongside the contextual ones.
    #[arg(long, requires = "model")]
    pub external: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub costs: CostArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub res: PathBuf,
    #[arg(long)]
    pub iou: Option<f64>,
}

#[derive(Debug, Args)]
#[group(id = "tune_scorer", required = true, multiple = false, args = ["model", "scores", "baseline"])]
pub struct TuneScorer {
    /// Trained association model. Sequences with a `scores.txt` supply
    /// external features when the model expects them.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Use each sequence's `scores.txt` as pair probabilities.
    #[arg(long)]
    pub scores: bool,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Directory of sequences laid out as `<name>/det/det.txt` and
    /// `<name>/gt/gt.txt`.
    #[arg(long = "train-dir")]
    pub train_dir: PathBuf,
    #[command(flatten)]
    pub scorer: TuneScorer,
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub costs: CostArgs,
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(Error::InvalidInput(format!(
            "cannot read {}",
            path.display()
        ))))
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())).into())
}

fn context(path: &Path, e: Error) -> CliError {
    match e {
        Error::Parse { line, message } => {
            CliError::Data(Error::InvalidInput(format!("{}:{line}: {message}", path.display())))
        }
        other => CliError::Data(other),
    }
}

fn read_mot(path: &Path, kind: MotKind) -> Result<mot_io::MotFile, CliError> {
    let file = mot_io::parse_mot_file(open(path)?, kind).map_err(|e| context(path, e))?;
    if file.rejected > 0 {
        eprintln!(
            "warning: {}: skipped {} boxes with non-positive size",
            path.display(),
            file.rejected
        );
    }
    Ok(file)
}

fn read_scores(path: &Path, detections: &[Detection]) -> Result<ScoreTable, CliError> {
    let records = mot_io::parse_score_file(open(path)?).map_err(|e| context(path, e))?;
    ScoreTable::bind(records, detections).map_err(|e| context(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())).into())
}

/// Header of pair files. External values, if any, follow as `ext_1..`.
pub const PAIRS_HEADER: &str = "label,dframe,rel_size_w,rel_size_h,dpos_x,dpos_y,vel_x,vel_y";

pub fn pairs_to_csv(pairs: &[PairSample]) -> String {
    let ext = pairs.first().and_then(|p| p.external.as_ref()).map_or(0, Vec::len);
    let mut s = String::from(PAIRS_HEADER);
    for k in 1..=ext {
        let _ = write!(s, ",ext_{k}");
    }
    s.push('\n');
    for p in pairs {
        let _ = write!(s, "{},{}", u8::from(p.label), p.frame_gap());
        for v in p.context.to_array() {
            let _ = write!(s, ",{v}");
        }
        for v in p.external.iter().flatten() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Reads a pair file into model-ready samples (`[external..., context...]`).
pub fn samples_from_csv(text: &str) -> Result<Samples, Error> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("pair file is empty".into()))?;
    let header = header.trim_end_matches('\r');
    if !header.starts_with(PAIRS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: "not a pair file header".into(),
        });
    }
    let columns = header.split(',').count();
    let mut samples = Samples::default();
    for (n, line) in lines {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: n + 1, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(bad(format!("expected {columns} fields, found {}", fields.len())));
        }
        let label = match fields[0].trim() {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("label must be 0 or 1, got {other:?}"))),
        };
        let values = fields[2..]
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|_| bad(format!("bad number {f:?}"))))
            .collect::<Result<Vec<f64>, Error>>()?;
        let (context, external) = values.split_at(CONTEXT_DIM);
        let mut row = external.to_vec();
        row.extend_from_slice(context);
        samples.rows.push(row);
        samples.labels.push(label);
    }
    Ok(samples)
}

fn cost_config(args: &CostArgs, settings: &Settings) -> Result<CostConfig, CliError> {
    let d = CostConfig::default();
    let cfg = CostConfig {
        v_det: settings.pick(args.vdet, "vdet", d.v_det)?,
        v_link: settings.pick(args.vlink, "vlink", d.v_link)?,
        c_in_out: settings.pick(args.cinout, "cinout", d.c_in_out)?,
        max_link_gap: settings.pick(args.maxgap, "maxgap", d.max_link_gap)?,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn lp2d(args: &CostArgs, settings: &Settings) -> Result<Lp2dScorer, CliError> {
    Lp2dScorer::new(settings.pick(args.tau, "tau", DEFAULT_TAU)?).map_err(|e| CliError::Usage(e.to_string()))
}

fn read_model(path: &Path) -> Result<GbmModel, CliError> {
    mot_io::read_model(open(path)?).map_err(|e| context(path, e))
}

fn cmd_pairs(args: &PairsArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    for p in [Some(&args.det), Some(&args.gt), args.scores.as_ref()]
        .into_iter()
        .flatten()
    {
        require_file(p)?;
    }
    let d = PairGenConfig::default();
    let ratio_text = args
        .neg_ratio
        .clone()
        .or_else(|| settings.raw("neg-ratio").map(String::from));
    let negative_ratio = match ratio_text {
        None => d.negative_ratio,
        Some(text) => {
            let vals: Vec<f64> = text
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad --neg-ratio {text:?}")))?;
            match vals.as_slice() {
                [r] => [*r; 3],
                [a, b, c] => [*a, *b, *c],
                _ => return Err(CliError::Usage("--neg-ratio takes one or three values".into())),
            }
        }
    };
    let cfg = PairGenConfig {
        rewind_window: settings.pick(args.rewind, "rewind", d.rewind_window)?,
        gt_match_iou: settings.pick(args.gt_iou, "gt-iou", d.gt_match_iou)?,
        negative_ratio,
        seed: settings.pick(args.seed, "seed", d.seed)?,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let dets = read_mot(&args.det, MotKind::Detections)?.detections();
    let gt = read_mot(&args.gt, MotKind::GroundTruth)?
        .labeled()
        .map_err(|e| context(&args.gt, e))?;
    let name = args.det.display().to_string();
    let seq = Sequence::new(name, None, dets, Some(gt))?;
    let mut pairs = generate_pairs(&seq, &cfg)?;
    if let Some(path) = &args.scores {
        let table = read_scores(path, &seq.detections)?;
        attach_external(&mut pairs, &table).map_err(|e| context(path, e))?;
    }
    write_file(&args.out, pairs_to_csv(&pairs).as_bytes())?;
    let positives = pairs.iter().filter(|p| p.label).count();
    writeln!(
        out,
        "pairs: {} ({} positive, {} negative)",
        pairs.len(),
        positives,
        pairs.len() - positives
    )
    .map_err(Error::from)?;
    Ok(())
}

fn gbm_config(args: &TrainArgs, settings: &Settings) -> Result<GbmConfig, CliError> {
    let d = GbmConfig::default();
    let cfg = GbmConfig {
        n_trees: settings.pick(args.trees, "trees", d.n_trees)?,
        max_depth: settings.pick(args.depth, "depth", d.max_depth)?,
        learning_rate: settings.pick(args.lr, "lr", d.learning_rate)?,
        min_samples_leaf: settings.pick(args.min_leaf, "min-leaf", d.min_samples_leaf)?,
        subsample: settings.pick(args.subsample, "subsample", d.subsample)?,
        seed: settings.pick(args.seed, "seed", d.seed)?,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn fmt_auc(labels: &[bool], scores: &[f64]) -> String {
    evaluate_auc(labels, scores).map_or_else(|_| "n/a".to_string(), |a| format!("{a:.4}"))
}

fn cmd_train(args: &TrainArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    for p in &args.pairs {
        require_file(p)?;
    }
    let cfg = gbm_config(args, settings)?;
    let mut groups = Vec::with_capacity(args.pairs.len());
    for path in &args.pairs {
        let text = fs::read_to_string(path).map_err(|e| context(path, e.into()))?;
        groups.push(samples_from_csv(&text).map_err(|e| context(path, e))?);
    }
    let mut all = Samples::default();
    for g in &groups {
        all.rows.extend(g.rows.iter().cloned());
        all.labels.extend_from_slice(&g.labels);
    }
    let report = train(&all, &cfg)?;
    if report.degenerate {
        eprintln!("warning: training data has a single class; wrote a constant model");
    }
    let scores = all
        .rows
        .iter()
        .map(|x| report.model.predict(x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    let positives = all.labels.iter().filter(|&&y| y).count();
    let _ = writeln!(text, "samples: {} ({positives} positive)", all.len());
    let _ = writeln!(text, "trees: {}", report.model.trees.len());
    if let Some(loss) = report.stage_log_loss.last() {
        let _ = writeln!(text, "training log-loss: {loss:.6}");
    }
    let _ = writeln!(text, "training AUC: {}", fmt_auc(&all.labels, &scores));

    if args.stacked {
        if groups.len() < 2 {
            return Err(CliError::Usage("--stacked needs at least two pair files".into()));
        }
        let oof = cross_val_predict(&groups, &cfg)?;
        let _ = writeln!(text, "{:>4} {:>8} {:>8}  file", "fold", "samples", "AUC");
        for (k, (g, pred)) in groups.iter().zip(&oof).enumerate() {
            let _ = writeln!(
                text,
                "{:>4} {:>8} {:>8}  {}",
                k + 1,
                g.len(),
                fmt_auc(&g.labels, pred),
                args.pairs[k].display()
            );
        }
        let flat: Vec<f64> = oof.into_iter().flatten().collect();
        let labels: Vec<bool> = groups.iter().flat_map(|g| g.labels.iter().copied()).collect();
        let _ = writeln!(text, "out-of-fold AUC: {}", fmt_auc(&labels, &flat));
    }
    write_file(&args.out, mot_io::model_to_string(&report.model).as_bytes())?;
    out.write_all(text.as_bytes()).map_err(Error::from)?;
    Ok(())
}

fn cmd_track(args: &TrackArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let inputs = [
        Some(&args.det),
        args.scorer.model.as_ref(),
        args.scorer.scores.as_ref(),
        args.external.as_ref(),
    ];
    for p in inputs.into_iter().flatten() {
        require_file(p)?;
    }
    let costs = cost_config(&args.costs, settings)?;
    let dets = read_mot(&args.det, MotKind::Detections)?.detections();

    let model;
    let table;
    let scorer: Box<dyn PairScorer> = if let Some(path) = &args.scorer.model {
        model = read_model(path)?;
        table = match &args.external {
            Some(p) => Some(read_scores(p, &dets)?),
            None => None,
        };
        Box::new(GbmScorer::new(&model, table.as_ref())?)
    } else if let Some(path) = &args.scorer.scores {
        table = Some(read_scores(path, &dets)?);
        Box::new(ExternalScorer::new(table.as_ref().expect("just set"))?)
    } else {
        Box::new(lp2d(&args.costs, settings)?)
    };

    let result = track_sequence(&dets, scorer.as_ref(), &costs)?;
    write_file(&args.out, mot_io::results_to_string(&result.trajectories)?.as_bytes())?;
    writeln!(
        out,
        "trajectories: {}\ntotal cost: {}\ngraph: {} nodes, {} edges",
        result.trajectories.len(),
        result.total_cost,
        result.node_count,
        result.edge_count
    )
    .map_err(Error::from)?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    require_file(&args.gt)?;
    require_file(&args.res)?;
    let threshold = settings.pick(args.iou, "iou", crate::clearmot::DEFAULT_IOU_THRESHOLD)?;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CliError::Usage(format!("--iou must lie in (0, 1], got {threshold}")));
    }
    let gt = read_mot(&args.gt, MotKind::GroundTruth)?
        .trajectories()
        .map_err(|e| context(&args.gt, e))?;
    let hyp = read_mot(&args.res, MotKind::Results)?
        .trajectories()
        .map_err(|e| context(&args.res, e))?;
    let report = evaluate_with_threshold(&gt, &hyp, threshold)?;
    write!(out, "{report}\n\n{}", report.to_csv()).map_err(Error::from)?;
    Ok(())
}

/// A sequence directory of the training set.
pub struct SequenceFiles {
    pub name: String,
    pub det: PathBuf,
    pub gt: PathBuf,
    pub scores: Option<PathBuf>,
}

/// Lists `<dir>/<name>/{det/det.txt, gt/gt.txt}` sequences sorted by name.
pub fn discover_sequences(dir: &Path) -> Result<Vec<SequenceFiles>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", dir.display())))?;
    let mut seqs = Vec::new();
    for entry in entries {
        let path = entry.map_err(Error::from)?.path();
        let det = path.join("det").join("det.txt");
        let gt = path.join("gt").join("gt.txt");
        if det.is_file() && gt.is_file() {
            let scores = Some(path.join("scores.txt")).filter(|p| p.is_file());
            seqs.push(SequenceFiles {
                name: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                det,
                gt,
                scores,
            });
        }
    }
    seqs.sort_by(|a, b| a.name.cmp(&b.name));
    if seqs.is_empty() {
        return Err(Error::InvalidInput(format!("no sequences under {}", dir.display())).into());
    }
    Ok(seqs)
}

struct LoadedSequence {
    name: String,
    detections: Vec<Detection>,
    ground_truth: Vec<Trajectory>,
    table: Option<ScoreTable>,
}

fn cmd_tune(args: &TuneArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(m) = &args.scorer.model {
        require_file(m)?;
    }
    let grid_text = match (&args.grid, settings.raw("grid")) {
        (Some(g), _) => g.clone(),
        (None, Some(g)) => g.to_string(),
        (None, None) => "vdet=0.3:0.7:0.1,cinout=0.2:2:0.2".to_string(),
    };
    let axes = parse_grid(&grid_text)?;
    let base = cost_config(&args.costs, settings)?;
    let points = grid_points(&axes, &base).map_err(|e| CliError::Usage(e.to_string()))?;
    let model = args.scorer.model.as_deref().map(read_model).transpose()?;
    let wants_external = model.as_ref().is_some_and(|m| m.feature_count > CONTEXT_DIM);
    let baseline = match args.scorer.baseline {
        Some(Baseline::Lp2d) => Some(lp2d(&args.costs, settings)?),
        None => None,
    };

    let mut loaded = Vec::new();
    for files in discover_sequences(&args.train_dir)? {
        let detections = read_mot(&files.det, MotKind::Detections)?.detections();
        let ground_truth = read_mot(&files.gt, MotKind::GroundTruth)?
            .trajectories()
            .map_err(|e| context(&files.gt, e))?;
        let table = if args.scorer.scores || wants_external {
            let path = files
                .scores
                .as_ref()
                .ok_or_else(|| CliError::Data(Error::InvalidInput(format!("{}: missing scores.txt", files.name))))?;
            Some(read_scores(path, &detections)?)
        } else {
            None
        };
        loaded.push(LoadedSequence {
            name: files.name,
            detections,
            ground_truth,
            table,
        });
    }

    let mut seqs = Vec::with_capacity(loaded.len());
    for l in &loaded {
        let scorer: Box<dyn PairScorer> = match (&model, &baseline) {
            (Some(m), _) => Box::new(GbmScorer::new(m, l.table.as_ref())?),
            (None, Some(b)) => Box::new(*b),
            (None, None) => Box::new(ExternalScorer::new(l.table.as_ref().expect("scores loaded"))?),
        };
        seqs.push(TuneSequence {
            name: l.name.clone(),
            detections: l.detections.clone(),
            ground_truth: l.ground_truth.clone(),
            scorer,
        });
    }
    let result = sweep(&seqs, &points)?;
    out.write_all(render_table(&result).as_bytes()).map_err(Error::from)?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Pairs(a) => cmd_pairs(a, &settings, out),
        Command::Train(a) => cmd_train(a, &settings, out),
        Command::Track(a) => cmd_track(a, &settings, out),
        Command::Eval(a) => cmd_eval(a, &settings, out),
        Command::Tune(a) => cmd_tune(a, &settings, out),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {value:?}")))?;
    // 0 leaves rayon's automatic choice in place.
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = configure_threads().and_then(|()| execute(&cli, &mut out));
    let _ = out.flush();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

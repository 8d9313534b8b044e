use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use osm::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use osm::dump::{format_hidden, write_header, write_record, SampleRecord};
use osm::parallel::{self, thread_pool, Rayon};
use osm::ratings::{load_ratings, LoadOptions, RatingsFormat};
use osm::report::{write_eval_report, write_tsv, KeyValues};
use osm_core::combinatorics::{fubini, DEFAULT_ENUMERATION_CAP};
use osm_core::latent::LatentModel;
use osm_core::learning::{BlockRecord, CfParams, TrainConfig, Trainer};
use osm_core::oracle::ExactDistribution;
use osm_core::partition_fn::{exact_log_z_latent, AisConfig, Schedule};
use osm_core::pipeline::{
    entropy_filter, evaluate_user, grade_ratings, summarize, train_test_split, GradedDataset, MetricKind,
    RatingScale, Split, SplitSpec, UserSplit, DEFAULT_GRADES,
};
use osm_core::rng::stream_rng;
use osm_core::sampler::SamplerConfig;
use osm_core::{LinearPotentials, OrderedPartition, PairModel, WorthModel};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "osm", version, about = "Ordered sets model: training, evaluation, sampling and partition functions")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "OSM_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a latent OSM on a ratings file and write a checkpoint.
    Train(TrainArgs),
    /// Rank held-out items with a checkpoint and report ranking metrics.
    Eval(EvalArgs),
    /// Train and evaluate for several hidden sizes; writes a TSV table.
    Sweep(SweepArgs),
    /// Draw Markov chain samples from a model.
    Sample(SampleArgs),
    /// Estimate log Z by annealed importance sampling.
    EstimateZ(EstimateZArgs),
    /// Exact quantities of small models by enumeration.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ScaleArg {
    /// 0.5 to 5 in half stars.
    Movielens,
    /// 1 to 5.
    FiveStar,
}

impl ScaleArg {
    fn scale(self) -> RatingScale {
        match self {
            ScaleArg::Movielens => RatingScale::MOVIELENS,
            ScaleArg::FiveStar => RatingScale::FIVE_STAR,
        }
    }
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Ratings file.
    #[arg(long)]
    data: PathBuf,
    /// `movielens` (user::item::rating::timestamp) or `csv`; guessed from
    /// the extension when omitted.
    #[arg(long)]
    format: Option<RatingsFormat>,
    #[arg(long, value_enum, default_value = "movielens")]
    scale: ScaleArg,
    /// Fail on any malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Training items per user (10, 20 or 50 pair with 20, 30 and 60
    /// minimum ratings).
    #[arg(long, default_value_t = 10)]
    n_train: usize,
    /// Override the minimum ratings per user.
    #[arg(long)]
    min_ratings: Option<usize>,
    /// Keep only the first N users of the file.
    #[arg(long)]
    max_users: Option<usize>,
    /// Keep every item instead of dropping the low-entropy half.
    #[arg(long)]
    no_entropy_filter: bool,
    /// Seed of the train/test split (and of training).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct TrainParams {
    /// Hidden units.
    #[arg(long, default_value_t = 10)]
    hidden: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Users per parameter update.
    #[arg(long, default_value_t = 100)]
    block: usize,
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    /// Joint sweeps of each user's chain per update.
    #[arg(long, default_value_t = 1)]
    chain_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
}

impl TrainParams {
    fn config(&self, hidden: usize, seed: u64) -> TrainConfig {
        let mut c = TrainConfig::new(hidden, seed);
        c.learning_rate = self.lr;
        c.block_size = self.block;
        c.epochs = self.epochs;
        c.chain_steps_per_update = self.chain_steps;
        c.l2 = self.l2;
        c
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    train: TrainParams,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-block training log (TSV).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "ndcg@1,ndcg@5,ndcg@10,err")]
    metrics: String,
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-user metric values (TSV).
    #[arg(long)]
    details: Option<PathBuf>,
    /// Evaluate users one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    train: TrainParams,
    /// Hidden sizes to train.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    sizes: Vec<usize>,
    #[arg(long, default_value = "ndcg@1,ndcg@5,ndcg@10,err")]
    metrics: String,
    /// TSV table of metric against hidden size.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Use a checkpoint restricted to `--items` instead of a toy model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Item indices of the checkpoint model (comma-separated).
    #[arg(long, value_delimiter = ',')]
    items: Vec<usize>,
    /// Objects of the toy model.
    #[arg(long)]
    n: Option<usize>,
    /// Hidden units of the toy model.
    #[arg(long, default_value_t = 0)]
    hidden: usize,
    /// Toy log-potentials are uniform on ±scale (0 gives the uniform model).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    model_seed: u64,
}

enum Model {
    Toy(LatentModel<PairModel>),
    Cf(LatentModel<WorthModel>),
}

impl ModelArgs {
    fn build(&self) -> Result<Model, Failure> {
        match (&self.model, self.n) {
            (Some(path), None) => {
                let c = load_checkpoint(path).map_err(Failure::data)?;
                if self.items.is_empty() {
                    return Err(Failure::usage(anyhow!("--model needs --items")));
                }
                Ok(Model::Cf(c.params.latent_model_for(&self.items)?))
            }
            (None, Some(n)) => {
                if !(self.scale >= 0.0 && self.scale.is_finite()) {
                    return Err(Failure::usage(anyhow!("--scale must be finite and non-negative")));
                }
                let mut rng = stream_rng(self.model_seed, 0);
                let base = PairModel::random_loglinear(n, self.scale, &mut rng);
                let hidden = (0..self.hidden)
                    .map(|_| PairModel::random_loglinear(n, self.scale, &mut rng))
                    .collect();
                Ok(Model::Toy(LatentModel::new(base, hidden)?))
            }
            _ => Err(Failure::usage(anyhow!("give either --model with --items, or --n"))),
        }
    }

    fn describe(&self, kv: &mut KeyValues) {
        match &self.model {
            Some(p) => {
                kv.push("model", p.display());
                kv.push(
                    "items",
                    self.items.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
                );
            }
            None => {
                kv.push("n", self.n.unwrap_or(0));
                kv.push("hidden", self.hidden);
                kv.push("scale", self.scale);
                kv.push("model_seed", self.model_seed);
            }
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sweeps per chain.
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    /// Defaults to a tenth of the steps.
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, default_value_t = 10)]
    thin: u64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Split-and-merge steps per sweep of a latent model; defaults to the
    /// object count.
    #[arg(long)]
    inner_steps: Option<usize>,
    /// Starting partition (e.g. `0,2>1`); all singletons in index order by default.
    #[arg(long)]
    init: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample dump; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ScheduleArg {
    Linear,
    Geometric,
}

#[derive(Args, Debug)]
struct EstimateZArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Temperature steps S.
    #[arg(long, default_value_t = 10_000)]
    temperatures: usize,
    /// Annealing runs R.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, value_enum, default_value = "linear")]
    schedule: ScheduleArg,
    #[arg(long)]
    inner_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report the exact value (small models only).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Print the number of ordered partitions of n objects.
    #[arg(long)]
    count: bool,
    /// Print the exact log partition function.
    #[arg(long)]
    log_z: bool,
    /// Print exact pairwise order and tie probabilities (TSV).
    #[arg(long)]
    marginals: bool,
    /// Print every partition with its probability.
    #[arg(long)]
    enumerate: bool,
    /// Largest object count to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_DATA,
            error: error.into(),
        }
    }
}

impl From<osm_core::Error> for Failure {
    fn from(e: osm_core::Error) -> Self {
        let code = match e {
            osm_core::Error::CapExceeded { .. } => EXIT_CAP,
            osm_core::Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, error: e.into() }
    }
}

impl From<osm::Error> for Failure {
    fn from(e: osm::Error) -> Self {
        match e {
            osm::Error::Model(m) => m.into(),
            other => Failure::data(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::data(e)
    }
}

type CmdResult = Result<(), Failure>;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display())).map_err(Failure::data)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn metrics_arg(s: &str) -> Result<Vec<MetricKind>, Failure> {
    let m = MetricKind::parse_list(s).map_err(Failure::usage)?;
    if m.is_empty() {
        return Err(Failure::usage(anyhow!("no metrics requested")));
    }
    Ok(m)
}

struct Prepared {
    graded: GradedDataset,
    split: Split,
}

fn prepare(d: &DataArgs) -> Result<Prepared, Failure> {
    let spec = match d.min_ratings {
        Some(m) => SplitSpec::new(d.n_train, m, d.seed)?,
        None => {
            let s = SplitSpec::standard(d.n_train, d.seed);
            s.validate()?;
            s
        }
    };
    let format = d.format.unwrap_or_else(|| RatingsFormat::from_path(&d.data));
    let mut opts = LoadOptions::new(format);
    opts.scale = d.scale.scale();
    opts.strict = d.strict;
    let loaded = load_ratings(&d.data, &opts)?;
    let mut dataset = loaded.dataset;
    if let Some(n) = d.max_users {
        dataset = dataset.take_users(n);
    }
    info!(
        "{} ratings from {} users on {} items ({} malformed lines skipped)",
        dataset.n_ratings(),
        dataset.n_users(),
        dataset.n_items(),
        loaded.malformed.len()
    );
    let mut graded = grade_ratings(&dataset, DEFAULT_GRADES)?;
    if !d.no_entropy_filter {
        graded = entropy_filter(&graded);
        info!("{} items after the entropy filter", graded.n_items());
    }
    let split = train_test_split(&graded, &spec)?;
    info!(
        "{} users kept, {} dropped with fewer than {} ratings",
        split.users.len(),
        split.dropped_users,
        spec.min_ratings
    );
    if split.users.is_empty() {
        return Err(Failure::data(anyhow!("no user has at least {} ratings", spec.min_ratings)));
    }
    Ok(Prepared { graded, split })
}

fn train_model(
    prep: &Prepared,
    cfg: TrainConfig,
    pool: &rayon::ThreadPool,
    mut on_block: impl FnMut(&BlockRecord) -> io::Result<()>,
) -> Result<CfParams, Failure> {
    let users = prep.split.train_data()?;
    let epochs = cfg.epochs;
    let mut trainer = Trainer::new(prep.graded.n_items(), users, cfg)?;
    for _ in 0..epochs {
        for _ in 0..trainer.blocks_per_epoch() {
            let rec = pool.install(|| trainer.step_block(&Rayon))?.clone();
            info!(
                "epoch {} block {}: disagreement {:.4}, split/merge acceptance {:.3}/{:.3}",
                rec.epoch, rec.block, rec.disagreement, rec.split_acceptance, rec.merge_acceptance
            );
            on_block(&rec)?;
        }
    }
    Ok(trainer.params().clone())
}

const LOG_COLUMNS: [&str; 7] = [
    "epoch",
    "block",
    "n_users",
    "disagreement",
    "split_acceptance",
    "merge_acceptance",
    "gradient_norm",
];

fn log_row(r: &BlockRecord) -> Vec<String> {
    vec![
        r.epoch.to_string(),
        r.block.to_string(),
        r.n_users.to_string(),
        r.disagreement.to_string(),
        r.split_acceptance.to_string(),
        r.merge_acceptance.to_string(),
        r.gradient_norm.to_string(),
    ]
}

fn cmd_train(a: &TrainArgs, pool: &rayon::ThreadPool) -> CmdResult {
    let prep = prepare(&a.data)?;
    let cfg = a.train.config(a.train.hidden, a.data.seed);
    cfg.validate()?;
    let mut log_file = match &a.log {
        Some(p) => {
            let mut w = output(Some(p))?;
            writeln!(w, "{}", LOG_COLUMNS.join("\t"))?;
            Some(w)
        }
        None => None,
    };
    let params = train_model(&prep, cfg, pool, |r| match log_file.as_mut() {
        Some(w) => writeln!(w, "{}", log_row(r).join("\t")),
        None => Ok(()),
    })?;
    if let Some(mut w) = log_file {
        w.flush()?;
    }
    let ckpt = Checkpoint {
        params,
        seed: Some(a.data.seed),
        item_ids: Some(prep.graded.item_ids.clone()),
    };
    save_checkpoint(&a.out, &ckpt)?;
    info!("checkpoint written to {}", a.out.display());
    Ok(())
}

/// Maps the users' items into checkpoint indices, dropping unknown items
/// and users left without training or test items.
fn remap_users(prep: &Prepared, ckpt: &Checkpoint) -> Result<Vec<UserSplit>, Failure> {
    let map: Vec<Option<usize>> = match &ckpt.item_ids {
        Some(ids) => {
            let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            prep.graded.item_ids.iter().map(|id| index.get(id).copied()).collect()
        }
        None if ckpt.params.n_items() == prep.graded.n_items() => (0..prep.graded.n_items()).map(Some).collect(),
        None => {
            return Err(Failure::data(anyhow!(
                "checkpoint has {} items without ids, data has {}",
                ckpt.params.n_items(),
                prep.graded.n_items()
            )))
        }
    };
    let remap = |v: &[(usize, u8)]| -> Vec<(usize, u8)> { v.iter().filter_map(|&(i, g)| map[i].map(|j| (j, g))).collect() };
    let users: Vec<UserSplit> = prep
        .split
        .users
        .iter()
        .map(|u| UserSplit {
            user: u.user,
            train: remap(&u.train),
            test: remap(&u.test),
        })
        .filter(|u| !u.train.is_empty() && !u.test.is_empty())
        .collect();
    if users.len() < prep.split.users.len() {
        warn!("{} users have no items known to the model", prep.split.users.len() - users.len());
    }
    if users.is_empty() {
        return Err(Failure::data(anyhow!("no user shares items with the model")));
    }
    Ok(users)
}

fn evaluate(
    params: &CfParams,
    users: &[UserSplit],
    metrics: &[MetricKind],
    sequential: bool,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Vec<f64>>, Failure> {
    let m = params.latent_model();
    Ok(if sequential {
        users.iter().map(|u| evaluate_user(&m, u, metrics)).collect::<osm_core::Result<_>>()?
    } else {
        pool.install(|| parallel::evaluate_users(&m, users, metrics))?
    })
}

fn cmd_eval(a: &EvalArgs, pool: &rayon::ThreadPool) -> CmdResult {
    let metrics = metrics_arg(&a.metrics)?;
    let ckpt = load_checkpoint(&a.model)?;
    let prep = prepare(&a.data)?;
    let users = remap_users(&prep, &ckpt)?;
    let rows = evaluate(&ckpt.params, &users, &metrics, a.sequential, pool)?;
    let summaries = summarize(&rows, metrics.len());
    let mut header = KeyValues::new();
    header
        .push("model", a.model.display())
        .push("data", a.data.data.display())
        .push("n_train", a.data.n_train)
        .push("seed", a.data.seed)
        .push("hidden", ckpt.params.n_hidden());
    let mut w = output(a.out.as_deref())?;
    write_eval_report(&mut w, &header, &metrics.iter().copied().zip(summaries).collect::<Vec<_>>())?;
    w.flush()?;
    if let Some(p) = &a.details {
        let mut columns = vec!["user_id".to_string()];
        columns.extend(metrics.iter().map(ToString::to_string));
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        let table: Vec<Vec<String>> = users
            .iter()
            .zip(&rows)
            .map(|(u, r)| {
                std::iter::once(prep.graded.user_ids[u.user].to_string())
                    .chain(r.iter().map(ToString::to_string))
                    .collect()
            })
            .collect();
        let mut w = output(Some(p))?;
        write_tsv(&mut w, &cols, &table)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, pool: &rayon::ThreadPool) -> CmdResult {
    let metrics = metrics_arg(&a.metrics)?;
    let prep = prepare(&a.data)?;
    let mut table = Vec::new();
    for &k in &a.sizes {
        let cfg = a.train.config(k, a.data.seed);
        let params = train_model(&prep, cfg, pool, |_| Ok(()))?;
        let rows = evaluate(&params, &prep.split.users, &metrics, false, pool)?;
        for (m, s) in metrics.iter().zip(summarize(&rows, metrics.len())) {
            info!("hidden {k}: {m} = {:.4} ± {:.4}", s.mean, s.std_error);
            table.push(vec![
                k.to_string(),
                m.to_string(),
                s.mean.to_string(),
                s.std_error.to_string(),
                s.n.to_string(),
            ]);
        }
    }
    let mut w = output(Some(&a.out))?;
    writeln!(w, "# seed={} n_train={}", a.data.seed, a.data.n_train)?;
    write_tsv(&mut w, &["hidden", "metric", "mean", "std_error", "n_users"], &table)?;
    w.flush()?;
    Ok(())
}

fn sample_with<P: LinearPotentials + Sync>(
    m: &LatentModel<P>,
    a: &SampleArgs,
    header: &KeyValues,
    pool: &rayon::ThreadPool,
) -> CmdResult {
    let n = m.n_objects();
    let init = match &a.init {
        Some(s) => {
            let x: OrderedPartition = s.parse().map_err(Failure::usage)?;
            if x.n_objects() != n {
                return Err(Failure::usage(anyhow!("--init has {} objects, the model {n}", x.n_objects())));
            }
            x
        }
        None => OrderedPartition::singletons(n),
    };
    let cfg = SamplerConfig {
        steps: a.steps,
        burn_in: a.burn_in.unwrap_or(a.steps / 10),
        thin: a.thin,
        seed: a.seed,
    };
    cfg.validate()?;
    let mut w = output(a.out.as_deref())?;
    let mut fields: Vec<(&str, String)> = header.0.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    fields.push(("seed", a.seed.to_string()));
    fields.push(("steps", a.steps.to_string()));
    fields.push(("burn_in", cfg.burn_in.to_string()));
    fields.push(("thin", cfg.thin.to_string()));
    write_header(&mut w, &fields)?;
    if m.n_hidden() == 0 {
        let runs = pool.install(|| parallel::run_chains(&init, &m.base, &cfg, a.chains))?;
        for (c, run) in runs.iter().enumerate() {
            writeln!(
                w,
                "# chain={c} split_acceptance={} merge_acceptance={}",
                run.stats.split_acceptance(),
                run.stats.merge_acceptance()
            )?;
            for x in &run.samples {
                write_record(&mut w, &SampleRecord { partition: x.clone(), hidden: None })?;
            }
        }
    } else {
        let inner = a.inner_steps.unwrap_or(n).max(1);
        let runs = pool.install(|| parallel::run_latent_chains(&init, m, &cfg, a.chains, inner))?;
        for (c, run) in runs.iter().enumerate() {
            writeln!(
                w,
                "# chain={c} split_acceptance={} merge_acceptance={}",
                run.stats.split_acceptance(),
                run.stats.merge_acceptance()
            )?;
            for (x, h) in &run.samples {
                debug_assert_eq!(format_hidden(h).len(), m.n_hidden());
                write_record(
                    &mut w,
                    &SampleRecord {
                        partition: x.clone(),
                        hidden: Some(h.clone()),
                    },
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_sample(a: &SampleArgs, pool: &rayon::ThreadPool) -> CmdResult {
    let mut header = KeyValues::new();
    a.model.describe(&mut header);
    match a.model.build()? {
        Model::Toy(m) => sample_with(&m, a, &header, pool),
        Model::Cf(m) => sample_with(&m, a, &header, pool),
    }
}

fn estimate_with<P: LinearPotentials + Sync>(
    m: &LatentModel<P>,
    a: &EstimateZArgs,
    kv: &mut KeyValues,
    pool: &rayon::ThreadPool,
) -> CmdResult {
    let mut cfg = AisConfig::new(a.temperatures, a.runs, a.seed);
    cfg.schedule = match a.schedule {
        ScheduleArg::Linear => Schedule::Linear,
        ScheduleArg::Geometric => Schedule::Geometric,
    };
    cfg.inner_steps = a.inner_steps;
    let r = pool.install(|| parallel::ais_log_z(m, &cfg))?;
    kv.push("temperatures", a.temperatures)
        .push("runs", a.runs)
        .push("schedule", format!("{:?}", cfg.schedule).to_lowercase())
        .push("seed", a.seed)
        .push("log_z", r.log_z_estimate)
        .push("log_z0", r.log_z0)
        .push("ess", r.effective_sample_size);
    if a.exact {
        kv.push("log_z_exact", exact_log_z_latent(m)?);
    }
    Ok(())
}

fn cmd_estimate_z(a: &EstimateZArgs, pool: &rayon::ThreadPool) -> CmdResult {
    let mut kv = KeyValues::new();
    a.model.describe(&mut kv);
    match a.model.build()? {
        Model::Toy(m) => estimate_with(&m, a, &mut kv, pool)?,
        Model::Cf(m) => estimate_with(&m, a, &mut kv, pool)?,
    }
    let mut w = output(a.out.as_deref())?;
    kv.write(&mut w)?;
    w.flush()?;
    Ok(())
}

fn oracle_with<P: LinearPotentials>(m: &LatentModel<P>, a: &OracleArgs, w: &mut dyn Write) -> CmdResult {
    let d = ExactDistribution::latent_marginal_capped(m, a.cap)?;
    if a.log_z {
        writeln!(w, "log_z={}", d.log_z())?;
    }
    if a.marginals {
        writeln!(w, "i\tj\tp_above\tp_tied\tp_below")?;
        let n = m.n_objects();
        for i in 0..n {
            for j in i + 1..n {
                writeln!(
                    w,
                    "{i}\t{j}\t{}\t{}\t{}",
                    d.pair_order_marginal(i, j),
                    d.tie_marginal(i, j),
                    d.pair_order_marginal(j, i)
                )?;
            }
        }
    }
    if a.enumerate {
        for (x, p) in d.states().iter().zip(d.probs()) {
            writeln!(w, "{x}\t{p}")?;
        }
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> CmdResult {
    if !(a.count || a.log_z || a.marginals || a.enumerate) {
        return Err(Failure::usage(anyhow!("choose at least one of --count, --log-z, --marginals, --enumerate")));
    }
    let mut w = output(a.out.as_deref())?;
    if a.count {
        let n = match (a.model.n, &a.model.model) {
            (Some(n), _) => n,
            (None, Some(_)) => a.model.items.len(),
            (None, None) => return Err(Failure::usage(anyhow!("--count needs --n"))),
        };
        writeln!(w, "{}", fubini(n))?;
    }
    if a.log_z || a.marginals || a.enumerate {
        match a.model.build()? {
            Model::Toy(m) => oracle_with(&m, a, &mut w)?,
            Model::Cf(m) => oracle_with(&m, a, &mut w)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let pool = thread_pool(cli.threads).map_err(Failure::usage)?;
    match &cli.command {
        Command::Train(a) => cmd_train(a, &pool),
        Command::Eval(a) => cmd_eval(a, &pool),
        Command::Sweep(a) => cmd_sweep(a, &pool),
        Command::Sample(a) => cmd_sample(a, &pool),
        Command::EstimateZ(a) => cmd_estimate_z(a, &pool),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

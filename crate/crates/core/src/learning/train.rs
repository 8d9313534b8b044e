use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::latent::{gibbs_mh_step, LatentChain};
use crate::learning::{accumulate_stats, CfParams, GradientEstimate};
use crate::partition::{pairwise_disagreement, OrderedPartition};
use crate::rng::{stream_rng, ChainRng};
use crate::sampler::MoveStats;

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const FIRST_CHAIN_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Users per parameter update.
    pub block_size: usize,
    /// Joint sweeps of each user's chain per update.
    pub chain_steps_per_update: usize,
    pub epochs: usize,
    pub n_hidden: usize,
    /// L2 penalty on `(ν, u, W)`.
    pub l2: f64,
    pub seed: u64,
    /// Split-and-merge steps per sweep; defaults to the user's item count.
    pub inner_steps: Option<usize>,
}

impl TrainConfig {
    pub fn new(n_hidden: usize, seed: u64) -> Self {
        Self {
            learning_rate: 0.01,
            block_size: 100,
            chain_steps_per_update: 1,
            epochs: 1,
            n_hidden,
            l2: 0.0,
            seed,
            inner_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be at least 1".into()));
        }
        if self.chain_steps_per_update == 0 {
            return Err(Error::InvalidConfig("chain steps per update must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig("L2 penalty must be non-negative".into()));
        }
        Ok(())
    }
}

/// One user's observed ranking: local object `o` is global item `items[o]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserData {
    pub items: Vec<usize>,
    pub observed: OrderedPartition,
}

impl UserData {
    pub fn new(items: Vec<usize>, observed: OrderedPartition) -> Result<Self> {
        if observed.n_objects() != items.len() {
            return Err(Error::ObjectCountMismatch {
                expected: items.len(),
                found: observed.n_objects(),
            });
        }
        let mut sorted = items.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("repeated item in user data".into()));
        }
        Ok(Self { items, observed })
    }

    /// All `n` items, observed as `observed`.
    pub fn full(observed: OrderedPartition) -> Self {
        Self {
            items: (0..observed.n_objects()).collect(),
            observed,
        }
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }
}

/// One user's contribution to a block update, in local item indices.
#[derive(Debug, Clone)]
pub struct UserUpdate {
    pub gradient: GradientEstimate,
    /// Pairwise disagreement between the chain state and the observed data.
    pub disagreement: f64,
    pub moves: MoveStats,
}

/// Advances `chain` for one update and returns the user's gradient term:
/// statistics of the observed ranking under the exact hidden posterior minus
/// statistics of the chain sample.
pub fn user_update(params: &CfParams, cfg: &TrainConfig, user: &UserData, chain: &mut LatentChain) -> Result<UserUpdate> {
    let model = params.latent_model_for(&user.items)?;
    let mut gradient = GradientEstimate::zeros(user.n_items(), params.n_hidden());
    let posterior = model.hidden_posterior(&user.observed)?;
    accumulate_stats(&mut gradient, &user.observed, &posterior, 1.0)?;

    let before = chain.stats;
    let inner = cfg.inner_steps.unwrap_or(user.n_items()).max(1);
    for _ in 0..cfg.chain_steps_per_update {
        gibbs_mh_step(chain, &model, inner);
    }
    accumulate_stats(&mut gradient, &chain.partition, &chain.hidden.as_weights(), -1.0)?;
    gradient.n_data_terms = 1;
    gradient.n_model_samples = 1;
    Ok(UserUpdate {
        gradient,
        disagreement: pairwise_disagreement(&chain.partition, &user.observed),
        moves: chain.stats.since(&before),
    })
}

/// Runs [`user_update`] over the users of one block.
///
/// Implementations may process users concurrently; results must come back in
/// user order.
pub trait BlockExecutor {
    fn run_block(
        &self,
        params: &CfParams,
        cfg: &TrainConfig,
        users: &[UserData],
        chains: &mut [LatentChain],
    ) -> Result<Vec<UserUpdate>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BlockExecutor for Sequential {
    fn run_block(
        &self,
        params: &CfParams,
        cfg: &TrainConfig,
        users: &[UserData],
        chains: &mut [LatentChain],
    ) -> Result<Vec<UserUpdate>> {
        users
            .iter()
            .zip(chains.iter_mut())
            .map(|(u, c)| user_update(params, cfg, u, c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub epoch: usize,
    pub block: usize,
    pub n_users: usize,
    /// Mean pairwise disagreement between chain samples and observed data.
    pub disagreement: f64,
    pub split_acceptance: f64,
    pub merge_acceptance: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub blocks: Vec<BlockRecord>,
    /// Users dropped for having fewer than two items.
    pub skipped_users: usize,
}

/// Stochastic-gradient trainer with one persistent chain per user.
///
/// Each epoch shuffles the users, cuts them into blocks of
/// `cfg.block_size` and takes one gradient step per block.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: CfParams,
    cfg: TrainConfig,
    users: Vec<UserData>,
    chains: Vec<LatentChain>,
    shuffle_rng: ChainRng,
    log: TrainLog,
    epoch: usize,
    cursor: usize,
    block_in_epoch: usize,
}

impl Trainer {
    /// Starts from the default initialization drawn from `cfg.seed`.
    pub fn new(n_items: usize, users: Vec<UserData>, cfg: TrainConfig) -> Result<Self> {
        let params = CfParams::init(n_items, cfg.n_hidden, &mut stream_rng(cfg.seed, INIT_STREAM));
        Self::with_params(params, users, cfg)
    }

    pub fn with_params(params: CfParams, users: Vec<UserData>, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        params.check_finite()?;
        if params.n_hidden() != cfg.n_hidden {
            return Err(Error::DimensionMismatch {
                what: "hidden units",
                expected: cfg.n_hidden,
                found: params.n_hidden(),
            });
        }
        let mut kept = Vec::with_capacity(users.len());
        let mut chains = Vec::with_capacity(users.len());
        let mut skipped = 0;
        for (index, user) in users.into_iter().enumerate() {
            if let Some(&bad) = user.items.iter().find(|&&i| i >= params.n_items()) {
                return Err(Error::OutOfRange {
                    value: bad as f64,
                    min: 0.0,
                    max: params.n_items() as f64 - 1.0,
                });
            }
            if user.n_items() < 2 {
                log::warn!("skipping user {index}: fewer than two rated items");
                skipped += 1;
                continue;
            }
            chains.push(LatentChain::new(
                user.observed.clone(),
                cfg.n_hidden,
                cfg.seed,
                FIRST_CHAIN_STREAM + index as u64,
            ));
            kept.push(user);
        }
        if kept.is_empty() {
            return Err(Error::EmptyInput("users with at least two items"));
        }
        Ok(Self {
            params,
            shuffle_rng: stream_rng(cfg.seed, SHUFFLE_STREAM),
            cfg,
            users: kept,
            chains,
            log: TrainLog {
                blocks: Vec::new(),
                skipped_users: skipped,
            },
            epoch: 0,
            cursor: 0,
            block_in_epoch: 0,
        })
    }

    pub fn params(&self) -> &CfParams {
        &self.params
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn blocks_per_epoch(&self) -> usize {
        self.users.len().div_ceil(self.cfg.block_size)
    }

    /// Processes the next block and applies its update.
    pub fn step_block<E: BlockExecutor + ?Sized>(&mut self, exec: &E) -> Result<&BlockRecord> {
        if self.cursor == 0 {
            self.shuffle();
        }
        let end = (self.cursor + self.cfg.block_size).min(self.users.len());
        let range = self.cursor..end;
        let updates = exec.run_block(
            &self.params,
            &self.cfg,
            &self.users[range.clone()],
            &mut self.chains[range.clone()],
        )?;
        if updates.len() != range.len() {
            return Err(Error::DimensionMismatch {
                what: "block updates",
                expected: range.len(),
                found: updates.len(),
            });
        }

        let mut grad = GradientEstimate::zeros(self.params.n_items(), self.params.n_hidden());
        let weight = 1.0 / updates.len() as f64;
        let mut moves = MoveStats::default();
        let mut disagreement = 0.0;
        for (user, up) in self.users[range.clone()].iter().zip(&updates) {
            grad.add_mapped(&up.gradient, &user.items, weight)?;
            moves.merge_from(&up.moves);
            disagreement += up.disagreement * weight;
        }
        grad.n_data_terms = updates.len();
        grad.n_model_samples = updates.len();
        self.apply(&grad)?;

        self.log.blocks.push(BlockRecord {
            epoch: self.epoch,
            block: self.block_in_epoch,
            n_users: updates.len(),
            disagreement,
            split_acceptance: moves.split_acceptance(),
            merge_acceptance: moves.merge_acceptance(),
            gradient_norm: grad.norm(),
        });
        self.block_in_epoch += 1;
        self.cursor = end;
        if self.cursor >= self.users.len() {
            self.cursor = 0;
            self.block_in_epoch = 0;
            self.epoch += 1;
        }
        Ok(self.log.blocks.last().expect("just pushed"))
    }

    /// Finishes the current epoch.
    pub fn run_epoch<E: BlockExecutor + ?Sized>(&mut self, exec: &E) -> Result<()> {
        let target = self.epoch + 1;
        while self.epoch < target {
            self.step_block(exec)?;
        }
        Ok(())
    }

    /// Runs `cfg.epochs` epochs.
    pub fn run<E: BlockExecutor + ?Sized>(&mut self, exec: &E) -> Result<()> {
        for _ in 0..self.cfg.epochs {
            self.run_epoch(exec)?;
        }
        Ok(())
    }

    pub fn into_parts(self) -> (CfParams, TrainLog) {
        (self.params, self.log)
    }

    fn shuffle(&mut self) {
        let mut order: Vec<usize> = (0..self.users.len()).collect();
        order.shuffle(&mut self.shuffle_rng);
        let mut users: Vec<Option<UserData>> = core::mem::take(&mut self.users).into_iter().map(Some).collect();
        let mut chains: Vec<Option<LatentChain>> = core::mem::take(&mut self.chains).into_iter().map(Some).collect();
        for i in order {
            self.users.push(users[i].take().expect("permutation"));
            self.chains.push(chains[i].take().expect("permutation"));
        }
    }

    fn apply(&mut self, g: &GradientEstimate) -> Result<()> {
        let lr = self.cfg.learning_rate;
        let l2 = self.cfg.l2;
        let p = &mut self.params;
        p.nu += lr * (g.d_nu - l2 * p.nu);
        p.u.iter_mut().zip(&g.d_u).for_each(|(v, d)| *v += lr * (d - l2 * *v));
        p.w.iter_mut().zip(&g.d_w).for_each(|(v, d)| *v += lr * (d - l2 * *v));
        p.check_finite()
    }
}

/// Trains from the default initialization for `cfg.epochs` epochs.
pub fn train(n_items: usize, users: Vec<UserData>, cfg: TrainConfig) -> Result<(CfParams, TrainLog)> {
    let mut t = Trainer::new(n_items, users, cfg)?;
    t.run(&Sequential)?;
    Ok(t.into_parts())
}

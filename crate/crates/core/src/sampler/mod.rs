//! Split-and-merge Metropolis-Hastings over ordered partitions.
//!
//! A split picks one of the `T_split` non-singleton blocks uniformly, draws an
//! ordered pair of distinct seed objects (the first seeds the upper
//! sub-block, the second the lower one) and sends every other member to
//! either side with probability 1/2. A merge picks one of the `T - 1`
//! adjacent block pairs uniformly. Seed pairs are not observable in the
//! result, so a split into `(A, B)` has probability
//! `|A||B| / (T_split · N(N-1) · 2^(N-2))`.
//!
//! The move kind is a fair coin when both kinds are feasible and forced
//! otherwise; that selection probability enters the acceptance ratio through
//! [`MoveProposal::log_kind_ratio`].

pub mod exact;

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use libm::{exp, log};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{split_log_ratio, PairPotentials};
use crate::partition::{validate_bipartition, OrderedPartition};
use crate::rng::{stream_rng, ChainRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Split,
    Merge,
}

/// A proposed move and the log factors of its acceptance probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveProposal {
    pub kind: MoveKind,
    /// Block being split, or the upper block of the merged pair.
    pub block_index: usize,
    /// `(upper, lower)` sub-blocks of a split.
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
    /// `log Q(X | X') / Q(X' | X)` given the move kind.
    pub log_q_ratio: f64,
    /// Log ratio of move-kind selection probabilities, reverse over forward.
    pub log_kind_ratio: f64,
    /// `log Ω(X') / Ω(X)`.
    pub log_l_ratio: f64,
}

impl MoveProposal {
    /// `min(0, log l + log p)`.
    pub fn log_acceptance(&self) -> f64 {
        (self.log_l_ratio + self.log_q_ratio + self.log_kind_ratio).min(0.0)
    }

    pub fn acceptance_probability(&self) -> f64 {
        exp(self.log_acceptance())
    }

    pub fn apply(&self, x: &OrderedPartition) -> OrderedPartition {
        let mut out = x.clone();
        match &self.bipartition {
            Some((upper, lower)) => out.split_in_place(self.block_index, upper.clone(), lower.clone()),
            None => out.merge_in_place(self.block_index),
        }
        out
    }
}

/// `log(N (N-1) 2^(N-2))`: the number of seed-and-assignment draws for a
/// block of size `N`.
#[inline]
fn log_draw_count(n: usize) -> f64 {
    let n = n as f64;
    log(n * (n - 1.0)) + (n - 2.0) * LN_2
}

/// Which move kinds are available: `(split, merge)`.
#[inline]
pub fn feasible_moves(x: &OrderedPartition) -> (bool, bool) {
    (x.n_splittable() > 0, x.n_blocks() >= 2)
}

#[inline]
fn log_kind_prob(both_feasible: bool) -> f64 {
    if both_feasible {
        -LN_2
    } else {
        0.0
    }
}

fn split_proposal_unchecked<P: PairPotentials + ?Sized>(
    x: &OrderedPartition,
    t: usize,
    upper: Vec<usize>,
    lower: Vec<usize>,
    m: &P,
) -> MoveProposal {
    let n_blocks = x.n_blocks();
    let n_splittable = x.n_splittable();
    let size = upper.len() + lower.len();
    let log_q_ratio = log(n_splittable as f64) + log_draw_count(size)
        - log((upper.len() * lower.len()) as f64)
        - log(n_blocks as f64);
    let after_splittable = n_splittable - 1 + usize::from(upper.len() >= 2) + usize::from(lower.len() >= 2);
    let log_kind_ratio = log_kind_prob(after_splittable > 0) - log_kind_prob(n_blocks >= 2);
    MoveProposal {
        kind: MoveKind::Split,
        block_index: t,
        log_l_ratio: split_log_ratio(&upper, &lower, m),
        bipartition: Some((upper, lower)),
        log_q_ratio,
        log_kind_ratio,
    }
}

/// The split of block `t` into `upper` followed by `lower`, with its ratios.
pub fn split_proposal<P: PairPotentials + ?Sized>(
    x: &OrderedPartition,
    t: usize,
    upper: &[usize],
    lower: &[usize],
    m: &P,
) -> Result<MoveProposal> {
    x.ensure_objects(m.n_objects())?;
    validate_bipartition(x.block(t)?, t, upper, lower)?;
    let (mut upper, mut lower) = (upper.to_vec(), lower.to_vec());
    upper.sort_unstable();
    lower.sort_unstable();
    Ok(split_proposal_unchecked(x, t, upper, lower, m))
}

/// The merge of blocks `t` and `t + 1`, with its ratios.
pub fn merge_proposal<P: PairPotentials + ?Sized>(x: &OrderedPartition, t: usize, m: &P) -> Result<MoveProposal> {
    x.ensure_objects(m.n_objects())?;
    if t + 1 >= x.n_blocks() {
        return Err(Error::NoSuchBlock {
            index: t + 1,
            n_blocks: x.n_blocks(),
        });
    }
    Ok(merge_proposal_unchecked(x, t, m))
}

fn merge_proposal_unchecked<P: PairPotentials + ?Sized>(x: &OrderedPartition, t: usize, m: &P) -> MoveProposal {
    let blocks = x.blocks();
    let (upper, lower) = (&blocks[t], &blocks[t + 1]);
    let n_blocks = x.n_blocks();
    let merged = upper.len() + lower.len();
    let n_splittable = x.n_splittable();
    let after_splittable = n_splittable + 1 - usize::from(upper.len() >= 2) - usize::from(lower.len() >= 2);
    let log_q_ratio = log((n_blocks - 1) as f64) + log((upper.len() * lower.len()) as f64)
        - log(after_splittable as f64)
        - log_draw_count(merged);
    let log_kind_ratio = log_kind_prob(n_blocks > 2) - log_kind_prob(n_splittable > 0);
    MoveProposal {
        kind: MoveKind::Merge,
        block_index: t,
        bipartition: None,
        log_q_ratio,
        log_kind_ratio,
        log_l_ratio: -split_log_ratio(upper, lower, m),
    }
}

/// Draws a random split of a random non-singleton block.
pub fn propose_split<P, R>(x: &OrderedPartition, m: &P, rng: &mut R) -> Result<MoveProposal>
where
    P: PairPotentials + ?Sized,
    R: Rng + ?Sized,
{
    x.ensure_objects(m.n_objects())?;
    let n_splittable = x.n_splittable();
    if n_splittable == 0 {
        return Err(Error::Infeasible(MoveKind::Split));
    }
    let pick = rng.gen_range(0..n_splittable);
    let (t, block) = x
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.len() >= 2)
        .nth(pick)
        .expect("pick < number of splittable blocks");
    let size = block.len();
    let first = rng.gen_range(0..size);
    let mut second = rng.gen_range(0..size - 1);
    if second >= first {
        second += 1;
    }
    let mut upper = Vec::with_capacity(size);
    let mut lower = Vec::with_capacity(size);
    let mut bits = 0u64;
    let mut left = 0u32;
    for (idx, &o) in block.iter().enumerate() {
        let to_upper = if idx == first {
            true
        } else if idx == second {
            false
        } else {
            if left == 0 {
                bits = rng.next_u64();
                left = 64;
            }
            let b = bits & 1 == 1;
            bits >>= 1;
            left -= 1;
            b
        };
        if to_upper {
            upper.push(o);
        } else {
            lower.push(o);
        }
    }
    Ok(split_proposal_unchecked(x, t, upper, lower, m))
}

/// Draws a random adjacent pair of blocks to merge.
pub fn propose_merge<P, R>(x: &OrderedPartition, m: &P, rng: &mut R) -> Result<MoveProposal>
where
    P: PairPotentials + ?Sized,
    R: Rng + ?Sized,
{
    x.ensure_objects(m.n_objects())?;
    if x.n_blocks() < 2 {
        return Err(Error::Infeasible(MoveKind::Merge));
    }
    let t = rng.gen_range(0..x.n_blocks() - 1);
    Ok(merge_proposal_unchecked(x, t, m))
}

/// Proposal and acceptance counts per move kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub split_proposed: u64,
    pub split_accepted: u64,
    pub merge_proposed: u64,
    pub merge_accepted: u64,
    /// Steps at which no move was feasible (a single object).
    pub idle: u64,
}

impl MoveStats {
    pub fn split_acceptance(&self) -> f64 {
        ratio(self.split_accepted, self.split_proposed)
    }

    pub fn merge_acceptance(&self) -> f64 {
        ratio(self.merge_accepted, self.merge_proposed)
    }

    pub fn steps(&self) -> u64 {
        self.split_proposed + self.merge_proposed + self.idle
    }

    pub fn merge_from(&mut self, other: &MoveStats) {
        self.split_proposed += other.split_proposed;
        self.split_accepted += other.split_accepted;
        self.merge_proposed += other.merge_proposed;
        self.merge_accepted += other.merge_accepted;
        self.idle += other.idle;
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &MoveStats) -> MoveStats {
        MoveStats {
            split_proposed: self.split_proposed - earlier.split_proposed,
            split_accepted: self.split_accepted - earlier.split_accepted,
            merge_proposed: self.merge_proposed - earlier.merge_proposed,
            merge_accepted: self.merge_accepted - earlier.merge_accepted,
            idle: self.idle - earlier.idle,
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub kind: Option<MoveKind>,
    pub accepted: bool,
}

/// One Metropolis-Hastings transition applied in place.
pub fn mh_step_in_place<P, R>(x: &mut OrderedPartition, m: &P, rng: &mut R, stats: &mut MoveStats) -> StepOutcome
where
    P: PairPotentials + ?Sized,
    R: Rng + ?Sized,
{
    let kind = match feasible_moves(x) {
        (true, true) => {
            if rng.gen::<bool>() {
                MoveKind::Split
            } else {
                MoveKind::Merge
            }
        }
        (true, false) => MoveKind::Split,
        (false, true) => MoveKind::Merge,
        (false, false) => {
            stats.idle += 1;
            return StepOutcome {
                kind: None,
                accepted: false,
            };
        }
    };
    let proposal = match kind {
        MoveKind::Split => propose_split(x, m, rng),
        MoveKind::Merge => propose_merge(x, m, rng),
    }
    .expect("move kind is feasible");
    let u: f64 = rng.gen();
    let accepted = log(u) < proposal.log_acceptance();
    match kind {
        MoveKind::Split => {
            stats.split_proposed += 1;
            stats.split_accepted += u64::from(accepted);
        }
        MoveKind::Merge => {
            stats.merge_proposed += 1;
            stats.merge_accepted += u64::from(accepted);
        }
    }
    if accepted {
        match proposal.bipartition {
            Some((upper, lower)) => x.split_in_place(proposal.block_index, upper, lower),
            None => x.merge_in_place(proposal.block_index),
        }
    }
    StepOutcome {
        kind: Some(kind),
        accepted,
    }
}

/// One sampler chain: its state, random stream and move counts.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub partition: OrderedPartition,
    pub rng: ChainRng,
    pub stats: MoveStats,
    pub step: u64,
}

impl ChainState {
    pub fn new(partition: OrderedPartition, seed: u64, stream: u64) -> Self {
        Self {
            partition,
            rng: stream_rng(seed, stream),
            stats: MoveStats::default(),
            step: 0,
        }
    }
}

/// Advances the chain by one split-or-merge transition targeting `Ω / Z`.
pub fn mh_step<P: PairPotentials + ?Sized>(state: &mut ChainState, m: &P) -> StepOutcome {
    state.step += 1;
    mh_step_in_place(&mut state.partition, m, &mut state.rng, &mut state.stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
}

impl SamplerConfig {
    /// Burn-in of 10% of the steps, keeping every tenth state afterwards.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            burn_in: steps / 10,
            thin: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub samples: Vec<OrderedPartition>,
    pub stats: MoveStats,
}

/// Runs `cfg.steps` transitions from `init` and keeps every `thin`-th state
/// after `burn_in`.
pub fn run_chain<P: PairPotentials + ?Sized>(init: OrderedPartition, m: &P, cfg: &SamplerConfig) -> Result<ChainRun> {
    run_chain_on_stream(init, m, cfg, 0)
}

/// [`run_chain`] on an explicit random stream of `cfg.seed`, for running
/// independent chains side by side.
pub fn run_chain_on_stream<P: PairPotentials + ?Sized>(
    init: OrderedPartition,
    m: &P,
    cfg: &SamplerConfig,
    stream: u64,
) -> Result<ChainRun> {
    cfg.validate()?;
    init.ensure_objects(m.n_objects())?;
    let mut state = ChainState::new(init, cfg.seed, stream);
    let mut samples = Vec::new();
    for s in 0..cfg.steps {
        mh_step(&mut state, m);
        if s >= cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.push(state.partition.clone());
        }
    }
    Ok(ChainRun {
        samples,
        stats: state.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairModel;
    use std::collections::BTreeMap;

    fn part(s: &str) -> OrderedPartition {
        s.parse().unwrap()
    }

    #[test]
    fn forced_split_of_a_pair() {
        let m = PairModel::uniform(2);
        let x = part("0,1");
        let mut rng = stream_rng(0, 0);
        let p = propose_split(&x, &m, &mut rng).unwrap();
        // seeds (0,1) or (1,0), each outcome 1/2; merge back is certain
        assert!((p.log_q_ratio - LN_2).abs() < 1e-15);
        assert_eq!(p.log_kind_ratio, 0.0);
        assert_eq!(p.acceptance_probability(), 1.0);
    }

    #[test]
    fn split_ratio_for_three_member_block() {
        let m = PairModel::uniform(4);
        let x = part("0,1,2>3");
        let p = split_proposal(&x, 0, &[0], &[1, 2], &m).unwrap();
        // 1 splittable block, 12 draws, 2 of them give ({0},{1,2}); 2 merge pairs afterwards
        assert!((exp(p.log_q_ratio) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn merge_ratio_examples() {
        let m = PairModel::uniform(3);
        let p = merge_proposal(&part("0>1"), 0, &PairModel::uniform(2)).unwrap();
        assert!((exp(p.log_q_ratio) - 0.5).abs() < 1e-15);
        assert_eq!(p.log_kind_ratio, 0.0);
        assert!((p.acceptance_probability() - 0.5).abs() < 1e-15);

        let p = merge_proposal(&part("0>1>2"), 0, &m).unwrap();
        assert!((exp(p.log_q_ratio) - 1.0).abs() < 1e-15);
        // all-singletons can only merge; the result can do both
        assert!((p.log_kind_ratio + LN_2).abs() < 1e-15);
    }

    #[test]
    fn split_and_merge_ratios_are_reciprocal() {
        let m = PairModel::random_loglinear(5, 1.0, &mut stream_rng(3, 0));
        let x = part("3>0,4>1,2");
        for t in 0..x.n_blocks() - 1 {
            let merge = merge_proposal(&x, t, &m).unwrap();
            let merged = merge.apply(&x);
            let b = x.blocks();
            let split = split_proposal(&merged, t, &b[t], &b[t + 1], &m).unwrap();
            assert_eq!(split.apply(&merged), x);
            assert!((merge.log_q_ratio + split.log_q_ratio).abs() < 1e-12);
            assert!((merge.log_kind_ratio + split.log_kind_ratio).abs() < 1e-12);
            assert!((merge.log_l_ratio + split.log_l_ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_moves_are_reported() {
        let m = PairModel::uniform(3);
        let mut rng = stream_rng(0, 0);
        assert_eq!(
            propose_split(&part("0>1>2"), &m, &mut rng),
            Err(Error::Infeasible(MoveKind::Split))
        );
        assert_eq!(
            propose_merge(&part("0,1,2"), &m, &mut rng),
            Err(Error::Infeasible(MoveKind::Merge))
        );
    }

    #[test]
    fn split_outcome_frequencies_match_seed_multiplicity() {
        let m = PairModel::uniform(3);
        let x = part("0,1,2");
        let mut rng = stream_rng(11, 0);
        let draws = 1_000_000;
        let mut counts: BTreeMap<(Vec<usize>, Vec<usize>), u64> = BTreeMap::new();
        for _ in 0..draws {
            let p = propose_split(&x, &m, &mut rng).unwrap();
            *counts.entry(p.bipartition.unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for ((upper, lower), c) in counts {
            // |A||B| / (N (N-1) 2^(N-2)) with N = 3
            let p = (upper.len() * lower.len()) as f64 / 12.0;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((c as f64 / draws as f64 - p).abs() < 3.0 * sigma, "{upper:?} {lower:?}");
        }
    }

    #[test]
    fn certain_acceptance_when_ratio_exceeds_one() {
        let m = PairModel::from_fns(2, |_, _| 5.0, |_, _| 0.0).unwrap();
        let p = merge_proposal(&part("0>1"), 0, &m).unwrap();
        assert_eq!(p.acceptance_probability(), 1.0);
        let mut state = ChainState::new(part("0>1"), 4, 0);
        let out = mh_step(&mut state, &m);
        assert_eq!(out, StepOutcome { kind: Some(MoveKind::Merge), accepted: true });
        assert_eq!(state.partition, part("0,1"));
    }

    #[test]
    fn single_object_chain_is_idle() {
        let m = PairModel::uniform(1);
        let mut state = ChainState::new(part("0"), 0, 0);
        for _ in 0..5 {
            assert_eq!(mh_step(&mut state, &m).kind, None);
        }
        assert_eq!(state.partition, part("0"));
        assert_eq!(state.stats.idle, 5);
    }

    #[test]
    fn run_chain_contracts() {
        let m = PairModel::random_loglinear(4, 1.0, &mut stream_rng(1, 1));
        let empty = run_chain(OrderedPartition::singletons(4), &m, &SamplerConfig::new(0, 1)).unwrap();
        assert!(empty.samples.is_empty());
        assert_eq!(empty.stats, MoveStats::default());

        let cfg = SamplerConfig::new(1000, 42);
        let a = run_chain(OrderedPartition::singletons(4), &m, &cfg).unwrap();
        let b = run_chain(OrderedPartition::singletons(4), &m, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.samples.len(), 90);
        assert_eq!(a.stats.steps(), 1000);

        let bad = SamplerConfig { thin: 0, ..cfg };
        assert!(run_chain(OrderedPartition::singletons(4), &m, &bad).is_err());
        assert!(run_chain(OrderedPartition::singletons(3), &m, &cfg).is_err());
    }
}

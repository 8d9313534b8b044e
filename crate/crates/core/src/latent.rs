//! Latent OSM: `K` binary hidden units, each gating its own set of pair
//! potentials,
//!
//! ```text
//! Ω̂(X, h) = Ω(X) · Π_k Ω_k(X)^{h_k}
//! ```
//!
//! The hidden units are conditionally independent given `X`, with
//! `P(h_k = 1 | X) = logistic(log Ω_k(X))`. Given `h`, the joint weight has
//! the same pairwise structure as a plain OSM, so `X | h` is sampled with
//! the split-and-merge kernel on the folded potentials.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{log_weight_unchecked, LinearPotentials, PairPotentials};
use crate::numeric::{logistic, softplus};
use crate::partition::OrderedPartition;
use crate::rng::{stream_rng, ChainRng};
use crate::sampler::{mh_step_in_place, MoveStats, SamplerConfig};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HiddenState {
    pub bits: Vec<bool>,
}

impl HiddenState {
    pub fn zeros(k: usize) -> Self {
        Self {
            bits: alloc::vec![false; k],
        }
    }

    /// Configuration `index` in binary, unit 0 in the lowest bit.
    pub fn from_index(index: usize, k: usize) -> Self {
        Self {
            bits: (0..k).map(|b| index >> b & 1 == 1).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().enumerate().map(|(b, &on)| usize::from(on) << b).sum()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_weights(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(u8::from(b))).collect()
    }
}

/// Base potentials plus one potential set per hidden unit.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentModel<P> {
    pub base: P,
    pub hidden: Vec<P>,
}

impl<P: PairPotentials> LatentModel<P> {
    pub fn new(base: P, hidden: Vec<P>) -> Result<Self> {
        let n = base.n_objects();
        if let Some(bad) = hidden.iter().find(|h| h.n_objects() != n) {
            return Err(Error::DimensionMismatch {
                what: "hidden unit objects",
                expected: n,
                found: bad.n_objects(),
            });
        }
        Ok(Self { base, hidden })
    }

    pub fn n_objects(&self) -> usize {
        self.base.n_objects()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden.len()
    }

    /// `log Ω_k(X)`.
    pub fn log_omega_k(&self, x: &OrderedPartition, k: usize) -> Result<f64> {
        x.ensure_objects(self.n_objects())?;
        let m = self.hidden.get(k).ok_or(Error::NoSuchHiddenUnit {
            index: k,
            n_hidden: self.n_hidden(),
        })?;
        Ok(log_weight_unchecked(x, m))
    }

    pub(crate) fn log_omegas_unchecked(&self, x: &OrderedPartition) -> Vec<f64> {
        self.hidden.iter().map(|m| log_weight_unchecked(x, m)).collect()
    }

    pub fn log_base_weight(&self, x: &OrderedPartition) -> Result<f64> {
        x.ensure_objects(self.n_objects())?;
        Ok(log_weight_unchecked(x, &self.base))
    }

    /// `P(h_k = 1 | X)` for every unit.
    pub fn hidden_posterior(&self, x: &OrderedPartition) -> Result<Vec<f64>> {
        x.ensure_objects(self.n_objects())?;
        Ok(self.hidden_posterior_unchecked(x))
    }

    pub(crate) fn hidden_posterior_unchecked(&self, x: &OrderedPartition) -> Vec<f64> {
        self.log_omegas_unchecked(x).into_iter().map(logistic).collect()
    }

    /// The posterior activation vector used as a fixed-length representation
    /// of `X`.
    pub fn latent_representation(&self, x: &OrderedPartition) -> Result<Vec<f64>> {
        self.hidden_posterior(x)
    }

    /// `log Ω̂(X, h) = log Ω(X) + Σ_k h_k log Ω_k(X)`.
    pub fn log_joint_weight(&self, x: &OrderedPartition, h: &HiddenState) -> Result<f64> {
        x.ensure_objects(self.n_objects())?;
        self.check_hidden(h)?;
        let mut total = log_weight_unchecked(x, &self.base);
        for (m, &on) in self.hidden.iter().zip(&h.bits) {
            if on {
                total += log_weight_unchecked(x, m);
            }
        }
        Ok(total)
    }

    /// `log Σ_h Ω̂(X, h) = log Ω(X) + Σ_k log(1 + Ω_k(X))`.
    pub fn log_marginal_weight(&self, x: &OrderedPartition) -> Result<f64> {
        x.ensure_objects(self.n_objects())?;
        Ok(self.log_marginal_weight_unchecked(x))
    }

    pub(crate) fn log_marginal_weight_unchecked(&self, x: &OrderedPartition) -> f64 {
        log_weight_unchecked(x, &self.base) + self.hidden.iter().map(|m| softplus(log_weight_unchecked(x, m))).sum::<f64>()
    }

    fn check_hidden(&self, h: &HiddenState) -> Result<()> {
        if h.len() != self.n_hidden() {
            return Err(Error::DimensionMismatch {
                what: "hidden state",
                expected: self.n_hidden(),
                found: h.len(),
            });
        }
        Ok(())
    }

    /// Draws `h ~ Π_k Bernoulli(logistic(tau · log Ω_k(X)))`; `tau = 1` is
    /// the exact conditional.
    pub fn sample_hidden<R: Rng + ?Sized>(&self, x: &OrderedPartition, tau: f64, rng: &mut R) -> HiddenState {
        HiddenState {
            bits: self
                .hidden
                .iter()
                .map(|m| rng.gen::<f64>() < logistic(tau * log_weight_unchecked(x, m)))
                .collect(),
        }
    }
}

impl<P: LinearPotentials> LatentModel<P> {
    /// Pair model whose log-weight is `log Ω̂(·, h)`.
    pub fn effective_pair_model(&self, h: &HiddenState) -> Result<P> {
        self.check_hidden(h)?;
        Ok(self.weighted_pair_model(&h.as_weights(), 1.0))
    }

    /// `scale · (base + Σ_k weights_k · hidden_k)`.
    pub fn weighted_pair_model(&self, weights: &[f64], scale: f64) -> P {
        P::linear_combination(&self.base, &self.hidden, weights, scale)
    }
}

/// A joint `(X, h)` chain for the latent model.
#[derive(Debug, Clone)]
pub struct LatentChain {
    pub partition: OrderedPartition,
    pub hidden: HiddenState,
    pub rng: ChainRng,
    pub stats: MoveStats,
}

impl LatentChain {
    pub fn new(partition: OrderedPartition, n_hidden: usize, seed: u64, stream: u64) -> Self {
        Self {
            partition,
            hidden: HiddenState::zeros(n_hidden),
            rng: stream_rng(seed, stream),
            stats: MoveStats::default(),
        }
    }
}

/// One alternating sweep: `h ~ P(h | X)` exactly, then `inner_steps`
/// split-and-merge transitions targeting `P(X | h)`.
pub fn gibbs_mh_step<P: LinearPotentials>(chain: &mut LatentChain, m: &LatentModel<P>, inner_steps: usize) {
    tempered_sweep(chain, m, 1.0, inner_steps);
}

/// [`gibbs_mh_step`] for the tempered joint `Ω̂(X, h)^tau`.
pub(crate) fn tempered_sweep<P: LinearPotentials>(chain: &mut LatentChain, m: &LatentModel<P>, tau: f64, inner_steps: usize) {
    chain.hidden = m.sample_hidden(&chain.partition, tau, &mut chain.rng);
    let effective = m.weighted_pair_model(&chain.hidden.as_weights(), tau);
    for _ in 0..inner_steps {
        mh_step_in_place(&mut chain.partition, &effective, &mut chain.rng, &mut chain.stats);
    }
}

/// Samples kept by [`run_latent_chain`].
#[derive(Debug, Clone)]
pub struct LatentRun {
    pub samples: Vec<(OrderedPartition, HiddenState)>,
    pub stats: MoveStats,
}

/// `cfg.steps` joint sweeps from `init` on stream `stream` of `cfg.seed`,
/// keeping every `thin`-th state after `burn_in`.
pub fn run_latent_chain<P: LinearPotentials>(
    init: OrderedPartition,
    m: &LatentModel<P>,
    cfg: &SamplerConfig,
    stream: u64,
    inner_steps: usize,
) -> Result<LatentRun> {
    cfg.validate()?;
    init.ensure_objects(m.n_objects())?;
    let mut chain = LatentChain::new(init, m.n_hidden(), cfg.seed, stream);
    let mut samples = Vec::new();
    for s in 0..cfg.steps {
        gibbs_mh_step(&mut chain, m, inner_steps);
        if s >= cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.push((chain.partition.clone(), chain.hidden.clone()));
        }
    }
    Ok(LatentRun {
        samples,
        stats: chain.stats,
    })
}

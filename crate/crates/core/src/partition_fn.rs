//! The normalization constant `Z = Σ_X Ω(X)`: exact by enumeration on small
//! object counts, and by annealed importance sampling (AIS) otherwise.
//!
//! AIS anneals from the uniform distribution (`τ = 0`, whose constant is
//! known: `Fubini(N)`, times `2^K` with hidden units) to the target
//! (`τ = 1`). Each run starts from an exact uniform draw, moves with a
//! kernel that leaves the current tempered distribution invariant, and
//! accumulates `log P*(X_s | τ_s) − log P*(X_s | τ_{s−1})`.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::combinatorics::{fubini, for_each_ordered_partition, UniformPartitionSampler, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::latent::{tempered_sweep, LatentChain, LatentModel};
use crate::model::{log_weight_unchecked, LinearPotentials, PairPotentials, Scaled};
use crate::numeric::{log_mean_exp, log_sum_exp, softplus, LogSumExp};
use crate::partition::OrderedPartition;
use crate::rng::stream_rng;
use crate::sampler::mh_step_in_place;

/// A distribution family that can be annealed from uniform to target.
pub trait AnnealTarget {
    fn n_objects(&self) -> usize;

    fn n_hidden(&self) -> usize {
        0
    }

    /// `log Z(0)`: the number of configurations at `τ = 0`.
    fn log_z0(&self) -> f64 {
        fubini(self.n_objects()).ln() + self.n_hidden() as f64 * LN_2
    }

    /// `log P*(X | τ)`, with hidden units summed out.
    fn annealed_unnorm_log_prob(&self, x: &OrderedPartition, tau: f64) -> f64;

    /// Advances `chain` with a kernel leaving `P(· | τ)` invariant.
    fn transition(&self, chain: &mut LatentChain, tau: f64, inner_steps: usize);
}

impl<P: PairPotentials> AnnealTarget for P {
    fn n_objects(&self) -> usize {
        PairPotentials::n_objects(self)
    }

    /// `τ · log Ω(X)`.
    fn annealed_unnorm_log_prob(&self, x: &OrderedPartition, tau: f64) -> f64 {
        tau * log_weight_unchecked(x, self)
    }

    fn transition(&self, chain: &mut LatentChain, tau: f64, inner_steps: usize) {
        let tempered = Scaled { inner: self, scale: tau };
        for _ in 0..inner_steps {
            mh_step_in_place(&mut chain.partition, &tempered, &mut chain.rng, &mut chain.stats);
        }
    }
}

impl<P: LinearPotentials> AnnealTarget for LatentModel<P> {
    fn n_objects(&self) -> usize {
        LatentModel::n_objects(self)
    }

    fn n_hidden(&self) -> usize {
        LatentModel::n_hidden(self)
    }

    /// `τ · log Ω(X) + Σ_k log(1 + Ω_k(X)^τ)`.
    fn annealed_unnorm_log_prob(&self, x: &OrderedPartition, tau: f64) -> f64 {
        tau * log_weight_unchecked(x, &self.base)
            + self
                .hidden
                .iter()
                .map(|m| softplus(tau * log_weight_unchecked(x, m)))
                .sum::<f64>()
    }

    /// Samples `h` from its tempered conditional, then moves `X | h` on the
    /// tempered folded potentials.
    fn transition(&self, chain: &mut LatentChain, tau: f64, inner_steps: usize) {
        tempered_sweep(chain, self, tau, inner_steps);
    }
}

/// `log P*(X | τ)` for an OSM or latent OSM.
pub fn annealed_unnorm_log_prob<T: AnnealTarget + ?Sized>(x: &OrderedPartition, tau: f64, m: &T) -> f64 {
    m.annealed_unnorm_log_prob(x, tau)
}

/// Exact `log Z` of an OSM by enumeration (at most
/// [`DEFAULT_ENUMERATION_CAP`] objects).
pub fn exact_log_z<P: PairPotentials + ?Sized>(m: &P) -> Result<f64> {
    let mut acc = LogSumExp::new();
    for_each_ordered_partition(m.n_objects(), DEFAULT_ENUMERATION_CAP, |x| acc.add(log_weight_unchecked(x, m)))?;
    Ok(acc.value())
}

/// Exact `log Z` of a latent OSM, summing hidden units out analytically.
pub fn exact_log_z_latent<P: PairPotentials>(m: &LatentModel<P>) -> Result<f64> {
    let mut acc = LogSumExp::new();
    for_each_ordered_partition(m.n_objects(), DEFAULT_ENUMERATION_CAP, |x| {
        acc.add(m.log_marginal_weight_unchecked(x))
    })?;
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `τ_s = s / S`.
    Linear,
    /// `τ_0 = 0`, then geometric from `1e-4` up to `1`.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AisConfig {
    /// `S`: the ladder has `S + 1` temperatures `τ_0 = 0 < … < τ_S = 1`.
    pub n_temperatures: usize,
    /// `R`: independent annealing runs.
    pub n_runs: usize,
    pub schedule: Schedule,
    /// Sampler transitions per temperature; `None` means one per object.
    pub inner_steps: Option<usize>,
    pub seed: u64,
}

impl AisConfig {
    pub fn new(n_temperatures: usize, n_runs: usize, seed: u64) -> Self {
        Self {
            n_temperatures,
            n_runs,
            schedule: Schedule::Linear,
            inner_steps: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_temperatures < 2 {
            return Err(Error::InvalidConfig("AIS needs at least 2 temperatures".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("AIS needs at least one run".into()));
        }
        Ok(())
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let s = self.n_temperatures;
        let mut out: Vec<f64> = match self.schedule {
            Schedule::Linear => (0..=s).map(|i| i as f64 / s as f64).collect(),
            Schedule::Geometric => core::iter::once(0.0)
                .chain((1..=s).map(|i| libm::pow(10.0, -4.0 * (s - i) as f64 / (s - 1) as f64)))
                .collect(),
        };
        out[s] = 1.0;
        out
    }

    fn steps_for(&self, n_objects: usize) -> usize {
        self.inner_steps.unwrap_or(n_objects).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AisResult {
    pub log_z_estimate: f64,
    pub log_weights: Vec<f64>,
    pub log_z0: f64,
    /// `(Σ w)² / Σ w²`, in `(0, R]`.
    pub effective_sample_size: f64,
}

impl AisResult {
    pub fn from_log_weights(log_z0: f64, log_weights: Vec<f64>) -> Self {
        let lse = log_sum_exp(&log_weights);
        let squares: Vec<f64> = log_weights.iter().map(|w| 2.0 * w).collect();
        let effective_sample_size = libm::exp(2.0 * lse - log_sum_exp(&squares));
        Self {
            log_z_estimate: log_z0 + log_mean_exp(&log_weights),
            log_weights,
            log_z0,
            effective_sample_size,
        }
    }
}

/// Log importance weight of annealing run `run`; the run draws from its own
/// random stream of `cfg.seed`.
pub fn ais_run<T: AnnealTarget + ?Sized>(
    m: &T,
    cfg: &AisConfig,
    temperatures: &[f64],
    start: &UniformPartitionSampler,
    run: usize,
) -> f64 {
    let mut rng = stream_rng(cfg.seed, run as u64);
    let x = start.sample(&mut rng);
    let mut chain = LatentChain {
        partition: x,
        hidden: crate::HiddenState::zeros(m.n_hidden()),
        rng,
        stats: Default::default(),
    };
    let steps = cfg.steps_for(m.n_objects());
    let mut log_w = 0.0;
    for s in 1..temperatures.len() {
        if s > 1 {
            m.transition(&mut chain, temperatures[s - 1], steps);
        }
        log_w += m.annealed_unnorm_log_prob(&chain.partition, temperatures[s])
            - m.annealed_unnorm_log_prob(&chain.partition, temperatures[s - 1]);
    }
    log_w
}

/// AIS estimate of `log Z` from `cfg.n_runs` sequential runs.
pub fn ais_log_z<T: AnnealTarget + ?Sized>(m: &T, cfg: &AisConfig) -> Result<AisResult> {
    cfg.validate()?;
    let temperatures = cfg.temperatures();
    let start = UniformPartitionSampler::new(m.n_objects());
    let weights = (0..cfg.n_runs).map(|r| ais_run(m, cfg, &temperatures, &start, r)).collect();
    Ok(AisResult::from_log_weights(m.log_z0(), weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_ordered_partitions;
    use crate::latent::HiddenState;
    use crate::model::{log_weight, PairModel};
    use crate::rng::stream_rng;
    use alloc::vec;
    use libm::{exp, log};

    fn random_latent(n: usize, k: usize, scale: f64, seed: u64) -> LatentModel<PairModel> {
        let mut rng = stream_rng(seed, 5);
        let base = PairModel::random_loglinear(n, scale, &mut rng);
        let hidden = (0..k).map(|_| PairModel::random_loglinear(n, scale, &mut rng)).collect();
        LatentModel::new(base, hidden).unwrap()
    }

    #[test]
    fn exact_log_z_examples() {
        assert!((exact_log_z(&PairModel::uniform(4)).unwrap() - log(75.0)).abs() < 1e-12);
        let uniform_latent = LatentModel::new(PairModel::uniform(2), vec![PairModel::uniform(2); 3]).unwrap();
        assert!((exact_log_z_latent(&uniform_latent).unwrap() - log(24.0)).abs() < 1e-12);

        let single = random_latent(1, 3, 1.0, 0);
        let x = OrderedPartition::single_block(1);
        let expected: f64 = (0..3).map(|k| log(1.0 + exp(single.log_omega_k(&x, k).unwrap()))).sum();
        assert!((exact_log_z_latent(&single).unwrap() - expected).abs() < 1e-12);
        assert!(exact_log_z(&PairModel::uniform(9)).is_err());
    }

    #[test]
    fn latent_z_matches_hidden_enumeration() {
        for k in 1..=4 {
            let m = random_latent(3, k, 1.0, k as u64);
            let mut joint = Vec::new();
            for x in enumerate_ordered_partitions(3).unwrap() {
                for c in 0..1usize << k {
                    joint.push(m.log_joint_weight(&x, &HiddenState::from_index(c, k)).unwrap());
                }
            }
            let brute = log_sum_exp(&joint);
            let fast = exact_log_z_latent(&m).unwrap();
            assert!((exp(fast - brute) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn annealed_log_prob_endpoints() {
        let m = PairModel::random_loglinear(4, 1.0, &mut stream_rng(2, 2));
        let uniform_hidden = LatentModel::new(m.clone(), vec![PairModel::random_loglinear(4, 1.0, &mut stream_rng(3, 3)); 5]).unwrap();
        for x in enumerate_ordered_partitions(4).unwrap() {
            assert_eq!(annealed_unnorm_log_prob(&x, 0.0, &m), 0.0);
            assert_eq!(annealed_unnorm_log_prob(&x, 1.0, &m), log_weight(&x, &m).unwrap());
            assert!((annealed_unnorm_log_prob(&x, 0.0, &uniform_hidden) - 5.0 * LN_2).abs() < 1e-12);
            let target = uniform_hidden.log_marginal_weight(&x).unwrap();
            assert!((annealed_unnorm_log_prob(&x, 1.0, &uniform_hidden) - target).abs() < 1e-12);
        }
    }

    #[test]
    fn annealed_log_prob_is_monotone_for_positive_weight() {
        let m = PairModel::from_fns(3, |_, _| 0.4, |_, _| 0.2).unwrap();
        let x: OrderedPartition = "0,1>2".parse().unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=100 {
            let v = annealed_unnorm_log_prob(&x, i as f64 / 100.0, &m);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn degenerate_anneal_on_uniform_model_is_exact() {
        let m = PairModel::uniform(5);
        let r = ais_log_z(&m, &AisConfig::new(2, 7, 1)).unwrap();
        assert!(r.log_weights.iter().all(|&w| w == 0.0));
        assert_eq!(r.log_z_estimate, fubini(5).ln());
        assert!((r.effective_sample_size - 7.0).abs() < 1e-9);
    }

    #[test]
    fn schedules_are_strictly_increasing() {
        for schedule in [Schedule::Linear, Schedule::Geometric] {
            let cfg = AisConfig {
                schedule,
                ..AisConfig::new(50, 1, 0)
            };
            let t = cfg.temperatures();
            assert_eq!(t.len(), 51);
            assert_eq!((t[0], t[50]), (0.0, 1.0));
            assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(AisConfig::new(1, 1, 0).validate().is_err());
        assert!(AisConfig::new(2, 0, 0).validate().is_err());
    }

    #[test]
    fn small_osm_estimate_is_close() {
        let m = PairModel::random_loglinear(4, 1.0, &mut stream_rng(9, 0));
        let exact = exact_log_z(&m).unwrap();
        let r = ais_log_z(&m, &AisConfig::new(1000, 20, 3)).unwrap();
        assert!((r.log_z_estimate - exact).abs() < 0.05, "{} vs {exact}", r.log_z_estimate);
        assert!(r.effective_sample_size > 0.0 && r.effective_sample_size <= 20.0 + 1e-9);
    }
}

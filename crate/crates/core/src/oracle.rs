//! Exact distributions over small state spaces, by full enumeration.
//!
//! These back the correctness checks of the samplers and estimators, and the
//! `oracle` command of the CLI.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use libm::exp;
use rand::Rng;

use crate::combinatorics::{for_each_ordered_partition, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::latent::{HiddenState, LatentModel};
use crate::model::{log_weight_unchecked, PairPotentials};
use crate::numeric::log_sum_exp;
use crate::partition::OrderedPartition;

/// A normalized distribution over an explicit list of states.
#[derive(Debug, Clone)]
pub struct ExactDistribution<S> {
    states: Vec<S>,
    probs: Vec<f64>,
    log_z: f64,
    cdf: Vec<f64>,
    index: BTreeMap<S, usize>,
}

impl<S: Ord + Clone> ExactDistribution<S> {
    pub fn from_log_weights(states: Vec<S>, log_weights: &[f64]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyInput("states"));
        }
        if states.len() != log_weights.len() {
            return Err(Error::DimensionMismatch {
                what: "log weights",
                expected: states.len(),
                found: log_weights.len(),
            });
        }
        let log_z = log_sum_exp(log_weights);
        let probs: Vec<f64> = log_weights.iter().map(|w| exp(w - log_z)).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self {
            states,
            probs,
            log_z,
            cdf,
            index,
        })
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn index_of(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn prob(&self, s: &S) -> f64 {
        self.index_of(s).map_or(0.0, |i| self.probs[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &S {
        let u: f64 = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(self.states.len() - 1);
        &self.states[i]
    }

    /// Total-variation distance to the empirical distribution of `counts`
    /// (indexed like [`states`](Self::states)).
    pub fn total_variation(&self, counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        let total = total.max(1) as f64;
        0.5 * self
            .probs
            .iter()
            .zip(counts)
            .map(|(p, &c)| (p - c as f64 / total).abs())
            .sum::<f64>()
    }

    /// `Σ_s P(s) f(s)`.
    pub fn expectation<F: FnMut(&S) -> f64>(&self, mut f: F) -> f64 {
        self.states.iter().zip(&self.probs).map(|(s, p)| p * f(s)).sum()
    }
}

impl ExactDistribution<OrderedPartition> {
    /// `Ω(X) / Z` over all partitions of `m`'s objects.
    pub fn osm<P: PairPotentials + ?Sized>(m: &P) -> Result<Self> {
        Self::osm_capped(m, DEFAULT_ENUMERATION_CAP)
    }

    pub fn osm_capped<P: PairPotentials + ?Sized>(m: &P, cap: usize) -> Result<Self> {
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for_each_ordered_partition(m.n_objects(), cap, |x| {
            weights.push(log_weight_unchecked(x, m));
            states.push(x.clone());
        })?;
        Self::from_log_weights(states, &weights)
    }

    /// The `X`-marginal of a latent model.
    pub fn latent_marginal<P: PairPotentials>(m: &LatentModel<P>) -> Result<Self> {
        Self::latent_marginal_capped(m, DEFAULT_ENUMERATION_CAP)
    }

    pub fn latent_marginal_capped<P: PairPotentials>(m: &LatentModel<P>, cap: usize) -> Result<Self> {
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for_each_ordered_partition(m.n_objects(), cap, |x| {
            weights.push(m.log_marginal_weight_unchecked(x));
            states.push(x.clone());
        })?;
        Self::from_log_weights(states, &weights)
    }

    /// `P(i ≻ j)`: object `i` in a strictly higher block than `j`.
    pub fn pair_order_marginal(&self, i: usize, j: usize) -> f64 {
        self.expectation(|x| {
            let a = x.block_assignment();
            f64::from(u8::from(a[i] < a[j]))
        })
    }

    /// `P(i ~ j)`: objects tied.
    pub fn tie_marginal(&self, i: usize, j: usize) -> f64 {
        self.expectation(|x| {
            let a = x.block_assignment();
            f64::from(u8::from(a[i] == a[j]))
        })
    }

    /// `P(T = t)` for `t = 0..=n`.
    pub fn block_count_distribution(&self) -> Vec<f64> {
        let n = self.states[0].n_objects();
        let mut out = vec![0.0; n + 1];
        for (x, p) in self.states.iter().zip(&self.probs) {
            out[x.n_blocks()] += p;
        }
        out
    }
}

impl ExactDistribution<(OrderedPartition, HiddenState)> {
    /// The joint `P(X, h)` of a latent model (`2^K` hidden configurations
    /// per partition).
    pub fn latent_joint<P: PairPotentials>(m: &LatentModel<P>) -> Result<Self> {
        let k = m.n_hidden();
        if k > 16 {
            return Err(Error::InvalidConfig("joint enumeration supports at most 16 hidden units".into()));
        }
        let mut states = Vec::new();
        let mut weights = Vec::new();
        for_each_ordered_partition(m.n_objects(), DEFAULT_ENUMERATION_CAP, |x| {
            let base = log_weight_unchecked(x, &m.base);
            let omegas = m.log_omegas_unchecked(x);
            for c in 0..1usize << k {
                let h = HiddenState::from_index(c, k);
                let w = base + omegas.iter().zip(&h.bits).filter(|(_, &on)| on).map(|(o, _)| o).sum::<f64>();
                weights.push(w);
                states.push((x.clone(), h));
            }
        })?;
        Self::from_log_weights(states, &weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::fubini;
    use crate::model::PairModel;
    use crate::partition_fn::{exact_log_z, exact_log_z_latent};
    use crate::rng::stream_rng;

    #[test]
    fn probabilities_sum_to_one() {
        for n in 1..=5 {
            let m = PairModel::random_loglinear(n, 2.0, &mut stream_rng(n as u64, 0));
            let d = ExactDistribution::osm(&m).unwrap();
            let total: f64 = d.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(d.states().len() as u64, fubini(n).to_u64().unwrap());
            assert!((d.log_z() - exact_log_z(&m).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_and_marginal_agree() {
        let mut rng = stream_rng(4, 4);
        let base = PairModel::random_loglinear(3, 1.0, &mut rng);
        let hidden = (0..2).map(|_| PairModel::random_loglinear(3, 1.0, &mut rng)).collect();
        let m = LatentModel::new(base, hidden).unwrap();
        let joint = ExactDistribution::latent_joint(&m).unwrap();
        let marginal = ExactDistribution::latent_marginal(&m).unwrap();
        assert_eq!(joint.states().len(), 13 * 4);
        assert!((joint.log_z() - marginal.log_z()).abs() < 1e-12);
        assert!((joint.log_z() - exact_log_z_latent(&m).unwrap()).abs() < 1e-12);
        for x in marginal.states() {
            let summed: f64 = (0..4).map(|c| joint.prob(&(x.clone(), HiddenState::from_index(c, 2)))).sum();
            assert!((summed - marginal.prob(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_pair_marginals() {
        let d = ExactDistribution::osm(&PairModel::uniform(3)).unwrap();
        // 13 states: 1 all-tied, 6 with one tie, 6 strict; 0 above 1 in 3 strict + 2 tied ones
        assert!((d.pair_order_marginal(0, 1) - 5.0 / 13.0).abs() < 1e-12);
        assert!((d.tie_marginal(0, 1) - 1.0 / 13.0 - 2.0 / 13.0).abs() < 1e-12);
        let blocks = d.block_count_distribution();
        assert!((blocks[1] - 1.0 / 13.0).abs() < 1e-12);
        assert!((blocks[2] - 6.0 / 13.0).abs() < 1e-12);
        assert!((blocks[3] - 6.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_follows_probabilities() {
        let m = PairModel::random_loglinear(3, 1.0, &mut stream_rng(1, 1));
        let d = ExactDistribution::osm(&m).unwrap();
        let mut counts = vec![0u64; d.states().len()];
        let mut rng = stream_rng(2, 2);
        for _ in 0..200_000 {
            let s = d.sample(&mut rng).clone();
            counts[d.index_of(&s).unwrap()] += 1;
        }
        assert!(d.total_variation(&counts) < 0.01);
    }
}

use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorics::{for_each_ordered_partition, fubini};
use crate::error::{Error, Result};
use crate::latent::HiddenState;
use crate::learning::CfParams;
use crate::numeric::LogSumExp;
use crate::partition::OrderedPartition;

/// Largest item count accepted by [`exact_gradient`].
pub const EXACT_GRADIENT_MAX_ITEMS: usize = 6;
/// Largest hidden-unit count accepted by [`exact_gradient`].
pub const EXACT_GRADIENT_MAX_HIDDEN: usize = 4;

/// A vector shaped like [`CfParams`]: used both for accumulated sufficient
/// statistics and for log-likelihood gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub d_nu: f64,
    pub d_u: Vec<f64>,
    /// Row-major `n_items × n_hidden`.
    pub d_w: Vec<f64>,
    pub n_data_terms: usize,
    pub n_model_samples: usize,
    n_hidden: usize,
}

impl GradientEstimate {
    pub fn zeros(n_items: usize, n_hidden: usize) -> Self {
        Self {
            d_nu: 0.0,
            d_u: vec![0.0; n_items],
            d_w: vec![0.0; n_items * n_hidden],
            n_data_terms: 0,
            n_model_samples: 0,
            n_hidden,
        }
    }

    pub fn n_items(&self) -> usize {
        self.d_u.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    #[inline]
    pub fn d_w_at(&self, item: usize, k: usize) -> f64 {
        self.d_w[item * self.n_hidden + k]
    }

    /// `(d_nu, d_u, d_w)` flattened in [`CfParams::to_vec`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.d_u.len() + self.d_w.len());
        v.push(self.d_nu);
        v.extend_from_slice(&self.d_u);
        v.extend_from_slice(&self.d_w);
        v
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.to_vec().iter().map(|v| v * v).sum())
    }

    /// `self += weight · other`, coordinates matched exactly.
    pub fn add_scaled(&mut self, other: &GradientEstimate, weight: f64) -> Result<()> {
        self.check_shape(other.n_items(), other.n_hidden)?;
        self.d_nu += weight * other.d_nu;
        self.d_u.iter_mut().zip(&other.d_u).for_each(|(a, b)| *a += weight * b);
        self.d_w.iter_mut().zip(&other.d_w).for_each(|(a, b)| *a += weight * b);
        Ok(())
    }

    /// `self += weight · local`, where local item `o` is `items[o]` here.
    pub fn add_mapped(&mut self, local: &GradientEstimate, items: &[usize], weight: f64) -> Result<()> {
        if local.n_hidden != self.n_hidden {
            return Err(Error::DimensionMismatch {
                what: "hidden units",
                expected: self.n_hidden,
                found: local.n_hidden,
            });
        }
        if local.n_items() != items.len() {
            return Err(Error::DimensionMismatch {
                what: "item map",
                expected: local.n_items(),
                found: items.len(),
            });
        }
        let k = self.n_hidden;
        self.d_nu += weight * local.d_nu;
        for (o, &i) in items.iter().enumerate() {
            self.d_u[i] += weight * local.d_u[o];
            for c in 0..k {
                self.d_w[i * k + c] += weight * local.d_w[o * k + c];
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.d_nu *= factor;
        self.d_u.iter_mut().chain(self.d_w.iter_mut()).for_each(|v| *v *= factor);
    }

    fn check_shape(&self, n_items: usize, n_hidden: usize) -> Result<()> {
        if self.n_items() != n_items || self.n_hidden != n_hidden {
            return Err(Error::DimensionMismatch {
                what: "gradient shape",
                expected: self.n_items() * (self.n_hidden + 1),
                found: n_items * (n_hidden + 1),
            });
        }
        Ok(())
    }
}

/// Adds `weight · ∂ log Ω̂(X, h) / ∂(ν, u, W)` to `acc`, with `h` given as
/// per-unit activations (binary or posterior means).
///
/// Each tied pair contributes `1 + Σ_k h_k` to `ν`, `1/2` to `u` of both
/// members and `h_k/2` to their `W[:, k]`; each ordered pair `i ≻ j`
/// contributes `1` to `u_i` and `h_k` to `W_ik`.
pub fn accumulate_stats(acc: &mut GradientEstimate, x: &OrderedPartition, h: &[f64], weight: f64) -> Result<()> {
    if x.n_objects() != acc.n_items() {
        return Err(Error::ObjectCountMismatch {
            expected: acc.n_items(),
            found: x.n_objects(),
        });
    }
    if h.len() != acc.n_hidden {
        return Err(Error::DimensionMismatch {
            what: "hidden activations",
            expected: acc.n_hidden,
            found: h.len(),
        });
    }
    let k = acc.n_hidden;
    let h_sum: f64 = h.iter().sum();
    let mut below = x.n_objects();
    for block in x.blocks() {
        let b = block.len();
        below -= b;
        let pairs = (b * (b - 1) / 2) as f64;
        acc.d_nu += weight * pairs * (1.0 + h_sum);
        let per_item = weight * (0.5 * (b - 1) as f64 + below as f64);
        for &i in block {
            acc.d_u[i] += per_item;
            for (c, hk) in h.iter().enumerate() {
                acc.d_w[i * k + c] += per_item * hk;
            }
        }
    }
    Ok(())
}

/// Sufficient statistics of one state.
pub fn sufficient_stats(x: &OrderedPartition, h: &[f64]) -> GradientEstimate {
    let mut acc = GradientEstimate::zeros(x.n_objects(), h.len());
    accumulate_stats(&mut acc, x, h, 1.0).expect("shape taken from inputs");
    acc
}

/// Stochastic log-likelihood gradient: mean statistics of the observed
/// states (hidden units at their exact posterior) minus mean statistics of
/// model samples (hidden units as sampled).
pub fn estimate_gradient(
    observed: &[(OrderedPartition, Vec<f64>)],
    model_samples: &[(OrderedPartition, HiddenState)],
) -> Result<GradientEstimate> {
    let (first, post) = observed.first().ok_or(Error::EmptyInput("observed states"))?;
    if model_samples.is_empty() {
        return Err(Error::EmptyInput("model samples"));
    }
    let mut g = GradientEstimate::zeros(first.n_objects(), post.len());
    let w = 1.0 / observed.len() as f64;
    for (x, p) in observed {
        accumulate_stats(&mut g, x, p, w)?;
    }
    let w = -1.0 / model_samples.len() as f64;
    for (x, h) in model_samples {
        accumulate_stats(&mut g, x, &h.as_weights(), w)?;
    }
    g.n_data_terms = observed.len();
    g.n_model_samples = model_samples.len();
    Ok(g)
}

fn check_exact_size(p: &CfParams) -> Result<()> {
    if p.n_items() > EXACT_GRADIENT_MAX_ITEMS {
        return Err(Error::CapExceeded {
            n: p.n_items(),
            cap: EXACT_GRADIENT_MAX_ITEMS,
            states: fubini(p.n_items()),
        });
    }
    if p.n_hidden() > EXACT_GRADIENT_MAX_HIDDEN {
        return Err(Error::InvalidConfig("exact gradient supports at most 4 hidden units".into()));
    }
    Ok(())
}

fn check_data(p: &CfParams, data: &[OrderedPartition]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("data"));
    }
    if let Some(x) = data.iter().find(|x| x.n_objects() != p.n_items()) {
        return Err(Error::ObjectCountMismatch {
            expected: p.n_items(),
            found: x.n_objects(),
        });
    }
    Ok(())
}

/// Exact gradient of the mean log-likelihood of `data` (each a partition of
/// all items), by enumeration of every partition.
pub fn exact_gradient(p: &CfParams, data: &[OrderedPartition]) -> Result<GradientEstimate> {
    check_exact_size(p)?;
    check_data(p, data)?;
    let m = p.latent_model();
    let mut g = GradientEstimate::zeros(p.n_items(), p.n_hidden());
    let w = 1.0 / data.len() as f64;
    for x in data {
        accumulate_stats(&mut g, x, &m.hidden_posterior_unchecked(x), w)?;
    }
    let mut states = Vec::new();
    let mut lse = LogSumExp::new();
    for_each_ordered_partition(p.n_items(), EXACT_GRADIENT_MAX_ITEMS, |x| {
        let lw = m.log_marginal_weight_unchecked(x);
        lse.add(lw);
        states.push((x.clone(), lw));
    })?;
    let log_z = lse.value();
    let mut count = 0;
    for (x, lw) in &states {
        let prob = libm::exp(lw - log_z);
        accumulate_stats(&mut g, x, &m.hidden_posterior_unchecked(x), -prob)?;
        count += 1;
    }
    g.n_data_terms = data.len();
    g.n_model_samples = count;
    Ok(g)
}

/// Exact mean log-likelihood `mean_x log P(x)` with hidden units summed out
/// (up to 8 items).
pub fn exact_log_likelihood(p: &CfParams, data: &[OrderedPartition]) -> Result<f64> {
    check_data(p, data)?;
    let m = p.latent_model();
    let log_z = crate::partition_fn::exact_log_z_latent(&m)?;
    let total: f64 = data.iter().map(|x| m.log_marginal_weight_unchecked(x)).sum();
    Ok(total / data.len() as f64 - log_z)
}

/// Per-datum exact log-likelihoods, sharing one partition-function
/// evaluation.
pub fn exact_log_likelihoods(p: &CfParams, data: &[OrderedPartition]) -> Result<Vec<f64>> {
    check_data(p, data)?;
    let m = p.latent_model();
    let log_z = crate::partition_fn::exact_log_z_latent(&m)?;
    Ok(data.iter().map(|x| m.log_marginal_weight_unchecked(x) - log_z).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_ordered_partitions;
    use crate::rng::stream_rng;
    use alloc::vec;
    use rand::Rng;

    fn part(s: &str) -> OrderedPartition {
        s.parse().unwrap()
    }

    #[test]
    fn stats_examples() {
        let g = sufficient_stats(&part("0>1"), &[]);
        assert_eq!(g.d_u, vec![1.0, 0.0]);
        assert_eq!(g.d_nu, 0.0);

        let g = sufficient_stats(&part("0,1"), &[1.0]);
        assert_eq!(g.d_nu, 2.0);
        assert_eq!(g.d_w, vec![0.5, 0.5]);
        assert_eq!(g.d_u, vec![0.5, 0.5]);

        let g = sufficient_stats(&OrderedPartition::singletons(4), &[0.0, 0.0]);
        assert_eq!(g.d_nu, 0.0);
        assert_eq!(g.d_u, vec![3.0, 2.0, 1.0, 0.0]);
        assert!(g.d_w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stats_are_gradient_of_joint_weight() {
        let mut rng = stream_rng(10, 0);
        let eps = 1e-5;
        for trial in 0..20 {
            let n = 2 + trial % 4;
            let k = 1 + trial % 3;
            let p = CfParams::random(n, k, 1.0, &mut rng);
            let states = enumerate_ordered_partitions(n).unwrap();
            let x = &states[rng.gen_range(0..states.len())];
            let h = HiddenState::from_index(rng.gen_range(0..1 << k), k);
            let g = sufficient_stats(x, &h.as_weights()).to_vec();
            let theta = p.to_vec();
            for c in 0..theta.len() {
                let at = |d: f64| {
                    let mut t = theta.clone();
                    t[c] += d;
                    p.from_vec(&t).unwrap().latent_model().log_joint_weight(x, &h).unwrap()
                };
                let fd = (at(eps) - at(-eps)) / (2.0 * eps);
                assert!((fd - g[c]).abs() < 1e-6, "coordinate {c}: {fd} vs {}", g[c]);
            }
        }
    }

    #[test]
    fn exact_gradient_matches_finite_differences() {
        let mut rng = stream_rng(11, 0);
        let eps = 1e-5;
        for (n, k) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
            let mut p = CfParams::random(n, k, 0.8, &mut rng);
            p.nu = 0.3;
            let states = enumerate_ordered_partitions(n).unwrap();
            let data: Vec<OrderedPartition> = (0..5).map(|_| states[rng.gen_range(0..states.len())].clone()).collect();
            let g = exact_gradient(&p, &data).unwrap().to_vec();
            let theta = p.to_vec();
            for c in 0..theta.len() {
                let at = |d: f64| {
                    let mut t = theta.clone();
                    t[c] += d;
                    exact_log_likelihood(&p.from_vec(&t).unwrap(), &data).unwrap()
                };
                let fd = (at(eps) - at(-eps)) / (2.0 * eps);
                assert!((fd - g[c]).abs() < 1e-6, "n={n} k={k} coordinate {c}: {fd} vs {}", g[c]);
            }
        }
    }

    #[test]
    fn matched_samples_give_zero_gradient() {
        let xs = [part("0>1,2>3"), part("3,2,1,0"), part("1>0>3>2")];
        let h = HiddenState { bits: vec![true, false] };
        let observed: Vec<_> = xs.iter().map(|x| (x.clone(), h.as_weights())).collect();
        let model: Vec<_> = xs.iter().map(|x| (x.clone(), h.clone())).collect();
        let g = estimate_gradient(&observed, &model).unwrap();
        assert!(g.norm() < 1e-12);
        assert_eq!((g.n_data_terms, g.n_model_samples), (3, 3));
        assert!(estimate_gradient(&[], &model).is_err());
        assert!(estimate_gradient(&observed, &[]).is_err());
    }

    #[test]
    fn zero_model_symmetric_data_gives_equal_worth_gradients() {
        let p = CfParams::zeros(3, 1);
        let data = [part("0,1,2")];
        let g = exact_gradient(&p, &data).unwrap();
        assert!((g.d_u[0] - g.d_u[1]).abs() < 1e-12 && (g.d_u[1] - g.d_u[2]).abs() < 1e-12);
        let g = exact_gradient(&p, &[part("0>1>2"), part("2>1>0")]).unwrap();
        assert!((g.d_u[0] - g.d_u[2]).abs() < 1e-12);
        assert!(g.norm().is_finite());
    }

    #[test]
    fn exact_gradient_size_caps() {
        assert!(exact_gradient(&CfParams::zeros(7, 1), &[OrderedPartition::singletons(7)]).is_err());
        assert!(exact_gradient(&CfParams::zeros(3, 5), &[OrderedPartition::singletons(3)]).is_err());
        assert!(exact_gradient(&CfParams::zeros(3, 1), &[OrderedPartition::singletons(4)]).is_err());
    }

    #[test]
    fn translation_of_worths_shifts_equal_structure_states_equally() {
        let mut rng = stream_rng(13, 0);
        let p = CfParams::random(4, 0, 1.0, &mut rng);
        let mut shifted = p.clone();
        shifted.u.iter_mut().for_each(|v| *v += 0.7);
        // same number of tied and ordered pairs in both states
        let (a, b) = (part("0,1>2>3"), part("3>1,2>0"));
        let d = |q: &CfParams| {
            let m = q.latent_model();
            m.log_base_weight(&a).unwrap() - m.log_base_weight(&b).unwrap()
        };
        assert!((d(&p) - d(&shifted)).abs() < 1e-12);
    }

    #[test]
    fn mapped_accumulation() {
        let local = sufficient_stats(&part("0>1"), &[1.0]);
        let mut global = GradientEstimate::zeros(4, 1);
        global.add_mapped(&local, &[3, 1], 2.0).unwrap();
        assert_eq!(global.d_u, vec![0.0, 0.0, 0.0, 2.0]);
        assert_eq!(global.d_w, vec![0.0, 0.0, 0.0, 2.0]);
        assert!(global.add_mapped(&local, &[0], 1.0).is_err());
    }
}

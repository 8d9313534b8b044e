use std::collections::BTreeMap;

use osm_core::combinatorics::enumerate_ordered_partitions;
use osm_core::oracle::ExactDistribution;
use osm_core::rng::stream_rng;
use osm_core::sampler::exact::transition_matrix;
use osm_core::{HiddenState, LatentModel, OrderedPartition, PairModel};

fn random_latent(n: usize, k: usize, seed: u64) -> LatentModel<PairModel> {
    let mut rng = stream_rng(seed, 0);
    let base = PairModel::random_loglinear(n, 1.0, &mut rng);
    let hidden = (0..k).map(|_| PairModel::random_loglinear(n, 1.0, &mut rng)).collect();
    LatentModel::new(base, hidden).unwrap()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Exact kernel of one sweep: draw `h'` from `P(h | X)`, then apply the
/// split-and-merge kernel of `P(X | h')` `inner` times.
fn sweep_kernel(m: &LatentModel<PairModel>, inner: usize) -> (Vec<(OrderedPartition, HiddenState)>, Vec<Vec<f64>>) {
    let k = m.n_hidden();
    let xs = enumerate_ordered_partitions(m.n_objects()).unwrap();
    let hs: Vec<HiddenState> = (0..1usize << k).map(|c| HiddenState::from_index(c, k)).collect();
    let powers: Vec<Vec<Vec<f64>>> = hs
        .iter()
        .map(|h| {
            let p = transition_matrix(&xs, &m.effective_pair_model(h).unwrap()).unwrap();
            (1..inner).fold(p.clone(), |acc, _| matmul(&acc, &p))
        })
        .collect();
    let states: Vec<(OrderedPartition, HiddenState)> =
        xs.iter().flat_map(|x| hs.iter().map(move |h| (x.clone(), h.clone()))).collect();
    let nh = hs.len();
    let index: BTreeMap<(usize, usize), usize> =
        (0..xs.len()).flat_map(|x| (0..nh).map(move |h| ((x, h), x * nh + h))).collect();
    let mut kernel = vec![vec![0.0; states.len()]; states.len()];
    for (xi, x) in xs.iter().enumerate() {
        let post = m.hidden_posterior(x).unwrap();
        for (hi, h) in hs.iter().enumerate() {
            let p_h: f64 = h.bits.iter().zip(&post).map(|(&b, p)| if b { *p } else { 1.0 - p }).product();
            for (yi, _) in xs.iter().enumerate() {
                let to = index[&(yi, hi)];
                for from_h in 0..hs.len() {
                    kernel[index[&(xi, from_h)]][to] += p_h * powers[hi][xi][yi];
                }
            }
        }
    }
    (states, kernel)
}

#[test]
fn sweep_leaves_the_joint_invariant() {
    for (n, k, inner) in [(3, 1, 1), (3, 2, 3), (4, 2, 2)] {
        let m = random_latent(n, k, (n * 10 + k) as u64);
        let joint = ExactDistribution::latent_joint(&m).unwrap();
        let (states, kernel) = sweep_kernel(&m, inner);
        let pi: Vec<f64> = states.iter().map(|s| joint.prob(s)).collect();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for j in 0..states.len() {
            let flow: f64 = (0..states.len()).map(|i| pi[i] * kernel[i][j]).sum();
            assert!((flow - pi[j]).abs() < 1e-12, "n={n} K={k}: state {j} flow {flow} vs {}", pi[j]);
        }
    }
}

#[test]
fn marginal_of_the_joint_is_the_partition_marginal() {
    let m = random_latent(4, 3, 7);
    let joint = ExactDistribution::latent_joint(&m).unwrap();
    let marginal = ExactDistribution::latent_marginal(&m).unwrap();
    for (x, p) in marginal.states().iter().zip(marginal.probs()) {
        let summed: f64 = (0..8).map(|c| joint.prob(&(x.clone(), HiddenState::from_index(c, 3)))).sum();
        assert!((summed - p).abs() < 1e-12);
    }
}

//! Rayon drivers. Every unit of work draws from its own random stream, so
//! results do not depend on the thread count and equal the sequential ones.

use osm_core::latent::{run_latent_chain, LatentRun};
use osm_core::learning::{user_update, BlockExecutor, CfParams, TrainConfig, UserData, UserUpdate};
use osm_core::partition_fn::{ais_run, AisConfig, AisResult, AnnealTarget};
use osm_core::pipeline::{evaluate_user, MetricKind, UserSplit};
use osm_core::sampler::{run_chain_on_stream, ChainRun, SamplerConfig};
use osm_core::{combinatorics::UniformPartitionSampler, LatentChain, LatentModel, LinearPotentials};
use osm_core::{OrderedPartition, PairPotentials};
use rayon::prelude::*;

/// Builds a pool with `threads` workers, or one per core when `None`.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build()
}

/// Runs the users of a block concurrently.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl BlockExecutor for Rayon {
    fn run_block(
        &self,
        params: &CfParams,
        cfg: &TrainConfig,
        users: &[UserData],
        chains: &mut [LatentChain],
    ) -> osm_core::Result<Vec<UserUpdate>> {
        users
            .par_iter()
            .zip(chains.par_iter_mut())
            .map(|(u, c)| user_update(params, cfg, u, c))
            .collect()
    }
}

/// Per-user metric rows, in user order.
pub fn evaluate_users<P>(m: &LatentModel<P>, users: &[UserSplit], metrics: &[MetricKind]) -> osm_core::Result<Vec<Vec<f64>>>
where
    P: PairPotentials + Sync,
{
    users.par_iter().map(|u| evaluate_user(m, u, metrics)).collect()
}

/// AIS with the runs spread over threads.
pub fn ais_log_z<T: AnnealTarget + Sync + ?Sized>(m: &T, cfg: &AisConfig) -> osm_core::Result<AisResult> {
    cfg.validate()?;
    let temperatures = cfg.temperatures();
    let start = UniformPartitionSampler::new(m.n_objects());
    let weights = (0..cfg.n_runs)
        .into_par_iter()
        .map(|r| ais_run(m, cfg, &temperatures, &start, r))
        .collect();
    Ok(AisResult::from_log_weights(m.log_z0(), weights))
}

/// Independent chains from the same start, chain `c` on stream `c`.
pub fn run_chains<P: PairPotentials + Sync>(
    init: &OrderedPartition,
    m: &P,
    cfg: &SamplerConfig,
    n_chains: usize,
) -> osm_core::Result<Vec<ChainRun>> {
    (0..n_chains)
        .into_par_iter()
        .map(|c| run_chain_on_stream(init.clone(), m, cfg, c as u64))
        .collect()
}

/// Independent latent chains, chain `c` on stream `c`.
pub fn run_latent_chains<P: LinearPotentials + Sync>(
    init: &OrderedPartition,
    m: &LatentModel<P>,
    cfg: &SamplerConfig,
    n_chains: usize,
    inner_steps: usize,
) -> osm_core::Result<Vec<LatentRun>> {
    (0..n_chains)
        .into_par_iter()
        .map(|c| run_latent_chain(init.clone(), m, cfg, c as u64, inner_steps))
        .collect()
}

//! Pairwise potentials of the ordered sets model and the unnormalized
//! log-weight they induce.
//!
//! A partition `X` has weight
//!
//! ```text
//! log Ω(X) = Σ_t Σ_{i<j ∈ X_t} log φ(i~j) + Σ_{t<t'} Σ_{i∈X_t, j∈X_t'} log ψ(i≻j)
//! ```
//!
//! where `φ` rewards tying two objects and `ψ` rewards ranking one above the
//! other. Everything is kept in the log domain.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::{validate_bipartition, OrderedPartition};

/// Log tie and order potentials over `n_objects` objects.
///
/// `log_tie` must be symmetric and both must be finite for `i != j`.
pub trait PairPotentials {
    fn n_objects(&self) -> usize;

    /// `log φ(i ~ j)`.
    fn log_tie(&self, i: usize, j: usize) -> f64;

    /// `log ψ(i ≻ j)`: `i` ranked above `j`.
    fn log_order(&self, i: usize, j: usize) -> f64;
}

impl<P: PairPotentials + ?Sized> PairPotentials for &P {
    fn n_objects(&self) -> usize {
        (**self).n_objects()
    }
    fn log_tie(&self, i: usize, j: usize) -> f64 {
        (**self).log_tie(i, j)
    }
    fn log_order(&self, i: usize, j: usize) -> f64 {
        (**self).log_order(i, j)
    }
}

/// Potentials that are closed under `scale * (base + Σ_k w_k hidden_k)`.
///
/// This is what the latent model needs to fold a hidden configuration (or
/// posterior, or an annealing temperature) into a single pair model.
pub trait LinearPotentials: PairPotentials + Sized {
    fn linear_combination(base: &Self, hidden: &[Self], weights: &[f64], scale: f64) -> Self;
}

/// Dense potentials stored as two `n × n` row-major tables.
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    n: usize,
    tie: Vec<f64>,
    order: Vec<f64>,
}

impl PairModel {
    /// All potentials equal to one.
    pub fn uniform(n: usize) -> Self {
        Self {
            n,
            tie: vec![0.0; n * n],
            order: vec![0.0; n * n],
        }
    }

    /// Builds from closures; the tie closure is evaluated on `(min, max)` and
    /// mirrored, so the result is symmetric by construction.
    pub fn from_fns<T, O>(n: usize, mut log_tie: T, mut log_order: O) -> Result<Self>
    where
        T: FnMut(usize, usize) -> f64,
        O: FnMut(usize, usize) -> f64,
    {
        let mut m = Self::uniform(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if i < j {
                    let v = log_tie(i, j);
                    m.tie[i * n + j] = v;
                    m.tie[j * n + i] = v;
                }
                m.order[i * n + j] = log_order(i, j);
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_tables(n: usize, tie: Vec<f64>, order: Vec<f64>) -> Result<Self> {
        for (what, t) in [("tie table", &tie), ("order table", &order)] {
            if t.len() != n * n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n * n,
                    found: t.len(),
                });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if tie[i * n + j] != tie[j * n + i] {
                    return Err(Error::InvalidConfig("tie table is not symmetric".into()));
                }
            }
        }
        let m = Self { n, tie, order };
        m.check_finite()?;
        Ok(m)
    }

    /// Random log-linear model over [`PairIndicatorFeatures`] with every
    /// weight drawn from `uniform(-scale, scale)`.
    pub fn random_loglinear<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Self {
        let features = PairIndicatorFeatures { n };
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| if scale > 0.0 { rng.gen_range(-scale..scale) } else { 0.0 })
                .collect()
        };
        let alpha = draw(features.n_tie_features());
        let beta = draw(features.n_order_features());
        loglinear_pair_model(&LogLinearParams { alpha, beta, features })
            .expect("indicator features match their weight vectors")
    }

    fn check_finite(&self) -> Result<()> {
        if self.tie.iter().chain(&self.order).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("pair potentials"))
        }
    }
}

impl PairPotentials for PairModel {
    fn n_objects(&self) -> usize {
        self.n
    }
    #[inline]
    fn log_tie(&self, i: usize, j: usize) -> f64 {
        self.tie[i * self.n + j]
    }
    #[inline]
    fn log_order(&self, i: usize, j: usize) -> f64 {
        self.order[i * self.n + j]
    }
}

impl LinearPotentials for PairModel {
    fn linear_combination(base: &Self, hidden: &[Self], weights: &[f64], scale: f64) -> Self {
        let mut out = base.clone();
        for (m, &w) in hidden.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            out.tie.iter_mut().zip(&m.tie).for_each(|(o, v)| *o += w * v);
            out.order.iter_mut().zip(&m.order).for_each(|(o, v)| *o += w * v);
        }
        if scale != 1.0 {
            out.tie.iter_mut().chain(out.order.iter_mut()).for_each(|v| *v *= scale);
        }
        out
    }
}

/// Worth-based potentials: `log φ(i~j) = ν + (w_i + w_j)/2` and
/// `log ψ(i≻j) = w_i`.
///
/// This is the collaborative-filtering parameterization, where each item
/// carries a log-worth and `ν` scales the reward for ties.
#[derive(Debug, Clone, PartialEq)]
pub struct WorthModel {
    pub nu: f64,
    pub worth: Vec<f64>,
}

impl WorthModel {
    pub fn new(nu: f64, worth: Vec<f64>) -> Result<Self> {
        if !nu.is_finite() || worth.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("worth model"));
        }
        Ok(Self { nu, worth })
    }
}

impl PairPotentials for WorthModel {
    fn n_objects(&self) -> usize {
        self.worth.len()
    }
    #[inline]
    fn log_tie(&self, i: usize, j: usize) -> f64 {
        self.nu + 0.5 * (self.worth[i] + self.worth[j])
    }
    #[inline]
    fn log_order(&self, i: usize, _j: usize) -> f64 {
        self.worth[i]
    }
}

impl LinearPotentials for WorthModel {
    fn linear_combination(base: &Self, hidden: &[Self], weights: &[f64], scale: f64) -> Self {
        let mut nu = base.nu;
        let mut worth = base.worth.clone();
        for (m, &w) in hidden.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            nu += w * m.nu;
            worth.iter_mut().zip(&m.worth).for_each(|(o, v)| *o += w * v);
        }
        worth.iter_mut().for_each(|v| *v *= scale);
        Self {
            nu: nu * scale,
            worth,
        }
    }
}

/// `scale ×` every log-potential of the wrapped model (`Ω^τ`).
#[derive(Debug, Clone, Copy)]
pub struct Scaled<P> {
    pub inner: P,
    pub scale: f64,
}

impl<P: PairPotentials> PairPotentials for Scaled<P> {
    fn n_objects(&self) -> usize {
        self.inner.n_objects()
    }
    #[inline]
    fn log_tie(&self, i: usize, j: usize) -> f64 {
        self.scale * self.inner.log_tie(i, j)
    }
    #[inline]
    fn log_order(&self, i: usize, j: usize) -> f64 {
        self.scale * self.inner.log_order(i, j)
    }
}

/// View of a model on a subset of its objects: local object `o` is
/// `items[o]` of the inner model.
#[derive(Debug, Clone, Copy)]
pub struct Restricted<'a, P> {
    pub inner: &'a P,
    pub items: &'a [usize],
}

impl<P: PairPotentials> PairPotentials for Restricted<'_, P> {
    fn n_objects(&self) -> usize {
        self.items.len()
    }
    #[inline]
    fn log_tie(&self, i: usize, j: usize) -> f64 {
        self.inner.log_tie(self.items[i], self.items[j])
    }
    #[inline]
    fn log_order(&self, i: usize, j: usize) -> f64 {
        self.inner.log_order(self.items[i], self.items[j])
    }
}

pub(crate) fn log_weight_unchecked<P: PairPotentials + ?Sized>(x: &OrderedPartition, m: &P) -> f64 {
    let blocks = x.blocks();
    let mut total = 0.0;
    for (t, block) in blocks.iter().enumerate() {
        for (a, &i) in block.iter().enumerate() {
            for &j in &block[a + 1..] {
                total += m.log_tie(i, j);
            }
        }
        for lower in &blocks[t + 1..] {
            for &i in block {
                for &j in lower {
                    total += m.log_order(i, j);
                }
            }
        }
    }
    total
}

/// `log Ω(X)`.
pub fn log_weight<P: PairPotentials + ?Sized>(x: &OrderedPartition, m: &P) -> Result<f64> {
    x.ensure_objects(m.n_objects())?;
    Ok(log_weight_unchecked(x, m))
}

/// `Σ_{i∈upper, j∈lower} log ψ(i≻j) − log φ(i~j)`: the change in log-weight
/// when a tied group is split into `upper` ranked directly above `lower`.
#[inline]
pub(crate) fn split_log_ratio<P: PairPotentials + ?Sized>(upper: &[usize], lower: &[usize], m: &P) -> f64 {
    let mut total = 0.0;
    for &i in upper {
        for &j in lower {
            total += m.log_order(i, j) - m.log_tie(i, j);
        }
    }
    total
}

/// Log likelihood ratio of splitting block `t` into `upper` (kept at
/// position `t`) and `lower` (inserted right after it). Only pairs across
/// the cut are touched.
pub fn log_ratio_split<P: PairPotentials + ?Sized>(
    x: &OrderedPartition,
    t: usize,
    upper: &[usize],
    lower: &[usize],
    m: &P,
) -> Result<f64> {
    x.ensure_objects(m.n_objects())?;
    validate_bipartition(x.block(t)?, t, upper, lower)?;
    Ok(split_log_ratio(upper, lower, m))
}

/// Log likelihood ratio of merging blocks `t` and `t + 1`.
pub fn log_ratio_merge<P: PairPotentials + ?Sized>(x: &OrderedPartition, t: usize, m: &P) -> Result<f64> {
    x.ensure_objects(m.n_objects())?;
    if t + 1 >= x.n_blocks() {
        return Err(Error::NoSuchBlock {
            index: t + 1,
            n_blocks: x.n_blocks(),
        });
    }
    let blocks = x.blocks();
    Ok(-split_log_ratio(&blocks[t], &blocks[t + 1], m))
}

/// Feature functions for a log-linear pair model.
pub trait PairFeatures {
    fn n_objects(&self) -> usize;
    fn n_tie_features(&self) -> usize;
    fn n_order_features(&self) -> usize;
    /// Writes `f_a(i, j)` for `i < j`.
    fn tie_features(&self, i: usize, j: usize, out: &mut [f64]);
    /// Writes `g_b(i, j)` for `i ≻ j`.
    fn order_features(&self, i: usize, j: usize, out: &mut [f64]);
}

/// One constant tie feature and one constant order feature.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFeatures {
    pub n: usize,
}

impl PairFeatures for ConstantFeatures {
    fn n_objects(&self) -> usize {
        self.n
    }
    fn n_tie_features(&self) -> usize {
        1
    }
    fn n_order_features(&self) -> usize {
        1
    }
    fn tie_features(&self, _: usize, _: usize, out: &mut [f64]) {
        out[0] = 1.0;
    }
    fn order_features(&self, _: usize, _: usize, out: &mut [f64]) {
        out[0] = 1.0;
    }
}

/// A constant feature plus one indicator per unordered pair (ties) and per
/// ordered pair (orders). With arbitrary weights this spans every pair model.
#[derive(Debug, Clone, Copy)]
pub struct PairIndicatorFeatures {
    pub n: usize,
}

impl PairIndicatorFeatures {
    fn tie_slot(&self, i: usize, j: usize) -> usize {
        // rank of (i, j), i < j, in row-major upper-triangle order
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }
}

impl PairFeatures for PairIndicatorFeatures {
    fn n_objects(&self) -> usize {
        self.n
    }
    fn n_tie_features(&self) -> usize {
        1 + self.n * self.n.saturating_sub(1) / 2
    }
    fn n_order_features(&self) -> usize {
        1 + self.n * self.n.saturating_sub(1)
    }
    fn tie_features(&self, i: usize, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        out[1 + self.tie_slot(i, j)] = 1.0;
    }
    fn order_features(&self, i: usize, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        let col = if j > i { j - 1 } else { j };
        out[1 + i * (self.n - 1) + col] = 1.0;
    }
}

/// Weights `α` (tie) and `β` (order) over a feature set.
#[derive(Debug, Clone)]
pub struct LogLinearParams<F> {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub features: F,
}

/// `log φ(i~j) = Σ_a α_a f_a(i,j)`, `log ψ(i≻j) = Σ_b β_b g_b(i,j)`.
pub fn loglinear_pair_model<F: PairFeatures>(p: &LogLinearParams<F>) -> Result<PairModel> {
    let f = &p.features;
    if p.alpha.len() != f.n_tie_features() {
        return Err(Error::DimensionMismatch {
            what: "tie weights",
            expected: f.n_tie_features(),
            found: p.alpha.len(),
        });
    }
    if p.beta.len() != f.n_order_features() {
        return Err(Error::DimensionMismatch {
            what: "order weights",
            expected: f.n_order_features(),
            found: p.beta.len(),
        });
    }
    let mut tie_buf = vec![0.0; p.alpha.len()];
    let mut order_buf = vec![0.0; p.beta.len()];
    PairModel::from_fns(
        f.n_objects(),
        |i, j| {
            f.tie_features(i, j, &mut tie_buf);
            dot(&p.alpha, &tie_buf)
        },
        |i, j| {
            f.order_features(i, j, &mut order_buf);
            dot(&p.beta, &order_buf)
        },
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Groups objects by equal grade and orders the groups by decreasing grade;
/// object `o` has grade `grades[o]`.
pub fn from_graded_ratings<G: Ord>(grades: &[G]) -> Result<OrderedPartition> {
    if grades.is_empty() {
        return Err(Error::EmptyInput("grades"));
    }
    let mut order: Vec<usize> = (0..grades.len()).collect();
    order.sort_by(|&a, &b| grades[b].cmp(&grades[a]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<usize> = None;
    for o in order {
        match prev {
            Some(p) if grades[p] == grades[o] => blocks.last_mut().unwrap().push(o),
            _ => blocks.push(vec![o]),
        }
        prev = Some(o);
    }
    Ok(OrderedPartition::from_parts_unchecked(blocks, grades.len()))
}

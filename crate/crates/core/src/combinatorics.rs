//! Exact counting, enumeration and uniform sampling of ordered set
//! partitions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::OrderedPartition;

/// Default largest object count accepted by [`enumerate_ordered_partitions`];
/// `fubini(8) = 545835`.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Exact non-negative integer count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// Nearest float; `inf` beyond `f64::MAX`.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Natural logarithm, finite even when the count exceeds `f64::MAX`.
    pub fn ln(&self) -> f64 {
        ln_biguint(&self.0)
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return libm::log(v.to_f64().unwrap());
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap();
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// Stirling number of the second kind: partitions of an `n`-set into `t`
/// non-empty unlabeled blocks.
pub fn stirling2(n: usize, t: usize) -> BigCount {
    if t > n {
        return BigCount(BigUint::zero());
    }
    // row[k] = s(m, k), advanced one m at a time
    let mut row = vec![BigUint::zero(); t + 1];
    row[0] = BigUint::one();
    for m in 1..=n {
        for k in (1..=t.min(m)).rev() {
            let next = &row[k] * k + &row[k - 1];
            row[k] = next;
        }
        row[0] = BigUint::zero();
    }
    BigCount(row[t].clone())
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Fubini numbers `a(0..=n)` from `a(m) = sum_k C(m, k) a(m - k)`.
pub fn fubini_table(n: usize) -> Vec<BigUint> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(BigUint::one());
    for m in 1..=n {
        let mut c = BigUint::one();
        let mut sum = BigUint::zero();
        for k in 1..=m {
            c = c * (m - k + 1) / k;
            sum += &c * &table[m - k];
        }
        table.push(sum);
    }
    table
}

/// Number of ordered set partitions of an `n`-set (ordered Bell number).
pub fn fubini(n: usize) -> BigCount {
    BigCount(fubini_table(n).pop().unwrap())
}

/// `ln` of the large-`n` approximation `n! / (2 (ln 2)^(n+1))`.
pub fn ln_fubini_asymptotic(n: usize) -> f64 {
    let ln_ln2 = libm::log(core::f64::consts::LN_2);
    libm::lgamma(n as f64 + 1.0) - core::f64::consts::LN_2 - (n as f64 + 1.0) * ln_ln2
}

/// Linear-scale asymptotic count; fails with [`Error::Overflow`] when the
/// value does not fit in an `f64`.
pub fn fubini_asymptotic(n: usize) -> Result<f64> {
    let ln = ln_fubini_asymptotic(n);
    let v = libm::exp(ln);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(ln))
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded {
            n,
            cap,
            states: fubini(n),
        });
    }
    Ok(())
}

/// Calls `f` on every ordered partition of `0..n` exactly once.
///
/// The top block is chosen first (subsets of the remaining objects in
/// increasing bitmask order), then the rest is enumerated recursively.
pub fn for_each_ordered_partition<F>(n: usize, cap: usize, mut f: F) -> Result<()>
where
    F: FnMut(&OrderedPartition),
{
    check_cap(n, cap)?;
    let mut current = OrderedPartition::empty_unchecked(n);
    let remaining: Vec<usize> = (0..n).collect();
    if n == 0 {
        f(&current);
        return Ok(());
    }
    recurse(&remaining, &mut current, &mut f);
    Ok(())
}

fn recurse<F: FnMut(&OrderedPartition)>(
    remaining: &[usize],
    current: &mut OrderedPartition,
    f: &mut F,
) {
    if remaining.is_empty() {
        f(current);
        return;
    }
    let r = remaining.len();
    for mask in 1u64..(1u64 << r) {
        let mut top = Vec::with_capacity(mask.count_ones() as usize);
        let mut rest = Vec::with_capacity(r - top.capacity());
        for (bit, &o) in remaining.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                top.push(o);
            } else {
                rest.push(o);
            }
        }
        current.push_block_unchecked(top);
        recurse(&rest, current, f);
        current.pop_block_unchecked();
    }
}

/// All ordered partitions of `0..n`, refusing `n` above
/// [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_ordered_partitions(n: usize) -> Result<Vec<OrderedPartition>> {
    enumerate_ordered_partitions_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_ordered_partitions_capped(n: usize, cap: usize) -> Result<Vec<OrderedPartition>> {
    check_cap(n, cap)?;
    let mut out = Vec::with_capacity(fubini(n).to_u64().unwrap_or(0) as usize);
    for_each_ordered_partition(n, cap, |x| out.push(x.clone()))?;
    Ok(out)
}

/// Exact uniform sampler over the `fubini(n)` ordered partitions of `0..n`.
///
/// Draws the size `k` of the top block with probability
/// `C(m, k) a(m - k) / a(m)` using exact integer arithmetic, picks its
/// members uniformly, and repeats on the remaining objects.
#[derive(Debug, Clone)]
pub struct UniformPartitionSampler {
    n: usize,
    fubini: Vec<BigUint>,
}

impl UniformPartitionSampler {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            fubini: fubini_table(n),
        }
    }

    pub fn n_objects(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OrderedPartition {
        let mut remaining: Vec<usize> = (0..self.n).collect();
        let mut blocks = Vec::new();
        while !remaining.is_empty() {
            let m = remaining.len();
            let mut u = rng.gen_biguint_below(&self.fubini[m]);
            let mut c = BigUint::one();
            let mut k = 1;
            loop {
                c = c * (m - k + 1) / k;
                let mass = &c * &self.fubini[m - k];
                if u < mass || k == m {
                    break;
                }
                u -= mass;
                k += 1;
            }
            let picked = rand::seq::index::sample(rng, m, k).into_vec();
            let mut take = vec![false; m];
            for p in picked {
                take[p] = true;
            }
            let mut top = Vec::with_capacity(k);
            let mut rest = Vec::with_capacity(m - k);
            for (idx, o) in remaining.into_iter().enumerate() {
                if take[idx] {
                    top.push(o);
                } else {
                    rest.push(o);
                }
            }
            blocks.push(top);
            remaining = rest;
        }
        OrderedPartition::from_parts_unchecked(blocks, self.n)
    }
}

pub fn sample_uniform_ordered_partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OrderedPartition {
    UniformPartitionSampler::new(n).sample(rng)
}

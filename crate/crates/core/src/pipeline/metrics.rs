use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{log2, pow, sqrt};

use crate::error::{Error, Result};

fn gain(g: u8) -> f64 {
    pow(2.0, f64::from(g)) - 1.0
}

fn dcg(grades: &[u8], t: usize) -> f64 {
    grades
        .iter()
        .take(t)
        .enumerate()
        .map(|(i, &g)| gain(g) / log2(2.0 + i as f64))
        .sum()
}

/// NDCG@T of grades listed in predicted order, normalized by the DCG@T of
/// the same grades sorted decreasingly; 1 when that ideal gain is 0.
pub fn ndcg_at(grades: &[u8], t: usize) -> Result<f64> {
    if grades.is_empty() {
        return Err(Error::EmptyInput("grades"));
    }
    if t == 0 {
        return Err(Error::InvalidConfig("NDCG cutoff must be at least 1".into()));
    }
    let mut ideal = grades.to_vec();
    ideal.sort_by(|a, b| b.cmp(a));
    let kappa = dcg(&ideal, t);
    if kappa == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg(grades, t) / kappa)
}

/// Stopping probability `(2^{g-1} − 1) / 16` of grade `g ∈ 1..=5`.
pub fn err_stop_probability(g: u8) -> Result<f64> {
    if !(1..=5).contains(&g) {
        return Err(Error::OutOfRange {
            value: f64::from(g),
            min: 1.0,
            max: 5.0,
        });
    }
    Ok((pow(2.0, f64::from(g - 1)) - 1.0) / 16.0)
}

/// Expected reciprocal rank of grades listed in predicted order.
pub fn err(grades: &[u8]) -> Result<f64> {
    if grades.is_empty() {
        return Err(Error::EmptyInput("grades"));
    }
    let mut continue_prob = 1.0;
    let mut total = 0.0;
    for (i, &g) in grades.iter().enumerate() {
        let v = err_stop_probability(g)?;
        total += continue_prob * v / (i + 1) as f64;
        continue_prob *= 1.0 - v;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Ndcg(usize),
    Err,
}

impl MetricKind {
    pub fn evaluate(self, grades: &[u8]) -> Result<f64> {
        match self {
            MetricKind::Ndcg(t) => ndcg_at(grades, t),
            MetricKind::Err => err(grades),
        }
    }

    /// `ndcg@1, ndcg@5, ndcg@10, err`.
    pub fn standard() -> Vec<MetricKind> {
        alloc::vec![MetricKind::Ndcg(1), MetricKind::Ndcg(5), MetricKind::Ndcg(10), MetricKind::Err]
    }

    /// Comma-separated list.
    pub fn parse_list(s: &str) -> Result<Vec<MetricKind>> {
        s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Ndcg(t) => write!(f, "ndcg@{t}"),
            MetricKind::Err => f.write_str("err"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "err" {
            return Ok(MetricKind::Err);
        }
        let bad = || Error::InvalidConfig(alloc::format!("unknown metric {s:?}"));
        let t = lower.strip_prefix("ndcg@").ok_or_else(bad)?;
        match t.parse::<usize>() {
            Ok(t) if t > 0 => Ok(MetricKind::Ndcg(t)),
            _ => Err(bad()),
        }
    }
}

/// Mean and standard error of per-user values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            sqrt(var / n as f64)
        } else {
            0.0
        };
        Self { mean, std_error, n }
    }
}

//! Line-oriented `key=value` reports and tab-separated sweep tables.

use std::io::{BufRead, Write};

use osm_core::pipeline::{MetricKind, Summary};

use crate::error::{Error, Result};

/// Ordered `key=value` pairs written one per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(pub Vec<(String, String)>);

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut out = Self::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::parse(n as u64 + 1, "expected key=value"))?;
            out.push(k.trim(), v.trim());
        }
        Ok(out)
    }
}

fn cutoff(m: MetricKind) -> String {
    match m {
        MetricKind::Ndcg(t) => t.to_string(),
        MetricKind::Err => "all".into(),
    }
}

fn name(m: MetricKind) -> &'static str {
    match m {
        MetricKind::Ndcg(_) => "ndcg",
        MetricKind::Err => "err",
    }
}

/// One line per metric:
/// `metric=ndcg T=5 mean=0.71 std_error=0.004 n_users=812`, after
/// `# key=value` header lines.
pub fn write_eval_report<W: Write>(mut w: W, header: &KeyValues, rows: &[(MetricKind, Summary)]) -> Result<()> {
    for (k, v) in &header.0 {
        writeln!(w, "# {k}={v}")?;
    }
    for (m, s) in rows {
        writeln!(
            w,
            "metric={} T={} mean={} std_error={} n_users={}",
            name(*m),
            cutoff(*m),
            s.mean,
            s.std_error,
            s.n
        )?;
    }
    Ok(())
}

/// Parses the metric lines of [`write_eval_report`] back into
/// `(metric, mean, std_error, n_users)`.
pub fn read_eval_report<R: BufRead>(r: R) -> Result<Vec<(MetricKind, f64, f64, usize)>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let number = n as u64 + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let field = |key: &str| -> Result<&str> {
            t.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::parse(number, format!("missing {key}")))
        };
        let metric = match (field("metric")?, field("T")?) {
            ("err", _) => MetricKind::Err,
            ("ndcg", t) => MetricKind::Ndcg(t.parse().map_err(|_| Error::parse(number, "bad cutoff"))?),
            (other, _) => return Err(Error::parse(number, format!("unknown metric {other}"))),
        };
        let num = |key: &str| -> Result<f64> {
            field(key)?.parse().map_err(|_| Error::parse(number, format!("bad {key}")))
        };
        let users = field("n_users")?.parse().map_err(|_| Error::parse(number, "bad n_users"))?;
        out.push((metric, num("mean")?, num("std_error")?, users));
    }
    Ok(out)
}

/// Tab-separated table with a header row.
pub fn write_tsv<W: Write>(mut w: W, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(w, "{}", columns.join("\t"))?;
    for r in rows {
        writeln!(w, "{}", r.join("\t"))?;
    }
    Ok(())
}

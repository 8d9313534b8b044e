//! Versioned text checkpoints of [`CfParams`].
//!
//! ```text
//! format_version 1
//! n_items 3
//! hidden 2
//! seed 42
//! item_ids 10 11 12
//! nu 0.25
//! u 0.1 -0.3 0
//! w 0.5 0.25
//! w 0 0
//! w -1 0.125
//! ```
//!
//! `seed` and `item_ids` are optional. Floats use the shortest decimal form
//! that reads back to the same value, so write → read → write is
//! byte-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use osm_core::learning::CfParams;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: CfParams,
    pub seed: Option<u64>,
    /// External id of each item index.
    pub item_ids: Option<Vec<u64>>,
}

impl Checkpoint {
    pub fn new(params: CfParams) -> Self {
        Self {
            params,
            seed: None,
            item_ids: None,
        }
    }
}

fn write_row<W: Write, T: std::fmt::Display>(w: &mut W, key: &str, values: &[T]) -> Result<()> {
    w.write_all(key.as_bytes())?;
    for v in values {
        write!(w, " {v}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_checkpoint<W: Write>(mut w: W, c: &Checkpoint) -> Result<()> {
    let p = &c.params;
    writeln!(w, "format_version {FORMAT_VERSION}")?;
    writeln!(w, "n_items {}", p.n_items())?;
    writeln!(w, "hidden {}", p.n_hidden())?;
    if let Some(seed) = c.seed {
        writeln!(w, "seed {seed}")?;
    }
    if let Some(ids) = &c.item_ids {
        write_row(&mut w, "item_ids", ids)?;
    }
    writeln!(w, "nu {}", p.nu)?;
    write_row(&mut w, "u", &p.u)?;
    for i in 0..p.n_items() {
        write_row(&mut w, "w", &p.w[i * p.n_hidden()..(i + 1) * p.n_hidden()])?;
    }
    Ok(())
}

fn values<T: FromStr>(line: u64, rest: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    rest.split_ascii_whitespace()
        .map(|v| v.parse().map_err(|e| Error::parse(line, format!("bad value {v:?}: {e}"))))
        .collect()
}

fn single<T: FromStr>(line: u64, rest: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let mut v = values(line, rest)?;
    if v.len() != 1 {
        return Err(Error::parse(line, "expected exactly one value"));
    }
    Ok(v.remove(0))
}

pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Checkpoint> {
    let mut version = None;
    let mut n_items: Option<usize> = None;
    let mut hidden: Option<usize> = None;
    let mut seed = None;
    let mut item_ids: Option<Vec<u64>> = None;
    let mut nu = None;
    let mut u: Option<Vec<f64>> = None;
    let mut w: Vec<f64> = Vec::new();
    let mut rows = 0;
    let mut last = 0;
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let number = n as u64 + 1;
        last = number;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed.split_once(' ').unwrap_or((trimmed, ""));
        match key {
            "format_version" => {
                let v: u32 = single(number, rest)?;
                if v != FORMAT_VERSION {
                    return Err(Error::parse(number, format!("unsupported format version {v}")));
                }
                version = Some(v);
            }
            "n_items" => n_items = Some(single(number, rest)?),
            "hidden" => hidden = Some(single(number, rest)?),
            "seed" => seed = Some(single(number, rest)?),
            "item_ids" => item_ids = Some(values(number, rest)?),
            "nu" => nu = Some(single(number, rest)?),
            "u" => u = Some(values(number, rest)?),
            "w" => {
                let k = hidden.ok_or_else(|| Error::parse(number, "w row before hidden"))?;
                let row: Vec<f64> = values(number, rest)?;
                if row.len() != k {
                    return Err(Error::parse(number, format!("w row has {} values, expected {k}", row.len())));
                }
                w.extend(row);
                rows += 1;
            }
            other => return Err(Error::parse(number, format!("unknown key {other:?}"))),
        }
    }
    let missing = |what: &str| Error::parse(last, format!("missing {what}"));
    version.ok_or_else(|| missing("format_version"))?;
    let n_items = n_items.ok_or_else(|| missing("n_items"))?;
    let hidden = hidden.ok_or_else(|| missing("hidden"))?;
    let u = u.ok_or_else(|| missing("u"))?;
    if u.len() != n_items || rows != n_items {
        return Err(Error::parse(last, format!("expected {n_items} items, found {} worths and {rows} w rows", u.len())));
    }
    if let Some(ids) = &item_ids {
        if ids.len() != n_items {
            return Err(Error::parse(last, format!("expected {n_items} item ids, found {}", ids.len())));
        }
    }
    let params = CfParams::new(nu.ok_or_else(|| missing("nu"))?, u, w, hidden)?;
    Ok(Checkpoint { params, seed, item_ids })
}

pub fn save_checkpoint(path: impl AsRef<Path>, c: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(&mut w, c)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file))
}

//! Sample dumps: one ordered partition per line, top block first, blocks
//! separated by `>` and members by `,` (`2,0>1`). Latent samples append
//! ` | ` and the hidden bits (`0>1,2 | 101`). Lines starting with `#` are
//! comments.

use std::io::{BufRead, Write};

use osm_core::{HiddenState, OrderedPartition};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRecord {
    pub partition: OrderedPartition,
    pub hidden: Option<HiddenState>,
}

pub fn format_hidden(h: &HiddenState) -> String {
    h.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn write_record<W: Write>(w: &mut W, r: &SampleRecord) -> Result<()> {
    match &r.hidden {
        Some(h) => writeln!(w, "{} | {}", r.partition, format_hidden(h))?,
        None => writeln!(w, "{}", r.partition)?,
    }
    Ok(())
}

/// Writes `# key=value` header lines.
pub fn write_header<W: Write>(w: &mut W, fields: &[(&str, String)]) -> Result<()> {
    for (k, v) in fields {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

pub fn parse_record(line: u64, text: &str) -> Result<SampleRecord> {
    let (x, h) = match text.split_once('|') {
        Some((x, h)) => (x.trim(), Some(h.trim())),
        None => (text.trim(), None),
    };
    let partition: OrderedPartition = x.parse().map_err(|e: osm_core::Error| Error::parse(line, e.to_string()))?;
    let hidden = match h {
        None => None,
        Some(bits) => Some(HiddenState {
            bits: bits
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::parse(line, format!("bad hidden bit {other:?}"))),
                })
                .collect::<Result<_>>()?,
        }),
    };
    Ok(SampleRecord { partition, hidden })
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(parse_record(n as u64 + 1, t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_line_decodes() {
        let r = parse_record(1, "2,0>1").unwrap();
        assert_eq!(r.partition.blocks(), &[vec![0, 2], vec![1]]);
        assert_eq!(r.hidden, None);
        let r = parse_record(1, "0>1,2 | 101").unwrap();
        assert_eq!(r.hidden.unwrap().bits, vec![true, false, true]);
        assert!(parse_record(1, "0>1 | 2").is_err());
        assert!(parse_record(1, "0>0").is_err());
    }

    #[test]
    fn round_trip() {
        let records = vec![
            SampleRecord {
                partition: "0,2>1".parse().unwrap(),
                hidden: None,
            },
            SampleRecord {
                partition: "1>0>2".parse().unwrap(),
                hidden: Some(HiddenState { bits: vec![false, true] }),
            },
        ];
        let mut buf = Vec::new();
        write_header(&mut buf, &[("seed", "7".into())]).unwrap();
        for r in &records {
            write_record(&mut buf, r).unwrap();
        }
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# seed=7\n0,2>1\n1>0>2 | 01\n");
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }
}

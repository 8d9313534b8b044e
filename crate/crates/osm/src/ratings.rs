//! Ratings files: MovieLens `user::item::rating::timestamp` lines, or CSV
//! with a header row.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use osm_core::pipeline::{RatingScale, RatingsBuilder, RatingsDataset};

use crate::error::{Error, Malformed, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingsFormat {
    /// `user::item::rating[::timestamp]`.
    MovieLens,
    /// Comma-separated with a header naming the user, item and rating
    /// columns.
    Csv,
}

impl RatingsFormat {
    /// `.csv` files are CSV, anything else `::`-separated.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => RatingsFormat::Csv,
            _ => RatingsFormat::MovieLens,
        }
    }
}

impl FromStr for RatingsFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "movielens" | "dcolon" | "ml" => Ok(RatingsFormat::MovieLens),
            "csv" => Ok(RatingsFormat::Csv),
            other => Err(format!("unknown ratings format {other:?} (expected movielens or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub format: RatingsFormat,
    pub scale: RatingScale,
    /// Fail on the first pass if any line is malformed.
    pub strict: bool,
}

impl LoadOptions {
    pub fn new(format: RatingsFormat) -> Self {
        Self {
            format,
            scale: RatingScale::MOVIELENS,
            strict: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: RatingsDataset,
    /// Skipped lines (always empty in strict mode).
    pub malformed: Vec<Malformed>,
}

pub fn load_ratings(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ratings(BufReader::new(file), opts)
}

pub fn read_ratings<R: Read>(reader: R, opts: &LoadOptions) -> Result<Loaded> {
    let mut builder = RatingsDataset::builder(opts.scale);
    let mut malformed = Vec::new();
    match opts.format {
        RatingsFormat::MovieLens => read_dcolon(BufReader::new(reader), &mut builder, &mut malformed)?,
        RatingsFormat::Csv => read_csv(reader, &mut builder, &mut malformed)?,
    }
    if opts.strict && !malformed.is_empty() {
        return Err(Error::Malformed(malformed));
    }
    for m in &malformed {
        log::warn!("skipping line {}: {}", m.line, m.reason);
    }
    if builder.duplicates() > 0 {
        log::warn!("{} repeated (user, item) pairs; the last rating was kept", builder.duplicates());
    }
    Ok(Loaded {
        dataset: builder.build(),
        malformed,
    })
}

fn push(
    builder: &mut RatingsBuilder,
    malformed: &mut Vec<Malformed>,
    line: u64,
    fields: [Option<&str>; 4],
) {
    let parsed = (|| -> std::result::Result<(), String> {
        let field = |i: usize, name: &str| fields[i].map(str::trim).ok_or_else(|| format!("missing {name}"));
        let user: u64 = field(0, "user")?.parse().map_err(|e| format!("bad user id: {e}"))?;
        let item: u64 = field(1, "item")?.parse().map_err(|e| format!("bad item id: {e}"))?;
        let rating: f64 = field(2, "rating")?.parse().map_err(|e| format!("bad rating: {e}"))?;
        let timestamp = match fields[3].map(str::trim) {
            None | Some("") => None,
            Some(t) => Some(t.parse::<i64>().map_err(|e| format!("bad timestamp: {e}"))?),
        };
        builder.push(user, item, rating, timestamp).map_err(|e| e.to_string())
    })();
    if let Err(reason) = parsed {
        malformed.push(Malformed { line, reason });
    }
}

fn read_dcolon<R: BufRead>(reader: R, builder: &mut RatingsBuilder, malformed: &mut Vec<Malformed>) -> Result<()> {
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let number = n as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split("::").collect();
        if parts.len() < 3 || parts.len() > 4 {
            malformed.push(Malformed {
                line: number,
                reason: format!("expected 3 or 4 '::'-separated fields, found {}", parts.len()),
            });
            continue;
        }
        push(builder, malformed, number, [Some(parts[0]), Some(parts[1]), Some(parts[2]), parts.get(3).copied()]);
    }
    Ok(())
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| {
        let h = h.trim().to_ascii_lowercase().replace(['_', ' '], "");
        names.contains(&h.as_str())
    })
}

fn read_csv<R: Read>(reader: R, builder: &mut RatingsBuilder, malformed: &mut Vec<Malformed>) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::parse(1, e.to_string())),
    };
    if headers.is_empty() {
        return Ok(());
    }
    let cols = [
        column(&headers, &["user", "userid"]).unwrap_or(0),
        column(&headers, &["item", "itemid", "movie", "movieid"]).unwrap_or(1),
        column(&headers, &["rating", "score"]).unwrap_or(2),
    ];
    let ts = column(&headers, &["timestamp", "time", "date"]);
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                if record.iter().all(|f| f.is_empty()) {
                    continue;
                }
                push(
                    builder,
                    malformed,
                    line,
                    [record.get(cols[0]), record.get(cols[1]), record.get(cols[2]), ts.and_then(|c| record.get(c))],
                );
            }
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                if e.is_io_error() {
                    return Err(Error::parse(line, e.to_string()));
                }
                malformed.push(Malformed {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Writes `d` in `format`, using the external ids.
pub fn write_ratings<W: Write>(mut w: W, d: &RatingsDataset, format: RatingsFormat) -> Result<()> {
    if format == RatingsFormat::Csv {
        writeln!(w, "userId,movieId,rating,timestamp")?;
    }
    let sep = if format == RatingsFormat::Csv { "," } else { "::" };
    for r in d.records() {
        write!(w, "{}{sep}{}{sep}{}", d.user_ids()[r.user], d.item_ids()[r.item], r.rating)?;
        match r.timestamp {
            Some(t) => writeln!(w, "{sep}{t}")?,
            None if format == RatingsFormat::Csv => writeln!(w, "{sep}")?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, format: RatingsFormat) -> Result<Loaded> {
        read_ratings(text.as_bytes(), &LoadOptions::new(format))
    }

    #[test]
    fn movielens_line() {
        let l = load("1::10::4.5::978300760\n", RatingsFormat::MovieLens).unwrap();
        let d = &l.dataset;
        assert_eq!(d.n_ratings(), 1);
        let r = d.records()[0];
        assert_eq!((d.user_ids()[r.user], d.item_ids()[r.item], r.rating, r.timestamp), (1, 10, 4.5, Some(978300760)));
    }

    #[test]
    fn empty_file() {
        for f in [RatingsFormat::MovieLens, RatingsFormat::Csv] {
            let l = load("", f).unwrap();
            assert_eq!(l.dataset.n_users(), 0);
        }
    }

    #[test]
    fn duplicates_keep_last() {
        let l = load("1::10::4.5\n1::10::2.0\n", RatingsFormat::MovieLens).unwrap();
        assert_eq!(l.dataset.duplicates(), 1);
        assert_eq!(l.dataset.records()[0].rating, 2.0);
    }

    #[test]
    fn malformed_lines_are_numbered() {
        let text = "1::10::4.5\nbroken\n\n2::x::3\n3::11::9.0\n";
        let l = load(text, RatingsFormat::MovieLens).unwrap();
        assert_eq!(l.dataset.n_ratings(), 1);
        let lines: Vec<u64> = l.malformed.iter().map(|m| m.line).collect();
        assert_eq!(lines, vec![2, 4, 5]);
        let mut opts = LoadOptions::new(RatingsFormat::MovieLens);
        opts.strict = true;
        match read_ratings(text.as_bytes(), &opts) {
            Err(Error::Malformed(m)) => assert_eq!(m.len(), 3),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn csv_with_header_in_any_column_order() {
        let text = "rating,timestamp,movieId,userId\n4.0,5,20,7\n0.5,,21,7\nbad,1,2,3\n";
        let l = load(text, RatingsFormat::Csv).unwrap();
        let d = &l.dataset;
        assert_eq!(d.n_ratings(), 2);
        assert_eq!(d.item_ids(), &[20, 21]);
        assert_eq!(d.records()[1].timestamp, None);
        assert_eq!(l.malformed.len(), 1);
        assert_eq!(l.malformed[0].line, 4);
    }

    #[test]
    fn write_read_round_trip() {
        let l = load("1::10::4.5::9\n2::10::1.0\n2::11::3.5::3\n", RatingsFormat::MovieLens).unwrap();
        for f in [RatingsFormat::MovieLens, RatingsFormat::Csv] {
            let mut buf = Vec::new();
            write_ratings(&mut buf, &l.dataset, f).unwrap();
            let back = read_ratings(buf.as_slice(), &LoadOptions::new(f)).unwrap();
            assert_eq!(back.dataset, l.dataset);
            assert!(back.malformed.is_empty());
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<RatingsFormat>().unwrap(), RatingsFormat::Csv);
        assert_eq!("MovieLens".parse::<RatingsFormat>().unwrap(), RatingsFormat::MovieLens);
        assert!("json".parse::<RatingsFormat>().is_err());
        assert_eq!(RatingsFormat::from_path(Path::new("a/ratings.CSV")), RatingsFormat::Csv);
        assert_eq!(RatingsFormat::from_path(Path::new("ratings.dat")), RatingsFormat::MovieLens);
    }
}

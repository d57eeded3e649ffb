//! Polarization-vs-delay measurements and their CSV form.
//!
//! ```text
//! # optional comment lines; "# t_sigma_ns = 0.16" sets the delay uncertainty
//! index,t_ns,PL_percent,sigma_percent
//! 1,0.9,13.0,1.0
//! ```
//!
//! Percent columns are converted to fractions on load.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["index", "t_ns", "PL_percent", "sigma_percent"];

const TABLE1_CSV: &str = include_str!("../data/cs8p_table1.csv");

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint {
    pub index: i64,
    /// Nominal delay, ns.
    pub t: f64,
    /// Linear polarization degree as a fraction.
    pub pl: f64,
    /// One-sigma uncertainty of `pl`, fraction.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeatDataset {
    pub points: Vec<DataPoint>,
    /// Common delay uncertainty, ns. Carried along, not used as a weight.
    pub t_sigma: f64,
}

impl BeatDataset {
    /// Build a dataset, enforcing positive finite sigmas and unique indices.
    pub fn new(points: Vec<DataPoint>, t_sigma: f64) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !(p.sigma > 0.0) || !p.sigma.is_finite() {
                return Err(Error::Validation(format!(
                    "point {} has non-positive sigma {}",
                    p.index, p.sigma
                )));
            }
            if !p.t.is_finite() || !p.pl.is_finite() {
                return Err(Error::Validation(format!("point {} has a non-finite value", p.index)));
            }
            if !seen.insert(p.index) {
                return Err(Error::Validation(format!("duplicate index {}", p.index)));
            }
        }
        if !(t_sigma >= 0.0) {
            return Err(Error::Validation(format!("t_sigma must be >= 0, got {t_sigma}")));
        }
        Ok(BeatDataset { points, t_sigma })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// The bundled 37-point Cs 8p 2P3/2 measurement.
    pub fn cs8p_table1() -> Self {
        parse_dataset(TABLE1_CSV).expect("bundled dataset is valid")
    }

    /// Serialize in the ingestion CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.t_sigma > 0.0 {
            let _ = writeln!(out, "# t_sigma_ns = {}", self.t_sigma);
        }
        out.push_str(&CSV_HEADER.join(","));
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6}",
                p.index,
                p.t,
                p.pl * 100.0,
                p.sigma * 100.0
            );
        }
        out
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<BeatDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

fn parse_t_sigma(line: &str) -> Option<&str> {
    let body = line.trim_start().strip_prefix('#')?.trim();
    let rest = body.strip_prefix("t_sigma_ns")?.trim_start();
    Some(rest.strip_prefix('=').or_else(|| rest.strip_prefix(':'))?.trim())
}

pub fn parse_dataset(text: &str) -> Result<BeatDataset> {
    let mut t_sigma = 0.0;
    for (n, line) in text.lines().enumerate() {
        if let Some(v) = parse_t_sigma(line) {
            t_sigma = v
                .parse()
                .map_err(|_| Error::parse(n as u64 + 1, "t_sigma_ns", format!("bad value {v:?}")))?;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = loop {
        match records.next() {
            None => return Err(Error::parse(1, "header", "empty dataset: missing header line")),
            Some(rec) => {
                let rec = rec.map_err(csv_error)?;
                if rec.iter().all(str::is_empty) {
                    continue;
                }
                break rec;
            }
        }
    };
    let line_of = |rec: &csv::StringRecord| rec.position().map_or(0, csv::Position::line);
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(
            line_of(&header),
            "header",
            format!("expected `{}`", CSV_HEADER.join(",")),
        ));
    }

    let mut points = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::parse(
                line,
                "row",
                format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            ));
        }
        let index: i64 = rec[0]
            .parse()
            .map_err(|_| Error::parse(line, CSV_HEADER[0], format!("not an integer: {:?}", &rec[0])))?;
        let num = |col: usize| -> Result<f64> {
            let v: f64 = rec[col]
                .parse()
                .map_err(|_| Error::parse(line, CSV_HEADER[col], format!("not a number: {:?}", &rec[col])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, CSV_HEADER[col], "value must be finite"))
            }
        };
        let t = num(1)?;
        let pl = num(2)? / 100.0;
        let sigma = num(3)? / 100.0;
        if !(sigma > 0.0) {
            return Err(Error::Validation(format!(
                "line {line}: sigma_percent must be > 0, got {}",
                &rec[3]
            )));
        }
        points.push(DataPoint { index, t, pl, sigma });
    }
    if points.is_empty() {
        return Err(Error::parse(line_of(&header), "row", "dataset has no data rows"));
    }
    BeatDataset::new(points, t_sigma)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, csv::Position::line);
    Error::parse(line, "row", e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table() {
        let d = BeatDataset::cs8p_table1();
        assert_eq!(d.len(), 37);
        let p = d.points[0];
        assert_eq!((p.index, p.t), (1, 0.9));
        assert!((p.pl - 0.130).abs() < 1e-15);
        assert!((p.sigma - 0.010).abs() < 1e-15);
        assert_eq!(d.t_sigma, 0.16);
        assert_eq!(d.points[36].index, 37);
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(parse_dataset(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_dataset("# only a comment\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_dataset("index,t_ns,PL_percent,sigma_percent\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn zero_sigma_is_a_validation_error() {
        let text = "index,t_ns,PL_percent,sigma_percent\n1,0.5,3.0,0\n";
        assert!(matches!(parse_dataset(text), Err(Error::Validation(_))));
    }

    #[test]
    fn duplicate_index_rejected() {
        let text = "index,t_ns,PL_percent,sigma_percent\n1,0.5,3.0,1\n1,0.7,3.0,1\n";
        assert!(matches!(parse_dataset(text), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_error_reports_line_and_column() {
        let text = "# c\nindex,t_ns,PL_percent,sigma_percent\n1,0.5,3.0,1\n2,abc,3.0,1\n";
        match parse_dataset(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, "t_ns");
            }
            other => panic!("unexpected {other:?}"),
        }
        let wrong_header = "idx,t,PL,sigma\n1,0.5,3.0,1\n";
        assert!(matches!(parse_dataset(wrong_header), Err(Error::Parse { line: 1, .. })));
        let short = "index,t_ns,PL_percent,sigma_percent\n1,0.5,3.0\n";
        assert!(matches!(parse_dataset(short), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn file_order_is_preserved() {
        let text = "index,t_ns,PL_percent,sigma_percent\n5,9.0,1,1\n2,3.0,1,1\n";
        let d = parse_dataset(text).unwrap();
        assert_eq!(d.points.iter().map(|p| p.index).collect::<Vec<_>>(), vec![5, 2]);
    }

    #[test]
    fn csv_round_trip() {
        let d = BeatDataset::cs8p_table1();
        let back = parse_dataset(&d.to_csv()).unwrap();
        assert_eq!(back.len(), d.len());
        assert_eq!(back.t_sigma, d.t_sigma);
        for (a, b) in d.points.iter().zip(&back.points) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.t, b.t);
            assert!((a.pl - b.pl).abs() < 1e-12);
            assert!((a.sigma - b.sigma).abs() < 1e-12);
        }
    }
}

//! Library side of the `delcap` command line: bounds tables, plot data,
//! source-flag parsing and exit codes.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{capacity_estimate, SeriesConstants};
use crate::error::{domain, Error, Result};
use crate::sources::{dagger_distribution, RunLengthDistribution, SourceSpec, DEFAULT_L_MAX};

/// Bounds shipped with the crate: the best published lower and upper bounds.
pub const DEFAULT_BOUNDS_CSV: &str = include_str!("../data/bounds.csv");

/// Grid used when a bounds file has no rows.
pub const DEFAULT_GRID: [f64; 10] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50];

pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
}

/// Exit code for an error surfaced at the command line.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => exit::IO,
        _ => exit::USAGE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Known capacity bounds, with `d` strictly increasing and `0 <= lower <= upper <= 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundsTable {
    pub rows: Vec<BoundsRow>,
}

impl BoundsTable {
    /// Parses the `d,lower,upper` CSV format. Line numbers in errors count the header as line 1.
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            return Ok(Self::default());
        }
        if headers.iter().collect::<Vec<_>>() != ["d", "lower", "upper"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header \"d,lower,upper\", found {:?}", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut rows: Vec<BoundsRow> = Vec::new();
        for rec in rdr.deserialize::<BoundsRow>() {
            let line_of = |e: &csv::Error| e.position().map_or(0, |p| p.line() as usize);
            let row = rec.map_err(|e| Error::Parse {
                line: line_of(&e),
                msg: e.to_string(),
            })?;
            let line = rows.len() + 2;
            let bad = |msg: String| Err(Error::Parse { line, msg });
            if !(0.0 <= row.lower && row.lower <= row.upper && row.upper <= 1.0) {
                return bad(format!("need 0 <= lower <= upper <= 1, got {} and {}", row.lower, row.upper));
            }
            if !(0.0..1.0).contains(&row.d) {
                return bad(format!("d = {} is outside [0, 1)", row.d));
            }
            if rows.last().is_some_and(|prev| prev.d >= row.d) {
                return bad(format!("d = {} is not strictly increasing", row.d));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?))
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_BOUNDS_CSV.as_bytes()).expect("shipped bounds file is valid")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(["d", "lower", "upper"])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8"))
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub d: f64,
    pub lower: Option<f64>,
    #[serde(rename = "C_est")]
    pub c_est: f64,
    pub upper: Option<f64>,
}

impl TableRow {
    /// True where the expansion sits above the best known upper bound.
    pub fn exceeds_upper(&self) -> bool {
        self.upper.is_some_and(|u| self.c_est > u)
    }
}

/// `C_est` next to the known bounds; an empty table falls back to [`DEFAULT_GRID`].
pub fn run_table(bounds: &BoundsTable, consts: &SeriesConstants) -> Result<Vec<TableRow>> {
    if bounds.rows.is_empty() {
        return DEFAULT_GRID
            .iter()
            .map(|&d| {
                Ok(TableRow {
                    d,
                    lower: None,
                    c_est: capacity_estimate(d, consts)?,
                    upper: None,
                })
            })
            .collect();
    }
    bounds
        .rows
        .iter()
        .map(|r| {
            Ok(TableRow {
                d: r.d,
                lower: Some(r.lower),
                c_est: capacity_estimate(r.d, consts)?,
                upper: Some(r.upper),
            })
        })
        .collect()
}

/// Plot data: `C_est` on a grid of step `step` over `(0, d_max]`, with the
/// known bounds filled in at the grid points where they exist.
pub fn figure_data(bounds: &BoundsTable, consts: &SeriesConstants, step: f64, d_max: f64) -> Result<Vec<TableRow>> {
    if !(step > 0.0 && d_max < 1.0) {
        return Err(domain("figure grid needs step > 0 and d_max < 1"));
    }
    let points = (d_max / step + 1e-9).floor() as usize;
    (1..=points)
        .map(|i| {
            let d = i as f64 * step;
            let known = bounds.rows.iter().find(|r| (r.d - d).abs() < 1e-9);
            Ok(TableRow {
                d,
                lower: known.map(|r| r.lower),
                c_est: capacity_estimate(d, consts)?,
                upper: known.map(|r| r.upper),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(domain(format!("unknown format {other:?}; use csv or json"))),
        }
    }
}

/// Renders rows as `d,lower,C_est,upper` CSV (missing bounds are empty) or a JSON array.
pub fn render_table(rows: &[TableRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(rows)?),
        OutputFormat::Csv => {
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut out = String::from("d,lower,C_est,upper\n");
            for r in rows {
                writeln!(out, "{},{},{},{}", r.d, cell(r.lower), r.c_est, cell(r.upper)).unwrap();
            }
            Ok(out)
        }
    }
}

/// Parses CSV written by [`render_table`].
pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = |msg: String| Error::Parse { line: i + 1, msg };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(bad(format!("expected 4 cells, found {}", cells.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(TableRow {
            d: num(cells[0])?,
            lower: opt(cells[1])?,
            c_est: num(cells[2])?,
            upper: opt(cells[3])?,
        });
    }
    Ok(rows)
}

/// A gnuplot script plotting the CSV written to `data_path`.
pub fn gnuplot_script(data_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key top right\n\
         set xlabel 'deletion probability d'\n\
         set ylabel 'bits per channel use'\n\
         set xrange [0:0.5]\n\
         plot '{data_path}' skip 1 using 1:3 with lines title 'C_est', \\\n     \
         '' skip 1 using 1:2 with points pt 7 title 'best lower bound', \\\n     \
         '' skip 1 using 1:4 with points pt 5 title 'best upper bound'\n"
    )
}

/// Parses `bernoulli`, `markov:<p_same>`, `dagger[:<d>]` or `renewal:<file>`.
/// A bare `dagger` uses `default_d`.
pub fn parse_source(flag: &str, default_d: f64) -> Result<SourceSpec> {
    let (kind, arg) = match flag.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (flag, None),
    };
    let num = |a: &str| a.parse::<f64>().map_err(|e| domain(format!("bad number {a:?} in --source: {e}")));
    match (kind, arg) {
        ("bernoulli", None) => Ok(SourceSpec::BernoulliHalf),
        ("markov", Some(p)) => SourceSpec::markov(num(p)?),
        ("dagger", None) => Ok(SourceSpec::Renewal(dagger_distribution(default_d, DEFAULT_L_MAX)?)),
        ("dagger", Some(d)) => Ok(SourceSpec::Renewal(dagger_distribution(num(d)?, DEFAULT_L_MAX)?)),
        ("renewal", Some(path)) => {
            let f = File::open(path)?;
            Ok(SourceSpec::Renewal(RunLengthDistribution::read(BufReader::new(f))?))
        }
        _ => Err(domain(format!(
            "unknown source {flag:?}; use bernoulli, markov:<p>, dagger[:<d>] or renewal:<file>"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::default_constants;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn shipped_table_rows() {
        let rows = run_table(&BoundsTable::shipped(), default_constants()).unwrap();
        assert_eq!(rows.len(), 10);
        let first = rows[0];
        assert_eq!((first.lower, first.upper), (Some(0.7283), Some(0.8160)));
        assert_abs_diff_eq!(first.c_est, 0.7304, epsilon = 5e-5);
        let crossing: Vec<f64> = rows.iter().filter(|r| r.exceeds_upper()).map(|r| r.d).collect();
        assert_eq!(crossing, vec![0.40, 0.45, 0.50]);
        assert_abs_diff_eq!(rows[7].c_est, 0.2781, epsilon = 5e-5);
    }

    #[test]
    fn empty_bounds_use_default_grid() {
        let empty = BoundsTable::parse("".as_bytes()).unwrap();
        let rows = run_table(&empty, default_constants()).unwrap();
        assert_eq!(rows.len(), DEFAULT_GRID.len());
        assert!(rows.iter().all(|r| r.lower.is_none()));
        let header_only = BoundsTable::parse("d,lower,upper\n".as_bytes()).unwrap();
        assert!(header_only.rows.is_empty());
    }

    #[test]
    fn malformed_bounds_report_lines() {
        let cases = [
            ("d,lower,upper\n0.1,0.5,0.6\n0.05,0.5,0.6\n", 3),
            ("d,lower,upper\n0.1,0.7,0.6\n", 2),
            ("d,lower,upper\n0.1,0.5,0.6\n0.2,abc,0.6\n", 3),
            ("d,low,upper\n", 1),
        ];
        for (text, want) in cases {
            match BoundsTable::parse(text.as_bytes()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn bounds_csv_round_trip() {
        let t = BoundsTable::shipped();
        assert_eq!(BoundsTable::parse(t.to_csv().unwrap().as_bytes()).unwrap(), t);
    }

    #[test]
    fn figure_grid() {
        let rows = figure_data(&BoundsTable::shipped(), default_constants(), 0.01, 0.5).unwrap();
        assert_eq!(rows.len(), 50);
        assert_eq!(rows.iter().filter(|r| r.lower.is_some()).count(), 10);
        assert!(gnuplot_script("fig.csv").contains("'fig.csv'"));
    }

    #[test]
    fn source_flags() {
        assert_eq!(parse_source("bernoulli", 0.1).unwrap(), SourceSpec::BernoulliHalf);
        assert_eq!(parse_source("markov:0.6", 0.1).unwrap(), SourceSpec::Markov { p_same: 0.6 });
        assert_eq!(
            parse_source("dagger", 0.1).unwrap(),
            SourceSpec::Renewal(dagger_distribution(0.1, 64).unwrap())
        );
        assert_eq!(
            parse_source("dagger:0.2", 0.1).unwrap(),
            SourceSpec::Renewal(dagger_distribution(0.2, 64).unwrap())
        );
        assert!(parse_source("markov:1.5", 0.1).is_err());
        assert!(parse_source("gauss", 0.1).is_err());
        assert!(matches!(parse_source("renewal:/nonexistent/x", 0.1), Err(Error::Io(_))));
    }

    proptest! {
        #[test]
        fn table_csv_round_trips(ds in proptest::collection::btree_set(1u32..999, 0..20), with_bounds in any::<bool>()) {
            let rows: Vec<TableRow> = ds.into_iter().map(|k| {
                let d = f64::from(k) / 1000.0;
                TableRow {
                    d,
                    lower: with_bounds.then_some(d / 3.0),
                    c_est: capacity_estimate(d, default_constants()).unwrap(),
                    upper: with_bounds.then_some(1.0 - d / 7.0),
                }
            }).collect();
            let text = render_table(&rows, OutputFormat::Csv).unwrap();
            prop_assert_eq!(parse_table_csv(&text).unwrap(), rows);
        }
    }
}

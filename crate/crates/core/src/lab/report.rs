//! CSV tables, interface tracking and power-law fits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Numeric table with a header row. Missing cells are `None` and are written
/// as empty fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Some(x)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Reals are written with 17 significant digits, which round-trips `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: std::io::Write>(table: &Table, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.map(format_real).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(table, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv<R: std::io::Read>(input: R) -> std::result::Result<Table, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>().map(Some).map_err(|e| {
                        csv::Error::from(std::io::Error::new(
                            std::io::ErrorKind::InvalidData,
                            format!("bad number `{s}`: {e}"),
                        ))
                    })
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn parse_csv(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Interface position: scanning from the left, the first node where
/// `v >= level`, linearly interpolated against its left neighbour. Returns
/// the left end if `v` already reaches the level there and the right end if
/// it never does.
pub fn interface_position(grid: &Grid1D, v: &[f64], level: f64) -> f64 {
    match v.iter().position(|&x| x >= level) {
        None => grid.x_max(),
        Some(0) => grid.x_min(),
        Some(i) => {
            let (a, b) = (v[i - 1], v[i]);
            let s = ((level - a) / (b - a)).clamp(0.0, 1.0);
            grid.node(i - 1) + s * grid.spacing()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

/// Least-squares fit of `y = c t^p` on log-log data; points with
/// nonpositive coordinates are skipped.
pub fn fit_power_law(t: &[f64], y: &[f64]) -> Result<PowerLaw> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(t, y)| **t > 0.0 && **y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "power-law fit needs 2 positive points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples("power-law fit needs distinct times".into()));
    }
    let exponent = sxy / sxx;
    Ok(PowerLaw {
        prefactor: (my - exponent * mx).exp(),
        exponent,
    })
}

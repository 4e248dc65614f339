//! CSV and text artifacts written by the subcommands.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{SweepRow, TimeSeries};

use super::config::{emit_config, RunConfig};

pub const SERIES_HEADER: [&str; 20] = [
    "t", "energy", "mass1", "mass2", "px", "py", "pz", "E_total", "n1", "n2", "U1x", "U1y", "U1z", "U2x", "U2y",
    "U2z", "T1", "T2", "T12", "T21",
];

pub const RATES_HEADER: [&str; 6] = ["delta", "omega", "rate", "r2", "theory_floor", "admissible"];

/// Shortest representation that parses back to the same value, with a
/// decimal point and no grouping.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// One row of `series.csv`, in header order.
pub fn series_row(ts: &TimeSeries, i: usize) -> [f64; 20] {
    let tot = &ts.totals[i];
    let m = &ts.moments[i];
    [
        ts.times[i],
        ts.energy[i],
        tot.mass1,
        tot.mass2,
        tot.momentum[0],
        tot.momentum[1],
        tot.momentum[2],
        tot.energy,
        m.s1.n,
        m.s2.n,
        m.s1.u[0],
        m.s1.u[1],
        m.s1.u[2],
        m.s2.u[0],
        m.s2.u[1],
        m.s2.u[2],
        m.s1.t,
        m.s2.t,
        m.t12,
        m.t21,
    ]
}

pub fn write_series_csv<W: Write>(ts: &TimeSeries, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SERIES_HEADER)?;
    for i in 0..ts.len() {
        out.write_record(series_row(ts, i).map(fmt_f64))?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed `series.csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesTable {
    pub rows: Vec<[f64; 20]>,
}

impl SeriesTable {
    pub fn column_index(name: &str) -> Option<usize> {
        SERIES_HEADER.iter().position(|h| *h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = Self::column_index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Reads a series table, checking the header and every field.
pub fn read_series_csv<R: Read>(r: R) -> Result<SeriesTable> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(SERIES_HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "unexpected series header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 20];
        for (j, (slot, field)) in row.iter_mut().zip(rec.iter()).enumerate() {
            *slot = field.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("row {}: column {} is not a number: `{field}`", i + 1, SERIES_HEADER[j]))
            })?;
        }
        rows.push(row);
    }
    Ok(SeriesTable { rows })
}

pub fn write_rates_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(RATES_HEADER)?;
    for r in rows {
        let (rate, r2, floor) = match &r.report {
            Some(d) => (fmt_f64(d.rate), fmt_f64(d.r_squared), fmt_f64(d.theory_floor)),
            None => (String::new(), String::new(), String::new()),
        };
        out.write_record([fmt_f64(r.delta), fmt_f64(r.omega), rate, r2, floor, r.admissible.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Resolved config, build version and seeds, as `#`-prefixed lines.
pub fn provenance_block(cfg: &RunConfig, command: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!("# mixbgk {} ({command})\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# scenario seed = {}, verify seed = {}\n", cfg.scenario.seed, cfg.verify.seed));
    s.push_str("# resolved configuration:\n");
    for line in emit_config(cfg).lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            s.push_str("#   ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

/// Recovers the configuration document from a provenance block.
pub fn config_from_provenance(text: &str) -> String {
    let mut out = String::new();
    let mut inside = false;
    for line in text.lines() {
        if line == "# resolved configuration:" {
            inside = true;
            continue;
        }
        if !inside {
            continue;
        }
        match line.strip_prefix('#') {
            Some(rest) => {
                out.push_str(rest.strip_prefix("   ").unwrap_or(rest.trim_start()));
                out.push('\n');
            }
            None => break,
        }
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

//! Plain-text field dumps and CSV writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::domain_fields::{Grid, ScalarField};
use crate::dynamics::StepRecord;
use crate::error::{Error, Result};

/// Header `nr nz rmin rmax zmin zmax`, then one line per radial index with the
/// `nz` values of that row, all at 17 significant digits.
pub fn write_field_dump(path: &Path, f: &ScalarField) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = f.grid();
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "{} {} {:.16e} {:.16e} {:.16e} {:.16e}",
        g.n_r(),
        g.n_z(),
        g.r_min(),
        g.r_max(),
        g.z_min(),
        g.z_max()
    )
    .map_err(io)?;
    for i in 0..g.n_r() {
        let line: Vec<String> = f.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a dump written by [`write_field_dump`] for a half-plane grid.
pub fn read_field_dump(path: &Path) -> Result<ScalarField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let bad = |m: &str| Error::Config(format!("{}: {m}", path.display()));
    let header = lines
        .next()
        .ok_or_else(|| bad("empty dump"))?
        .map_err(|e| Error::io(path, e))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 {
        return Err(bad("header needs six fields"));
    }
    let nr: usize = h[0].parse().map_err(|_| bad("bad nr"))?;
    let nz: usize = h[1].parse().map_err(|_| bad("bad nz"))?;
    let b: Vec<f64> = h[2..]
        .iter()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("bad bounds"))?;
    let grid = Grid::new(b[0], b[1], b[2], b[3], nr, nz)?;
    let mut values = Vec::with_capacity(nr * nz);
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| bad("bad value"))?);
        }
    }
    ScalarField::from_values(grid, values)
}

/// `t,l1_total,linf_total,l1_part_0..,pos_min,div_max,dt,bs_iters`.
pub fn write_diagnostics(path: &Path, log: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let parts = log.first().map_or(0, |r| r.l1_parts.len());
    let mut header = vec!["t".to_string(), "l1_total".into(), "linf_total".into()];
    header.extend((0..parts).map(|i| format!("l1_part_{i}")));
    header.extend(["pos_min", "div_max", "dt", "bs_iters"].map(String::from));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in log {
        let mut row = vec![fmt(r.t), fmt(r.l1_total), fmt(r.linf_total)];
        row.extend(r.l1_parts.iter().map(|v| fmt(*v)));
        row.extend([fmt(r.pos_min), fmt(r.div_max), fmt(r.dt), r.bs_iters.to_string()]);
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a header and rows of floats.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt(*v))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

//! CSV output. Floats are written with 17 significant digits, enough for
//! every value to read back bit-for-bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::sweep::SweepResult;

pub const TRAJECTORY_HEADER: [&str; 11] = [
    "pulse", "time_s", "rho11", "rho22", "rho33", "rho44", "re_rho12", "im_rho12", "abs_rho12",
    "trace_err", "herm_err",
];

pub const SWEEP_HEADER: [&str; 3] = ["axis_value", "pulse", "abs_rho12"];

/// One parsed trajectory row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub pulse: usize,
    /// time_s, rho11..rho44, re/im/abs rho12, trace_err, herm_err.
    pub values: [f64; 10],
}

/// One parsed sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub pulse: usize,
    pub abs_rho12: f64,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.snapshots {
        let p = s.populations();
        let c = s.rho.coherence12();
        let mut rec = Vec::with_capacity(11);
        rec.push(s.pulse_index.to_string());
        for v in [
            s.time,
            p[0],
            p[1],
            p[2],
            p[3],
            c.re,
            c.im,
            c.norm(),
            s.rho.trace_error(),
            s.rho.hermiticity_defect(),
        ] {
            rec.push(float(v));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(res: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for (x, row) in res.grid.iter().zip(&res.rows) {
        let x = float(*x);
        for (k, v) in row.iter().enumerate() {
            w.write_record([x.as_str(), &k.to_string(), &float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_trajectory(traj, BufWriter::new(file)).map_err(csv_err(path))
}

pub fn emit_sweep_csv(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_sweep(res, BufWriter::new(file)).map_err(csv_err(path))
}

fn check_header(path: &Path, r: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let header = r.headers().map_err(csv_err(path))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "{}: expected header {}, found {}",
            path.display(),
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("{}: line {line}: bad field {}", path.display(), i + 1)))
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    check_header(path, &mut r, &TRAJECTORY_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let mut values = [0.0; 10];
        for (i, v) in values.iter_mut().enumerate() {
            *v = field(path, &rec, i + 1)?;
        }
        rows.push(TrajectoryRow {
            pulse: field(path, &rec, 0)?,
            values,
        });
    }
    Ok(rows)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    check_header(path, &mut r, &SWEEP_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            Ok(SweepRow {
                axis_value: field(path, &rec, 0)?,
                pulse: field(path, &rec, 1)?,
                abs_rho12: field(path, &rec, 2)?,
            })
        })
        .collect()
}

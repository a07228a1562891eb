//! CSV readers and writers for traces, trajectories, TDOA tables, rasters and
//! location results. Floats use Rust's shortest round-trip formatting.

use std::fs;
use std::path::{Path, PathBuf};

use crate::detect::{TdoaEntry, TdoaSamples};
use crate::dynamics::TrajectorySet;
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::geometry::Point;
use crate::locate::LocateResult;
use crate::network::{BusId, Network};
use crate::sensor::FrequencyTrace;

pub const MASKED_LINE: &str = "masked_value=NaN";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().flexible(true).has_headers(false).from_writer(Vec::new())
}

fn finish(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w.into_inner().map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn record<I, S>(w: &mut csv::Writer<Vec<u8>>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.map_err(|e| Error::Parse(format!("{}: {}", path.display(), e))))
        .collect()
}

fn num<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse(format!("{}:{}: bad number '{}'", path.display(), line + 1, field)))
}

pub fn trace_file_name(bus: BusId) -> String {
    format!("trace_{bus}.csv")
}

/// One trace as `time,<bus_id>`.
pub fn write_trace_csv(path: &Path, trace: &FrequencyTrace) -> Result<()> {
    let mut w = writer();
    record(&mut w, path, ["time".to_string(), trace.bus.to_string()])?;
    for (t, v) in trace.times.iter().zip(&trace.values) {
        record(&mut w, path, [t.to_string(), v.to_string()])?;
    }
    finish(path, w)
}

/// Reads a two-column trace file; returns the bus id from the header with
/// times and values.
pub fn read_trace_csv(path: &Path) -> Result<(BusId, Vec<f64>, Vec<f64>)> {
    let rows = read_records(path)?;
    let header = rows.first().ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    if header.len() != 2 || &header[0] != "time" {
        return Err(Error::Parse(format!("{}: header must be 'time,<bus_id>'", path.display())));
    }
    let bus: BusId = num(path, 0, &header[1])?;
    let mut times = Vec::with_capacity(rows.len() - 1);
    let mut values = Vec::with_capacity(rows.len() - 1);
    for (line, row) in rows.iter().enumerate().skip(1) {
        if row.len() != 2 {
            return Err(Error::Parse(format!("{}:{}: expected 2 fields", path.display(), line + 1)));
        }
        times.push(num(path, line, &row[0])?);
        values.push(num(path, line, &row[1])?);
    }
    Ok((bus, times, values))
}

/// Loads every `trace_<id>.csv` under `dir`, ordered by bus id, with
/// positions taken from `net`.
pub fn read_trace_dir(dir: &Path, net: &Network) -> Result<Vec<FrequencyTrace>> {
    let mut files: Vec<(BusId, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(id) = name.strip_prefix("trace_").and_then(|s| s.strip_suffix(".csv")) {
            if let Ok(id) = id.parse() {
                files.push((id, path));
            }
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|(_, path)| {
            let (bus, times, values) = read_trace_csv(&path)?;
            let pos = net.bus(bus).ok_or(Error::UnknownSensorBus(bus))?.pos();
            Ok(FrequencyTrace { bus, pos, times, values })
        })
        .collect()
}

/// Frequency deviations of every bus, `time,<id1>,<id2>,...`; `stride`
/// keeps every k-th integration step.
pub fn write_trajectory_csv(path: &Path, traj: &TrajectorySet, stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidParameter("trajectory stride must be at least 1".into()));
    }
    let mut w = writer();
    let header = std::iter::once("time".to_string()).chain(traj.bus_ids.iter().map(|b| b.to_string()));
    record(&mut w, path, header)?;
    for k in (0..traj.len()).step_by(stride) {
        let row = std::iter::once(traj.times[k].to_string()).chain(traj.freq_dev.iter().map(|s| s[k].to_string()));
        record(&mut w, path, row)?;
    }
    finish(path, w)
}

pub fn write_tdoa_csv(path: &Path, samples: &TdoaSamples) -> Result<()> {
    let mut w = writer();
    record(&mut w, path, ["bus", "x", "y", "tdoa_s"])?;
    for e in &samples.entries {
        record(&mut w, path, [e.bus.to_string(), e.pos.x.to_string(), e.pos.y.to_string(), e.tdoa.to_string()])?;
    }
    finish(path, w)
}

/// TDOA table without event metadata (event time 0, position unknown).
pub fn read_tdoa_csv(path: &Path) -> Result<TdoaSamples> {
    let rows = read_records(path)?;
    match rows.first() {
        Some(h) if h.iter().eq(["bus", "x", "y", "tdoa_s"]) => {}
        _ => return Err(Error::Parse(format!("{}: header must be 'bus,x,y,tdoa_s'", path.display()))),
    }
    let entries = rows
        .iter()
        .enumerate()
        .skip(1)
        .map(|(line, row)| {
            if row.len() != 4 {
                return Err(Error::Parse(format!("{}:{}: expected 4 fields", path.display(), line + 1)));
            }
            Ok(TdoaEntry {
                bus: num(path, line, &row[0])?,
                pos: Point::new(num(path, line, &row[1])?, num(path, line, &row[2])?),
                tdoa: num(path, line, &row[3])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TdoaSamples::new(entries, 0.0, None))
}

/// Raster with the header lines `nx,ny`, `x_min,x_max`, `y_min,y_max`,
/// `masked_value=NaN`, then `ny` rows of `nx` values, first row at `y_min`.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let g = &field.grid;
    let mut w = writer();
    record(&mut w, path, [g.nx.to_string(), g.ny.to_string()])?;
    record(&mut w, path, [g.x_min.to_string(), g.x_max.to_string()])?;
    record(&mut w, path, [g.y_min.to_string(), g.y_max.to_string()])?;
    record(&mut w, path, [MASKED_LINE])?;
    for j in 0..g.ny {
        let row = (0..g.nx).map(|i| {
            let k = g.index(i, j);
            if field.mask[k] { field.values[k].to_string() } else { "NaN".to_string() }
        });
        record(&mut w, path, row)?;
    }
    finish(path, w)
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    let rows = read_records(path)?;
    let bad = |msg: &str| Error::Parse(format!("{}: {}", path.display(), msg));
    if rows.len() < 4 || rows[..3].iter().any(|r| r.len() != 2) || rows[3].len() != 1 || &rows[3][0] != MASKED_LINE {
        return Err(bad("malformed 4-line field header"));
    }
    let grid = GridSpec::new(
        num(path, 1, &rows[1][0])?,
        num(path, 1, &rows[1][1])?,
        num(path, 2, &rows[2][0])?,
        num(path, 2, &rows[2][1])?,
        num(path, 0, &rows[0][0])?,
        num(path, 0, &rows[0][1])?,
    )
    .map_err(|e| bad(&e.to_string()))?;
    if rows.len() != 4 + grid.ny {
        return Err(bad(&format!("expected {} data rows, found {}", grid.ny, rows.len() - 4)));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (line, row) in rows.iter().enumerate().skip(4) {
        if row.len() != grid.nx {
            return Err(bad(&format!("line {}: expected {} values", line + 1, grid.nx)));
        }
        for v in row.iter() {
            values.push(num::<f64>(path, line, v)?);
        }
    }
    let mask = values.iter().map(|v| !v.is_nan()).collect();
    Ok(ScalarField { grid, values, mask })
}

/// Single line `x,y,residual,v_hat`.
pub fn write_location_csv(path: &Path, loc: &LocateResult) -> Result<()> {
    let mut w = writer();
    record(
        &mut w,
        path,
        [loc.pos.x.to_string(), loc.pos.y.to_string(), loc.residual.to_string(), loc.v_hat.to_string()],
    )?;
    finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_with_mask() {
        let grid = GridSpec::new(-1.5, 2.0, 0.0, 1e3, 4, 3).unwrap();
        let f = ScalarField::from_fn(grid, |p| (p.x > 0.0).then(|| p.x / 3.0 + p.y * 1e-7));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field_csv(&path, &f).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(&lines[..4], ["4,3", "-1.5,2", "0,1000", "masked_value=NaN"]);
        assert!(lines[4].starts_with("NaN,NaN,"));
        let back = read_field_csv(&path).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.mask, f.mask);
        for (a, b) in back.valid_values().zip(f.valid_values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn tdoa_round_trip() {
        let s = TdoaSamples::new(
            vec![
                TdoaEntry { bus: 3, pos: Point::new(0.1, 0.2), tdoa: 1.0 / 3.0 },
                TdoaEntry { bus: 9, pos: Point::new(-5.0, 7.25), tdoa: 0.0 },
            ],
            0.0,
            None,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tdoa.csv");
        write_tdoa_csv(&path, &s).unwrap();
        assert_eq!(read_tdoa_csv(&path).unwrap(), s);
    }

    #[test]
    fn trace_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let trace = FrequencyTrace {
            bus: 12,
            pos: Point::new(0.0, 0.0),
            times: vec![0.0, 0.1, 0.2],
            values: vec![0.0, -1e-4, 0.1 + 0.2],
        };
        let path = dir.path().join(trace_file_name(12));
        write_trace_csv(&path, &trace).unwrap();
        let (bus, t, v) = read_trace_csv(&path).unwrap();
        assert_eq!((bus, t, v), (12, trace.times.clone(), trace.values.clone()));

        fs::write(dir.path().join("bad.csv"), "time,1\n0,abc\n").unwrap();
        assert!(matches!(read_trace_csv(&dir.path().join("bad.csv")), Err(Error::Parse(_))));
        assert!(matches!(read_trace_csv(&dir.path().join("none.csv")), Err(Error::NotFound(_))));
    }

    #[test]
    fn location_is_one_line() {
        let loc = LocateResult { pos: Point::new(100.0, 250.5), row: 0, col: 0, residual: 0.0, v_hat: 1500.0, collinear: false };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loc.csv");
        write_location_csv(&path, &loc).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "100,250.5,0,1500\n");
    }
}

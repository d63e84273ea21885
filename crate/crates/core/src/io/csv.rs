//! Time-series CSV schema.
//!
//! ```text
//! step, t, m, decayed_fraction, S_vN, S_2, S_min, [S_n ...],
//! lambda_1..lambda_k, eps_1..eps_k, sector_1..sector_k
//! ```
//!
//! Floats carry 12 significant digits in scientific notation so that
//! identical runs give identical bytes. Extra finite Rényi orders follow
//! `S_min` in request order.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::IoError;
use crate::spectrum::{EntanglementRecord, RenyiOrder, SchmidtLevel};

/// 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // no negative zero in the output
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// Engine orders for a requested set: `S_vN`, `S_2` and `S_min` are always
/// present, other finite orders are appended.
pub fn output_orders(requested: &[RenyiOrder]) -> Vec<RenyiOrder> {
    let mut out = vec![RenyiOrder::VonNeumann, RenyiOrder::Finite(2.0), RenyiOrder::Min];
    for o in requested {
        if !out.contains(o) {
            out.push(*o);
        }
    }
    out
}

/// Finite orders other than 2, in column order.
fn extra_orders(orders: &[RenyiOrder]) -> Vec<f64> {
    orders
        .iter()
        .filter_map(|o| match o {
            RenyiOrder::Finite(n) if *n != 2.0 => Some(*n),
            _ => None,
        })
        .collect()
}

pub fn header(orders: &[RenyiOrder], topk: usize) -> Vec<String> {
    let mut h: Vec<String> = ["step", "t", "m", "decayed_fraction", "S_vN", "S_2", "S_min"].iter().map(|s| s.to_string()).collect();
    for n in extra_orders(orders) {
        h.push(RenyiOrder::Finite(n).label());
    }
    for prefix in ["lambda", "eps", "sector"] {
        h.extend((1..=topk).map(|i| format!("{prefix}_{i}")));
    }
    h
}

/// Streaming writer for one run.
pub struct TimeSeriesWriter<W: Write> {
    inner: ::csv::Writer<W>,
    extra: Vec<f64>,
    topk: usize,
    rows: usize,
}

impl TimeSeriesWriter<File> {
    pub fn create(path: &Path, orders: &[RenyiOrder], topk: usize) -> Result<Self, IoError> {
        let file = File::create(path).map_err(|e| IoError::file(path, e))?;
        Self::new(file, orders, topk)
    }
}

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(sink: W, orders: &[RenyiOrder], topk: usize) -> Result<Self, IoError> {
        let mut inner = ::csv::Writer::from_writer(sink);
        inner.write_record(header(orders, topk))?;
        Ok(Self { inner, extra: extra_orders(orders), topk, rows: 0 })
    }

    pub fn write(&mut self, r: &EntanglementRecord<f64>) -> Result<(), IoError> {
        let missing = |what: String| IoError::Csv { path: String::new(), line: self.rows + 2, msg: format!("record lacks {what}") };
        let s2 = r.renyi(2.0).ok_or_else(|| missing("S_2".into()))?;
        let mut row = vec![r.step.to_string(), format_float(r.time), format_float(r.m), format_float(r.decayed_fraction)];
        row.extend([format_float(r.s_vn), format_float(s2), format_float(r.s_min)]);
        for &n in &self.extra {
            row.push(format_float(r.renyi(n).ok_or_else(|| missing(format!("S_{n}")))?));
        }
        if r.levels.len() < self.topk {
            return Err(missing(format!("{} Schmidt values", self.topk)));
        }
        let levels = &r.levels[..self.topk];
        row.extend(levels.iter().map(|l| format_float(l.lambda)));
        row.extend(levels.iter().map(|l| format_float(l.epsilon)));
        row.extend(levels.iter().map(|l| l.sector.to_string()));
        self.inner.write_record(&row)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.inner.flush().map_err(|e| IoError::file(Path::new("<csv>"), e))?;
        self.inner.into_inner().map_err(|e| IoError::Csv { path: String::new(), line: 0, msg: e.to_string() })
    }
}

/// A time series read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub orders: Vec<RenyiOrder>,
    pub topk: usize,
    pub records: Vec<EntanglementRecord<f64>>,
}

/// Parse a file written by [`TimeSeriesWriter`].
pub fn read_timeseries(path: &Path) -> Result<TimeSeries, IoError> {
    let file = File::open(path).map_err(|e| IoError::file(path, e))?;
    let shown = path.display().to_string();
    let bad = |line: usize, msg: String| IoError::Csv { path: shown.clone(), line, msg };
    let mut reader = ::csv::Reader::from_reader(file);
    let head: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let fixed = ["step", "t", "m", "decayed_fraction", "S_vN", "S_2", "S_min"];
    if head.len() < fixed.len() || head[..fixed.len()] != fixed {
        return Err(bad(1, "not a time-series header".into()));
    }
    let mut extra = Vec::new();
    let mut col = fixed.len();
    while col < head.len() && head[col].starts_with("S_") {
        let n: f64 = head[col][2..].parse().map_err(|_| bad(1, format!("bad column `{}`", head[col])))?;
        extra.push(n);
        col += 1;
    }
    let topk = (head.len() - col) / 3;
    if topk == 0 || head.len() != col + 3 * topk || head[col] != "lambda_1" {
        return Err(bad(1, "expected lambda_i, eps_i and sector_i columns".into()));
    }
    let mut orders = vec![RenyiOrder::VonNeumann, RenyiOrder::Finite(2.0), RenyiOrder::Min];
    orders.extend(extra.iter().map(|&n| RenyiOrder::Finite(n)));

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row?;
        let f = |j: usize| -> Result<f64, IoError> {
            row[j].trim().parse::<f64>().map_err(|_| bad(line, format!("`{}` is not a number", &row[j])))
        };
        let u = |j: usize| -> Result<usize, IoError> {
            row[j].trim().parse::<usize>().map_err(|_| bad(line, format!("`{}` is not an integer", &row[j])))
        };
        let mut renyi = vec![(2.0, f(5)?)];
        for (k, &n) in extra.iter().enumerate() {
            renyi.push((n, f(fixed.len() + k)?));
        }
        let mut levels = Vec::with_capacity(topk);
        for k in 0..topk {
            levels.push(SchmidtLevel { lambda: f(col + k)?, epsilon: f(col + topk + k)?, sector: u(col + 2 * topk + k)? });
        }
        records.push(EntanglementRecord {
            step: u(0)?,
            time: f(1)?,
            m: f(2)?,
            decayed_fraction: f(3)?,
            s_vn: f(4)?,
            renyi,
            s_min: f(6)?,
            levels,
            schmidt_total: 1.0,
        });
    }
    Ok(TimeSeries { orders, topk, records })
}

/// Write a table whose cells are already formatted.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = ::csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| IoError::file(path, e))?;
    Ok(())
}

/// Read a table as header plus string rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), IoError> {
    let file = File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut reader = ::csv::Reader::from_reader(file);
    let head = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for r in reader.records() {
        rows.push(r?.iter().map(str::to_string).collect());
    }
    Ok((head, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize) -> EntanglementRecord<f64> {
        let t = step as f64 * 0.02;
        EntanglementRecord {
            step,
            time: t,
            m: 3.0 - t,
            decayed_fraction: t / 3.0,
            s_vn: 0.5 * t,
            renyi: vec![(2.0, 0.25 * t), (3.0, 0.2 * t)],
            s_min: 0.1 * t,
            levels: vec![SchmidtLevel::new(0.7, 3), SchmidtLevel::new(0.2, 2), SchmidtLevel::new(0.1, 2), SchmidtLevel::new(0.0, 1)],
            schmidt_total: 1.0,
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_float(-0.0), "0.00000000000e0");
        assert_eq!(format_float(2.5e-7), "2.50000000000e-7");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn header_layout() {
        let orders = output_orders(&RenyiOrder::parse_list("1,3,inf").unwrap());
        assert_eq!(
            header(&orders, 2).join(","),
            "step,t,m,decayed_fraction,S_vN,S_2,S_min,S_3,lambda_1,lambda_2,eps_1,eps_2,sector_1,sector_2"
        );
    }

    #[test]
    fn round_trip() {
        let orders = output_orders(&[RenyiOrder::Finite(3.0)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        let mut w = TimeSeriesWriter::create(&path, &orders, 4).unwrap();
        for k in 0..5 {
            w.write(&record(k)).unwrap();
        }
        assert_eq!(w.rows(), 5);
        w.finish().unwrap();
        let ts = read_timeseries(&path).unwrap();
        assert_eq!(ts.topk, 4);
        assert_eq!(ts.orders, orders);
        assert_eq!(ts.records.len(), 5);
        let (a, b) = (&ts.records[3], record(3));
        assert_eq!(a.step, 3);
        assert!((a.time - b.time).abs() < 1e-13);
        assert!((a.renyi(3.0).unwrap() - b.renyi(3.0).unwrap()).abs() < 1e-13);
        assert_eq!(a.levels[1].sector, 2);
        assert!(a.levels[3].epsilon.is_infinite());
    }

    #[test]
    fn missing_order_is_an_error() {
        let mut w = TimeSeriesWriter::new(Vec::new(), &output_orders(&[RenyiOrder::Finite(4.0)]), 2).unwrap();
        assert!(w.write(&record(1)).is_err());
    }

    #[test]
    fn foreign_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_timeseries(&path).is_err());
    }
}

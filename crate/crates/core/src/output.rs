//! Stable on-disk formats: JSON with round-trip floats, per-vertex CSV and
//! Matrix Market exports.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use sprs::CsMat;

use crate::gasket::GasketLevel;

/// Pretty JSON with every float written as 17 significant digits.
struct RoundTrip<'a>(PrettyFormatter<'a>);

impl Formatter for RoundTrip<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, RoundTrip(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    std::fs::write(path, to_json(value).map_err(io::Error::other)?)
}

/// `vertex, x1, …, x_{N−1}, u` per row.
pub fn write_solution_csv(path: &Path, level: &GasketLevel, u: &[f64]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = level.corners().dim();
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=dim).map(|k| format!("x{k}")));
    header.push("u".into());
    w.write_record(&header)?;
    for (v, x) in level.coords().iter().enumerate() {
        let mut row = vec![v.to_string()];
        row.extend(x.iter().map(|c| format!("{c:.16e}")));
        row.push(format!("{:.16e}", u[v]));
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn write_matrix_market(path: &Path, m: &CsMat<f64>) -> io::Result<()> {
    sprs::io::write_matrix_market(path, m)
}

/// Diagonal matrix with `d` on the diagonal.
pub fn diagonal(d: &[f64]) -> CsMat<f64> {
    let n = d.len();
    CsMat::new((n, n), (0..=n).collect(), (0..n).collect(), d.to_vec())
}

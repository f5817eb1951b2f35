//! JSON helpers: complex numbers and matrices as `re`/`im` pairs, and a
//! writer that prints every float with 17 significant digits.

use std::io;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<Complex64>> for ComplexMatrixJson {
    fn from(m: &DMatrix<Complex64>) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        ComplexMatrixJson { re: part(|z| z.re), im: part(|z| z.im) }
    }
}

impl ComplexMatrixJson {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let shape_ok = self.im.len() == rows
            && self.re.iter().chain(&self.im).all(|r| r.len() == cols);
        if !shape_ok {
            return Err(Error::Schema("re and im must be arrays of equal-length rows".into()));
        }
        Ok(DMatrix::from_fn(rows, cols, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

pub fn complex_vec(v: &[Complex64]) -> Vec<ComplexJson> {
    v.iter().copied().map(ComplexJson::from).collect()
}

struct Exact<F>(F);

impl<F: Formatter> Formatter for Exact<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_with<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(fmt));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Single-line JSON with 17 significant digits per float.
pub fn to_string(value: &(impl Serialize + ?Sized)) -> String {
    write_with(value, CompactFormatter)
}

/// Indented JSON with 17 significant digits per float.
pub fn to_string_pretty(value: &(impl Serialize + ?Sized)) -> String {
    write_with(value, PrettyFormatter::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let xs = [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 0.0];
        let txt = to_string(&xs.to_vec());
        let back: Vec<f64> = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, xs.to_vec());
        assert!(txt.starts_with("[1.0000000000000001e-1,"));
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(to_string(&vec![f64::NAN, f64::INFINITY]), "[null,null]");
    }

    #[test]
    fn complex_matrix_round_trip() {
        let m = DMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)]);
        let j = ComplexMatrixJson::from(&m);
        assert_eq!(j.to_matrix().unwrap(), m);
    }
}

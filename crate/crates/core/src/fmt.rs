//! Fixed 17-significant-digit float formatting for reports.
//!
//! Every float that leaves the library through JSON or CSV goes through
//! [`sig17`], so identical inputs always produce byte-identical files.

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` in scientific notation with 17 significant digits; non-finite values
/// print as `NaN`, `inf` or `-inf`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Float wrapper that serializes as a JSON number with 17 significant digits
/// (`null` when non-finite).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(s)
}

pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Sig17(*x))?;
    }
    seq.end()
}

/// Complex number as `[re, im]`.
pub fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [Sig17(z.re), Sig17(z.im)].serialize(s)
}

pub fn ser_complex_vec<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(zs.len()))?;
    for z in zs {
        seq.serialize_element(&[Sig17(z.re), Sig17(z.im)])?;
    }
    seq.end()
}

//! JSON encoding shared by every file-facing surface: a complex number is a
//! two-element array `[re, im]`, a vector is an array of those, and a matrix
//! is an array of row arrays.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CMatrix, CVector};

pub(crate) fn encode(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn decode(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

/// Serde adapter for a single complex number.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        encode(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        <[f64; 2]>::deserialize(d).map(decode)
    }
}

/// Serde adapter for a list of complex numbers.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(encode).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(decode).collect())
    }
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        complex_vec::serialize(self, s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        complex_vec::deserialize(d).map(CVector::new)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| self.row(i).iter().map(encode).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(decode).collect())
            .collect();
        let m = CMatrix::from_rows(rows).map_err(D::Error::custom)?;
        if !m.is_finite() {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(m)
    }
}

impl CMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn from_json(text: &str) -> crate::Result<CMatrix> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
    }
}

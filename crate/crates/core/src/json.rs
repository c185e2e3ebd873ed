//! JSON helpers for exact integers: values that fit in an `i64` are written as
//! native numbers, anything larger as a decimal string.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::lattice::IntegerMatrix;

pub fn int<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

struct Int<'a>(&'a BigInt);

impl Serialize for Int<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        int(self.0, s)
    }
}

pub fn ints<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Int(x))?;
    }
    seq.end()
}

struct Ints<'a>(&'a [BigInt]);

impl Serialize for Ints<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ints(self.0, s)
    }
}

pub fn rows<S: Serializer>(rows: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in rows {
        seq.serialize_element(&Ints(r))?;
    }
    seq.end()
}

impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows()))?;
        for r in self.iter_rows() {
            seq.serialize_element(&Ints(r))?;
        }
        seq.end()
    }
}

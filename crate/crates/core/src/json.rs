//! JSON document formats shared by the library and the CLI.
//!
//! Integers are decimal strings, rationals are `"num/den"` strings (or plain
//! integers when the denominator is 1), polynomials are ascending arrays of
//! integer strings and lattices are `{"rank": k, "gram": [[...]]}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{QMatrix, ZMatrix};

pub fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("`{s}` is not an integer")))
}

/// Parses `"n"` or `"n/d"` with `d != 0`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("`{s}` has zero denominator")));
            }
            Ok(BigRational::new(n, d))
        }
    }
}

/// Canonical form: reduced, positive denominator, no `/1`.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn int_rows(m: &ZMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|c| c.to_string()).collect())
        .collect()
}

pub fn rational_rows(m: &QMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect()
}

/// Parses a square or rectangular integer matrix; `cols` is used when there
/// are no rows.
pub fn parse_int_rows(rows: &[Vec<String>], cols: usize) -> Result<ZMatrix> {
    let v = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_int(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ZMatrix::from_rows_with_cols(v, rows.first().map_or(cols, |r| r.len()))
}

pub fn parse_rational_rows(rows: &[Vec<String>], cols: usize) -> Result<QMatrix> {
    let v = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    QMatrix::from_rows_with_cols(v, rows.first().map_or(cols, |r| r.len()))
}

/// Serde adapter: `BigInt` as a decimal string.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_int(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Vec<BigInt>` as an array of decimal strings.
pub mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        x.iter().map(|c| c.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| super::parse_int(s))
            .collect::<crate::error::Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `BigRational` as `"num/den"`.
pub mod rational_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

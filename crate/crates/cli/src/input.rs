use std::fs;
use std::path::Path;

use dynspec_core::json::parse_int;
use dynspec_core::{IntPolynomial, Lattice, TwistElement};
use serde::de::DeserializeOwned;

use crate::docs::PolyDoc;

/// Parses a JSON document, naming the offending field on failure.
pub fn parse_str<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, String> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            format!("{what}: {inner}")
        } else {
            format!("{what}: field `{path}`: {inner}")
        }
    })?;
    de.end().map_err(|e| format!("{what}: {e}"))?;
    Ok(value)
}

pub fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    parse_str(&read(path)?, &path.display().to_string())
}

pub fn load_poly(path: &Path) -> Result<IntPolynomial, String> {
    Ok(load::<PolyDoc>(path)?.coefficients)
}

/// A lattice JSON file, or a built-in name when no such file exists.
pub fn load_lattice(arg: &str) -> Result<Lattice, String> {
    let path = Path::new(arg);
    if path.is_file() {
        return load(path);
    }
    Lattice::named(arg).map_err(|e| format!("`{arg}` is neither a lattice file nor a known name ({e})"))
}

/// `"25,3"` is 3w + 25.
pub fn parse_element(s: &str) -> Result<TwistElement, String> {
    let coeffs = s
        .split(',')
        .map(|c| parse_int(c).map_err(|e| format!("--element: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let p = IntPolynomial::new(coeffs);
    if p.is_zero() {
        return Err("--element: the zero element cannot be used".into());
    }
    Ok(TwistElement::new(p))
}

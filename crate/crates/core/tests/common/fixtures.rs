//! Library-built inputs: Salem isometries and their twists.

use dynspec_core::isometry::{companion, find_invariant_lattice, twist};
use dynspec_core::{IntPolynomial, Isometry, Lattice, TwistElement};

use super::S4;

pub fn poly(c: &[i64]) -> IntPolynomial {
    IntPolynomial::from_i64(c)
}

/// The rank-2 Salem isometry of `m [[2, k], [k, 2]]`.
pub fn rank_two(k: i64, m: i64) -> Isometry {
    let l = Lattice::from_i64(&[&[2 * m, k * m], &[k * m, 2 * m]]).unwrap();
    Isometry::from_integer(l, companion(&poly(&[1, -k, 1])).unwrap()).unwrap()
}

/// `J - I` with the companion of `x^4 - x^3 - x^2 - x + 1`.
pub fn s4_seed() -> Isometry {
    let l = Lattice::from_i64(&[&[0, 1, 1, 1], &[1, 0, 1, 1], &[1, 1, 0, 1], &[1, 1, 1, 0]]).unwrap();
    Isometry::from_integer(l, companion(&poly(S4)).unwrap()).unwrap()
}

/// First even invariant lattice of signature `(1, d - 1)` for the companion.
pub fn hyperbolic_companion(c: &[i64]) -> Isometry {
    let m = companion(&poly(c)).unwrap();
    let d = c.len() - 1;
    let l = find_invariant_lattice(&m.to_rational(), (1, d - 1), true, 3).unwrap();
    Isometry::from_integer(l, m).unwrap()
}

/// Twist by a polynomial in `w = f + f^-1`, kept only if it stays hyperbolic.
pub fn hyperbolic_twist(f: &Isometry, t: &[i64]) -> Option<Isometry> {
    let (l, g) = twist(f, &TwistElement::new(poly(t))).ok()?;
    l.is_hyperbolic().then_some(g)
}

/// Rank-2 and rank-4 Salem isometries, untwisted and twisted.
pub fn positivity_corpus() -> Vec<(String, Isometry)> {
    let mut out = Vec::new();
    for k in [3i64, 4, 5, 6] {
        for m in [1i64, 2, 3, 5, 7] {
            out.push((format!("m[[2,{k}],[{k},2]], m = {m}"), rank_two(k, m)));
        }
    }
    let bases = [
        ("s4", s4_seed()),
        ("x^4-x^3-3x^2-x+1", hyperbolic_companion(&[1, -1, -3, -1, 1])),
        ("x^4-3x^3+x^2-3x+1", hyperbolic_companion(&[1, -3, 1, -3, 1])),
    ];
    let twists: [&[i64]; 8] = [&[1], &[0, 1], &[2], &[1, 1], &[3], &[-1, 1], &[25, 3], &[0, 0, 1]];
    for (name, f) in bases {
        for t in twists {
            let tt = poly(t).pow(2);
            for (label, elem) in [("t", poly(t)), ("t^2", tt)] {
                if label == "t^2" && t == [1] {
                    continue;
                }
                let coeffs: Vec<i64> = elem.coeffs().iter().map(|c| i64::try_from(c).unwrap()).collect();
                if let Some(g) = hyperbolic_twist(&f, &coeffs) {
                    out.push((format!("{name} twisted by {label}, t = {}", poly(t)), g));
                }
            }
        }
    }
    out
}

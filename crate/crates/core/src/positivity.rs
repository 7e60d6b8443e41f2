//! Chamber preservation: cyclic roots, the determinant bound and the
//! exhaustive search for obstructing roots of Salem isometries.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::{kernel_sublattice, Isometry};
use crate::lattice::{fincke_pohst_rational, is_positive_definite_rational};
use crate::linalg::{QMatrix, ZMatrix};
use crate::polyarith::{discriminant, factor, is_cyclotomic_product, is_salem, IntPolynomial, Interval, RealAlgebraic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Positive,
    NotPositive,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DeterminantBound,
    ExhaustiveSearch,
    CyclicOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Cyclic,
    GeodesicCrossing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    #[serde(with = "crate::json::bigint_vec")]
    pub root: Vec<BigInt>,
    pub kind: WitnessKind,
    /// For cyclic roots: the number of terms in the vanishing orbit sum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_length: Option<usize>,
}

/// Parameters of an exhaustive search: all integer vectors with
/// `x^T H x <= bound` were enumerated for a rational approximation `H` of the
/// majorant `<x, h>^2 - x^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBox {
    pub precision_bits: u32,
    #[serde(with = "crate::json::rational_str")]
    pub bound: BigRational,
    pub candidates: usize,
    pub roots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionReport {
    pub status: Status,
    pub method: Method,
    pub witnesses: Vec<Witness>,
    #[serde(with = "crate::json::bigint_str")]
    pub determinant: BigInt,
    /// `4 |disc s|` in the Salem case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determinant_threshold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchBox>,
}

#[derive(Clone, Copy, Debug)]
pub struct PositivityOptions {
    pub orbit_bound: usize,
    /// Run the exhaustive search even when the determinant bound decides.
    pub always_search: bool,
    pub max_bits: u32,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions {
            orbit_bound: 1000,
            always_search: false,
            max_bits: 4096,
        }
    }
}

fn integral(f: &Isometry) -> Result<ZMatrix> {
    f.integer_matrix()
        .ok_or_else(|| Error::Precondition("isometry is not integral".into()))
}

fn to_ambient(basis: &ZMatrix, c: &[BigInt]) -> Vec<BigInt> {
    basis.transpose().mul_vec(c)
}

/// Roots with a vanishing orbit sum `r + f(r) + ... + f^i(r) = 0`,
/// `i < orbit_bound`. They live in the kernel of the cyclotomic part of the
/// characteristic polynomial (without the factor `x - 1`).
pub fn cyclic_roots(f: &Isometry, orbit_bound: usize) -> Result<Vec<Witness>> {
    let m = integral(f)?;
    let cp = f.charpoly()?;
    let x_minus_1 = IntPolynomial::from_i64(&[-1, 1]);
    let mut c = IntPolynomial::one();
    for (p, e) in factor(&cp) {
        if p != x_minus_1 && is_cyclotomic_product(&p) {
            c = &c * &p.pow(e);
        }
    }
    if c.degree() == 0 {
        return Ok(Vec::new());
    }
    let (k, _) = kernel_sublattice(f, &c)?;
    if !(k.lattice.is_negative_definite() || k.lattice.is_positive_definite()) {
        return Err(Error::Unsupported(
            "cyclotomic part of the isometry is indefinite".into(),
        ));
    }
    let mut out = Vec::new();
    for rc in k.lattice.roots()? {
        let r = to_ambient(&k.basis, &rc);
        let mut sum = r.clone();
        let mut cur = r.clone();
        for i in 1..orbit_bound {
            cur = m.mul_vec(&cur);
            for (s, c) in sum.iter_mut().zip(&cur) {
                *s += c;
            }
            if sum.iter().all(|x| x.is_zero()) {
                out.push(Witness {
                    root: r.clone(),
                    kind: WitnessKind::Cyclic,
                    orbit_length: Some(i + 1),
                });
                break;
            }
        }
    }
    out.sort_by(|a, b| a.root.cmp(&b.root));
    Ok(out)
}

/// Salem data for a hyperbolic lattice: the polynomial and `4 |disc s|`.
fn salem_data(f: &Isometry) -> Result<(IntPolynomial, BigInt)> {
    if !f.lattice().is_hyperbolic() {
        let (a, b) = f.lattice().signature();
        return Err(Error::WrongSignature(a, b, "(1, n-1)".into()));
    }
    let s = f.charpoly()?;
    is_salem(&s).map_err(|r| Error::NotSalem(format!("characteristic polynomial: {r}")))?;
    let bound = BigInt::from(4) * discriminant(&s)?.abs();
    Ok((s, bound))
}

/// `Positive` when `|det S| > 4 |disc s|`, otherwise `Inconclusive`.
pub fn determinant_bound_test(f: &Isometry) -> Result<Status> {
    let (_, bound) = salem_data(f)?;
    Ok(if f.lattice().determinant().abs() > bound {
        Status::Positive
    } else {
        Status::Inconclusive
    })
}

/// Exact data for deciding on which side of the geodesic plane a vector
/// lies. With `V(mu)` a polynomial eigenvector for the root `mu`,
/// `x2 = <r, V(lambda)>` and `x1 = <r, V(1/lambda)> / c` are the coordinates
/// along the `lambda` and `1/lambda` eigenvectors `u1 = V(lambda)`,
/// `u2 = V(1/lambda)/c`, normalized by `<u1, u2> = 1`.
struct Geodesic {
    s: IntPolynomial,
    gram: ZMatrix,
    /// Entries of `V` as polynomials of degree `< d`.
    v: Vec<IntPolynomial>,
    lambda: RealAlgebraic,
    c_sign: i32,
}

fn reverse_padded(p: &IntPolynomial, d: usize) -> IntPolynomial {
    let mut c: Vec<BigInt> = (0..d).map(|i| p.coeff(i)).collect();
    c.reverse();
    IntPolynomial::new(c)
}

impl Geodesic {
    fn new(f: &Isometry, s: &IntPolynomial) -> Result<Self> {
        let m = integral(f)?;
        let d = s.degree();
        // adj(mu - M) = sum_i mu^i B_i with B_i = sum_j s_{i+j+1} M^j
        let mut powers = vec![ZMatrix::identity(d)];
        for j in 1..d {
            let next = &powers[j - 1] * &m;
            powers.push(next);
        }
        let b: Vec<ZMatrix> = (0..d)
            .map(|i| {
                let mut acc = ZMatrix::zeros(d, d);
                for (j, pj) in powers.iter().enumerate().take(d - i) {
                    let c = s.coeff(i + j + 1);
                    if !c.is_zero() {
                        acc = &acc + &pj.map(|x| x * &c);
                    }
                }
                acc
            })
            .collect();
        let col = (0..d)
            .find(|&k| (0..d).any(|i| (0..d).any(|r| !b[i][(r, k)].is_zero())))
            .ok_or(Error::Degenerate)?;
        let v: Vec<IntPolynomial> = (0..d)
            .map(|r| IntPolynomial::new((0..d).map(|i| b[i][(r, col)].clone()).collect()))
            .collect();
        let lambda = RealAlgebraic::largest_root(s)?.ok_or(Error::Degenerate)?;
        let gram = f.lattice().gram().clone();
        let vrev: Vec<IntPolynomial> = v.iter().map(|p| reverse_padded(p, d)).collect();
        let mut c = IntPolynomial::zero();
        for j in 0..d {
            for l in 0..d {
                if !gram[(j, l)].is_zero() {
                    c = &c + &(&v[j] * &vrev[l]).scale(&gram[(j, l)]);
                }
            }
        }
        let c = c.div_rem_monic(s).1;
        let mut g = Geodesic {
            s: s.clone(),
            gram,
            v,
            lambda,
            c_sign: 0,
        };
        g.c_sign = g.lambda.sign_of(&c);
        if g.c_sign == 0 {
            return Err(Error::Degenerate);
        }
        Ok(g)
    }

    /// `<r, V(x)>` as a polynomial reduced modulo `s`.
    fn pairing(&self, r: &[BigInt]) -> IntPolynomial {
        let gr = self.gram.mul_vec(r);
        let mut p = IntPolynomial::zero();
        for (j, c) in gr.iter().enumerate() {
            if !c.is_zero() {
                p = &p + &self.v[j].scale(c);
            }
        }
        p.div_rem_monic(&self.s).1
    }

    /// Sign of `x1 * x2`, i.e. of the square of the projection onto the
    /// geodesic plane.
    fn plane_sign(&mut self, r: &[BigInt]) -> i32 {
        let d = self.s.degree();
        let p = self.pairing(r);
        let prev = reverse_padded(&p, d).div_rem_monic(&self.s).1;
        self.lambda.sign_of(&p) * self.lambda.sign_of(&prev) * self.c_sign
    }

    /// Interval enclosure of `h = u1 + u2` at the given precision.
    fn h_enclosure(&self, bits: u32) -> Result<Vec<Interval>> {
        let lam = self.lambda.enclosure(bits);
        let inv = lam.recip()?;
        let u1: Vec<Interval> = self.v.iter().map(|p| lam.eval(p)).collect();
        let w: Vec<Interval> = self.v.iter().map(|p| inv.eval(p)).collect();
        let d = self.v.len();
        let mut c = Interval::int(0);
        for j in 0..d {
            for l in 0..d {
                if !self.gram[(j, l)].is_zero() {
                    let g = BigRational::from_integer(self.gram[(j, l)].clone());
                    c = c.add(&u1[j].mul(&w[l]).scale(&g));
                }
            }
        }
        let cinv = c.recip()?;
        Ok((0..d).map(|j| u1[j].add(&w[j].mul(&cinv))).collect())
    }
}

fn round_to(x: &BigRational, bits: u32) -> BigRational {
    let s = BigRational::from_integer(BigInt::one() << bits);
    (x * &s).round() / s
}

/// Rational matrix `H'` close to the majorant `H = (G h)(G h)^T - G`, a
/// lower bound `mu` for its least eigenvalue and the perturbation bound
/// `delta` with `|x^T (H - H') x| <= delta |x|^2`.
fn majorant(geo: &Geodesic, bits: u32) -> Result<Option<(QMatrix, BigRational, BigRational)>> {
    let h = geo.h_enclosure(bits)?;
    let d = h.len();
    let g = &geo.gram;
    let a: Vec<Interval> = (0..d)
        .map(|i| {
            let mut acc = Interval::int(0);
            for (j, hj) in h.iter().enumerate() {
                if !g[(i, j)].is_zero() {
                    acc = acc.add(&hj.scale(&BigRational::from_integer(g[(i, j)].clone())));
                }
            }
            acc
        })
        .collect();
    let mut hq = QMatrix::zeros(d, d);
    let mut emax = BigRational::zero();
    for i in 0..d {
        for j in 0..d {
            let iv = a[i]
                .mul(&a[j])
                .sub(&Interval::point(BigRational::from_integer(g[(i, j)].clone())));
            let m = round_to(&iv.mid(), bits);
            let e = std::cmp::max(&iv.hi - &m, &m - &iv.lo);
            if e > emax {
                emax = e;
            }
            hq[(i, j)] = m;
        }
    }
    let delta = emax * BigRational::from_integer(BigInt::from(d));
    let mut mu = (0..d)
        .map(|i| hq[(i, i)].clone())
        .max()
        .unwrap_or_else(BigRational::one);
    let floor = BigRational::new(BigInt::one(), BigInt::one() << bits);
    loop {
        let shifted = QMatrix::from_fn(d, d, |i, j| if i == j { &hq[(i, j)] - &mu } else { hq[(i, j)].clone() });
        if is_positive_definite_rational(&shifted) {
            break;
        }
        mu /= BigRational::from_integer(BigInt::from(2));
        if mu < floor {
            return Ok(None);
        }
    }
    if &delta * BigRational::from_integer(BigInt::from(2)) >= mu {
        return Ok(None);
    }
    Ok(Some((hq, mu, delta)))
}

/// Every orbit of obstructing roots meets `{x : <x, h>^2 - x^2 <= lambda + 2}`;
/// that set is enumerated through a certified rational majorant, the roots
/// are classified exactly and reduced modulo the action of `f`.
pub fn obstructing_root_search(f: &Isometry) -> Result<ObstructionReport> {
    obstructing_root_search_with(f, &PositivityOptions::default())
}

pub fn obstructing_root_search_with(f: &Isometry, opts: &PositivityOptions) -> Result<ObstructionReport> {
    let (s, threshold) = salem_data(f)?;
    let m = integral(f)?;
    let minv = f
        .inverse()
        .integer_matrix()
        .ok_or_else(|| Error::Precondition("inverse is not integral".into()))?;
    let mut geo = Geodesic::new(f, &s)?;
    let mut bits = 64;
    let (hq, mu, delta) = loop {
        if let Some(t) = majorant(&geo, bits)? {
            break t;
        }
        bits *= 2;
        if bits > opts.max_bits {
            return Err(Error::Precision(opts.max_bits));
        }
    };
    let lam_hi = geo.lambda.enclosure(bits).hi;
    let bound = (lam_hi + BigRational::from_integer(BigInt::from(2))) / (BigRational::one() - &delta / &mu);
    let grid = BigRational::from_integer(BigInt::one() << 32);
    let bound = (bound * &grid).ceil() / grid;
    let gram = f.lattice().gram().clone();
    let minus_two = BigInt::from(-2);
    let mut candidates = 0usize;
    let mut roots: Vec<Vec<BigInt>> = Vec::new();
    fincke_pohst_rational(&hq, &bound, |x, _| {
        candidates += 1;
        if gram.bilinear(x, x) == minus_two {
            roots.push(x.to_vec());
        }
    });
    roots.sort();
    let nroots = roots.len();
    let window = 10 * s.degree() as i64;
    let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut witnesses = Vec::new();
    for r in roots {
        if seen.contains_key(&r) || geo.plane_sign(&r) >= 0 {
            continue;
        }
        let orbit = orbit_window(&m, &minv, &r, window);
        let rep = orbit
            .iter()
            .min_by(|a, b| euclid(a).cmp(&euclid(b)).then_with(|| a.cmp(b)))
            .unwrap()
            .clone();
        let idx = witnesses.len();
        for v in orbit {
            seen.entry(v).or_insert(idx);
        }
        witnesses.push(Witness {
            root: rep,
            kind: WitnessKind::GeodesicCrossing,
            orbit_length: None,
        });
    }
    witnesses.sort_by(|a, b| a.root.cmp(&b.root));
    Ok(ObstructionReport {
        status: if witnesses.is_empty() {
            Status::Positive
        } else {
            Status::NotPositive
        },
        method: Method::ExhaustiveSearch,
        witnesses,
        determinant: f.lattice().determinant(),
        determinant_threshold: Some(threshold.to_string()),
        search: Some(SearchBox {
            precision_bits: bits,
            bound,
            candidates,
            roots: nroots,
        }),
    })
}

fn euclid(v: &[BigInt]) -> BigInt {
    v.iter().map(|c| c * c).sum()
}

fn orbit_window(m: &ZMatrix, minv: &ZMatrix, r: &[BigInt], w: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![r.to_vec()];
    let mut fw = r.to_vec();
    let mut bw = r.to_vec();
    for _ in 0..w {
        fw = m.mul_vec(&fw);
        bw = minv.mul_vec(&bw);
        out.push(fw.clone());
        out.push(bw.clone());
    }
    out
}

/// Decides positivity: negative definite lattices through cyclic roots,
/// hyperbolic Salem isometries through the determinant bound and then the
/// exhaustive search.
pub fn is_positive(f: &Isometry) -> Result<ObstructionReport> {
    is_positive_with(f, &PositivityOptions::default())
}

pub fn is_positive_with(f: &Isometry, opts: &PositivityOptions) -> Result<ObstructionReport> {
    let l = f.lattice();
    if l.is_negative_definite() {
        let w = cyclic_roots(f, opts.orbit_bound)?;
        return Ok(ObstructionReport {
            status: if w.is_empty() {
                Status::Positive
            } else {
                Status::NotPositive
            },
            method: Method::CyclicOnly,
            witnesses: w,
            determinant: l.determinant(),
            determinant_threshold: None,
            search: None,
        });
    }
    if !l.is_hyperbolic() {
        let (a, b) = l.signature();
        return Err(Error::WrongSignature(a, b, "hyperbolic or negative definite".into()));
    }
    let (_, threshold) = salem_data(f)?;
    if !opts.always_search && determinant_bound_test(f)? == Status::Positive {
        return Ok(ObstructionReport {
            status: Status::Positive,
            method: Method::DeterminantBound,
            witnesses: Vec::new(),
            determinant: l.determinant(),
            determinant_threshold: Some(threshold.to_string()),
            search: None,
        });
    }
    obstructing_root_search_with(f, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::{companion, find_invariant_lattice, twist, TwistElement};
    use crate::lattice::Lattice;
    use crate::linalg::zmat;

    fn base() -> Isometry {
        let l = Lattice::from_i64(&[&[2, 3], &[3, 2]]).unwrap();
        let c = companion(&IntPolynomial::from_i64(&[1, -3, 1])).unwrap();
        Isometry::from_integer(l, c).unwrap()
    }

    #[test]
    fn rank_two_examples() {
        let f = base();
        assert_eq!(determinant_bound_test(&f).unwrap(), Status::Inconclusive);
        let r = obstructing_root_search(&f).unwrap();
        assert_eq!(r.status, Status::NotPositive);
        let e = vec![BigInt::one(), -BigInt::one()];
        assert!(r.witnesses.iter().any(|w| w.root == e));
        for w in &r.witnesses {
            assert_eq!(f.lattice().norm(&w.root), BigInt::from(-2));
        }
        let (_, g) = twist(&f, &TwistElement::scalar(11)).unwrap();
        assert_eq!(determinant_bound_test(&g).unwrap(), Status::Positive);
        let r = obstructing_root_search(&g).unwrap();
        assert_eq!(r.status, Status::Positive);
        assert_eq!(is_positive(&g).unwrap().method, Method::DeterminantBound);
    }

    #[test]
    fn definite_examples() {
        let e8 = Isometry::identity(Lattice::e8());
        assert_eq!(is_positive(&e8).unwrap().status, Status::Positive);
        let a2 = Lattice::from_i64(&[&[-2, 1], &[1, -2]]).unwrap();
        let rot = Isometry::from_integer(a2, zmat(&[&[0, -1], &[1, -1]])).unwrap();
        assert_eq!(rot.charpoly().unwrap(), IntPolynomial::from_i64(&[1, 1, 1]));
        let w = cyclic_roots(&rot, 10).unwrap();
        assert_eq!(w.len(), 6);
        assert!(w.iter().all(|x| x.orbit_length == Some(3)));
        assert_eq!(is_positive(&rot).unwrap().status, Status::NotPositive);
        let neg = Isometry::identity(Lattice::from_i64(&[&[-2]]).unwrap());
        assert!(obstructing_root_search(&neg).is_err());
    }

    #[test]
    fn rank_four_search() {
        let s4 = IntPolynomial::from_i64(&[1, -1, -1, -1, 1]);
        let c = companion(&s4).unwrap();
        let l = find_invariant_lattice(&c.to_rational(), (1, 3), true, 10).unwrap();
        let f = Isometry::from_integer(l, c).unwrap();
        let r = obstructing_root_search(&f).unwrap();
        for w in &r.witnesses {
            assert_eq!(f.lattice().norm(&w.root), BigInt::from(-2));
        }
        if determinant_bound_test(&f).unwrap() == Status::Positive {
            assert!(r.witnesses.is_empty());
        }
        let (_, g) = twist(&f, &TwistElement::scalar(3)).unwrap();
        assert_eq!(obstructing_root_search(&g).unwrap().status, Status::Positive);
    }
}

//! Resultants, discriminants, trace polynomials, Salem certification,
//! minimal polynomials of powers, the square-class test and the
//! cyclotomic-product test.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::factor::{factor, poly_order};
use super::roots::{Interval, RootIsolation, SturmSequence};
use super::{cyclotomic, IntPolynomial};
use crate::arith::exact_sqrt;
use crate::error::{Error, Result};
use crate::linalg::ZMatrix;

/// Resultant via the Sylvester determinant.
pub fn resultant(p: &IntPolynomial, q: &IntPolynomial) -> Result<BigInt> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (m, n) = (p.degree(), q.degree());
    let size = m + n;
    if size == 0 {
        return Ok(BigInt::one());
    }
    let mut s = ZMatrix::zeros(size, size);
    // rows 0..n: shifts of p; rows n..n+m: shifts of q (descending powers)
    for i in 0..n {
        for (k, c) in p.coeffs().iter().enumerate() {
            s[(i, i + m - k)] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in q.coeffs().iter().enumerate() {
            s[(n + i, i + n - k)] = c.clone();
        }
    }
    Ok(s.det())
}

/// Discriminant of a monic polynomial: `(-1)^(d(d-1)/2) res(p, p')`.
pub fn discriminant(p: &IntPolynomial) -> Result<BigInt> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let d = p.degree();
    if d == 0 {
        return Err(Error::Precondition("discriminant of a constant".into()));
    }
    if d == 1 {
        return Ok(BigInt::one());
    }
    let r = resultant(p, &p.derivative())?;
    Ok(if (d * (d - 1) / 2) % 2 == 1 { -r } else { r })
}

/// Chebyshev-type polynomials with `x^k + x^-k = T_k(x + 1/x)`.
fn trace_basis(m: usize) -> Vec<IntPolynomial> {
    let mut t = vec![IntPolynomial::from_i64(&[2]), IntPolynomial::x()];
    for k in 2..=m {
        let next = &(&IntPolynomial::x() * &t[k - 1]) - &t[k - 2];
        t.push(next);
    }
    t.truncate(m + 1);
    t
}

/// The trace polynomial `r` with `p(x) = x^m r(x + 1/x)` for a reciprocal
/// polynomial of degree `2m`. The identity is re-verified by expansion.
pub fn trace_polynomial(p: &IntPolynomial) -> Result<IntPolynomial> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() % 2 == 1 {
        return Err(Error::OddDegree(p.degree()));
    }
    if !p.is_reciprocal() {
        return Err(Error::NotReciprocal);
    }
    let m = p.degree() / 2;
    let t = trace_basis(m);
    let mut r = IntPolynomial::constant(p.coeff(m));
    for k in 1..=m {
        r = &r + &t[k].scale(&p.coeff(m + k));
    }
    if expand_trace(&r, m) != *p {
        return Err(Error::Precondition("trace polynomial re-expansion mismatch".into()));
    }
    Ok(r)
}

/// `x^m r(x + 1/x) = sum_j r_j (x^2 + 1)^j x^(m - j)`.
pub fn expand_trace(r: &IntPolynomial, m: usize) -> IntPolynomial {
    let x2p1 = IntPolynomial::from_i64(&[1, 0, 1]);
    let mut acc = IntPolynomial::zero();
    let mut pw = IntPolynomial::one();
    for j in 0..=r.degree().min(m) {
        let term = &pw * &IntPolynomial::monomial(r.coeff(j), m - j);
        acc = &acc + &term;
        pw = &pw * &x2p1;
    }
    acc
}

/// Certificate that a polynomial is a Salem polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalemCertificate {
    pub polynomial: IntPolynomial,
    pub degree: usize,
    pub trace_polynomial: IntPolynomial,
    /// Isolating interval for the root `lambda > 1`.
    pub lambda: Interval,
    /// Isolating interval for `lambda + 1/lambda`, the trace root above 2.
    pub trace_root: Interval,
    /// Degree 2: no conjugates on the unit circle.
    pub quadratic_degenerate: bool,
}

/// Why a polynomial is not a Salem polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SalemRejection {
    Zero,
    NotMonic,
    Constant,
    OddDegree(usize),
    NotReciprocal,
    Reducible(Vec<IntPolynomial>),
    WrongRootPattern(String),
}

impl SalemRejection {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SalemRejection::Zero => "zero",
            SalemRejection::NotMonic => "not_monic",
            SalemRejection::Constant => "constant",
            SalemRejection::OddDegree(_) => "odd_degree",
            SalemRejection::NotReciprocal => "not_reciprocal",
            SalemRejection::Reducible(_) => "reducible",
            SalemRejection::WrongRootPattern(_) => "wrong_root_pattern",
        }
    }
}

impl fmt::Display for SalemRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SalemRejection::Zero => write!(f, "zero polynomial"),
            SalemRejection::NotMonic => write!(f, "not monic"),
            SalemRejection::Constant => write!(f, "constant polynomial"),
            SalemRejection::OddDegree(d) => write!(f, "odd degree {d}"),
            SalemRejection::NotReciprocal => write!(f, "not reciprocal"),
            SalemRejection::Reducible(fs) => {
                write!(f, "reducible: ")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "({g})")?;
                }
                Ok(())
            }
            SalemRejection::WrongRootPattern(s) => write!(f, "wrong root pattern: {s}"),
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Decides whether `p` is a Salem polynomial.
pub fn is_salem(p: &IntPolynomial) -> std::result::Result<SalemCertificate, SalemRejection> {
    if p.is_zero() {
        return Err(SalemRejection::Zero);
    }
    if !p.is_monic() {
        return Err(SalemRejection::NotMonic);
    }
    let d = p.degree();
    if d == 0 {
        return Err(SalemRejection::Constant);
    }
    if d % 2 == 1 {
        return Err(SalemRejection::OddDegree(d));
    }
    if !p.is_reciprocal() {
        return Err(SalemRejection::NotReciprocal);
    }
    let fs = factor(p);
    if fs.len() != 1 || fs[0].1 != 1 {
        let mut all = Vec::new();
        for (g, e) in fs {
            for _ in 0..e {
                all.push(g.clone());
            }
        }
        return Err(SalemRejection::Reducible(all));
    }
    let r = trace_polynomial(p).map_err(|_| SalemRejection::NotReciprocal)?;
    let m = r.degree();
    let st = SturmSequence::new(&r);
    let real = st.count_all();
    let above = st.count_above(&rat(2));
    let below = st.count_below(&rat(-2));
    // r is irreducible, so +-2 are not roots and all counts are of simple roots
    if real != m || above != 1 || below != 0 {
        return Err(SalemRejection::WrongRootPattern(format!(
            "trace polynomial has {real} real roots of {m}, {above} above 2, {below} below -2"
        )));
    }
    let iso_r = RootIsolation::isolate(&r).expect("nonzero");
    let trace_root = iso_r.intervals.last().unwrap().clone();
    let iso_p = RootIsolation::isolate(p).expect("nonzero");
    let lambda = iso_p.intervals.last().unwrap().clone();
    debug_assert!(lambda.lo >= rat(1));
    Ok(SalemCertificate {
        polynomial: p.clone(),
        degree: d,
        trace_polynomial: r,
        lambda,
        trace_root,
        quadratic_degenerate: d == 2,
    })
}

/// Power sums `p_1, ..., p_n` of the roots of a monic polynomial.
pub fn power_sums(s: &IntPolynomial, n: usize) -> Vec<BigInt> {
    let d = s.degree();
    // c[j] = coefficient of x^(d-j)
    let c: Vec<BigInt> = (0..=d).map(|j| s.coeff(d - j)).collect();
    let mut ps = vec![BigInt::from(d)];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for j in 1..=k.min(d) {
            if !c[j].is_zero() {
                if j == k {
                    acc -= &c[j] * BigInt::from(k);
                } else {
                    acc -= &c[j] * &ps[k - j];
                }
            }
        }
        ps.push(acc);
    }
    ps
}

/// Monic polynomial of degree `d` from power sums `P_1..P_d` (Newton).
pub fn from_power_sums(ps: &[BigInt], d: usize) -> IntPolynomial {
    // e_k = (1/k) sum_{i=1}^k (-1)^(i-1) e_{k-i} P_i
    let mut e = vec![BigInt::one()];
    for k in 1..=d {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let t = &e[k - i] * &ps[i];
            if i % 2 == 1 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        debug_assert!((&acc % BigInt::from(k)).is_zero());
        e.push(acc / BigInt::from(k));
    }
    let mut coeffs = vec![BigInt::zero(); d + 1];
    for (k, ek) in e.iter().enumerate() {
        coeffs[d - k] = if k % 2 == 0 { ek.clone() } else { -ek };
    }
    IntPolynomial::new(coeffs)
}

/// Characteristic polynomial of the `n`-th power of the roots of a monic `s`,
/// equal up to sign to `res_y(s(y), x - y^n)`.
pub fn power_charpoly(s: &IntPolynomial, n: usize) -> IntPolynomial {
    let d = s.degree();
    let ps = power_sums(s, n * d);
    let pn: Vec<BigInt> = (0..=d).map(|j| ps[j * n].clone()).collect();
    from_power_sums(&pn, d)
}

/// Minimal polynomial of `lambda^n` for a Salem polynomial `s`.
pub fn power_min_poly(s: &IntPolynomial, n: u64) -> Result<IntPolynomial> {
    if n == 0 {
        return Err(Error::ZeroExponent);
    }
    is_salem(s).map_err(|r| Error::NotSalem(r.to_string()))?;
    if n == 1 {
        return Ok(s.clone());
    }
    let cp = power_charpoly(s, n as usize);
    let rad = cp.squarefree_part();
    let one = rat(1);
    let mut hits: Vec<IntPolynomial> = factor(&rad)
        .into_iter()
        .map(|(g, _)| g)
        .filter(|g| SturmSequence::new(g).count_above(&one) > 0)
        .collect();
    if hits.len() != 1 {
        return Err(Error::Precondition(format!(
            "expected one factor with a root above 1, found {}",
            hits.len()
        )));
    }
    Ok(hits.pop().unwrap())
}

/// Whether `-s(1) s(-1)` is a positive perfect square. Errors if either
/// value vanishes.
pub fn square_class_test(s: &IntPolynomial) -> Result<bool> {
    let a = s.eval(&BigInt::one());
    let b = s.eval(&BigInt::from(-1));
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroAtUnit("s"));
    }
    let v = -(a * b);
    Ok(v.is_positive() && exact_sqrt(&v).is_some())
}

/// `-s(1) s(-1)`
pub fn unit_product(s: &IntPolynomial) -> BigInt {
    -(s.eval(&BigInt::one()) * s.eval(&BigInt::from(-1)))
}

fn binomials(d: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for _ in 0..d {
        let mut next = vec![BigInt::one()];
        for w in row.windows(2) {
            next.push(&w[0] + &w[1]);
        }
        next.push(BigInt::one());
        row = next;
    }
    row
}

/// One Graeffe step: the monic polynomial whose roots are the squares of
/// the roots of `c`.
fn graeffe(c: &IntPolynomial) -> IntPolynomial {
    let neg = IntPolynomial::new(
        c.coeffs()
            .iter()
            .enumerate()
            .map(|(i, a)| if i % 2 == 1 { -a } else { a.clone() })
            .collect(),
    );
    let prod = c * &neg;
    let d = c.degree();
    let coeffs: Vec<BigInt> = (0..=d)
        .map(|i| {
            let v = prod.coeff(2 * i);
            if d % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect();
    IntPolynomial::new(coeffs)
}

const GRAEFFE_CAP: usize = 4096;

/// Whether every irreducible factor of `c` is cyclotomic (Kronecker).
pub fn is_cyclotomic_product(c: &IntPolynomial) -> bool {
    if !c.is_monic() || c.coeff(0).is_zero() {
        return false;
    }
    let d = c.degree();
    if d == 0 {
        return true;
    }
    let bounds = binomials(d);
    let within = |g: &IntPolynomial| g.coeffs().iter().zip(&bounds).all(|(a, b)| a.abs() <= *b);
    let mut seen = HashSet::new();
    let mut g = c.clone();
    for _ in 0..GRAEFFE_CAP {
        if !within(&g) {
            return false;
        }
        if !seen.insert(g.clone()) {
            return true;
        }
        g = graeffe(&g);
    }
    // fall back to factoring and matching cyclotomic polynomials
    factor(c).iter().all(|(f, _)| {
        let k = f.degree() as u32;
        (1..=2 * k * k + 2).any(|n| cyclotomic(n) == *f)
    })
}

/// Sorted list of distinct irreducible factors.
pub fn irreducible_factors(p: &IntPolynomial) -> Vec<IntPolynomial> {
    let mut fs: Vec<IntPolynomial> = factor(p).into_iter().map(|(g, _)| g).collect();
    fs.sort_by(poly_order);
    fs
}

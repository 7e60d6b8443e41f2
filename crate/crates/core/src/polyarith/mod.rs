//! Exact univariate polynomials with integer coefficients.
//!
//! [`IntPolynomial`] stores coefficients in ascending degree order. The
//! submodules add arithmetic over `F_p`, factorization over `Z`, Sturm-based
//! real root isolation and the Salem-specific operations.

pub mod factor;
pub mod modp;
pub mod roots;
pub mod salem;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use factor::factor;
pub use roots::{Interval, RealAlgebraic, RootIsolation};
pub use salem::{
    discriminant, is_cyclotomic_product, is_salem, power_min_poly, resultant, square_class_test, trace_polynomial,
    SalemCertificate, SalemRejection,
};

/// A polynomial with arbitrary-precision integer coefficients.
///
/// The coefficient vector never has trailing zeros; the zero polynomial has
/// an empty coefficient vector and degree 0.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k];
        v.push(c);
        Self::new(v)
    }

    /// `x - a`
    pub fn linear_root(a: BigInt) -> Self {
        Self::new(vec![-a, BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    /// Palindromic coefficient sequence: `a_i = a_{d-i}`.
    pub fn is_reciprocal(&self) -> bool {
        let n = self.coeffs.len();
        n > 0 && (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    /// `x^d p(1/x)`
    pub fn reverse(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Sign of `p(x)` at a rational point, by homogeneous integer evaluation.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        let (num, den) = (x.numer(), x.denom());
        // sum a_i num^i den^(d-i); den > 0 so the sign is that of p(x)
        let d = self.degree();
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        let mut terms = Vec::with_capacity(d + 1);
        for _ in 0..=d {
            terms.push(dpow.clone());
            dpow *= den;
        }
        let mut npow = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &npow * &terms[d - i];
            }
            npow *= num;
        }
        crate::arith::sign_of(&acc)
    }

    /// `p(q(x))`
    pub fn compose(&self, q: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Division with remainder by a monic polynomial (exact over `Z`).
    pub fn div_rem_monic(&self, d: &Self) -> (Self, Self) {
        assert!(d.is_monic(), "div_rem_monic needs a monic divisor");
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Self::zero(), self.clone());
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        (Self::new(q), Self::new(r))
    }

    /// Exact quotient over `Z`; `None` if `d` does not divide `self` in `Z[x]`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dd = d.degree();
        if self.degree() < dd {
            return None;
        }
        let lc = d.lc();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd];
            if c.is_zero() {
                continue;
            }
            let (qq, rem) = c.div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &qq * dc;
            }
            q[k] = qq;
        }
        if r.iter().all(|c| c.is_zero()) {
            Some(Self::new(q))
        } else {
            None
        }
    }

    /// Pseudo-remainder: the remainder of `|lc(d)|^(deg self - deg d + 1) * self`
    /// by `d`. The positive multiplier keeps signs, as Sturm sequences need.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        assert!(!d.is_zero());
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return self.clone();
        }
        let lc = d.lc();
        let alc = lc.abs();
        let delta = self.degree() - dd + 1;
        let mut r = self.coeffs.clone();
        let mut steps = 0;
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap().clone();
            // r <- |lc| r - sign(lc) c x^k d
            for x in r.iter_mut() {
                *x *= &alc;
            }
            let f = if lc.is_negative() { -c } else { c };
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &f * dc;
            }
            steps += 1;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        let mut out = Self::new(r);
        if steps < delta {
            out = out.scale(&alc.pow((delta - steps) as u32));
        }
        out
    }

    /// Greatest common divisor in `Z[x]`, primitive with positive leading
    /// coefficient (primitive remainder sequence).
    pub fn gcd(&self, other: &Self) -> Self {
        let ca = self.content();
        let cb = other.content();
        let cg = ca.gcd(&cb);
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.is_zero() {
            return b.scale(&cg);
        }
        if b.is_zero() {
            return a.scale(&cg);
        }
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.primitive_part().scale(&cg)
    }

    /// Product of the distinct irreducible factors, primitive.
    pub fn squarefree_part(&self) -> Self {
        if self.degree() == 0 {
            return self.primitive_part();
        }
        let f = self.primitive_part();
        let g = f.gcd(&f.derivative()).primitive_part();
        f.div_exact(&g).expect("gcd divides").primitive_part()
    }

    /// Yun's squarefree decomposition of a primitive polynomial:
    /// `self = prod a_i^i` up to sign, returned as `(a_i, i)` with `a_i`
    /// non-constant.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, u32)> {
        let f = self.primitive_part();
        let mut out = Vec::new();
        if f.degree() == 0 {
            return out;
        }
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_exact(&a0).unwrap();
        let mut c = fp.div_exact(&a0).unwrap();
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_exact(&a).unwrap();
            if b.degree() == 0 {
                break;
            }
            c = d.div_exact(&a).unwrap();
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// Decimal strings, ascending degree.
    pub fn to_strings(&self) -> Vec<String> {
        if self.is_zero() {
            return vec!["0".to_string()];
        }
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_strings<S: AsRef<str>>(v: &[S]) -> Result<Self> {
        let coeffs = v
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.as_ref()
                    .trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("coefficient {i}: `{}` is not an integer", s.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }

    /// Evaluates the polynomial at a square matrix (Horner).
    pub fn eval_matrix(&self, m: &crate::linalg::ZMatrix) -> crate::linalg::ZMatrix {
        let n = m.nrows();
        let mut acc = crate::linalg::ZMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * m;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn eval_qmatrix(&self, m: &crate::linalg::QMatrix) -> crate::linalg::QMatrix {
        let n = m.nrows();
        let mut acc = crate::linalg::QMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc * m;
            for i in 0..n {
                acc[(i, i)] += BigRational::from_integer(c.clone());
            }
        }
        acc
    }
}

/// The `n`-th cyclotomic polynomial, by exact division of `x^n - 1`.
pub fn cyclotomic(n: u32) -> IntPolynomial {
    assert!(n >= 1);
    let mut p = IntPolynomial::monomial(BigInt::one(), n as usize);
    p = &p - &IntPolynomial::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = p.div_exact(&cyclotomic(d)).expect("cyclotomic division");
        }
    }
    p
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        IntPolynomial::from_strings(&v).map_err(serde::de::Error::custom)
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, o: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || o.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IntPolynomial {
            type Output = IntPolynomial;
            fn $m(self, o: IntPolynomial) -> IntPolynomial {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

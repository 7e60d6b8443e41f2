//! Real roots via Sturm sequences, exact rational intervals and real
//! algebraic numbers with exact sign determination.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::IntPolynomial;
use crate::arith::ceil_sqrt;
use crate::error::{Error, Result};

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

/// A closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn int(x: i64) -> Self {
        Self::point(BigRational::from_integer(x.into()))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / two()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRational::zero())
    }

    /// Largest absolute value on the interval.
    pub fn mag(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    pub fn scale(&self, c: &BigRational) -> Interval {
        self.mul(&Interval::point(c.clone()))
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::Precondition(
                "interval division by an interval containing 0".into(),
            ));
        }
        Ok(Interval::new(self.hi.recip(), self.lo.recip()))
    }

    pub fn div(&self, o: &Interval) -> Result<Interval> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn sqr(&self) -> Interval {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            Interval::new(BigRational::zero(), a.max(b))
        } else {
            Interval::new(a.clone().min(b.clone()), a.max(b))
        }
    }

    /// Outward rounding of both endpoints to multiples of `2^-bits`.
    pub fn round_out(&self, bits: u32) -> Interval {
        let s = BigInt::one() << bits;
        let sr = BigRational::from_integer(s.clone());
        let lo = (&self.lo * &sr).floor();
        let hi = (&self.hi * &sr).ceil();
        Interval::new(lo / &sr, hi / &sr)
    }

    /// Interval evaluation of an integer polynomial (Horner).
    pub fn eval(&self, p: &IntPolynomial) -> Interval {
        let mut acc = Interval::int(0);
        for c in p.coeffs().iter().rev() {
            acc = acc
                .mul(self)
                .add(&Interval::point(BigRational::from_integer(c.clone())));
        }
        acc
    }

    /// Interval evaluation of a polynomial with rational coefficients.
    pub fn eval_rational(&self, p: &[BigRational]) -> Interval {
        let mut acc = Interval::int(0);
        for c in p.iter().rev() {
            acc = acc.mul(self).add(&Interval::point(c.clone()));
        }
        acc
    }
}

/// Upper bound for `sqrt(x)` with `x >= 0`, accurate to about `2^-bits`.
pub fn sqrt_upper(x: &BigRational, bits: u32) -> BigRational {
    if !x.is_positive() {
        return BigRational::zero();
    }
    let s = BigInt::one() << (2 * bits);
    let scaled = (x * BigRational::from_integer(s)).ceil().to_integer();
    BigRational::new(ceil_sqrt(&scaled), BigInt::one() << bits)
}

/// A Sturm sequence of an integer polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    seq: Vec<IntPolynomial>,
}

impl SturmSequence {
    pub fn new(p: &IntPolynomial) -> Self {
        let mut seq = vec![p.clone()];
        if p.degree() == 0 {
            return SturmSequence { seq };
        }
        let mut a = p.clone();
        let mut b = p.derivative();
        while !b.is_zero() {
            seq.push(b.clone());
            // -prem with a positive multiplier; dividing by the positive content
            let r = a.pseudo_rem(&b);
            let c = r.content();
            let r = if c.is_zero() {
                r
            } else {
                IntPolynomial::new(r.coeffs().iter().map(|x| -(x / &c)).collect())
            };
            a = b;
            b = r;
        }
        SturmSequence { seq }
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut last = 0;
        let mut v = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::variations(self.seq.iter().map(|q| q.sign_at(x)))
    }

    /// Sign variations at `+inf` (`positive`) or `-inf`.
    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        Self::variations(self.seq.iter().map(|q| {
            let s = crate::arith::sign_of(&q.lc());
            if positive || q.degree() % 2 == 0 {
                s
            } else {
                -s
            }
        }))
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false) - self.variations_at_infinity(true)
    }

    /// Distinct real roots in `(a, +inf)`.
    pub fn count_above(&self, a: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at_infinity(true)
    }

    /// Distinct real roots in `(-inf, a]`.
    pub fn count_below(&self, a: &BigRational) -> usize {
        self.variations_at_infinity(false) - self.variations_at(a)
    }
}

/// Isolating intervals for the distinct real roots of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootIsolation {
    /// Disjoint intervals in increasing order. Either `lo == hi` is an exact
    /// rational root, or `lo < hi`, neither endpoint is a root, and exactly one
    /// root lies strictly between them.
    pub intervals: Vec<Interval>,
    /// Whether the polynomial is multiplicity-free.
    pub squarefree: bool,
}

/// A root bound: every real root has absolute value below the result.
fn cauchy_bound(p: &IntPolynomial) -> BigRational {
    let lc = p.lc().abs();
    let m = p
        .coeffs()
        .iter()
        .take(p.degree())
        .map(|c| c.abs())
        .max()
        .unwrap_or_default();
    let b = BigRational::new(m, lc) + BigRational::one();
    // round up to a power of two so bisection points stay dyadic
    let mut t = BigRational::one();
    while t <= b {
        t *= two();
    }
    t
}

impl RootIsolation {
    pub fn isolate(p: &IntPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let squarefree = p.is_squarefree();
        let q = p.squarefree_part();
        let mut intervals = Vec::new();
        if q.degree() >= 1 {
            let st = SturmSequence::new(&q);
            let b = cauchy_bound(&q);
            isolate_rec(&q, &st, -b.clone(), b, &mut intervals);
        }
        Ok(RootIsolation { intervals, squarefree })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// A point strictly inside `(lo, hi)` at which `q` does not vanish.
fn split_point(q: &IntPolynomial, lo: &BigRational, hi: &BigRational) -> BigRational {
    let w = hi - lo;
    let mut m = (lo + hi) / two();
    let mut step = &w / BigRational::from_integer(8.into());
    while q.sign_at(&m) == 0 {
        m = (lo + hi) / two() + &step;
        step /= two();
    }
    m
}

fn isolate_rec(q: &IntPolynomial, st: &SturmSequence, lo: BigRational, hi: BigRational, out: &mut Vec<Interval>) {
    let n = st.count(&lo, &hi);
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(Interval::new(lo, hi));
        return;
    }
    let m = split_point(q, &lo, &hi);
    isolate_rec(q, st, lo, m.clone(), out);
    isolate_rec(q, st, m, hi, out);
}

/// Shrinks an isolating interval of a simple root of `q` until its width is
/// at most `width`. Returns a point interval if an exact root is hit.
pub fn refine(q: &IntPolynomial, iv: &Interval, width: &BigRational) -> Interval {
    let mut iv = iv.clone();
    if iv.lo == iv.hi {
        return iv;
    }
    let slo = q.sign_at(&iv.lo);
    debug_assert!(slo != 0 && slo != q.sign_at(&iv.hi));
    while &iv.width() > width {
        let m = iv.mid();
        let sm = q.sign_at(&m);
        if sm == 0 {
            return Interval::point(m);
        }
        if sm == slo {
            iv.lo = m;
        } else {
            iv.hi = m;
        }
    }
    iv
}

/// A real algebraic number: a root of a squarefree primitive integer
/// polynomial, located by an isolating interval.
#[derive(Clone, Debug)]
pub struct RealAlgebraic {
    poly: IntPolynomial,
    iv: Interval,
}

impl RealAlgebraic {
    /// `iv` must isolate a single root of `poly` in the sense of
    /// [`RootIsolation`].
    pub fn new(poly: &IntPolynomial, iv: Interval) -> Self {
        let poly = poly.squarefree_part();
        RealAlgebraic { poly, iv }
    }

    /// The largest real root of `p`, if any.
    pub fn largest_root(p: &IntPolynomial) -> Result<Option<Self>> {
        let iso = RootIsolation::isolate(p)?;
        Ok(iso.intervals.last().map(|iv| Self::new(p, iv.clone())))
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn interval(&self) -> &Interval {
        &self.iv
    }

    /// Refines in place to width at most `2^-bits`.
    pub fn refine_bits(&mut self, bits: u32) {
        let w = BigRational::new(BigInt::one(), BigInt::one() << bits);
        self.iv = refine(&self.poly, &self.iv, &w);
    }

    pub fn enclosure(&self, bits: u32) -> Interval {
        let mut c = self.clone();
        c.refine_bits(bits);
        c.iv
    }

    fn bisect(&mut self) {
        let w = self.iv.width() / two();
        self.iv = refine(&self.poly, &self.iv, &w);
    }

    /// Exact sign of `q(alpha)`.
    pub fn sign_of(&mut self, q: &IntPolynomial) -> i32 {
        if q.is_zero() {
            return 0;
        }
        if self.iv.lo == self.iv.hi {
            return q.sign_at(&self.iv.lo);
        }
        let g = self.poly.gcd(q);
        if g.degree() > 0 && g.sign_at(&self.iv.lo) != g.sign_at(&self.iv.hi) {
            return 0;
        }
        let qs = q.squarefree_part();
        let st = SturmSequence::new(&qs);
        loop {
            if self.iv.lo == self.iv.hi {
                return q.sign_at(&self.iv.lo);
            }
            let s = qs.sign_at(&self.iv.lo);
            if s != 0 && st.count(&self.iv.lo, &self.iv.hi) == 0 {
                return q.sign_at(&self.iv.lo);
            }
            self.bisect();
        }
    }

    /// Exact sign of `q(alpha)` for rational coefficients.
    pub fn sign_of_rational(&mut self, q: &[BigRational]) -> i32 {
        let den = q.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()));
        let qi = IntPolynomial::new(
            q.iter()
                .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
                .collect(),
        );
        self.sign_of(&qi)
    }

    /// Sign of `alpha - c`.
    pub fn cmp_rational(&mut self, c: &BigRational) -> i32 {
        let q = vec![-c.clone(), BigRational::one()];
        self.sign_of_rational(&q)
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [
            crate::json::format_rational(&self.lo),
            crate::json::format_rational(&self.hi),
        ]
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        let lo = crate::json::parse_rational(&a).map_err(serde::de::Error::custom)?;
        let hi = crate::json::parse_rational(&b).map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("interval with lo > hi"));
        }
        Ok(Interval { lo, hi })
    }
}

//! Local invariants: Legendre and Jacobi symbols, Hilbert symbols and Hasse
//! invariants of diagonal forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{is_prime, valuation};
use crate::error::{Error, Result};

/// A place of Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(BigInt),
    Infinite,
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => write!(f, "inf"),
        }
    }
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: &BigInt, n: &BigInt) -> Result<i32> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::Precondition(format!("jacobi symbol needs odd n > 0, got {n}")));
    }
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut t = 1;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = &n % &eight;
            if r == three || r == five {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if &a % &four == three && &n % &four == three {
            t = -t;
        }
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { t } else { 0 })
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: &BigInt) -> Result<i32> {
    if p.is_even() || p <= &BigInt::one() {
        return Err(Error::NotOddPrime(p.to_string()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    jacobi(a, p)
}

/// Hilbert symbol `(a, b)_v` for nonzero rationals.
pub fn hilbert(a: &BigRational, b: &BigRational, v: &Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Precondition("hilbert symbol of zero".into()));
    }
    // a and a * denom^2 share the same square class
    let a = a.numer() * a.denom();
    let b = b.numer() * b.denom();
    match v {
        Place::Infinite => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Finite(p) => {
            if !is_prime(p) {
                return Err(Error::NotPrime(p.to_string()));
            }
            Ok(hilbert_int(&a, &b, p))
        }
    }
}

fn hilbert_int(a: &BigInt, b: &BigInt, p: &BigInt) -> i32 {
    let alpha = valuation(a, p);
    let beta = valuation(b, p);
    let u = a / p.pow(alpha);
    let v = b / p.pow(beta);
    if p == &BigInt::from(2) {
        let eps = |x: &BigInt| -> u32 {
            if x.mod_floor(&BigInt::from(4)) == BigInt::from(3) {
                1
            } else {
                0
            }
        };
        let omega = |x: &BigInt| -> u32 {
            let r = x.mod_floor(&BigInt::from(8));
            if r == BigInt::from(3) || r == BigInt::from(5) {
                1
            } else {
                0
            }
        };
        let e = eps(&u) * eps(&v) + alpha * omega(&v) + beta * omega(&u);
        if e.is_multiple_of(2) {
            1
        } else {
            -1
        }
    } else {
        let mut s = 1;
        let half: BigInt = (p - 1) / 2;
        if (alpha * beta) % 2 == 1 && half.is_odd() {
            s = -s;
        }
        if beta % 2 == 1 {
            s *= jacobi(&u, p).unwrap();
        }
        if alpha % 2 == 1 {
            s *= jacobi(&v, p).unwrap();
        }
        s
    }
}

/// Hasse invariant `prod_{i<j} (a_i, a_j)_v` of a diagonal form.
pub fn hasse(diag: &[BigRational], v: &Place) -> Result<i32> {
    let mut s = 1;
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            s *= hilbert(&diag[i], &diag[j], v)?;
        }
    }
    Ok(s)
}

/// Places where `(a, b)_v` can be nontrivial: 2, infinity and the primes
/// dividing numerators and denominators.
pub fn relevant_places(a: &BigRational, b: &BigRational) -> Vec<Place> {
    let mut primes = vec![BigInt::from(2)];
    for n in [a.numer(), a.denom(), b.numer(), b.denom()] {
        primes.extend(crate::arith::prime_divisors(&n.abs()));
    }
    primes.sort();
    primes.dedup();
    let mut out: Vec<Place> = primes.into_iter().map(Place::Finite).collect();
    out.push(Place::Infinite);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(&5.into(), &11.into()).unwrap(), 1);
        assert_eq!(legendre(&5.into(), &41.into()).unwrap(), 1);
        assert_eq!(legendre(&2.into(), &3.into()).unwrap(), -1);
        assert_eq!(legendre(&22.into(), &11.into()).unwrap(), 0);
        assert!(matches!(legendre(&3.into(), &2.into()), Err(Error::NotOddPrime(_))));
        assert!(matches!(legendre(&3.into(), &9.into()), Err(Error::NotPrime(_))));
    }

    #[test]
    fn hilbert_table() {
        assert_eq!(hilbert(&q(-1), &q(-1), &Place::Infinite).unwrap(), -1);
        assert_eq!(hilbert(&q(-1), &q(-1), &Place::Finite(2.into())).unwrap(), -1);
        assert_eq!(hilbert(&q(2), &q(3), &Place::Finite(3.into())).unwrap(), -1);
        assert_eq!(hilbert(&q(2), &q(5), &Place::Finite(2.into())).unwrap(), -1);
        let mut prod = 1;
        for v in relevant_places(&q(3), &q(5)) {
            prod *= hilbert(&q(3), &q(5), &v).unwrap();
        }
        assert_eq!(prod, 1);
    }

    #[test]
    fn hasse_of_diagonal() {
        let d = [q(-1), q(-1), q(1)];
        assert_eq!(hasse(&d, &Place::Infinite).unwrap(), -1);
        assert_eq!(hasse(&d, &Place::Finite(3.into())).unwrap(), 1);
    }
}

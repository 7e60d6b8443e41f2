//! Elementary integer arithmetic: gcds, primality, modular powers and roots,
//! trial factorization and exact square roots.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Extended gcd: returns `(g, x, y)` with `x*a + y*b = g >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Floor division with a positive or negative divisor.
pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Least non-negative residue of `a` modulo `m > 0`.
pub fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality of an arbitrary integer. Exact below 2^64; above that a
/// Miller-Rabin test with the first twelve prime bases.
pub fn is_prime(n: &BigInt) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_negative() {
        return false;
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r.min(p - r))
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (g, x, _) = ext_gcd(&a.mod_floor(m), m);
    if g.is_one() {
        Some(x.mod_floor(m))
    } else {
        None
    }
}

/// Square root of a unit `w` modulo `p^e` for an odd prime `p`, by Hensel
/// lifting the root modulo `p`.
pub fn sqrt_mod_prime_power(w: &BigInt, p: &BigInt, e: u32) -> Option<BigInt> {
    let pu = p.to_u64()?;
    let w0 = w.mod_floor(p).to_u64()?;
    if w0 == 0 {
        return None;
    }
    let mut r = BigInt::from(sqrt_mod(w0, pu)?);
    let mut m = p.clone();
    for _ in 1..e {
        m *= p;
        let inv = inv_mod(&(BigInt::from(2) * &r), &m)?;
        r = (&r - (&r * &r - w) * inv).mod_floor(&m);
    }
    Some(r.mod_floor(&p.pow(e)))
}

/// Exact square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Smallest integer `m >= 0` with `m*m >= n`.
pub fn ceil_sqrt(n: &BigInt) -> BigInt {
    if !n.is_positive() {
        return BigInt::zero();
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        r
    } else {
        r + 1
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let mut v = 0;
    let mut m = n.clone();
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

/// Partial factorization by trial division up to `bound`.
///
/// Returns the prime factors found (with multiplicity) and the remaining
/// cofactor, which is 1, a prime, or a composite with no factor below `bound`.
pub fn trial_factor(n: &BigInt, bound: u64) -> (Vec<(BigInt, u32)>, BigInt) {
    let mut m = n.abs();
    let mut out = Vec::new();
    if m.is_zero() {
        return (out, m);
    }
    let mut d = 2u64;
    while d <= bound {
        let bd = BigInt::from(d);
        if &bd * &bd > m {
            break;
        }
        let mut e = 0;
        while (&m % &bd).is_zero() {
            m /= &bd;
            e += 1;
        }
        if e > 0 {
            out.push((bd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > BigInt::one() && (is_prime(&m) || BigInt::from(bound).pow(2) >= m) {
        out.push((m, 1));
        m = BigInt::one();
    }
    (out, m)
}

/// Distinct prime divisors of `n`, requiring complete factorization by
/// trial division.
pub fn prime_divisors(n: &BigInt) -> Vec<BigInt> {
    let (f, rest) = trial_factor(n, 10_000_000);
    let mut ps: Vec<BigInt> = f.into_iter().map(|(p, _)| p).collect();
    if rest > BigInt::one() {
        ps.push(rest);
    }
    ps.sort();
    ps.dedup();
    ps
}

pub fn sign_of(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

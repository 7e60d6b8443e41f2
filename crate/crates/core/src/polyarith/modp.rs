//! Polynomials over a prime field `F_p` with word-sized `p`.
//!
//! Coefficients are ascending and trimmed. Used for factoring over `Z`
//! (distinct- and equal-degree factorization) and for root finding modulo
//! a prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::IntPolynomial;
use crate::arith::{mul_mod, pow_mod};

pub type Fp = Vec<u64>;

pub fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn reduce(f: &IntPolynomial, p: u64) -> Fp {
    let pb = BigInt::from(p);
    trim(f.coeffs().iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
}

pub fn degree(a: &Fp) -> usize {
    a.len().saturating_sub(1)
}

pub fn inv(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "inverse of zero mod p");
    pow_mod(a, p - 2, p)
}

pub fn add(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub fn sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub fn mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

pub fn scale(a: &Fp, c: u64, p: u64) -> Fp {
    trim(a.iter().map(|&x| mul_mod(x, c, p)).collect())
}

pub fn monic(a: &Fp, p: u64) -> Fp {
    match a.last() {
        None => Vec::new(),
        Some(&l) => scale(a, inv(l, p), p),
    }
}

pub fn div_rem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    assert!(!b.is_empty(), "division by zero polynomial");
    if a.len() < b.len() {
        return (Vec::new(), a.clone());
    }
    let db = b.len() - 1;
    let li = inv(*b.last().unwrap(), p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = mul_mod(r[k + db], li, p);
        if c == 0 {
            continue;
        }
        q[k] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] = (r[k + j] + p - mul_mod(c, bj, p)) % p;
        }
    }
    (trim(q), trim(r))
}

pub fn rem(a: &Fp, b: &Fp, p: u64) -> Fp {
    div_rem(a, b, p).1
}

pub fn gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(&a, p)
}

/// Extended gcd: `(g, s, t)` with `s a + t b = g` monic.
pub fn ext_gcd(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = div_rem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    let l = inv(*r0.last().expect("gcd of zeros"), p);
    (scale(&r0, l, p), scale(&s0, l, p), scale(&t0, l, p))
}

pub fn derivative(a: &Fp, p: u64) -> Fp {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect(),
    )
}

/// `base^e mod m` for a big exponent.
pub fn pow_mod_poly(base: &Fp, e: &BigInt, m: &Fp, p: u64) -> Fp {
    let mut acc = vec![1u64];
    let b = rem(base, m, p);
    for i in (0..e.bits()).rev() {
        acc = rem(&mul(&acc, &acc, p), m, p);
        if e.bit(i) {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
    }
    acc
}

pub fn eval(a: &Fp, x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
}

pub fn is_squarefree(a: &Fp, p: u64) -> bool {
    degree(&gcd(a, &derivative(a, p), p)) == 0
}

/// Distinct-degree factorization of a monic squarefree polynomial:
/// returns `(g_d, d)` where `g_d` is the product of all irreducible factors
/// of degree `d`.
pub fn distinct_degree(f: &Fp, p: u64) -> Vec<(Fp, usize)> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let pb = BigInt::from(p);
    let mut d = 0;
    while degree(&f) >= 2 * (d + 1) {
        d += 1;
        h = pow_mod_poly(&h, &pb, &f, p);
        let g = gcd(&f, &sub(&h, &x, p), p);
        if degree(&g) > 0 {
            out.push((g.clone(), d));
            f = div_rem(&f, &g, p).0;
            h = rem(&h, &f, p);
        }
    }
    if degree(&f) > 0 {
        out.push((f.clone(), degree(&f)));
    }
    out
}

/// Cantor-Zassenhaus equal-degree splitting for odd `p`, with a
/// deterministic sequence of trial polynomials.
pub fn equal_degree(f: &Fp, d: usize, p: u64) -> Vec<Fp> {
    let n = degree(f);
    if n == d {
        return vec![monic(f, p)];
    }
    assert!(p % 2 == 1, "equal-degree splitting needs odd p");
    let e = (BigInt::from(p).pow(d as u32) - 1u32) / 2u32;
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    loop {
        // trial polynomial of degree < n from a fixed xorshift stream
        let mut t = Vec::with_capacity(n);
        for _ in 0..n {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            t.push(seed % p);
        }
        let t = trim(t);
        if degree(&t) == 0 {
            continue;
        }
        let h = sub(&pow_mod_poly(&t, &e, f, p), &vec![1], p);
        let g = gcd(f, &h, p);
        if degree(&g) > 0 && degree(&g) < n {
            let mut out = equal_degree(&g, d, p);
            out.extend(equal_degree(&div_rem(f, &g, p).0, d, p));
            return out;
        }
    }
}

/// Complete factorization of a squarefree polynomial into monic irreducibles,
/// sorted by degree then coefficients.
pub fn factor_squarefree(f: &Fp, p: u64) -> Vec<Fp> {
    let f = monic(f, p);
    let mut out = Vec::new();
    for (g, d) in distinct_degree(&f, p) {
        out.extend(equal_degree(&g, d, p));
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Distinct roots in `F_p` of a nonzero polynomial, ascending.
pub fn roots(f: &Fp, p: u64) -> Vec<u64> {
    let f = monic(f, p);
    if degree(&f) == 0 {
        return Vec::new();
    }
    let x: Fp = vec![0, 1];
    let xp = pow_mod_poly(&x, &BigInt::from(p), &f, p);
    let g = gcd(&f, &sub(&xp, &x, p), p);
    if degree(&g) == 0 {
        return Vec::new();
    }
    let mut r: Vec<u64> = if p == 2 {
        (0..2).filter(|&a| eval(&g, a, p) == 0).collect()
    } else {
        equal_degree(&g, 1, p).into_iter().map(|l| (p - l[0]) % p).collect()
    };
    r.sort_unstable();
    r
}

/// Multiplicity of `a` as a root of `f` modulo `p`.
pub fn root_multiplicity(f: &Fp, a: u64, p: u64) -> usize {
    let lin: Fp = vec![(p - a % p) % p, 1];
    let mut f = f.clone();
    let mut m = 0;
    while !f.is_empty() {
        let (q, r) = div_rem(&f, &lin, p);
        if !r.is_empty() {
            break;
        }
        f = q;
        m += 1;
    }
    m
}
